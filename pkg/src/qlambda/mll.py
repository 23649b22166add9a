"""Formulas and sequents of multiplicative linear logic, and the type translation.

Formulas are kept in negation normal form: negation only on atoms.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Union

from .syntax import Arrow, Bit, Type

ALPHA = "α"


@dataclass(frozen=True)
class Atom:
    name: str = ALPHA


@dataclass(frozen=True)
class NegAtom:
    name: str = ALPHA


@dataclass(frozen=True)
class MTensor:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Par:
    left: "Formula"
    right: "Formula"


Formula = Union[Atom, NegAtom, MTensor, Par]


def negate(f: Formula) -> Formula:
    if isinstance(f, Atom):
        return NegAtom(f.name)
    if isinstance(f, NegAtom):
        return Atom(f.name)
    if isinstance(f, MTensor):
        return Par(negate(f.left), negate(f.right))
    return MTensor(negate(f.left), negate(f.right))


def translate_type(t: Type, atom: str = ALPHA) -> Formula:
    if isinstance(t, Bit):
        return Atom(atom)
    if isinstance(t, Arrow):
        return Par(negate(translate_type(t.dom, atom)), translate_type(t.cod, atom))
    return MTensor(translate_type(t.left, atom), translate_type(t.right, atom))


def atom_counts(f: Formula) -> tuple[int, int]:
    """``(positive, negative)`` atom occurrences."""
    if isinstance(f, Atom):
        return 1, 0
    if isinstance(f, NegAtom):
        return 0, 1
    lp, ln = atom_counts(f.left)
    rp, rn = atom_counts(f.right)
    return lp + rp, ln + rn


def corresponding_sequent(env, type: Type, n_bits: int) -> list[Formula]:
    """``⊢ α⊥ (n times), ⌊B1⌋⊥, ..., ⌊Bm⌋⊥, ⌊A⌋`` for ``x1:B1, ..., xm:Bm ⊢ M : A``."""
    seq: list[Formula] = [NegAtom(ALPHA)] * n_bits
    seq.extend(negate(translate_type(t)) for _, t in env)
    seq.append(translate_type(type))
    return seq


def sequent_of(pi) -> list[Formula]:
    """The sequent for the conclusion of a derivation, counting its bit axioms."""
    from .syntax import bit_labels

    return corresponding_sequent(pi.env, pi.type, len(bit_labels(pi.subject)))


def pretty_formula(f: Formula, top: bool = True) -> str:
    if isinstance(f, Atom):
        return f.name
    if isinstance(f, NegAtom):
        return f"{f.name}⊥"
    op = "⊗" if isinstance(f, MTensor) else "⅋"
    s = pretty_formula(f.left, False) + op + pretty_formula(f.right, False)
    return s if top else f"({s})"


def pretty_sequent(seq) -> str:
    return "⊢ " + ", ".join(pretty_formula(f) for f in seq)

"""Occurrences of the base type inside derivations.

An occurrence is located by the path of its node in the derivation tree, the
slot of the judgement it belongs to (an environment index, or ``None`` for
the conclusion type) and the path from the root of that type down to a ``B``
leaf.  Type paths are tuples over :data:`AL`, :data:`AR`, :data:`TL`,
:data:`TR` (arrow left/right, tensor left/right).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .quantum import basis
from .syntax import Arrow, Bit, Tensor, Type
from .typecheck import A_Q0, A_Q1, Derivation

AL, AR, TL, TR = "AL", "AR", "TL", "TR"
CONCL = None


@dataclass(frozen=True, order=False)
class Occurrence:
    node: tuple[int, ...]
    slot: int | None
    typepath: tuple[str, ...]

    @property
    def in_env(self) -> bool:
        return self.slot is not None

    @property
    def positive(self) -> bool:
        """Polarity within the judgement (environment entries flip)."""
        neg = self.typepath.count(AL) % 2 == 1
        return neg == self.in_env

    @property
    def polarity(self) -> str:
        return "+" if self.positive else "-"

    def to_json(self) -> dict:
        return {
            "node": list(self.node),
            "slot": "concl" if self.slot is None else self.slot,
            "path": list(self.typepath),
        }

    def __str__(self):
        slot = "⊢" if self.slot is None else f"env{self.slot}"
        node = ".".join(map(str, self.node)) or "root"
        path = ",".join(self.typepath) or "·"
        return f"{node}/{slot}/{path}"


def subtype_at(t: Type, typepath) -> Type:
    for step in typepath:
        if step == AL:
            t = t.dom
        elif step == AR:
            t = t.cod
        elif step == TL:
            t = t.left
        else:
            t = t.right
    return t


def poccs(t: Type) -> list[tuple[str, ...]]:
    """Contexts of the positive occurrences of ``B`` in ``t``, in order."""
    if isinstance(t, Bit):
        return [()]
    if isinstance(t, Tensor):
        return [(TL,) + c for c in poccs(t.left)] + [(TR,) + c for c in poccs(t.right)]
    return [(AL,) + c for c in noccs(t.dom)] + [(AR,) + c for c in poccs(t.cod)]


def noccs(t: Type) -> list[tuple[str, ...]]:
    """Contexts of the negative occurrences of ``B`` in ``t``, in order."""
    if isinstance(t, Bit):
        return []
    if isinstance(t, Tensor):
        return [(TL,) + c for c in noccs(t.left)] + [(TR,) + c for c in noccs(t.right)]
    return [(AL,) + c for c in poccs(t.dom)] + [(AR,) + c for c in noccs(t.cod)]


def leaves(t: Type) -> list[tuple[str, ...]]:
    """All ``B`` leaves of ``t``, left to right."""
    if isinstance(t, Bit):
        return [()]
    if isinstance(t, Tensor):
        return [(TL,) + c for c in leaves(t.left)] + [(TR,) + c for c in leaves(t.right)]
    return [(AL,) + c for c in leaves(t.dom)] + [(AR,) + c for c in leaves(t.cod)]


def type_positive(typepath) -> bool:
    return typepath.count(AL) % 2 == 0


def all_occurrences(pi: Derivation) -> list[Occurrence]:
    out = []
    for path, d in pi.walk():
        for i, (_, t) in enumerate(d.env):
            out.extend(Occurrence(path, i, c) for c in leaves(t))
        out.extend(Occurrence(path, CONCL, c) for c in leaves(d.type))
    return out


def _bit_leaves(pi: Derivation):
    found = [(d.subject.label, d.subject.value, path) for path, d in pi.walk() if d.rule in (A_Q0, A_Q1)]
    found.sort()
    return found


def bit_occurrences(pi: Derivation) -> list[Occurrence]:
    """Occurrences introduced by bit axioms, ordered by bit label."""
    return [Occurrence(path, CONCL, ()) for _, _, path in _bit_leaves(pi)]


def bit_values(pi: Derivation) -> np.ndarray:
    return basis([v for _, v, _ in _bit_leaves(pi)])


def conclusion_poccs(pi: Derivation) -> list[Occurrence]:
    return [Occurrence((), CONCL, c) for c in poccs(pi.type)]


def conclusion_noccs(pi: Derivation) -> list[Occurrence]:
    return [Occurrence((), CONCL, c) for c in noccs(pi.type)]

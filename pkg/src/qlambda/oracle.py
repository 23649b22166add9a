"""Superposed terms and directed normalisation under the equational theory.

Only the oriented axioms (beta, beta on pairs, gate application to bit
constants) plus closure under term contexts and sums are implemented.  That
is enough to compute the normal form of a closed term of type ``B^k``, which
is what the machine is checked against.
"""
from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from . import syntax as S
from .errors import QLambdaError, TypeCheckError
from .quantum import DEFAULT_GATES
from .syntax import App, BitConst, Gate, Lambda, Pair, Term, TensorPair, Var
from .typecheck import infer

ZERO_TOL = 1e-12


class NotARedex(QLambdaError):
    pass


@dataclass(frozen=True)
class WeightedTerm:
    amplitude: complex
    term: Term


@dataclass(frozen=True, eq=False)
class SuperposedTerm:
    members: tuple[WeightedTerm, ...]
    env: tuple = ()
    type: S.Type | None = None

    @classmethod
    def of(cls, m: Term, env=(), type=None, amplitude=1.0) -> "SuperposedTerm":
        return cls((WeightedTerm(complex(amplitude), m),), tuple(env), type)

    def canonical(self) -> "SuperposedTerm":
        return canonicalize(self)

    def __iter__(self):
        return iter(self.members)

    def __len__(self):
        return len(self.members)

    def pretty(self) -> str:
        if not self.members:
            return "0"
        return " + ".join(f"({_fmt(w.amplitude)}) {S.pretty(w.term)}" for w in self.members)

    def to_json(self) -> list[dict]:
        return [{"re": w.amplitude.real, "im": w.amplitude.imag, "term": S.pretty(w.term)}
                for w in self.members]

    @classmethod
    def from_json(cls, rows, env=(), type=None) -> "SuperposedTerm":
        return cls(tuple(WeightedTerm(complex(r["re"], r["im"]), S.parse_term(r["term"])) for r in rows),
                   tuple(env), type)

    def close_to(self, other: "SuperposedTerm", tol: float = 1e-9) -> bool:
        a = {S.canonical_key(w.term): w.amplitude for w in canonicalize(self)}
        b = {S.canonical_key(w.term): w.amplitude for w in canonicalize(other)}
        return all(abs(a.get(k, 0) - b.get(k, 0)) <= tol for k in set(a) | set(b))


def _fmt(z: complex) -> str:
    if abs(z.imag) < ZERO_TOL:
        return f"{z.real:.6g}"
    return f"{z.real:.6g}{z.imag:+.6g}j"


def canonicalize(t: SuperposedTerm) -> SuperposedTerm:
    """Merge alpha-equivalent members, drop zero amplitudes, sort."""
    acc: dict[str, list] = {}
    for w in t.members:
        key = S.canonical_key(w.term)
        if key in acc:
            acc[key][0] += w.amplitude
        else:
            acc[key] = [w.amplitude, w.term]
    members = tuple(WeightedTerm(complex(a), m) for k, (a, m) in sorted(acc.items()) if abs(a) >= ZERO_TOL)
    return SuperposedTerm(members, t.env, t.type)


def uniformly_typed(t: SuperposedTerm, gates=None) -> bool:
    try:
        types = {infer(t.env, w.term, gates).type for w in t.members}
    except TypeCheckError:
        return False
    return len(types) <= 1 and (t.type is None or types <= {t.type})


# -- axioms ----------------------------------------------------------------

def quant_step(u: str, arg: Term, gates=None) -> list[tuple[complex, Term]]:
    """``U |b1...bk>`` as the column of the gate matrix at ``b1...bk``.

    Result tuples reuse the labels of the argument, position by position.
    """
    gates = DEFAULT_GATES if gates is None else gates
    k = gates.arity(u)
    items = S.tuple_items(arg, k)
    if items is None or not all(isinstance(b, BitConst) for b in items):
        raise NotARedex(f"{u} expects a {k}-tuple of bit constants, got {S.pretty(arg)}")
    labels = [b.label for b in items]
    index = int("".join(str(b.value) for b in items), 2)
    column = gates.matrix(u)[:, index]
    out = []
    for row, amp in enumerate(column):
        if abs(amp) < ZERO_TOL:
            continue
        digits = format(row, f"0{k}b")
        out.append((complex(amp), S.tuple_term([BitConst(int(d), l) for d, l in zip(digits, labels)])))
    return out


def is_quant_redex(m: Term, gates) -> bool:
    if not (isinstance(m, App) and isinstance(m.fun, Gate) and m.fun.name in gates):
        return False
    items = S.tuple_items(m.arg, gates.arity(m.fun.name))
    return items is not None and all(isinstance(b, BitConst) for b in items)


def is_beta_redex(m: Term) -> bool:
    if not (isinstance(m, App) and isinstance(m.fun, Lambda)):
        return False
    return isinstance(m.fun.pat, Var) or isinstance(m.arg, TensorPair)


def beta_step(m: Term) -> Term:
    if not (isinstance(m, App) and isinstance(m.fun, Lambda)):
        raise NotARedex(f"not a beta redex: {S.pretty(m)}")
    lam = m.fun
    if isinstance(lam.pat, Var):
        return S.substitute(lam.body, [lam.pat.name], [m.arg])
    if not isinstance(m.arg, TensorPair):
        raise NotARedex(f"pair abstraction applied to a non-pair: {S.pretty(m)}")
    return S.substitute(lam.body, [lam.pat.first, lam.pat.second], [m.arg.left, m.arg.right])


# -- strategy --------------------------------------------------------------

def _children(m: Term):
    if isinstance(m, (TensorPair,)):
        return [m.left, m.right]
    if isinstance(m, App):
        return [m.fun, m.arg]
    if isinstance(m, Lambda):
        return [m.body]
    return []


def _rebuild(m: Term, i: int, child: Term) -> Term:
    if isinstance(m, TensorPair):
        return TensorPair(child, m.right) if i == 0 else TensorPair(m.left, child)
    if isinstance(m, App):
        return App(child, m.arg) if i == 0 else App(m.fun, child)
    return Lambda(m.pat, child)


def reduce_once(m: Term, gates=None, rightmost: bool = False) -> list[tuple[complex, Term]] | None:
    """Contract the leftmost-innermost redex of ``m`` (rightmost if asked).

    Returns the resulting weighted terms, or None if ``m`` is normal.
    """
    gates = DEFAULT_GATES if gates is None else gates
    kids = list(enumerate(_children(m)))
    if rightmost:
        kids.reverse()
    for i, child in kids:
        res = reduce_once(child, gates, rightmost)
        if res is not None:
            return [(a, _rebuild(m, i, c)) for a, c in res]
    if is_beta_redex(m):
        return [(1.0, beta_step(m))]
    if is_quant_redex(m, gates):
        return quant_step(m.fun.name, m.arg, gates)
    return None


def is_normal(m: Term, gates=None) -> bool:
    return reduce_once(m, gates) is None


def normalize(t: SuperposedTerm | Term, gates=None, rightmost: bool = False,
              max_rounds: int = 100_000) -> SuperposedTerm:
    if not isinstance(t, SuperposedTerm):
        t = SuperposedTerm.of(t)
    t = canonicalize(t)
    for _ in range(max_rounds):
        changed = False
        out = []
        for w in t.members:
            res = reduce_once(w.term, gates, rightmost)
            if res is None:
                out.append(w)
            else:
                changed = True
                out.extend(WeightedTerm(w.amplitude * a, m) for a, m in res)
        t = canonicalize(SuperposedTerm(tuple(out), t.env, t.type))
        if not changed:
            return t
    raise QLambdaError("normalisation did not terminate")


def vector_of(t: SuperposedTerm, k: int | None = None) -> np.ndarray:
    """Amplitude vector of a normal superposition of bit tuples."""
    if k is None:
        if t.type is not None and S.ground_arity(t.type) is not None:
            k = S.ground_arity(t.type)
        elif t.members:
            k = _tuple_width(t.members[0].term)
        else:
            raise QLambdaError("cannot tell the arity of an empty superposition")
    vec = np.zeros(1 << k, dtype=complex)
    for w in t.members:
        items = S.tuple_items(w.term, k)
        if items is None or not all(isinstance(b, BitConst) for b in items):
            raise QLambdaError(f"not a {k}-tuple of bits: {S.pretty(w.term)}")
        vec[int("".join(str(b.value) for b in items), 2)] += w.amplitude
    return vec


def _tuple_width(m: Term) -> int:
    n = 1
    while isinstance(m, TensorPair):
        n += 1
        m = m.right
    return n


def oracle_vector(m: Term, gates=None) -> np.ndarray:
    """Normal form of ``1·m`` as a vector, for closed ``m`` of type ``B^k``."""
    pi = infer((), m, gates)
    k = S.ground_arity(pi.type)
    if k is None:
        raise QLambdaError(f"type {S.pretty_type(pi.type)} is not B^k")
    return vector_of(normalize(SuperposedTerm.of(m, (), pi.type), gates), k)


def soundness_deviation(pi, gates=None) -> float:
    """Max amplitude difference between the machine and the oracle."""
    from .machine import TokenMachine

    if not pi.closed or S.ground_arity(pi.type) is None:
        raise QLambdaError("soundness check needs a closed derivation of type B^k")
    machine = TokenMachine(pi, gates).computed_function(np.ones(1, dtype=complex))
    oracle = vector_of(normalize(SuperposedTerm.of(pi.subject, (), pi.type), gates), S.ground_arity(pi.type))
    return float(np.max(np.abs(machine - oracle)))


def check_soundness(pi, gates=None, tol: float = 1e-9) -> bool:
    return soundness_deviation(pi, gates) <= tol


def dumps(t: SuperposedTerm) -> str:
    return json.dumps(t.to_json())

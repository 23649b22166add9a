"""Linear type checking into derivation trees.

Binders carry no type annotations, so :func:`infer` runs unification over
type variables and instantiates any variable left open with ``B``.  The
environment of every inner node lists its variables in order of first free
occurrence in the node's subject; the root keeps the order it was given.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field

from . import syntax as S
from .errors import LinearityError, TypeCheckError
from .quantum import DEFAULT_GATES
from .syntax import BIT, Arrow, Bit, Tensor, Type

A_V = "a_v"
A_Q0 = "a_q0"
A_Q1 = "a_q1"
A_U = "a_U"
I_LOLLI1 = "I_lolli1"
I_LOLLI2 = "I_lolli2"
E_LOLLI = "E_lolli"
I_TENSOR = "I_tensor"

RULE_SYMBOLS = {
    A_V: "a_v", A_Q0: "a_q0", A_Q1: "a_q1", A_U: "a_U",
    I_LOLLI1: "I⊸1", I_LOLLI2: "I⊸2", E_LOLLI: "E⊸", I_TENSOR: "I⊗",
}

Env = tuple  # tuple of (name, Type)


@dataclass(frozen=True)
class Derivation:
    rule: str
    env: Env
    subject: S.Term
    type: Type
    premises: tuple["Derivation", ...] = field(default=())

    def env_index(self, name: str) -> int:
        for i, (n, _) in enumerate(self.env):
            if n == name:
                return i
        raise KeyError(name)

    def node(self, path) -> "Derivation":
        d = self
        for i in path:
            d = d.premises[i]
        return d

    def walk(self, path=()):
        """Yield ``(path, node)`` in pre-order."""
        yield path, self
        for i, p in enumerate(self.premises):
            yield from p.walk(path + (i,))

    @property
    def closed(self) -> bool:
        return not self.env

    def judgement(self) -> str:
        env = ", ".join(f"{n}:{S.pretty_type(t)}" for n, t in self.env)
        return f"{env} ⊢ {S.pretty(self.subject)} : {S.pretty_type(self.type)}".lstrip()

    def to_json(self) -> dict:
        return {
            "rule": self.rule,
            "env": [[n, S.pretty_type(t, ascii=True)] for n, t in self.env],
            "subject": S.pretty(self.subject),
            "type": S.pretty_type(self.type, ascii=True),
            "premises": [p.to_json() for p in self.premises],
        }

    def size(self) -> int:
        return 1 + sum(p.size() for p in self.premises)


# -- unification -----------------------------------------------------------

@dataclass(frozen=True)
class TVar:
    id: int


class _Unifier:
    def __init__(self):
        self.subst: dict[int, object] = {}
        self.counter = itertools.count()

    def fresh(self) -> TVar:
        return TVar(next(self.counter))

    def find(self, t):
        while isinstance(t, TVar) and t.id in self.subst:
            t = self.subst[t.id]
        return t

    def occurs(self, v: TVar, t) -> bool:
        t = self.find(t)
        if isinstance(t, TVar):
            return t == v
        if isinstance(t, Arrow):
            return self.occurs(v, t.dom) or self.occurs(v, t.cod)
        if isinstance(t, Tensor):
            return self.occurs(v, t.left) or self.occurs(v, t.right)
        return False

    def unify(self, a, b) -> bool:
        a, b = self.find(a), self.find(b)
        if a == b:
            return True
        if isinstance(a, TVar) or isinstance(b, TVar):
            if not isinstance(a, TVar):
                a, b = b, a
            if self.occurs(a, b):
                return False
            self.subst[a.id] = b
            return True
        if isinstance(a, Arrow) and isinstance(b, Arrow):
            return self.unify(a.dom, b.dom) and self.unify(a.cod, b.cod)
        if isinstance(a, Tensor) and isinstance(b, Tensor):
            return self.unify(a.left, b.left) and self.unify(a.right, b.right)
        return False

    def resolve(self, t, default=BIT):
        t = self.find(t)
        if isinstance(t, TVar):
            return default
        if isinstance(t, Arrow):
            return Arrow(self.resolve(t.dom), self.resolve(t.cod))
        if isinstance(t, Tensor):
            return Tensor(self.resolve(t.left), self.resolve(t.right))
        return t

    def show(self, t) -> str:
        t = self.find(t)
        if isinstance(t, TVar):
            return f"?{t.id}"
        if isinstance(t, Bit):
            return "𝔹"
        if isinstance(t, Arrow):
            return f"({self.show(t.dom)} ⊸ {self.show(t.cod)})"
        return f"({self.show(t.left)}⊗{self.show(t.right)})"


def _check_linearity(env_names, m: S.Term) -> None:
    top = S.free_occurrences(m)
    for name, count in top.items():
        if name not in env_names:
            raise TypeCheckError(f"unbound variable {name!r}")
    for name in env_names:
        if top[name] != 1:
            raise LinearityError(f"variable {name!r} used {top[name]} times, expected exactly once")
    for t in S.subterms(m):
        if isinstance(t, S.Lambda):
            occ = S.free_occurrences(t.body)
            for name in S.pattern_names(t.pat):
                if occ[name] != 1:
                    raise LinearityError(
                        f"variable {name!r} used {occ[name]} times in {S.pretty(t)}, expected exactly once")


def infer(env, m: S.Term, gates=None) -> Derivation:
    """Return the derivation of ``env ⊢ m : A``.

    ``env`` is a sequence of ``(name, type)`` pairs.  Raises
    :class:`TypeCheckError` (or its subclass :class:`LinearityError`) when
    no derivation exists.
    """
    gates = DEFAULT_GATES if gates is None else gates
    env = tuple((n, t) for n, t in env)
    names = [n for n, _ in env]
    if len(set(names)) != len(names):
        raise TypeCheckError("environment binds a variable twice")
    S.check_labels(m)
    _check_linearity(names, m)
    uni = _Unifier()

    # first pass: annotate every subterm (by identity of position) with a type
    def go(m, scope):
        if isinstance(m, S.Var):
            return ("var", m, scope[m.name])
        if isinstance(m, S.BitConst):
            return ("bit", m, BIT)
        if isinstance(m, S.Gate):
            if m.name not in gates:
                raise TypeCheckError(f"unknown gate {m.name!r}")
            t = S.bits(gates[m.name].arity)
            return ("gate", m, Arrow(t, t))
        if isinstance(m, S.TensorPair):
            l, r = go(m.left, scope), go(m.right, scope)
            return ("tensor", m, Tensor(l[2], r[2]), l, r)
        if isinstance(m, S.App):
            f, a = go(m.fun, scope), go(m.arg, scope)
            res = uni.fresh()
            fun_t = uni.find(f[2])
            if isinstance(m.fun, S.Lambda) and isinstance(m.fun.pat, S.Pair):
                arg_t = uni.find(a[2])
                if not isinstance(arg_t, (Tensor, TVar)):
                    raise TypeCheckError(
                        f"pair-pattern abstraction applied to argument of non-tensor type "
                        f"{uni.show(arg_t)} in {S.pretty(m)}")
            if not uni.unify(f[2], Arrow(a[2], res)):
                raise TypeCheckError(
                    f"type mismatch at application {S.pretty(m)}: function has type "
                    f"{uni.show(fun_t)}, argument has type {uni.show(a[2])}")
            return ("app", m, res, f, a)
        scope = dict(scope)
        if isinstance(m.pat, S.Var):
            dom = uni.fresh()
            scope[m.pat.name] = dom
        else:
            tx, ty = uni.fresh(), uni.fresh()
            scope[m.pat.first], scope[m.pat.second] = tx, ty
            dom = Tensor(tx, ty)
        b = go(m.body, scope)
        return ("lam", m, Arrow(dom, b[2]), b, scope)

    ann = go(m, dict(env))

    def build(a, node_env) -> Derivation:
        kind, term, ty = a[0], a[1], uni.resolve(a[2])
        if kind == "var":
            return Derivation(A_V, ((term.name, ty),), term, ty)
        if kind == "bit":
            return Derivation(A_Q0 if term.value == 0 else A_Q1, (), term, ty)
        if kind == "gate":
            return Derivation(A_U, (), term, ty)
        if kind in ("tensor", "app"):
            l, r = a[3], a[4]
            prem = (build(l, _env_for(l[1], node_env)), build(r, _env_for(r[1], node_env)))
            return Derivation(I_TENSOR if kind == "tensor" else E_LOLLI, node_env, term, ty, prem)
        body, scope = a[3], a[4]
        inner = dict(node_env)
        for n in S.pattern_names(term.pat):
            inner[n] = uni.resolve(scope[n])
        body_env = _env_for(term.body, inner)
        rule = I_LOLLI1 if isinstance(term.pat, S.Var) else I_LOLLI2
        return Derivation(rule, node_env, term, ty, (build(body, body_env),))

    return build(ann, env)


def _env_for(m: S.Term, types) -> Env:
    types = dict(types)
    return tuple((n, types[n]) for n in S.free_vars(m))


def infer_closed(m: S.Term, gates=None) -> Derivation:
    return infer((), m, gates)


def check_derivation(pi: Derivation, gates=None) -> None:
    """Assert that every node instantiates a typing rule correctly."""
    gates = DEFAULT_GATES if gates is None else gates
    for path, d in pi.walk():
        where = f"node {path} ({d.rule})"
        envd = dict(d.env)
        if len(envd) != len(d.env):
            raise TypeCheckError(f"{where}: duplicate environment entry")
        if d.rule == A_V:
            ok = isinstance(d.subject, S.Var) and d.env == ((d.subject.name, d.type),)
        elif d.rule in (A_Q0, A_Q1):
            ok = (isinstance(d.subject, S.BitConst) and d.env == () and d.type == BIT
                  and d.subject.value == (0 if d.rule == A_Q0 else 1))
        elif d.rule == A_U:
            ok = isinstance(d.subject, S.Gate) and d.env == () and d.subject.name in gates
            if ok:
                t = S.bits(gates[d.subject.name].arity)
                ok = d.type == Arrow(t, t)
        elif d.rule in (I_LOLLI1, I_LOLLI2):
            (b,) = d.premises
            names = S.pattern_names(d.subject.pat)
            benv = dict(b.env)
            ok = (isinstance(d.subject, S.Lambda) and b.subject == d.subject.body
                  and isinstance(d.type, Arrow) and d.type.cod == b.type
                  and all(n in benv for n in names)
                  and {k: v for k, v in benv.items() if k not in names} == envd
                  and len(b.env) == len(d.env) + len(names))
            if ok:
                dom = benv[names[0]] if len(names) == 1 else Tensor(benv[names[0]], benv[names[1]])
                ok = d.type.dom == dom
        else:
            l, r = d.premises
            lenv, renv = dict(l.env), dict(r.env)
            ok = not (set(lenv) & set(renv)) and {**lenv, **renv} == envd
            if d.rule == E_LOLLI:
                ok = ok and d.subject == S.App(l.subject, r.subject) and l.type == Arrow(r.type, d.type)
            else:
                ok = ok and d.subject == S.TensorPair(l.subject, r.subject) and d.type == Tensor(l.type, r.type)
        if not ok:
            raise TypeCheckError(f"{where}: ill-formed rule instance for {d.judgement()}")


def subst_derivation(pi: Derivation, xs, rhos) -> Derivation:
    """Graft ``rhos[i]`` at the axiom for ``xs[i]`` (the substitution lemma).

    Yields a derivation of ``Γ, Δ1, ..., Δn ⊢ M{N1..Nn/x1..xn} : B``.  Bound
    variables of ``pi`` that would capture a free variable of some ``Ni`` are
    renamed exactly as :func:`syntax.substitute` renames them.
    """
    xs, rhos = list(xs), list(rhos)
    if len(xs) != len(rhos):
        raise TypeCheckError("variable and derivation lists differ in length")
    envd = dict(pi.env)
    for x, rho in zip(xs, rhos):
        if x not in envd:
            raise TypeCheckError(f"{x!r} is not in the environment of the derivation")
        if envd[x] != rho.type:
            raise TypeCheckError(
                f"{x!r} has type {S.pretty_type(envd[x])} but the derivation for it has type "
                f"{S.pretty_type(rho.type)}")
    seen = [n for n, _ in pi.env if n not in xs]
    for rho in rhos:
        for n, _ in rho.env:
            if n in seen:
                raise TypeCheckError(f"environments are not disjoint: {n!r}")
            seen.append(n)
    new_subject = S.substitute(pi.subject, xs, [r.subject for r in rhos])
    graft = dict(zip(xs, rhos))

    def go(d: Derivation, sub: S.Term, bound: frozenset) -> Derivation:
        # bound: names of pi bound by an abstraction above d
        if d.rule == A_V:
            name = d.subject.name
            if name in graft and name not in bound:
                rho = graft[name]
                # inner nodes list their environment in free-occurrence order
                return Derivation(rho.rule, _env_for(rho.subject, rho.env), rho.subject, rho.type, rho.premises)
            return Derivation(A_V, ((sub.name, d.type),), sub, d.type)
        if not d.premises:
            return d
        if d.rule in (I_LOLLI1, I_LOLLI2):
            inner = bound | set(S.pattern_names(d.subject.pat))
            prem = (go(d.premises[0], sub.body, inner),)
        elif d.rule == E_LOLLI:
            prem = (go(d.premises[0], sub.fun, bound), go(d.premises[1], sub.arg, bound))
        else:
            prem = (go(d.premises[0], sub.left, bound), go(d.premises[1], sub.right, bound))
        types = {}
        for p in prem:
            types.update(dict(p.env))
        return Derivation(d.rule, tuple((n, types[n]) for n in S.free_vars(sub)), sub, d.type, prem)

    out = go(pi, new_subject, frozenset())
    root_env = [(n, t) for n, t in pi.env if n not in xs]
    for rho in rhos:
        root_env.extend(rho.env)
    return Derivation(out.rule, tuple(root_env), out.subject, out.type, out.premises)


def derivation_from_json(data: dict) -> Derivation:
    return Derivation(
        data["rule"],
        tuple((n, S.parse_type(t)) for n, t in data["env"]),
        S.parse_term(data["subject"]),
        S.parse_type(data["type"]),
        tuple(derivation_from_json(p) for p in data["premises"]),
    )

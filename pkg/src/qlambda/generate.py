"""Random well-typed terms for property tests and cross-validation.

Terms are built circuit-style: a list of wires (terms of type ``B``) is
threaded through gate applications, and multi-qubit results are taken apart
again with pair abstractions.  Gates and functions are applied in several
syntactic styles (direct, through a beta redex, passed as an argument) so the
machine sees every typing rule, including higher-order ones.
"""
from __future__ import annotations

import random

from .quantum import DEFAULT_GATES
from .syntax import (App, BitConst, Gate, Lambda, Pair, Term, Var, gates_used,
                     tuple_term)

CORPUS_GATES = ("H", "X", "Z", "CNOT", "CZ", "SWAP")


class TermGenerator:
    def __init__(self, seed=None, gates=CORPUS_GATES, library=None):
        self.rng = random.Random(seed)
        self.library = DEFAULT_GATES if library is None else library
        self.gates = list(gates)
        self._names = 0

    def fresh(self, stem: str) -> str:
        self._names += 1
        return f"{stem}{self._names}"

    # -- building blocks ---------------------------------------------------

    def _unary_value(self, budget: list) -> Term:
        """A closed term of type B -o B."""
        rng = self.rng
        unary = [g for g in self.gates if self.library.arity(g) == 1]
        r = rng.random()
        if not unary or budget[0] <= 0 or r < 0.2:
            z = self.fresh("z")
            return Lambda(Var(z), Var(z))
        budget[0] -= 1
        g = Gate(rng.choice(unary))
        if r < 0.55:
            return g
        z = self.fresh("z")
        if r < 0.85 or budget[0] <= 0:
            return Lambda(Var(z), App(g, Var(z)))
        budget[0] -= 1
        return Lambda(Var(z), App(Gate(rng.choice(unary)), App(g, Var(z))))

    def _binary_value(self, curried: bool, budget: list) -> Term:
        """A closed term of type B*B -o B*B, or B -o B -o B*B when curried."""
        rng = self.rng
        binary = [g for g in self.gates if self.library.arity(g) == 2]
        a, b = self.fresh("a"), self.fresh("b")
        use_gate = binary and budget[0] > 0 and rng.random() < 0.7
        if use_gate:
            budget[0] -= 1
            g = Gate(rng.choice(binary))
            body = App(g, _pair(Var(a), Var(b)))
        else:
            body = _pair(Var(b), Var(a)) if rng.random() < 0.5 else _pair(Var(a), Var(b))
        if curried:
            return Lambda(Var(a), Lambda(Var(b), body))
        if use_gate and rng.random() < 0.5:
            return g
        if rng.random() < 0.3:
            p = self.fresh("p")
            return Lambda(Var(p), App(Lambda(Pair(a, b), body), Var(p)))
        return Lambda(Pair(a, b), body)

    def _apply_unary(self, g: Term, w: Term) -> Term:
        r = self.rng.random()
        if r < 0.6:
            return App(g, w)
        if r < 0.8:
            z = self.fresh("z")
            return App(Lambda(Var(z), App(g, Var(z))), w)
        f = self.fresh("f")
        return App(Lambda(Var(f), App(Var(f), w)), g)

    def _apply_multi(self, g: Term, arg: Term) -> Term:
        r = self.rng.random()
        if r < 0.7:
            return App(g, arg)
        if r < 0.85:
            f = self.fresh("f")
            return App(Lambda(Var(f), App(Var(f), arg)), g)
        p = self.fresh("p")
        return App(Lambda(Var(p), App(g, Var(p))), arg)

    def _bind(self, names: list[str], scrutinee: Term, body: Term) -> Term:
        """``(\\<n1, r>. (\\<n2, ...>. body) r) scrutinee`` for a right-nested tuple."""
        if len(names) == 1:
            return App(Lambda(Var(names[0]), body), scrutinee)
        if len(names) == 2:
            return App(Lambda(Pair(names[0], names[1]), body), scrutinee)
        r = self.fresh("r")
        return App(Lambda(Pair(names[0], r), self._bind(names[1:], Var(r), body)), scrutinee)

    def _circuit(self, wires: list[Term], budget: list, pending: list) -> Term:
        rng = self.rng
        wires = list(wires)
        while True:
            usable = [g for g in self.gates if self.library.arity(g) <= len(wires)]
            if budget[0] > 0 and usable and rng.random() < 0.85:
                g = rng.choice(usable)
                k = self.library.arity(g)
                budget[0] -= 1
                if k == 1:
                    i = rng.randrange(len(wires))
                    wires[i] = self._apply_unary(Gate(g), wires[i])
                    continue
                pos = rng.sample(range(len(wires)), k)
                app = self._apply_multi(Gate(g), tuple_term([wires[p] for p in pos]))
                names = [self.fresh("x") for _ in pos]
                for p, n in zip(pos, names):
                    wires[p] = Var(n)
                return self._bind(names, app, self._circuit(wires, budget, pending))
            if pending:
                name, kind = pending.pop()
                if kind == "unary":
                    i = rng.randrange(len(wires))
                    wires[i] = App(Var(name), wires[i])
                    continue
                i, j = rng.sample(range(len(wires)), 2)
                if kind == "curried":
                    app = App(App(Var(name), wires[i]), wires[j])
                else:
                    app = App(Var(name), _pair(wires[i], wires[j]))
                names = [self.fresh("x"), self.fresh("x")]
                wires[i], wires[j] = Var(names[0]), Var(names[1])
                return self._bind(names, app, self._circuit(wires, budget, pending))
            return self._output(wires)

    def _output(self, wires: list[Term]) -> Term:
        rng = self.rng
        if rng.random() < 0.3:
            wires = list(wires)
            rng.shuffle(wires)
        out = tuple_term(wires)
        if rng.random() < 0.1:
            z = self.fresh("z")
            out = App(Lambda(Var(z), Var(z)), out)
        return out

    def _function_vars(self, n_wires: int, max_count: int = 2) -> list[tuple[str, str]]:
        rng = self.rng
        out = []
        for _ in range(rng.randint(0, max_count)):
            kinds = ["unary"] + (["curried", "pair"] if n_wires >= 2 else [])
            out.append((self.fresh("f"), rng.choice(kinds)))
        return out

    def _close_functions(self, body: Term, fvars, budget: list) -> Term:
        for name, kind in fvars:
            if kind == "unary":
                value = self._unary_value(budget)
            else:
                value = self._binary_value(kind == "curried", budget)
            body = App(Lambda(Var(name), body), value)
        return body

    # -- public generators -------------------------------------------------

    def ground(self, max_qubits: int = 6, max_gates: int = 8, higher_order: float = 0.3) -> Term:
        """A closed term of type ``B^k`` with ``k <= max_qubits`` and at most ``max_gates`` gates."""
        self._names = 0
        rng = self.rng
        k = rng.randint(1, max_qubits)
        labels = rng.sample(range(1, 2 * k + 1), k)
        wires = [BitConst(rng.randint(0, 1), l) for l in labels]
        budget = [rng.randint(0, max_gates)]
        fvars = self._function_vars(k) if rng.random() < higher_order else []
        body = self._circuit(wires, budget, list(fvars))
        term = self._close_functions(body, fvars, budget)
        assert len(gates_used(term)) <= max_gates
        return term

    def unitary(self, k: int, max_gates: int = 8, higher_order: float = 0.3) -> Term:
        """A closed bit-free term of type ``B^k -o B^k``."""
        self._names = 0
        rng = self.rng
        names = [self.fresh("x") for _ in range(k)]
        budget = [rng.randint(0, max_gates)]
        fvars = self._function_vars(k) if rng.random() < higher_order else []
        body = self._circuit([Var(n) for n in names], budget, list(fvars))
        body = self._close_functions(body, fvars, budget)
        if k == 1:
            return Lambda(Var(names[0]), body)
        if k == 2:
            return Lambda(Pair(names[0], names[1]), body)
        r = self.fresh("r")
        return Lambda(Pair(names[0], r), self._bind(names[1:], Var(r), body))

    def higher_order(self, max_qubits: int = 5, max_gates: int = 8) -> Term:
        """A closed term whose type may have arrows anywhere.

        Some wires are abstracted inputs, some are bits, and some function
        variables are left abstracted, so the machine has to route tokens
        through the negative part of the conclusion.
        """
        self._names = 0
        rng = self.rng
        k = rng.randint(1, max_qubits)
        n_inputs = rng.randint(0, k)
        inputs = [self.fresh("x") for _ in range(n_inputs)]
        labels = rng.sample(range(1, 2 * k + 1), k - n_inputs)
        wires: list[Term] = [Var(n) for n in inputs] + [BitConst(rng.randint(0, 1), l) for l in labels]
        rng.shuffle(wires)
        budget = [rng.randint(0, max_gates)]
        fvars = self._function_vars(k, 3)
        bound_later = [f for f in fvars if rng.random() < 0.6]
        applied = [f for f in fvars if f not in bound_later]
        body = self._circuit(wires, budget, list(fvars))
        body = self._close_functions(body, applied, budget)
        binders: list = [Var(f) for f, _ in bound_later]
        rest = list(inputs)
        rng.shuffle(rest)
        while rest:
            if len(rest) >= 2 and rng.random() < 0.4:
                binders.append(Pair(rest.pop(), rest.pop()))
            else:
                binders.append(Var(rest.pop()))
        rng.shuffle(binders)
        for pat in reversed(binders):
            body = Lambda(pat, body)
        return body

    def corpus(self, n: int, kind: str = "ground", **kw) -> list[Term]:
        make = {"ground": self.ground, "higher_order": self.higher_order}[kind]
        return [make(**kw) for _ in range(n)]


def _pair(a: Term, b: Term) -> Term:
    return tuple_term([a, b])

"""The wave-style token machine interpreting a type derivation.

Tokens sit on occurrences of ``B``.  A token on a negative occurrence travels
up the derivation towards the axioms, a token on a positive occurrence travels
down towards the root.  Every move is an instance of the transition rules
attached to one typing rule; gate axioms synchronise their argument tokens and
act on the quantum register.

Token indices in moves, traces and circuits are 1-based, like qubit indices.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Callable, Iterable

import numpy as np

from . import occurrences as O
from .errors import BudgetExceededError, DeadlockError, MachineError, MachineInputError
from .occurrences import AL, AR, CONCL, TL, TR, Occurrence
from .quantum import (DEFAULT_GATES, apply_lifted, invert_permutation, num_qubits, permute,
                      register_to_json, tensor)
from .syntax import Arrow, pattern_names
from .typecheck import (A_U, A_V, E_LOLLI, I_LOLLI1, I_LOLLI2, I_TENSOR, Derivation)

NORM_STEP_TOL = 1e-12


@dataclass(frozen=True)
class Move:
    rule: str
    node: tuple[int, ...]
    tokens: tuple[int, ...]
    sources: tuple[Occurrence, ...]
    targets: tuple[Occurrence, ...]
    gate: str | None = None

    @property
    def key(self) -> int:
        return min(self.tokens)


@dataclass(frozen=True, eq=False)
class MachineState:
    tokens: tuple[Occurrence, ...]
    register: np.ndarray | None

    def same_tokens(self, other: "MachineState") -> bool:
        return self.tokens == other.tokens

    def __eq__(self, other):
        if not isinstance(other, MachineState) or self.tokens != other.tokens:
            return False
        if self.register is None or other.register is None:
            return self.register is other.register
        return np.array_equal(self.register, other.register)

    def __hash__(self):
        return hash(self.tokens)


@dataclass
class FinalInfo:
    sigma: list[int]              # token i sits on poccs position sigma[i-1]
    raw_register: np.ndarray | None   # register in token order
    register: np.ndarray | None       # register in canonical poccs order
    steps: int
    moves: list[Move] = field(default_factory=list, repr=False)


def _edges_for(path, d: Derivation):
    """Yield ``(source, target)`` pairs contributed by the rule at ``d``."""
    occ = Occurrence

    def env_edges(child_path, child: Derivation, skip=()):
        for name, t in child.env:
            if name in skip:
                continue
            i, j = d.env_index(name), child.env_index(name)
            for c in O.leaves(t):
                if O.type_positive(c):
                    yield occ(path, i, c), occ(child_path, j, c)
                else:
                    yield occ(child_path, j, c), occ(path, i, c)

    if d.rule == A_V:
        for c in O.leaves(d.type):
            if O.type_positive(c):
                yield occ(path, 0, c), occ(path, CONCL, c)
            else:
                yield occ(path, CONCL, c), occ(path, 0, c)
    elif d.rule in (I_LOLLI1, I_LOLLI2):
        (body,) = d.premises
        bpath = path + (0,)
        names = pattern_names(d.subject.pat)
        prefixes = [(AL,)] if len(names) == 1 else [(AL, TL), (AL, TR)]
        for name, prefix in zip(names, prefixes):
            j = body.env_index(name)
            for c in O.leaves(dict(body.env)[name]):
                if O.type_positive(c):
                    yield occ(path, CONCL, prefix + c), occ(bpath, j, c)
                else:
                    yield occ(bpath, j, c), occ(path, CONCL, prefix + c)
        for c in O.leaves(body.type):
            if O.type_positive(c):
                yield occ(bpath, CONCL, c), occ(path, CONCL, (AR,) + c)
            else:
                yield occ(path, CONCL, (AR,) + c), occ(bpath, CONCL, c)
        yield from env_edges(bpath, body, skip=names)
    elif d.rule == E_LOLLI:
        fun, arg = d.premises
        fpath, apath = path + (0,), path + (1,)
        for c in O.leaves(arg.type):
            if O.type_positive(c):
                yield occ(apath, CONCL, c), occ(fpath, CONCL, (AL,) + c)
            else:
                yield occ(fpath, CONCL, (AL,) + c), occ(apath, CONCL, c)
        for c in O.leaves(d.type):
            if O.type_positive(c):
                yield occ(fpath, CONCL, (AR,) + c), occ(path, CONCL, c)
            else:
                yield occ(path, CONCL, c), occ(fpath, CONCL, (AR,) + c)
        yield from env_edges(fpath, fun)
        yield from env_edges(apath, arg)
    elif d.rule == I_TENSOR:
        for k, (child, step) in enumerate(zip(d.premises, (TL, TR))):
            cpath = path + (k,)
            for c in O.leaves(child.type):
                if O.type_positive(c):
                    yield occ(cpath, CONCL, c), occ(path, CONCL, (step,) + c)
                else:
                    yield occ(path, CONCL, (step,) + c), occ(cpath, CONCL, c)
            yield from env_edges(cpath, child)


class TokenMachine:
    """Transition structure of the machine for one derivation."""

    def __init__(self, pi: Derivation, gates=None):
        self.pi = pi
        self.gates = DEFAULT_GATES if gates is None else gates
        self.edges: dict[Occurrence, tuple[Occurrence, str, tuple]] = {}
        self.gate_args: dict[Occurrence, tuple[tuple, int]] = {}
        self.gate_nodes: dict[tuple, tuple[str, list[Occurrence], list[Occurrence]]] = {}
        for path, d in pi.walk():
            for src, dst in _edges_for(path, d):
                if src in self.edges:
                    raise MachineError(f"two transitions leave {src}")
                self.edges[src] = (dst, d.rule, path)
            if d.rule == A_U:
                dom = d.type.dom
                ins = [Occurrence(path, CONCL, (AL,) + c) for c in O.leaves(dom)]
                outs = [Occurrence(path, CONCL, (AR,) + c) for c in O.leaves(dom)]
                self.gate_nodes[path] = (d.subject.name, ins, outs)
                for k, o in enumerate(ins):
                    self.gate_args[o] = (path, k)
        self.occurrences = O.all_occurrences(pi)
        self.output = O.conclusion_poccs(pi)
        self.inputs = O.conclusion_noccs(pi)
        self._output_index = {o: i for i, o in enumerate(self.output)}

    @property
    def input_arity(self) -> int:
        return len(self.inputs)

    @property
    def output_arity(self) -> int:
        return len(self.output)

    def initial_state(self, q: np.ndarray | None = None) -> MachineState:
        if not self.pi.closed:
            raise MachineInputError("the machine runs closed derivations only")
        tokens = tuple(self.inputs) + tuple(O.bit_occurrences(self.pi))
        if q is None and self.input_arity == 0:
            q = np.ones(1, dtype=complex)
        if q is None:
            register = None
        else:
            q = np.asarray(q, dtype=complex)
            if num_qubits(q) != self.input_arity:
                raise MachineInputError(
                    f"input register has {num_qubits(q)} qubits, derivation expects {self.input_arity}")
            register = tensor(q, O.bit_values(self.pi))
        return MachineState(tokens, register)

    def symbolic_initial_state(self) -> MachineState:
        if not self.pi.closed:
            raise MachineInputError("the machine runs closed derivations only")
        return MachineState(tuple(self.inputs) + tuple(O.bit_occurrences(self.pi)), None)

    def budget(self, n_tokens: int) -> int:
        return n_tokens * len(self.occurrences)

    def enabled_moves(self, s: MachineState) -> list[Move]:
        where = {o: i for i, o in enumerate(s.tokens, start=1)}
        moves, seen_gates = [], set()
        for i, o in enumerate(s.tokens, start=1):
            if o in self.edges:
                dst, rule, node = self.edges[o]
                moves.append(Move(rule, node, (i,), (o,), (dst,)))
            elif o in self.gate_args:
                node, _ = self.gate_args[o]
                if node in seen_gates:
                    continue
                name, ins, outs = self.gate_nodes[node]
                if all(a in where for a in ins):
                    seen_gates.add(node)
                    moves.append(Move(A_U, node, tuple(where[a] for a in ins), tuple(ins), tuple(outs), name))
        moves.sort(key=lambda m: m.key)
        return moves

    def apply(self, s: MachineState, move: Move) -> MachineState:
        tokens = list(s.tokens)
        for i, src, dst in zip(move.tokens, move.sources, move.targets):
            if tokens[i - 1] != src:
                raise MachineError(f"token {i} is not on {src}")
            tokens[i - 1] = dst
        register = s.register
        if move.gate is not None and register is not None:
            register = apply_lifted(self.gates.matrix(move.gate), move.tokens, register)
        return MachineState(tuple(tokens), register)

    def is_final(self, s: MachineState) -> bool:
        return len(s.tokens) == len(self.output) and set(s.tokens) == set(self.output)

    def final_permutation(self, s: MachineState) -> list[int]:
        return [self._output_index[o] + 1 for o in s.tokens]

    def step(self, s: MachineState, scheduler: Callable | None = None) -> tuple[MachineState, Move]:
        moves = self.enabled_moves(s)
        if not moves:
            if self.is_final(s):
                raise MachineError("no move enabled: the state is final")
            raise DeadlockError(f"no move enabled in non-final state {[str(o) for o in s.tokens]}")
        move = (scheduler or lowest_index)(moves)
        return self.apply(s, move), move

    def run(self, s: MachineState, scheduler: Callable | None = None,
            on_step: Callable | None = None, check_norm: bool = True) -> FinalInfo:
        """Step until no move is enabled, then check the halt state is final."""
        budget = self.budget(len(s.tokens))
        moves = []
        while True:
            enabled = self.enabled_moves(s)
            if not enabled:
                break
            if len(moves) >= budget:
                raise BudgetExceededError(f"run exceeded {budget} steps")
            move = (scheduler or lowest_index)(enabled)
            prev = s
            s = self.apply(s, move)
            if check_norm and s.register is not None and move.gate is not None:
                drift = abs(np.linalg.norm(s.register) - np.linalg.norm(prev.register))
                if drift > NORM_STEP_TOL:
                    raise MachineError(f"register norm drifted by {drift:.3g} on {move.gate}")
            moves.append(move)
            if on_step is not None:
                on_step(len(moves), move, prev, s)
        if not self.is_final(s):
            raise DeadlockError(
                f"halted in a non-final state {[str(o) for o in s.tokens]} after {len(moves)} steps")
        sigma = self.final_permutation(s)
        canonical = None if s.register is None else permute(invert_permutation(sigma), s.register)
        return FinalInfo(sigma, s.register, canonical, len(moves), moves)

    def computed_function(self, q: np.ndarray) -> np.ndarray:
        return self.run(self.initial_state(q)).register

    def matrix(self) -> np.ndarray:
        """Matrix of the computed function, one column per basis input."""
        n = self.input_arity
        cols = []
        for k in range(1 << n):
            q = np.zeros(1 << n, dtype=complex)
            q[k] = 1
            cols.append(self.computed_function(q))
        return np.column_stack(cols)


def lowest_index(moves: list[Move]) -> Move:
    return min(moves, key=lambda m: m.key)


def highest_index(moves: list[Move]) -> Move:
    return max(moves, key=lambda m: m.key)


SCHEDULERS = {"lowest": lowest_index, "highest": highest_index}


# -- functional interface ----------------------------------------------------

def _machine(pi, gates):
    return pi if isinstance(pi, TokenMachine) else TokenMachine(pi, gates)


def initial_state(pi, q=None, gates=None) -> MachineState:
    return _machine(pi, gates).initial_state(q)


def enabled_moves(pi, s: MachineState, gates=None) -> list[Move]:
    return _machine(pi, gates).enabled_moves(s)


def step(pi, s: MachineState, gates=None, scheduler=None) -> MachineState:
    return _machine(pi, gates).step(s, scheduler)[0]


def run_to_final(pi, s: MachineState, gates=None, scheduler=None) -> FinalInfo:
    return _machine(pi, gates).run(s, scheduler)


def computed_function(pi, q, gates=None) -> np.ndarray:
    return _machine(pi, gates).computed_function(q)


def extract_circuit(pi, gates=None) -> list[tuple[str, list[int]]]:
    """Gate firings of a register-free run, as ``(gate, token indices)``."""
    m = _machine(pi, gates)
    info = m.run(m.symbolic_initial_state())
    return [(mv.gate, list(mv.tokens)) for mv in info.moves if mv.gate is not None]


def canonical_circuit(pi, gates=None) -> tuple[list[dict], list[int]]:
    """Circuit with wires numbered by output position, plus the input wiring.

    Returns ``(gates, wiring)`` where ``wiring[i-1]`` is the output wire that
    carries the i-th qubit of the initial register (input qubits followed by
    the bits of the derivation, in label order).
    """
    m = _machine(pi, gates)
    info = m.run(m.symbolic_initial_state())
    sigma = info.sigma
    out = [{"gate": mv.gate, "targets": [sigma[t - 1] for t in mv.tokens]}
           for mv in info.moves if mv.gate is not None]
    return out, sigma


def replay_circuit(circuit, register: np.ndarray, gates=None) -> np.ndarray:
    """Apply ``[(gate, targets), ...]`` (or the JSON form) to ``register``."""
    gates = DEFAULT_GATES if gates is None else gates
    for entry in circuit:
        name, targets = (entry["gate"], entry["targets"]) if isinstance(entry, dict) else entry
        register = apply_lifted(gates.matrix(name), targets, register)
    return register


def wire_register(sigma, register: np.ndarray) -> np.ndarray:
    """Reorder a token-ordered register onto output wires."""
    return permute(invert_permutation(sigma), register)


def trace_record(n: int, move: Move, after: MachineState) -> dict:
    rec = {
        "step": n,
        "rule": move.rule,
        "token_indices": list(move.tokens),
        "from_occurrences": [o.to_json() for o in move.sources],
        "to_occurrences": [o.to_json() for o in move.targets],
    }
    if move.gate is not None:
        rec["gate"] = move.gate
    rec["register"] = None if after.register is None else register_to_json(after.register)
    return rec


def trace_lines(pi, q=None, gates=None, scheduler=None) -> Iterable[str]:
    """Run the machine and return one JSON line per step."""
    m = _machine(pi, gates)
    lines = []

    def on_step(n, move, prev, s):
        lines.append(json.dumps(trace_record(n, move, s)))

    m.run(m.initial_state(q), scheduler, on_step)
    return lines

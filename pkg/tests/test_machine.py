import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qlambda import occurrences as O
from qlambda import syntax as S
from qlambda.errors import MachineInputError
from qlambda.generate import TermGenerator
from qlambda.machine import (TokenMachine, canonical_circuit, computed_function,
                             enabled_moves, extract_circuit, highest_index, initial_state,
                             lowest_index, replay_circuit, run_to_final, step, trace_lines,
                             wire_register)
from qlambda.oracle import oracle_vector
from qlambda.quantum import DEFAULT_GATES, apply_lifted, basis
from qlambda.typecheck import infer

R2 = 1 / math.sqrt(2)


def test_initial_state_epr(pi_epr):
    s = initial_state(pi_epr, basis("01"))
    assert s.tokens == tuple(O.conclusion_noccs(pi_epr))
    assert np.array_equal(s.register, basis("01"))


def test_initial_state_appends_bits(epr_app):
    pi = infer((), epr_app)
    s = initial_state(pi)
    assert len(s.tokens) == 2
    assert np.array_equal(s.register, basis("01"))


def test_initial_state_rejects_wrong_register(pi_epr):
    with pytest.raises(MachineInputError):
        initial_state(pi_epr, basis("0"))


def test_initial_state_rejects_open_derivation():
    pi = infer(S.parse_env("x:B"), S.parse_term("H x"))
    with pytest.raises(MachineInputError):
        initial_state(pi)


def test_enabled_moves_at_start(pi_epr):
    moves = enabled_moves(pi_epr, initial_state(pi_epr, basis("00")))
    assert [m.tokens for m in moves] == [(1,), (2,)]
    assert all(m.gate is None for m in moves)


def test_non_gate_steps_keep_register(pi_epr):
    m = TokenMachine(pi_epr)
    s = m.initial_state(basis("10"))
    while m.enabled_moves(s):
        t, mv = m.step(s)
        if mv.gate is None:
            assert t.register is s.register
        s = t


def test_step_function(pi_epr):
    s = initial_state(pi_epr, basis("00"))
    t = step(pi_epr, s)
    assert t.tokens[1] == s.tokens[1] and t.tokens[0] != s.tokens[0]


@pytest.mark.parametrize("bits,expected", [
    ("00", [R2, 0, 0, R2]), ("01", [0, R2, R2, 0]), ("10", [R2, 0, 0, -R2]), ("11", [0, R2, -R2, 0]),
])
def test_epr_runs(pi_epr, bits, expected):
    info = run_to_final(pi_epr, initial_state(pi_epr, basis(bits)))
    assert info.sigma == [1, 2]
    assert np.allclose(info.register, expected, atol=1e-12)


def test_epr_matrix(pi_epr):
    u = TokenMachine(pi_epr).matrix()
    h = DEFAULT_GATES.matrix("H")
    assert np.allclose(u, DEFAULT_GATES.matrix("CNOT") @ np.kron(h, np.eye(2)))


def test_computed_function_is_linear(pi_epr):
    q = np.array([0.5, 0.5j, -0.5, 0.5])
    expected = sum(q[k] * computed_function(pi_epr, basis(format(k, "02b"))) for k in range(4))
    assert np.allclose(computed_function(pi_epr, q), expected)


def test_extract_circuit_epr(pi_epr):
    assert extract_circuit(pi_epr) == [("H", [1]), ("CNOT", [1, 2])]


THREE_CYCLE = r"(\<a, r>. (\<b, c>. b * (c * a)) r) (|1>_1 * (|0>_2 * |0>_3))"


def test_three_cycle_output_order():
    pi = infer((), S.parse_term(THREE_CYCLE))
    info = run_to_final(pi, initial_state(pi))
    assert sorted(info.sigma) == [1, 2, 3] and info.sigma != [1, 2, 3]
    assert np.array_equal(info.register, basis("001"))
    assert np.array_equal(info.raw_register, basis("100"))


def test_three_cycle_with_gates_matches_oracle():
    m = S.parse_term(r"(\<a, r>. (\<b, c>. c * (H a * b)) r) (|0>_1 * (X |0>_2 * |1>_3))")
    pi = infer((), m)
    assert np.allclose(computed_function(pi, np.ones(1)), oracle_vector(m), atol=1e-12)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10_000))
def test_canonical_circuit_replays_to_result(seed):
    m = TermGenerator(seed).ground(max_qubits=4)
    pi = infer((), m)
    tm = TokenMachine(pi)
    circuit, wiring = canonical_circuit(tm)
    start = tm.initial_state().register
    assert np.allclose(replay_circuit(circuit, wire_register(wiring, start)), tm.run(tm.initial_state()).register,
                       atol=1e-12)
    # raw form: token indices on the token-ordered register
    raw = replay_circuit(extract_circuit(tm), start)
    assert np.allclose(wire_register(wiring, raw), tm.run(tm.initial_state()).register, atol=1e-12)


def _small_corpus(n, seed):
    gen = TermGenerator(seed)
    out = []
    for i in range(n):
        m = gen.higher_order(max_qubits=3, max_gates=3) if i % 2 else gen.ground(max_qubits=3, max_gates=3)
        out.append(infer((), m))
    return out


def _reachable_states(tm, s, limit=5000):
    """All states reachable from ``s``, or None if there are more than ``limit``."""
    seen, todo, out = {s.tokens}, [s], []
    while todo:
        if len(seen) > limit:
            return None
        s = todo.pop()
        out.append(s)
        for mv in tm.enabled_moves(s):
            t = tm.apply(s, mv)
            if t.tokens not in seen:
                seen.add(t.tokens)
                todo.append(t)
    return out


def test_one_step_confluence_exhaustive():
    rng = np.random.default_rng(0)
    pairs = checked = 0
    for pi in _small_corpus(60, 11):
        tm = TokenMachine(pi)
        q = rng.normal(size=1 << tm.input_arity) + 0j
        q /= np.linalg.norm(q)
        states = _reachable_states(tm, tm.initial_state(q))
        if states is None:
            continue
        checked += 1
        for s in states:
            moves = tm.enabled_moves(s)
            for i, a in enumerate(moves):
                for b in moves[i + 1:]:
                    sa, sb = tm.apply(s, a), tm.apply(s, b)
                    assert b in tm.enabled_moves(sa) and a in tm.enabled_moves(sb)
                    u, v = tm.apply(sa, b), tm.apply(sb, a)
                    assert u.tokens == v.tokens
                    assert np.allclose(u.register, v.register, atol=1e-12)
                    pairs += 1
    assert checked >= 40 and pairs > 1000


def test_reachable_states_have_consistent_registers():
    # every path to a token configuration yields the same register
    pi = infer((), S.parse_term(r"(\<x, y>. CNOT (H x * H y)) (|0> * |1>)"))
    tm = TokenMachine(pi)
    regs = {}
    todo = [tm.initial_state()]
    while todo:
        s = todo.pop()
        if s.tokens in regs:
            assert np.allclose(regs[s.tokens], s.register, atol=1e-12)
            continue
        regs[s.tokens] = s.register
        todo.extend(tm.apply(s, mv) for mv in tm.enabled_moves(s))


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 10_000))
def test_run_length_bound_and_no_repeats(seed):
    pi = infer((), TermGenerator(seed).higher_order())
    tm = TokenMachine(pi)
    s = tm.symbolic_initial_state()
    seen = {s.tokens}

    def on_step(n, mv, prev, t):
        assert t.tokens not in seen
        seen.add(t.tokens)

    info = tm.run(s, on_step=on_step)
    assert info.steps <= tm.budget(len(s.tokens))
    assert tm.is_final(type(s)(tuple(tm.output[i - 1] for i in info.sigma), None))


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10_000))
def test_uniformity(seed):
    # the move sequence does not depend on the register contents
    pi = infer((), TermGenerator(seed).unitary(1 + seed % 3))
    tm = TokenMachine(pi)
    n = tm.input_arity
    runs = [tm.run(tm.initial_state(basis(format(k, f"0{n}b")))) for k in range(1 << n)]
    runs.append(tm.run(tm.symbolic_initial_state()))
    assert all(r.moves == runs[0].moves for r in runs)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10_000))
def test_schedulers_agree(seed):
    pi = infer((), TermGenerator(seed).higher_order(max_qubits=4))
    tm = TokenMachine(pi)
    q = np.full(1 << tm.input_arity, 1 / math.sqrt(1 << tm.input_arity), dtype=complex)
    a = tm.run(tm.initial_state(q), lowest_index)
    b = tm.run(tm.initial_state(q), highest_index)
    assert a.sigma == b.sigma
    assert np.allclose(a.register, b.register, atol=1e-12)


def test_trace_lines(pi_epr):
    lines = [json.loads(l) for l in trace_lines(pi_epr, basis("00"))]
    assert [l["step"] for l in lines] == list(range(1, len(lines) + 1))
    gate_steps = [l for l in lines if "gate" in l]
    assert [(l["gate"], l["token_indices"]) for l in gate_steps] == [("H", [1]), ("CNOT", [1, 2])]
    assert np.allclose([complex(*a) for a in lines[-1]["register"]], [R2, 0, 0, R2])
    assert set(lines[0]) >= {"rule", "from_occurrences", "to_occurrences", "register"}


def test_gate_from_config_runs():
    from qlambda.quantum import gates_from_json
    lib = gates_from_json({"V": {"arity": 1, "matrix": [[[0, 0], [1, 0]], [[0, 1], [0, 0]]]}})
    pi = infer((), S.parse_term("V |0>"), lib)
    assert np.allclose(computed_function(pi, np.ones(1), lib), apply_lifted(lib.matrix("V"), [1], basis("0")))

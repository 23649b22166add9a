import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qlambda import syntax as S
from qlambda.generate import TermGenerator
from qlambda.oracle import (NotARedex, SuperposedTerm, WeightedTerm, beta_step, canonicalize,
                            is_normal, normalize, oracle_vector, quant_step, reduce_once,
                            soundness_deviation, uniformly_typed, vector_of)
from qlambda.typecheck import infer

R2 = 1 / math.sqrt(2)


def test_quant_step_hadamard():
    out = quant_step("H", S.parse_term("|1>_4"))
    assert [(pytest.approx(a), t) for a, t in out] == [
        (pytest.approx(R2), S.BitConst(0, 4)), (pytest.approx(-R2), S.BitConst(1, 4))]


def test_quant_step_cnot_reuses_labels():
    (amp, t), = quant_step("CNOT", S.parse_term("|1>_7 * |0>_3"))
    assert amp == 1 and t == S.parse_term("|1>_7 * |1>_3")


def test_quant_step_needs_constants():
    with pytest.raises(NotARedex):
        quant_step("H", S.Var("x"))


def test_beta_step():
    assert beta_step(S.parse_term(r"(\x. H x) |0>_1")) == S.parse_term("H |0>_1")
    assert beta_step(S.parse_term(r"(\<a, b>. b * a) (|0>_1 * |1>_2)")) == S.parse_term("|1>_2 * |0>_1")
    with pytest.raises(NotARedex):
        beta_step(S.parse_term(r"(\<a, b>. b * a) y"))


def test_reduce_once_leftmost_innermost():
    m = S.parse_term(r"(\x. x) (H |0>_1) * X |0>_2")
    ((_, out1), (_, out2)) = reduce_once(m)
    assert out1 == S.parse_term(r"(\x. x) |0>_1 * X |0>_2")


def test_normalize_epr(epr_app):
    nf = normalize(epr_app)
    assert all(is_normal(w.term) for w in nf)
    assert np.allclose(vector_of(nf, 2), [0, R2, R2, 0])


def test_normalize_under_lambda():
    nf = normalize(S.parse_term(r"\x. (\y. y) x"))
    assert len(nf) == 1 and S.alpha_eq(nf.members[0].term, S.parse_term(r"\x. x"))


def test_interference_cancels_terms():
    nf = normalize(S.parse_term("H (H |1>_1)"))
    assert len(nf) == 1 and nf.members[0].term == S.BitConst(1, 1)
    assert nf.members[0].amplitude == pytest.approx(1)


def test_canonicalize_merges_alpha_equivalent_members():
    t = SuperposedTerm((WeightedTerm(0.5, S.parse_term(r"\x. x")), WeightedTerm(0.5, S.parse_term(r"\y. y")),
                        WeightedTerm(1e-14, S.parse_term("|0>_1"))))
    c = canonicalize(t)
    assert len(c) == 1 and c.members[0].amplitude == pytest.approx(1)
    assert canonicalize(c).members == c.members


def test_json_roundtrip(epr_app):
    nf = normalize(epr_app)
    assert SuperposedTerm.from_json(nf.to_json()).close_to(nf)


def test_uniformly_typed():
    ok = SuperposedTerm((WeightedTerm(R2, S.parse_term("|0>_1")), WeightedTerm(R2, S.parse_term("|1>_1"))))
    bad = SuperposedTerm((WeightedTerm(R2, S.parse_term("|0>_1")), WeightedTerm(R2, S.parse_term(r"\x. x"))))
    assert uniformly_typed(ok) and not uniformly_typed(bad)


def _ground(seed):
    return TermGenerator(seed).ground(max_qubits=4, max_gates=6)


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 10_000))
def test_normal_forms_are_tuples_of_bits_with_unit_norm(seed):
    m = _ground(seed)
    pi = infer((), m)
    nf = normalize(SuperposedTerm.of(m, (), pi.type))
    assert uniformly_typed(nf)
    v = vector_of(nf)
    assert abs(np.linalg.norm(v) - 1) <= 1e-12


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 10_000))
def test_strategy_independence(seed):
    m = _ground(seed)
    assert normalize(m).close_to(normalize(m, rightmost=True), tol=1e-12)


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 10_000), st.floats(0.1, 1), st.floats(0, 2 * math.pi))
def test_linearity(seed, r, phase):
    gen = TermGenerator(seed)
    a, b = gen.ground(max_qubits=2), gen.ground(max_qubits=2)
    if infer((), a).type != infer((), b).type:
        return
    ka, kb = complex(r), r * complex(math.cos(phase), math.sin(phase))
    both = SuperposedTerm((WeightedTerm(ka, a), WeightedTerm(kb, b)))
    k = S.ground_arity(infer((), a).type)
    expected = ka * vector_of(normalize(a), k) + kb * vector_of(normalize(b), k)
    assert np.allclose(vector_of(normalize(both), k), expected, atol=1e-12)


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 10_000))
def test_soundness_small(seed):
    assert soundness_deviation(infer((), _ground(seed))) <= 1e-9


def test_oracle_vector_rejects_function_types(epr_term):
    from qlambda.errors import QLambdaError
    with pytest.raises(QLambdaError):
        oracle_vector(epr_term)

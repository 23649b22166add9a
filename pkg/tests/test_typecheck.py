import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qlambda import occurrences as O
from qlambda import syntax as S
from qlambda.errors import LinearityError, TypeCheckError
from qlambda.generate import TermGenerator
from qlambda.occurrences import AL, AR, TL, TR
from qlambda.quantum import basis
from qlambda.typecheck import (A_Q0, A_Q1, A_U, A_V, E_LOLLI, I_LOLLI1, I_LOLLI2,
                               I_TENSOR, Derivation, check_derivation,
                               derivation_from_json, infer, subst_derivation)

BB = S.bits(2)


def test_epr_derivation_shape(pi_epr):
    assert pi_epr.type == S.Arrow(BB, BB)
    rules = [(p, d.rule) for p, d in pi_epr.walk()]
    assert rules == [
        ((), I_LOLLI2), ((0,), E_LOLLI), ((0, 0), A_U), ((0, 1), I_TENSOR),
        ((0, 1, 0), E_LOLLI), ((0, 1, 0, 0), A_U), ((0, 1, 0, 1), A_V), ((0, 1, 1), A_V),
    ]
    assert pi_epr.node((0,)).env == (("x", S.BIT), ("y", S.BIT))
    check_derivation(pi_epr)


def test_epr_application_derivation(epr_app):
    rho = infer((), epr_app)
    assert rho.rule == E_LOLLI and rho.type == BB
    assert [d.rule for d in rho.premises[1].premises] == [A_Q0, A_Q1]


def test_leftover_type_variables_default_to_bit():
    assert infer((), S.parse_term(r"\x. x")).type == S.Arrow(S.BIT, S.BIT)


def test_higher_order_type():
    pi = infer((), S.parse_term(r"\f. \x. f x"))
    assert pi.type == S.parse_type("(B -o B) -o B -o B")


def test_root_env_keeps_given_order():
    env = S.parse_env("y:B, x:B")
    pi = infer(env, S.parse_term("x * y"))
    assert [n for n, _ in pi.env] == ["y", "x"]
    assert [n for n, _ in pi.premises[0].env] == ["x"]


@pytest.mark.parametrize("text", [r"\x. x * x", r"\x. |0>", r"\f. \x. f (f x)"])
def test_linearity_violations(text):
    with pytest.raises(LinearityError):
        infer((), S.parse_term(text))


def test_env_variable_must_be_used():
    with pytest.raises(LinearityError):
        infer(S.parse_env("x:B, y:B"), S.parse_term("H x"))


def test_unbound_variable():
    with pytest.raises(TypeCheckError, match="unbound"):
        infer((), S.parse_term("H x"))


def test_type_mismatch():
    with pytest.raises(TypeCheckError, match="mismatch"):
        infer((), S.parse_term("H (|0> * |1>)"))
    with pytest.raises(TypeCheckError):
        infer((), S.parse_term("|0> |1>"))


def test_pair_abstraction_on_non_tensor():
    with pytest.raises(TypeCheckError, match="non-tensor"):
        infer((), S.parse_term(r"(\<a, b>. b * a) |0>"))


def test_unknown_gate():
    with pytest.raises(TypeCheckError, match="unknown gate"):
        infer((), S.parse_term("FOO |0>"))


def test_check_derivation_rejects_tampering(pi_epr):
    bad = Derivation(pi_epr.rule, pi_epr.env, pi_epr.subject, S.Arrow(BB, S.BIT), pi_epr.premises)
    with pytest.raises(TypeCheckError):
        check_derivation(bad)


def test_json_roundtrip(pi_epr):
    assert derivation_from_json(json.loads(json.dumps(pi_epr.to_json()))) == pi_epr


# -- occurrences -------------------------------------------------------------

def test_poccs_noccs_worked_example():
    t = S.parse_type("B -o B * B")
    assert O.poccs(t) == [(AR, TL), (AR, TR)]
    assert O.noccs(t) == [(AL,)]


def test_poccs_noccs_nested():
    t = S.parse_type("(B -o B) -o B")
    assert O.poccs(t) == [(AL, AL), (AR,)]
    assert O.noccs(t) == [(AL, AR)]


def test_bitocc_bitval_example():
    tau = infer((), S.parse_term("|0>_2 * |1>_1"))
    assert O.bit_occurrences(tau) == [O.Occurrence((1,), None, ()), O.Occurrence((0,), None, ())]
    assert np.array_equal(O.bit_values(tau), basis("10"))


def test_occurrence_polarity_flips_in_env(pi_epr):
    o = O.Occurrence((0,), 0, ())
    assert not o.positive
    assert O.Occurrence((0,), None, (TL,)).positive
    assert not O.Occurrence((), None, (AL, TL)).positive


_types = st.recursive(
    st.just(S.BIT),
    lambda c: st.one_of(st.tuples(c, c).map(lambda p: S.Arrow(*p)), st.tuples(c, c).map(lambda p: S.Tensor(*p))),
    max_leaves=8,
)


@settings(max_examples=300, deadline=None)
@given(_types)
def test_occurrence_sequences_partition_leaves(t):
    p, n = O.poccs(t), O.noccs(t)
    assert not set(p) & set(n)
    assert sorted(p + n) == sorted(O.leaves(t))
    assert len(p) + len(n) == S.count_bits(t)
    assert all(O.type_positive(c) for c in p)
    assert not any(O.type_positive(c) for c in n)
    assert all(O.subtype_at(t, c) == S.BIT for c in p + n)


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 10_000))
def test_token_balance(seed):
    # initial tokens = noccs(A) + bits, final tokens = poccs(A)
    pi = infer((), TermGenerator(seed).higher_order())
    n_bits = len(S.bit_labels(pi.subject))
    assert len(O.noccs(pi.type)) + n_bits == len(O.poccs(pi.type))


# -- substitution lemma --------------------------------------------------------

def test_subst_derivation_example(pi_epr):
    body = pi_epr.premises[0]
    rho_x = infer((), S.parse_term("|1>_5"))
    rho_y = infer(S.parse_env("z:B"), S.parse_term("X z"))
    out = subst_derivation(body, ["x", "y"], [rho_x, rho_y])
    assert out.subject == S.parse_term("CNOT (H |1>_5 * X z)")
    assert out.env == (("z", S.BIT),)
    check_derivation(out)
    assert out == infer(out.env, out.subject)


def test_subst_derivation_renames_to_avoid_capture():
    pi = infer(S.parse_env("f:B -o B"), S.parse_term(r"\y. f y"))
    rho = infer(S.parse_env("y:B"), S.parse_term(r"\z. CNOT (z * y)"))
    with pytest.raises(TypeCheckError):
        subst_derivation(pi, ["f"], [rho])  # B -o B*B is not B -o B
    rho = infer(S.parse_env("y:B, g:B -o B -o B"), S.parse_term(r"\z. g z y"))
    out = subst_derivation(pi, ["f"], [rho])
    check_derivation(out)
    assert out.subject.pat.name != "y"
    assert out == infer(out.env, out.subject)


def test_subst_derivation_type_mismatch(pi_epr):
    with pytest.raises(TypeCheckError):
        subst_derivation(pi_epr.premises[0], ["x"], [infer((), S.parse_term("|0> * |1>"))])


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 10_000))
def test_subst_derivation_matches_reinference(seed):
    gen = TermGenerator(seed)
    m = gen.unitary(1 + seed % 3)
    pi = infer((), m)
    k = S.ground_arity(pi.type.dom)
    arg = S.tuple_term([S.BitConst(i % 2, i + 1) for i in range(k)])
    # (\p. M p) applied through the lemma: substitute p := bits
    app = infer(S.parse_env("p:" + S.pretty_type(pi.type.dom, ascii=True)), S.App(m, S.Var("p")))
    out = subst_derivation(app, ["p"], [infer((), arg)])
    check_derivation(out)
    assert out == infer((), S.App(m, arg))

from hypothesis import given, settings
from hypothesis import strategies as st

from qlambda import syntax as S
from qlambda.generate import TermGenerator
from qlambda.mll import (Atom, MTensor, NegAtom, Par, atom_counts, corresponding_sequent,
                         negate, pretty_formula, pretty_sequent, sequent_of, translate_type)
from qlambda.typecheck import infer


def test_translate_examples():
    assert translate_type(S.BIT) == Atom()
    assert translate_type(S.parse_type("B -o B")) == Par(NegAtom(), Atom())
    assert pretty_formula(translate_type(S.parse_type("B * B -o B * B"))) == "(α⊥⅋α⊥)⅋(α⊗α)"


def test_epr_sequent(pi_epr):
    assert pretty_sequent(sequent_of(pi_epr)) == "⊢ (α⊥⅋α⊥)⅋(α⊗α)"
    assert pretty_sequent(sequent_of(pi_epr.premises[0])) == "⊢ α⊥, α⊥, α⊗α"


def test_sequent_counts_bits():
    pi = infer((), S.parse_term("|0> * |1>"))
    assert pretty_sequent(sequent_of(pi)) == "⊢ α⊥, α⊥, α⊗α"
    assert corresponding_sequent([], S.BIT, 0) == [Atom()]


_types = st.recursive(
    st.just(S.BIT),
    lambda c: st.one_of(st.tuples(c, c).map(lambda p: S.Arrow(*p)), st.tuples(c, c).map(lambda p: S.Tensor(*p))),
    max_leaves=8,
)


@settings(max_examples=200, deadline=None)
@given(_types)
def test_negation_involutive_and_counts_match_occurrences(t):
    from qlambda import occurrences as O
    f = translate_type(t)
    assert negate(negate(f)) == f
    assert atom_counts(f) == (len(O.poccs(t)), len(O.noccs(t)))
    assert atom_counts(negate(f)) == atom_counts(f)[::-1]


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 10_000))
def test_sequents_of_closed_terms_are_balanced(seed):
    # in a provable MLL sequent positive and negative atoms pair up
    pi = infer((), TermGenerator(seed).higher_order())
    pos = neg = 0
    for f in sequent_of(pi):
        p, n = atom_counts(f)
        pos, neg = pos + p, neg + n
    assert pos == neg

import pytest

from qlambda import syntax as S
from qlambda.generate import TermGenerator
from qlambda.typecheck import infer

EPR_TEXT = r"\<x, y>. CNOT (H x * y)"


@pytest.fixture
def epr_term():
    return S.parse_term(EPR_TEXT)


@pytest.fixture
def pi_epr(epr_term):
    return infer((), epr_term)


@pytest.fixture
def epr_app():
    return S.parse_term(rf"({EPR_TEXT}) (|0>_1 * |1>_2)")


@pytest.fixture
def gen():
    return TermGenerator(seed=1234)

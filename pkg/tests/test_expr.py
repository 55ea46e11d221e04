from fractions import Fraction

import pytest

from nilcalc.diffops import VarCoeffOperator
from nilcalc.expr import parse_operator, parse_polynomial
from nilcalc.lie_core import SpecError, load_group
from nilcalc.polynomial import Polynomial


@pytest.fixture
def H1():
    return load_group("heisenberg:1")


def test_parse_polynomial(H1):
    p = parse_polynomial(H1, "x1^2*x3 - x2/2 + 3")
    x1, x2, x3 = (Polynomial.variable(H1.x_vars(), i) for i in range(3))
    assert p == x1 ** 2 * x3 - x2 * Fraction(1, 2) + 3


def test_operator_products_are_compositions(H1):
    assert parse_operator(H1, "X2*X1").to_string() == "X1*X2 - X3"
    assert parse_operator(H1, "X1*x2").to_string() == "x2*X1"
    # X1 x1 = x1 X1 + 1
    assert parse_operator(H1, "X1*x1") == parse_operator(H1, "x1*X1 + 1")


def test_operator_powers(H1):
    assert parse_operator(H1, "X1^2") == parse_operator(H1, "X1*X1")
    assert parse_operator(H1, "(X1 + X2)^2") == parse_operator(H1, "X1^2 + 2*X1*X2 - X3 + X2^2")


@pytest.mark.parametrize("text", ["x4", "X1/X2", "x1^-1", "foo(x1)", "x1 +", "1.5*x1",
                                  "x1/x2"])
def test_rejects_bad_expressions(H1, text):
    with pytest.raises(SpecError):
        parse_operator(H1, text)


def test_polynomial_rejects_fields(H1):
    with pytest.raises(SpecError):
        parse_polynomial(H1, "X1 + x1")


def test_parsed_operator_is_var_coeff(H1):
    assert isinstance(parse_operator(H1, "x1*X3"), VarCoeffOperator)

from fractions import Fraction

import numpy as np
import pytest

from nilcalc.diffops import (InvariantOperator, VarCoeffOperator, compose, formal_adjoint,
                             is_stratified, operator_homogeneous_degree, pbw_normal_order,
                             random_operator, rockland_example, sub_laplacian, to_coordinates)
from nilcalc.lie_core import abelian, load_group
from nilcalc.polynomial import Polynomial

F = Fraction


def xs(spec):
    return [Polynomial.variable(spec.x_vars(), i) for i in range(spec.dim)]


def test_pbw_heisenberg():
    spec = load_group("heisenberg:1")
    op = pbw_normal_order(spec, (1, 0))
    assert op == InvariantOperator(spec, {(1, 1, 0): 1, (0, 0, 1): -1})
    assert op.to_string() == "X1*X2 - X3"


def test_pbw_engel_reordering():
    spec = load_group("engel")
    # X3 X1 = X1 X3 - [X1, X3]
    want = InvariantOperator(spec, {(1, 0, 1, 0): 1})
    for k, c in spec.bracket_basis(0, 2).items():
        beta = tuple(1 if i == k else 0 for i in range(4))
        want = want - InvariantOperator(spec, {beta: c})
    assert pbw_normal_order(spec, (2, 0)) == want


def test_invariant_products_associate(catalog_group, rng):
    spec = catalog_group
    ops = [InvariantOperator(spec, {b: 1}) for b in
           [(1,) + (0,) * (spec.dim - 1), (0, 1) + (0,) * (spec.dim - 2),
            (0,) * (spec.dim - 1) + (1,)]]
    a, b, c = ops
    assert (a * b) * c == a * (b * c)


def test_compose_matches_sequential_application(catalog_group, rng):
    spec = catalog_group
    x = xs(spec)
    f = x[0] ** 3 * x[-1] ** 2 + x[1] * x[-1] - 2
    for _ in range(10):
        a = random_operator(spec, rng, max_order=3)
        b = random_operator(spec, rng, max_order=3)
        assert compose(a, b).apply(f) == a.apply(b.apply(f))
        assert (a @ b) == compose(a, b)


def test_adjoint_by_hand():
    spec = load_group("heisenberg:1")
    x1, _, _ = xs(spec)
    op = VarCoeffOperator(spec, {(0, 1, 0): x1})
    assert formal_adjoint(op) == VarCoeffOperator(spec, {(0, 1, 0): -x1})
    # (x2 X1)^* = -X1 x2 = -x2 X1 since X1 x2 = 0
    _, x2, _ = xs(spec)
    op2 = VarCoeffOperator(spec, {(1, 0, 0): x2})
    assert formal_adjoint(op2) == VarCoeffOperator(spec, {(1, 0, 0): -x2})
    # (x1 X1)^* = -X1 x1 = -x1 X1 - 1
    op3 = VarCoeffOperator(spec, {(1, 0, 0): x1})
    assert formal_adjoint(op3) == VarCoeffOperator(spec, {(1, 0, 0): -x1, (0, 0, 0): -1})


def test_adjoint_is_involutive_antihomomorphism(catalog_group, rng):
    spec = catalog_group
    for _ in range(8):
        a = random_operator(spec, rng, max_order=3)
        b = random_operator(spec, rng, max_order=2)
        assert formal_adjoint(formal_adjoint(a)) == a
        assert formal_adjoint(compose(a, b)) == compose(formal_adjoint(b), formal_adjoint(a))


def _integrate_box(p, n):
    # integral of a polynomial over [-1, 1]^n, exact
    total = F(0)
    for e, c in p.terms.items():
        term = c
        for k in e:
            term *= 0 if k % 2 else F(2, k + 1)
        total += term
    return total


def test_adjoint_matches_integration_by_parts(rng):
    spec = load_group("heisenberg:1")
    x1, x2, x3 = xs(spec)
    bump = (1 - x1 ** 2) ** 3 * (1 - x2 ** 2) ** 3 * (1 - x3 ** 2) ** 3
    f = bump * (x1 + x3 ** 2)
    g = bump * (x2 * x3 - 1)
    for _ in range(4):
        a = random_operator(spec, rng, max_order=2, max_coeff_degree=2)
        lhs = _integrate_box(a.apply(f) * g, 3)
        rhs = _integrate_box(f * formal_adjoint(a).apply(g), 3)
        assert lhs == rhs


def test_homogeneous_degree():
    spec = load_group("heisenberg:1")
    x1, x2, x3 = xs(spec)
    assert operator_homogeneous_degree(sub_laplacian(spec).operator.to_var_coeff()) == 2
    op = VarCoeffOperator(spec, {(0, 0, 1): x1})
    assert operator_homogeneous_degree(op) == 1
    mixed = VarCoeffOperator(spec, {(0, 0, 1): x1, (1, 0, 0): 1})
    assert operator_homogeneous_degree(mixed) == 1
    inhom = VarCoeffOperator(spec, {(0, 0, 1): 1, (1, 0, 0): 1})
    assert operator_homogeneous_degree(inhom) == "inhomogeneous"


def test_rockland_examples():
    H = load_group("heisenberg:1")
    r1 = rockland_example(H, variant=1)
    assert r1.degree == 4
    assert r1.operator == InvariantOperator(H, {(4, 0, 0): 1, (0, 4, 0): 1, (0, 0, 2): -1})
    r2 = rockland_example(H, variant=2, coeffs=[1, 2, 3])
    assert r2.degree == 8
    assert r2.operator.terms[(0, 0, 4)] == 3
    e = rockland_example(load_group("engel"))
    assert e.degree == 12
    assert e.operator.homogeneous_degree() == 12


@pytest.mark.parametrize("kwargs", [{"nu_o": 3}, {"coeffs": [1, 0, 1]}, {"variant": 3},
                                    {"coeffs": [1, 1]}])
def test_rockland_rejects_bad_input(kwargs):
    with pytest.raises(ValueError):
        rockland_example(load_group("heisenberg:1"), **kwargs)


def test_sub_laplacian_needs_stratification():
    assert is_stratified(load_group("engel"))
    assert not is_stratified(abelian(2, weights=(1, 3)))
    sub_laplacian(load_group("engel"))
    with pytest.raises(ValueError):
        sub_laplacian(abelian(2, weights=(2, 3)))


def test_to_coordinates_acts_the_same(rng):
    spec = load_group("engel")
    x = xs(spec)
    f = x[3] * x[0] ** 2 + x[2] * x[1]
    for _ in range(5):
        a = random_operator(spec, rng, max_order=3)
        assert to_coordinates(a).apply(f) == a.apply(f)


def test_to_string_format():
    spec = load_group("heisenberg:1")
    x1, _, _ = xs(spec)
    op = VarCoeffOperator(spec, {(2, 0, 0): x1 * 3, (0, 0, 0): F(1, 2)})
    s = op.to_string()
    assert "X1^2" in s and "x1" in s


def test_generators_and_identity():
    spec = load_group("heisenberg:1")
    x = xs(spec)
    f = x[2] ** 2
    assert VarCoeffOperator.identity(spec).apply(f) == f
    X3 = VarCoeffOperator.generator(spec, 2)
    assert X3.apply(f) == x[2] * 2
    m = VarCoeffOperator.multiplication(spec, x[0])
    assert m.apply(f) == x[0] * f
    assert np.isclose(float(f.evaluate([0, 0, F(1, 2)])), 0.25)

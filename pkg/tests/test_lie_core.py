import json
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from nilcalc.lie_core import (GradedLieAlgebra, SpecError, abelian, bch_product, dilate,
                              group_inverse, group_law, homogeneous_degree,
                              homogeneous_dimension, homogeneous_norm, load_group,
                              multi_indices, multi_indices_upto, parse_spec_text,
                              random_rational_point, validate_gradation)
from nilcalc.polynomial import Polynomial

F = Fraction
rat = st.fractions(min_value=-4, max_value=4, max_denominator=5)


def test_heisenberg_validates():
    rep = validate_gradation(load_group("heisenberg:1"))
    assert rep.ok and not rep.violations


def test_abelian_with_uneven_weights_validates():
    assert validate_gradation(abelian(2, weights=(1, 3))).ok


def test_weight_violation_is_named():
    spec = GradedLieAlgebra("bad", (1, 1, 2), ((0, 1, 0, F(1)),))
    rep = validate_gradation(spec)
    assert not rep.ok
    assert any("(1,2)" in str(v) and "1" in str(v) for v in rep.violations)


def test_jacobi_violation_detected():
    # [X1,X2]=X3, [X1,X3]=X4, [X2,X3]=X4 with weights (1,1,2,3) breaks Jacobi only if
    # the mixed bracket [X1,[X2,X3]] etc. is inconsistent; build a direct violation
    spec = GradedLieAlgebra("nj", (1, 1, 1, 2, 3),
                            ((0, 1, 3, F(1)), (0, 3, 4, F(1)), (1, 2, 3, F(1))))
    rep = validate_gradation(spec)
    assert not rep.ok


def test_spec_file_parsing(tmp_path):
    data = {"name": "h1", "dim": 3, "weights": [1, 1, 2],
            "brackets": [{"i": 1, "j": 2, "k": 3, "c": "1"}]}
    path = tmp_path / "h1.json"
    path.write_text(json.dumps(data))
    spec = load_group(str(path))
    assert spec.weights == (1, 1, 2)
    assert spec.structure_constants == load_group("heisenberg:1").structure_constants


def test_toml_spec_parsing():
    text = 'name = "h1"\ndim = 3\nweights = [1, 1, 2]\n[[brackets]]\ni = 1\nj = 2\nk = 3\nc = "1/2"\n'
    spec = parse_spec_text(text, ".toml")
    assert spec.bracket_basis(0, 1) == {2: F(1, 2)}


@pytest.mark.parametrize("bad", [
    {"weights": [1, 1], "dim": 3},
    {"weights": [1, 1, 2], "brackets": [{"i": 1, "j": 4, "k": 3}]},
    {"brackets": []},
])
def test_malformed_specs_raise(bad):
    with pytest.raises(SpecError):
        parse_spec_text(json.dumps(bad))


def test_missing_group_file():
    with pytest.raises(FileNotFoundError):
        load_group("no/such/file.json")


def test_heisenberg_law_third_coordinate():
    # brute-force BCH to second order: X + Y + [X,Y]/2
    law = group_law(load_group("heisenberg:1"))
    v = law.variables
    x1, x2, x3, y1, y2, y3 = (Polynomial.variable(v, i) for i in range(6))
    assert law.coordinates[2] == x3 + y3 + (x1 * y2 - x2 * y1) * F(1, 2)


def test_engel_fourth_coordinate_is_cubic():
    law = group_law(load_group("engel"))
    assert law.coordinates[3].total_degree() == 3


def test_abelian_law_is_addition():
    spec = abelian(3)
    assert bch_product(spec, (1, 2, 3), (F(1, 2), 0, -1)) == (F(3, 2), 2, 2)


def test_engel_product_frozen():
    # third coordinate x3+y3+(x1y2-x2y1)/2; fourth from the step-3 BCH terms
    spec = load_group("engel")
    assert bch_product(spec, (1, 2, 0, 0), (0, F(1, 2), 1, 0)) == (1, F(5, 2), F(5, 4), F(13, 24))


def test_catalog_axioms(catalog_group, rng):
    spec = catalog_group
    zero = (F(0),) * spec.dim
    for _ in range(25):
        x, y, z = (random_rational_point(spec, rng) for _ in range(3))
        assert bch_product(spec, bch_product(spec, x, y), z) == \
            bch_product(spec, x, bch_product(spec, y, z))
        assert bch_product(spec, x, zero) == x
        assert bch_product(spec, x, group_inverse(x)) == zero
        assert bch_product(spec, group_inverse(x), x) == zero


@given(st.tuples(rat, rat, rat), st.tuples(rat, rat, rat),
       st.fractions(min_value=F(1, 4), max_value=4, max_denominator=4))
def test_dilation_is_automorphism(x, y, r):
    spec = load_group("heisenberg:1")
    assert dilate(spec, r, bch_product(spec, x, y)) == \
        bch_product(spec, dilate(spec, r, x), dilate(spec, r, y))


def test_dilate_examples():
    spec = load_group("heisenberg:1")
    assert dilate(spec, 2, (1, 1, 1)) == (2, 2, 4)
    assert dilate(spec, 1, (3, 4, 5)) == (3, 4, 5)
    with pytest.raises(ValueError):
        dilate(spec, 0, (1, 1, 1))


def test_inverse_examples():
    assert group_inverse((1, 2, 3)) == (-1, -2, -3)
    assert group_inverse((0, 0)) == (0, 0)


def test_degrees_and_dimension():
    H = load_group("heisenberg:1")
    assert homogeneous_degree(H, (0, 0, 0)) == 0
    assert homogeneous_degree(H, (0, 0, 1)) == 2
    assert homogeneous_degree(H, (1, 1, 1)) == 4
    assert homogeneous_dimension(H) == 4
    assert homogeneous_dimension(load_group("engel")) == 7
    assert homogeneous_dimension(abelian(5)) == 5
    assert load_group("engel").nu_o == 6
    assert load_group("engel").step == 3


def test_multi_index_order_is_graded_lex():
    H = load_group("heisenberg:1")
    assert multi_indices(H, 2) == ((2, 0, 0), (1, 1, 0), (0, 2, 0), (0, 0, 1))
    assert len(multi_indices_upto(H, 2)) == 1 + 2 + 4


def test_norm_examples():
    H = load_group("heisenberg:1")
    assert homogeneous_norm(H, (0, 0, 0)) == 0
    assert homogeneous_norm(H, (1, 0, 0)) == 1


@given(st.tuples(*[st.floats(-3, 3)] * 4), st.floats(0.1, 10))
def test_norm_homogeneity(x, r):
    spec = load_group("engel")
    n = homogeneous_norm(spec, x)
    assert np.isclose(homogeneous_norm(spec, dilate(spec, r, x)), r * n, rtol=1e-12, atol=1e-300)
    assert np.isclose(homogeneous_norm(spec, group_inverse(x)), n, rtol=1e-12, atol=0)

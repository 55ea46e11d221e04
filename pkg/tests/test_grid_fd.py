import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from nilcalc.diffops import InvariantOperator
from nilcalc.group_poly import left_invariant_field
from nilcalc.lie_core import load_group
from nilcalc.numerics import (FDOperator, GridFunction, GridSpec, apply_op_fd, gaussian_bump,
                              relative_error)
from nilcalc.numerics.fd import partial, partial_spectral


def test_grid_validation():
    with pytest.raises(ValueError):
        GridSpec((1.0, 1.0), (9,))
    with pytest.raises(ValueError):
        GridSpec((1.0,), (4,))
    with pytest.raises(ValueError):
        GridSpec((0.0,), (9,))
    g = GridSpec((2.0, 3.0), (9, 13))
    assert g.h == (0.5, 0.5)
    assert g.has_origin()
    assert g.refined().N == (17, 25)


def test_gaussian_quadrature():
    g = GridSpec.cube((6, 6, 6), 41)
    f = gaussian_bump(g, widths=(1.0, 0.7, 1.2))
    want = (2 * np.pi) ** 1.5 * 1.0 * 0.7 * 1.2
    assert abs(f.integral() - want) / want < 1e-6


def test_grid_function_rejects_nan():
    g = GridSpec.cube((1, 1), 9)
    with pytest.raises(ValueError):
        GridFunction(g, np.full(g.N, np.nan))
    with pytest.raises(ValueError):
        GridFunction(g, np.zeros((8, 8)))


def test_second_differences_are_exact_on_quadratics():
    g = GridSpec.cube((2, 2), 17)
    x, y = g.mesh()
    u = np.broadcast_to(3 * x ** 2 - x * y + y, g.N)
    inner = (slice(2, -2), slice(2, -2))
    assert np.allclose(partial(u, (2, 0), g.h)[inner], 6.0)
    assert np.allclose(partial(u, (1, 1), g.h)[inner], -1.0)
    assert np.allclose(partial(u, (0, 1), g.h)[inner], np.broadcast_to(1 - x, g.N)[inner])


def test_spectral_derivative_of_gaussian():
    g = GridSpec.cube((8, 8), 65)
    f = gaussian_bump(g)
    x, _ = g.mesh()
    want = np.broadcast_to(-x * np.exp(-0.5 * (x ** 2 + g.mesh()[1] ** 2)), g.N)
    assert np.abs(partial_spectral(f.values, (1, 0), g.h) - want).max() < 1e-8


def _field_on_gaussian(grid, method):
    spec = load_group("heisenberg:1")
    f = gaussian_bump(grid)
    x1, x2, x3 = grid.mesh()
    # X1 = d1 - (x2/2) d3 applied to exp(-|x|^2/2)
    exact = np.broadcast_to((-x1 + 0.5 * x2 * x3) * np.exp(-0.5 * (x1 ** 2 + x2 ** 2 + x3 ** 2)),
                            grid.N)
    got = apply_op_fd(InvariantOperator(spec, {(1, 0, 0): 1}), f, method=method)
    return np.abs(got.values - exact)[grid.interior_mask(2)].max()


def test_fd_converges_at_second_order():
    e1 = _field_on_gaussian(GridSpec.cube((5, 5, 5), 21), "fd")
    e2 = _field_on_gaussian(GridSpec.cube((5, 5, 5), 41), "fd")
    assert 3.0 < e1 / e2 < 5.0


def test_spectral_field_is_accurate():
    assert _field_on_gaussian(GridSpec.cube((7, 7, 7), 41), "spectral") < 1e-6


def test_fd_operator_accepts_coordinate_operators():
    spec = load_group("heisenberg:1")
    g = GridSpec.cube((3, 3, 3), 17)
    a = FDOperator(left_invariant_field(spec, 1), g)
    b = FDOperator(InvariantOperator(spec, {(0, 1, 0): 1}), g)
    u = gaussian_bump(g).values
    assert np.array_equal(a(u), b(u))
    with pytest.raises(ValueError):
        FDOperator(left_invariant_field(spec, 1), g, method="chebyshev")
    assert a.spectral_bound() > 0


@given(st.floats(-1.5, 1.5), st.floats(-1.5, 1.5))
def test_linear_interpolation_is_exact_for_affine(px, py):
    g = GridSpec.cube((2, 2), 9)
    x, y = g.mesh()
    f = GridFunction(g, np.broadcast_to(2 * x - 3 * y + 1, g.N).copy())
    val = f.interpolate([np.array([px]), np.array([py])], order=1)[0]
    assert np.isclose(val, 2 * px - 3 * py + 1, atol=1e-12)


def test_relative_error_norms():
    a, b = np.array([1.0, 2.0]), np.array([1.0, 1.0])
    assert relative_error(a, b, "l1") == 0.5
    assert relative_error(a, b, "linf") == 1.0
    assert np.isclose(relative_error(a, b), 1 / np.sqrt(2))

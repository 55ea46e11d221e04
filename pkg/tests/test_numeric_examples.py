"""Smaller worked examples for the grid routines: trivial cases, scalings and oracles."""

import math

import numpy as np
import pytest

from nilcalc.diffops import VarCoeffOperator, sub_laplacian
from nilcalc.expr import parse_operator, parse_polynomial
from nilcalc.lie_core import abelian, load_group, multi_indices_upto
from nilcalc.numerics import (GridFunction, GridSpec, HeatProfile, apply_op_fd, bessel_family,
                              decay_exponent, gaussian_bump, group_convolve, group_fourier_h1,
                              heat_scaling_check, heat_solve, l1_seminorm_bound,
                              leibniz_numeric_check, multiplier_seminorm, plancherel_check_h1,
                              quantize_kernel, random_bump, schrodinger_rep, semigroup_check,
                              sobolev_inequality_check, sobolev_norm)
from nilcalc.numerics.heisenberg import heat_kernel_h1


@pytest.fixture(scope="module")
def H1():
    return load_group("heisenberg:1")


@pytest.fixture(scope="module")
def hgrid():
    return GridSpec((4.0, 4.0, 5.0), (25, 25, 29))


def gaussian_heat(n):
    return lambda *x: (4 * np.pi) ** (-n / 2) * np.exp(-sum(c * c for c in x) / 4)


# ---------------------------------------------------------------- convolution

def test_mollifier_is_approximate_identity(H1, hgrid):
    f = gaussian_bump(hgrid, center=(0.3, -0.2, 0.1), widths=(0.9, 1.0, 1.1))
    errs = []
    for w in (0.4, 0.2):
        d = gaussian_bump(hgrid, widths=(w, w, w * w))
        d = d.with_values(d.values / d.integral())
        errs.append(np.linalg.norm(group_convolve(H1, f, d).values - f.values)
                    / np.linalg.norm(f.values))
    assert errs[1] < errs[0] and errs[1] < 0.05


def test_convolution_is_associative(H1, rng):
    g = GridSpec((6.0, 6.0, 9.0), (33, 33, 41))
    f1, f2, f3 = (random_bump(g, rng, scale=0.6) for _ in range(3))
    lhs = group_convolve(H1, group_convolve(H1, f1, f2), f3).values
    rhs = group_convolve(H1, f1, group_convolve(H1, f2, f3)).values
    assert np.linalg.norm(lhs - rhs) / np.linalg.norm(rhs) < 0.02


def test_young_inequality(H1, hgrid, rng):
    for _ in range(5):
        f, k = random_bump(hgrid, rng, scale=0.7), random_bump(hgrid, rng, scale=0.5)
        k = k * float(np.sign(rng.normal()))
        out = group_convolve(H1, f, k)
        assert out.norm_l2() <= k.norm_l1() * f.norm_l2() * (1 + 1e-9)


# ---------------------------------------------------------------- finite differences

def test_fd_exact_on_quadratic_polynomials(H1):
    g = GridSpec((2.0, 2.0, 2.0), (17, 17, 17))
    p = parse_polynomial(H1, "x1^2 + x1*x3 - 3*x2*x3 + x3^2/2")
    op = parse_operator(H1, "X1 + x2*X3")
    samples = GridFunction(g, np.broadcast_to(p.evaluate_array(g.mesh()), g.N).copy())
    got = apply_op_fd(op, samples).values
    want = np.broadcast_to(op.apply(p).evaluate_array(g.mesh()), g.N)
    mask = g.interior_mask(1)
    assert np.abs(got - want)[mask].max() < 1e-8
    ident = apply_op_fd(VarCoeffOperator.identity(H1), samples)
    assert np.array_equal(ident.values, samples.values)


# ---------------------------------------------------------------- heat

@pytest.fixture(scope="module")
def h1_run(H1):
    g = GridSpec((6.0, 6.0, 7.0), (33, 33, 37))
    return heat_solve(sub_laplacian(H1), 1.5, g, times=(1.0, 1.5), width=0.65)


def test_heisenberg_heat_symmetry_and_positivity(h1_run):
    u = h1_run.snapshot(1.5).values
    flipped = u[::-1, ::-1, ::-1]
    assert np.abs(u - flipped).max() <= 0.02 * np.abs(u).max()
    assert u.min() >= -1e-3 * u.max()


def test_equal_times_give_zero_deviation(h1_run):
    rep = heat_scaling_check(h1_run, 1.0, 1.0)
    assert rep.max_rel_deviation < 1e-12
    assert math.isnan(rep.fitted_exponent)


def test_heisenberg_heat_matches_closed_form(h1_run):
    T = h1_run.effective_time(1.5)
    g = h1_run.grid
    x1, x2, x3 = g.mesh()
    want = heat_kernel_h1(T, *np.broadcast_arrays(x1, x2, x3), n_lambda=1501)
    got = h1_run.snapshot(1.5).values
    assert np.abs(got - want).sum() / np.abs(want).sum() < 0.05


# ---------------------------------------------------------------- Bessel potentials

def test_semigroup_with_zero_order_is_identity():
    spec = abelian(3)
    g = GridSpec.cube((6.0,) * 3, 25)
    res = semigroup_check(spec, HeatProfile(spec, 2, gaussian_heat(3)), 1.0, 0.0, g)
    assert res["error"] == 0.0


def test_bessel_l1_below_heat_l1():
    spec = abelian(3)
    g = GridSpec.cube((8.0,) * 3, 41)
    fam = bessel_family(HeatProfile(spec, 2, gaussian_heat(3)), g, [(1.0, 0.0), (3.0, 0.0)])
    for t in fam.values():
        # ||h_t||_1 = 1 for the Gaussian
        assert t.norm_l1 <= 1.0 + 0.02
        assert t.kernel.values.min() >= 0


# ---------------------------------------------------------------- decay fits

def test_smooth_bump_has_flat_slope():
    spec = abelian(3)
    g = GridSpec.cube((4.0,) * 3, 41)
    f = gaussian_bump(g, widths=(20.0, 20.0, 20.0))
    assert abs(decay_exponent(spec, f).exponent) < 0.05


def test_too_few_shells():
    spec = abelian(3)
    g = GridSpec.cube((4.0,) * 3, 41)
    with pytest.raises(ValueError):
        decay_exponent(spec, gaussian_bump(g), n_shells=3)


# ---------------------------------------------------------------- Sobolev

def test_sobolev_trivial_cases(rng):
    spec = abelian(3)
    R = sub_laplacian(spec)
    g = GridSpec.cube((6.0,) * 3, 33)
    zero = GridFunction(g, np.zeros(g.N))
    assert sobolev_inequality_check(zero, 2, R, 1.0).ratio == 0
    f = random_bump(g, rng)
    r1 = sobolev_inequality_check(f, 2, R, 0.2).ratio
    r2 = sobolev_inequality_check(f * -3.5, 2, R, 0.2).ratio
    assert r1 == pytest.approx(r2, rel=1e-12)
    norms = [sobolev_norm(f, a, spec=spec) for a in range(4)]
    assert norms == sorted(norms)


# ---------------------------------------------------------------- Leibniz and quantization

def test_leibniz_trivial_and_abelian(H1, hgrid):
    f1 = gaussian_bump(hgrid, center=(0.2, 0, 0), widths=(0.7, 0.7, 0.9))
    f2 = gaussian_bump(hgrid, center=(0, 0.3, 0), widths=(0.8, 0.6, 0.8))
    assert leibniz_numeric_check(H1, (0, 0, 0), f1, f2)["error"] == 0.0
    res = leibniz_numeric_check(abelian(3), (1, 0, 0), f1, f2)
    assert res["error"] < 1e-12 and res["terms"] == 2


def test_mollified_delta_quantizes_to_identity(H1, hgrid):
    f = gaussian_bump(hgrid, widths=(0.9, 0.9, 1.1))
    d = gaussian_bump(hgrid, widths=(0.15, 0.15, 0.1))
    d = d.with_values(d.values / d.integral())
    out = quantize_kernel(H1, d, f)
    assert np.linalg.norm(out.values - f.values) / np.linalg.norm(f.values) < 0.03


def test_variable_resolvent_kernel_abelian():
    # kappa_x = c(x) B_2^eps gives c(x) ((I - Laplacian)^{-1} e^{eps Laplacian} f)(x)
    spec = abelian(3)
    grid = GridSpec.cube((8.0,) * 3, 41)
    fam = bessel_family(HeatProfile(spec, 2, gaussian_heat(3)), grid, [(2.0, 0.5)])
    f = gaussian_bump(grid, center=(0.5, -0.3, 0.2), widths=(0.8, 1.0, 0.9))

    def c(x1, x2, x3):
        return 2 + np.sin(x1) * np.exp(-x3 ** 2 / 8)

    got = quantize_kernel(spec, [(c, fam[(2.0, 0.5)].kernel)], f).values
    xi2 = 0
    for ax, (n, h) in enumerate(zip(grid.N, grid.h)):
        k = 2 * np.pi * np.fft.fftfreq(n, d=h)
        shape = [1, 1, 1]
        shape[ax] = n
        xi2 = xi2 + k.reshape(shape) ** 2
    want = c(*grid.mesh()) * np.fft.ifftn(np.fft.fftn(f.values) * np.exp(-0.5 * xi2)
                                           / (1 + xi2)).real
    assert np.abs(got - want).max() / np.abs(want).max() < 0.03


def test_l1_bound_scaling_and_finiteness(H1, hgrid):
    R = sub_laplacian(H1)
    k = gaussian_bump(hgrid, widths=(0.7, 0.7, 0.9))
    base = l1_seminorm_bound(R, k, (1, 0, 1), 1)
    assert l1_seminorm_bound(R, k * -2.5, (1, 0, 1), 1) == pytest.approx(2.5 * base)
    for alpha in multi_indices_upto(H1, 4):
        for kk in range(3):
            assert math.isfinite(l1_seminorm_bound(R, k, alpha, kk))


def test_multiplier_seminorm_grid_independent():
    vals = [multiplier_seminorm(lambda t: (1 + t) ** 2, np.geomspace(1e-3, 1e3, n), 2.0, 2)
            for n in (500, 4000)]
    assert vals[0] == pytest.approx(vals[1], rel=1e-3)
    assert vals[1] == pytest.approx(2.0, rel=1e-3)


# ---------------------------------------------------------------- representations

def test_identity_element_and_zero_function(hgrid):
    assert np.allclose(schrodinger_rep(1.0, (0, 0, 0), N=16).matrix, np.eye(16), atol=1e-12)
    zero = GridFunction(hgrid, np.zeros(hgrid.N))
    assert group_fourier_h1(zero, 1.0, N=8).hs_norm() == 0
    assert plancherel_check_h1(zero, 0.025, lams=np.geomspace(0.1, 5, 5), N=8).rhs == 0

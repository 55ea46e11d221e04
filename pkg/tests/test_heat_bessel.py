import math

import numpy as np
import pytest

from nilcalc.diffops import sub_laplacian
from nilcalc.lie_core import ConsistencyError, abelian, load_group
from nilcalc.numerics import (GridFunction, GridSpec, HeatProfile, InstabilityError,
                              bessel_family, bessel_l2_norm, decay_exponent, gaussian_bump,
                              heat_scaling_check, heat_solve, quantize_kernel, semigroup_check)
from nilcalc.numerics.bessel import abelian_bessel_closed_form
from nilcalc.numerics.heisenberg import heat_kernel_h1


def gaussian_heat(n):
    return lambda *x: (4 * np.pi) ** (-n / 2) * np.exp(-sum(c * c for c in x) / 4)


def euclid_heat(n, t, mesh):
    return (4 * np.pi * t) ** (-n / 2) * np.exp(-sum(c * c for c in mesh) / (4 * t))


@pytest.fixture(scope="module")
def abelian_run():
    spec = abelian(3)
    grid = GridSpec.cube((6.0, 6.0, 6.0), 33)
    return heat_solve(sub_laplacian(spec), 1.5, grid, times=(1.0, 1.5), width=0.6)


def test_abelian_heat_matches_closed_form(abelian_run):
    run = abelian_run
    for t in run.times:
        want = euclid_heat(3, run.effective_time(t), run.grid.mesh())
        got = run.snapshot(t).values
        assert np.abs(got - want).sum() / np.abs(want).sum() < 0.02


def test_abelian_heat_mass_matches_box_leakage(abelian_run):
    # the solution loses exactly the Gaussian tail outside the box
    run = abelian_run
    for t, m in zip(run.times, run.mass):
        inside = math.erf(run.grid.L[0] / math.sqrt(4 * run.effective_time(t))) ** 3
        assert abs(m - inside) < 1e-3


def test_abelian_scaling_exponent(abelian_run):
    rep = heat_scaling_check(abelian_run, 1.0, 1.5)
    assert abs(rep.fitted_exponent - 1.5) < 0.05
    assert rep.max_rel_deviation < 0.05


def test_instability_is_reported():
    grid = GridSpec.cube((3.0, 3.0), 17)
    with pytest.raises(InstabilityError):
        heat_solve(sub_laplacian(abelian(2)), 2.0, grid, dt=1.0, max_halvings=0)


def test_missing_snapshot(abelian_run):
    with pytest.raises(KeyError):
        abelian_run.snapshot(0.3)


def test_heisenberg_heat_kernel_values():
    assert abs(heat_kernel_h1(1.0, 0.0, 0.0, 0.0) - 1 / 16) < 1e-6
    # h_t(x) = t^{-2} h_1(t^{-1/2} x1, t^{-1/2} x2, x3 / t)
    x = (0.7, -0.3, 0.9)
    t = 2.0
    lhs = heat_kernel_h1(t, *x)
    rhs = t ** -2 * heat_kernel_h1(1.0, x[0] / math.sqrt(t), x[1] / math.sqrt(t), x[2] / t)
    assert abs(lhs - rhs) < 1e-6 * abs(rhs)


def test_heisenberg_heat_kernel_mass():
    ax = np.linspace(-7, 7, 41)
    z = np.linspace(-9, 9, 49)
    x1, x2, x3 = np.meshgrid(ax, ax, z, indexing="ij")
    h = heat_kernel_h1(1.0, x1, x2, x3, n_lambda=1001)
    mass = h.sum() * (ax[1] - ax[0]) ** 2 * (z[1] - z[0])
    assert abs(mass - 1) < 1e-3


def test_bessel_closed_form_three_dimensions():
    r = np.linspace(0.5, 5, 10)
    want = np.exp(-r) / (4 * np.pi * r)
    got = abelian_bessel_closed_form(3, 2.0, r)
    assert np.abs(got - want).max() / want.max() < 1e-3


def test_bessel_l2_norms():
    prof = HeatProfile(abelian(3), 2, gaussian_heat(3))
    # ||(1 + |xi|^2)^{-1}||_2^2 / (2 pi)^3 = 1 / (8 pi)
    assert abs(bessel_l2_norm(prof, 2.0) - 1 / math.sqrt(8 * math.pi)) < 1e-10
    H = load_group("heisenberg:1")
    hprof = HeatProfile(H, 2, lambda *x: heat_kernel_h1(1.0, *x))
    assert abs(bessel_l2_norm(hprof, 4.0) - math.sqrt(1 / 96)) < 1e-6
    with pytest.raises(ValueError):
        bessel_l2_norm(hprof, 2.0)


def test_profile_scaling_from_samples():
    spec = abelian(3)
    grid = GridSpec.cube((8.0,) * 3, 41)
    sample = GridFunction(grid, np.broadcast_to(euclid_heat(3, 1.0, grid.mesh()), grid.N).copy())
    prof = HeatProfile(spec, 2, sample)
    pts = [np.array([0.5, 1.0]), np.array([0.0, -1.0]), np.array([1.0, 0.5])]
    assert np.allclose(prof(2.0, pts), euclid_heat(3, 2.0, pts), rtol=2e-3)


@pytest.fixture(scope="module")
def abelian_bessel():
    spec = abelian(3)
    grid = GridSpec.cube((8.0,) * 3, 41)
    prof = HeatProfile(spec, 2, gaussian_heat(3))
    return spec, grid, prof, bessel_family(prof, grid, [(1.0, 0.0), (2.0, 0.0), (2.0, 0.5)])


def test_bessel_grid_mass(abelian_bessel):
    _, _, _, fam = abelian_bessel
    assert abs(fam[(1.0, 0.0)].integral - 1) < 0.02
    assert abs(fam[(2.0, 0.0)].integral - 1) < 0.02


def test_bessel_grid_profile(abelian_bessel):
    _, grid, _, fam = abelian_bessel
    r = np.sqrt(sum(np.broadcast_to(m, grid.N) ** 2 for m in grid.mesh()))
    band = (r > 1.0) & (r < 4.0)
    want = np.exp(-r[band]) / (4 * np.pi * r[band])
    got = fam[(2.0, 0.0)].kernel.values[band]
    assert np.abs(got - want).max() / want.max() < 0.03


def test_mollified_bessel_inverts_resolvent(abelian_bessel):
    # B_2^eps * f = (I - Laplacian)^{-1} e^{eps Laplacian} f, checked by FFT
    spec, grid, _, fam = abelian_bessel
    f = gaussian_bump(grid, center=(0.5, -0.3, 0.2), widths=(0.8, 1.0, 0.9))
    got = quantize_kernel(spec, fam[(2.0, 0.5)].kernel, f).values
    F = np.fft.fftn(f.values)
    xi2 = 0
    for ax, (n, h) in enumerate(zip(grid.N, grid.h)):
        k = 2 * np.pi * np.fft.fftfreq(n, d=h)
        shape = [1, 1, 1]
        shape[ax] = n
        xi2 = xi2 + k.reshape(shape) ** 2
    want = np.fft.ifftn(F * np.exp(-0.5 * xi2) / (1 + xi2)).real
    assert np.abs(got - want).max() / np.abs(want).max() < 0.02


def test_abelian_semigroup():
    spec = abelian(3)
    grid = GridSpec.cube((9.0,) * 3, 37)
    prof = HeatProfile(spec, 2, gaussian_heat(3))
    res = semigroup_check(spec, prof, 1.0, 1.5, grid, eps=0.5)
    assert res["error"] < 0.02


def test_bessel_rejects_bad_requests(abelian_bessel):
    _, grid, prof, _ = abelian_bessel
    with pytest.raises(ValueError):
        bessel_family(prof, grid, [(0.0, 0.0)])


def test_unstable_quadrature_is_flagged():
    spec = abelian(3)
    grid = GridSpec.cube((4.0,) * 3, 17)
    prof = HeatProfile(spec, 2, gaussian_heat(3))
    with pytest.raises(ConsistencyError):
        bessel_family(prof, grid, [(1.0, 0.0)], per_decade=1, t_min=1e-2)


def test_decay_exponent_on_power_law():
    spec = abelian(3)
    grid = GridSpec.cube((4.0,) * 3, 41)
    r = np.sqrt(sum(np.broadcast_to(m, grid.N) ** 2 for m in grid.mesh()))
    vals = np.where(r > 0, r, 1.0) ** -1.5
    rep = decay_exponent(spec, GridFunction(grid, vals))
    assert abs(rep.exponent + 1.5) < 0.02
    with pytest.raises(ValueError):
        decay_exponent(spec, GridFunction(grid, vals), r_min=0.01)


def test_decay_fit_of_grid_kernel_matches_closed_form(abelian_bessel):
    spec, grid, _, fam = abelian_bessel
    r = np.sqrt(sum(np.broadcast_to(m, grid.N) ** 2 for m in grid.mesh()))
    exact = GridFunction(grid, abelian_bessel_closed_form(3, 1.0, np.where(r > 0, r, 1.0)))
    got = decay_exponent(spec, fam[(1.0, 0.0)].kernel, r_max=3.0).exponent
    want = decay_exponent(spec, exact, r_max=3.0).exponent
    assert abs(got - want) < 0.05

"""Bessel potentials B_a = Gamma(a/nu)^{-1} int_0^inf t^{a/nu - 1} e^{-t} h_t dt.

Heat kernels at all times come from one profile through the scaling
h_t(x) = t^{-Q/nu} h_1(delta_{t^{-1/nu}} x). A mollified variant
B_a^eps = Gamma(a/nu)^{-1} int t^{a/nu - 1} e^{-t} h_{t + eps} dt is the kernel of
(I + R)^{-a/nu} e^{-eps R}, so B_a^eps * B_b^eps = B_{a+b}^{2 eps} exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.ndimage import spline_filter, map_coordinates
from scipy.special import gamma as gamma_fn, gammainc

from ..lie_core import ConsistencyError, GradedLieAlgebra, dilate_array
from .grid import GridFunction, GridSpec


class HeatProfile:
    """h_t for every t > 0 from one sampled kernel h_T and the dilation structure."""

    def __init__(self, spec: GradedLieAlgebra, nu: int, sample: Callable | GridFunction,
                 T: float = 1.0, label: str = ""):
        self.spec = spec
        self.nu = nu
        self.T = float(T)
        self.label = label
        if isinstance(sample, GridFunction):
            self._grid = sample.grid
            self._coef = spline_filter(np.asarray(sample.values, dtype=float), order=3,
                                       mode="constant")
            self._fn = None
        else:
            self._grid = None
            self._fn = sample

    @classmethod
    def from_heat_run(cls, run, t: float):
        return cls(run.spec, run.rockland.degree, run.snapshot(t), run.effective_time(t),
                   label=f"heat run N={run.grid.N}")

    def _sample_T(self, points) -> np.ndarray:
        if self._fn is not None:
            return self._fn(*points)
        g = self._grid
        coords = [(p + L) / h for p, L, h in zip(points, g.L, g.h)]
        shape = np.broadcast_shapes(*(c.shape for c in coords))
        flat = np.stack([np.broadcast_to(c, shape).ravel() for c in coords])
        vals = map_coordinates(self._coef, flat, order=3, mode="constant", cval=0.0,
                               prefilter=False)
        return vals.reshape(shape)

    def __call__(self, t: float, points) -> np.ndarray:
        r = t / self.T
        Q = self.spec.homogeneous_dimension
        pts = dilate_array(self.spec, r ** (-1.0 / self.nu), points)
        return r ** (-Q / self.nu) * self._sample_T(pts)


@dataclass
class BesselTable:
    a: float
    eps: float
    kernel: GridFunction
    norm_l1: float
    norm_l2: float
    integral: float
    meta: dict = field(default_factory=dict)


def _weights(a: float, nu: int, u: np.ndarray):
    """Trapezoid weights in u = log t for t^{a/nu - 1} e^{-t} dt / Gamma(a/nu), plus head mass."""
    t = np.exp(u)
    s = a / nu
    dens = t ** s * np.exp(-t) / gamma_fn(s)
    du = np.diff(u)
    w = np.zeros_like(u)
    w[:-1] += 0.5 * du * dens[:-1]
    w[1:] += 0.5 * du * dens[1:]
    head = float(gammainc(s, t[0]))   # mass of [0, t_0], put on the first node
    w[0] += head
    return w, head


RESOLVED_PEAK = 0.1


def _resolved_mass(hk: np.ndarray, grid: GridSpec, origin) -> float:
    """Grid mass of h_t when resolved; the exact mass 1 when one node carries most of it."""
    m = float(hk.sum() * grid.cell)
    if origin is not None and hk[origin] * grid.cell > RESOLVED_PEAK * max(m, 1e-300):
        return 1.0
    return m


def _balance_origin(values: np.ndarray, mass: float, grid: GridSpec, origin) -> None:
    """Replace the origin sample by the cell value that restores the t-integrated mass.

    Heat kernels narrower than the grid have origin samples far above their cell
    average; the singular core of B_a is then represented by its mass.
    """
    rest = float(values.sum() - values[origin]) * grid.cell
    v = (mass - rest) / grid.cell
    if v > 0:
        values[origin] = v


def bessel_family(profile: HeatProfile, grid: GridSpec, requests, t_min: float | None = None,
                  t_max: float = 45.0, per_decade: int = 16, check: bool = True) -> dict:
    """Several B_a^eps at once, sharing heat samples for equal eps.

    ``requests`` is an iterable of (a, eps); the result maps (a, eps) -> BesselTable.
    With ``check`` the quadrature is repeated on half the nodes and a large change
    raises a ConsistencyError. The origin node holds the mass of the unresolved core.
    """
    requests = [(float(a), float(e)) for a, e in requests]
    for a, e in requests:
        if a <= 0 or e < 0:
            raise ValueError("need a > 0 and eps >= 0")
    if t_min is None:
        hmin = min(grid.h)
        t_min = 1e-3 * hmin ** profile.nu
    u = np.linspace(math.log(t_min), math.log(t_max),
                    int(per_decade * math.log10(t_max / t_min)) + 1)
    mesh = grid.mesh()
    origin = tuple(n // 2 for n in grid.N) if grid.has_origin() else None
    out = {}
    for eps in sorted({e for _, e in requests}):
        group = [a for a, e in requests if e == eps]
        acc = {a: np.zeros(grid.N) for a in group}
        acc_half = {a: np.zeros(grid.N) for a in group}
        mass = {a: 0.0 for a in group}
        mass_half = {a: 0.0 for a in group}
        W = {a: _weights(a, profile.nu, u)[0] for a in group}
        Wh = {a: _weights(a, profile.nu, u[::2])[0] for a in group}
        for k, uk in enumerate(u):
            hk = np.broadcast_to(profile(math.exp(uk) + eps, mesh), grid.N)
            mk = _resolved_mass(hk, grid, origin)
            for a in group:
                acc[a] += W[a][k] * hk
                mass[a] += W[a][k] * mk
                if k % 2 == 0:
                    acc_half[a] += Wh[a][k // 2] * hk
                    mass_half[a] += Wh[a][k // 2] * mk
        for a in group:
            if origin is not None:
                _balance_origin(acc[a], mass[a], grid, origin)
                _balance_origin(acc_half[a], mass_half[a], grid, origin)
            g = GridFunction(grid, acc[a])
            coarse = GridFunction(grid, acc_half[a])
            change = float(np.abs(g.values - coarse.values).sum() / np.abs(g.values).sum())
            if check and change > 0.05:
                raise ConsistencyError(
                    f"t-quadrature for a={a} unstable under refinement ({change:.2%})")
            out[(a, eps)] = BesselTable(a, eps, g, g.norm_l1(), g.norm_l2(), float(g.integral()),
                                        {"t_min": t_min, "t_max": t_max, "nodes": len(u),
                                         "quadrature_change": change})
    return out


def bessel_potential(profile: HeatProfile, a: float, grid: GridSpec, eps: float = 0.0,
                     **kw) -> BesselTable:
    return bessel_family(profile, grid, [(a, eps)], **kw)[(float(a), float(eps))]


def bessel_l2_norm(profile: HeatProfile, a: float, n_t: int = 4000) -> float:
    """||B_a||_2 from ||B_a||_2^2 = (B_a * B_a)(0) = B_{2a}(0), finite when a > Q/2.

    B_{2a}(0) = Gamma(2a/nu)^{-1} int t^{2a/nu - 1} e^{-t} h_t(0) dt with
    h_t(0) = t^{-Q/nu} h_1(0); avoids the grid quadrature of the singular core.
    """
    Q, nu = profile.spec.homogeneous_dimension, profile.nu
    if not a > Q / 2:
        raise ValueError(f"B_a is square integrable only for a > Q/2 = {Q / 2}")
    origin = [np.zeros(1)] * profile.spec.dim
    h0 = float(profile(1.0, origin)[0])
    s = 2 * a / nu - Q / nu
    # int t^{s-1} e^{-t} dt = Gamma(s)
    return float(np.sqrt(h0 * gamma_fn(s) / gamma_fn(2 * a / nu)))


def bessel_l1_bound(profile_l1: float, a: float, nu: int) -> float:
    """||B_a||_1 <= Gamma(a/nu)^{-1} int t^{a/nu-1} e^{-t} ||h_t||_1 dt = ||h||_1."""
    return profile_l1


def semigroup_check(spec, profile: HeatProfile, a: float, b: float, grid: GridSpec,
                    eps: float = 0.0, **kw) -> dict:
    """Relative L1 error of B_a^eps * B_b^eps against B_{a+b}^{2 eps}.

    b = 0 degenerates to the identity comparison (B_0^eps = h_eps is not formed;
    the result is B_a^eps itself).
    """
    from .convolution import group_convolve

    if b == 0:
        ta = bessel_potential(profile, a, grid, eps, **kw)
        return {"error": 0.0, "lhs": ta.kernel, "rhs": ta.kernel}
    reqs = [(a, eps), (b, eps), (a + b, 2 * eps)]
    fam = bessel_family(profile, grid, list(dict.fromkeys(reqs)), **kw)
    Ba, Bb, Bab = fam[(float(a), float(eps))], fam[(float(b), float(eps))], \
        fam[(float(a + b), float(2 * eps))]
    conv = group_convolve(spec, Ba.kernel, Bb.kernel)
    err = float(np.abs(conv.values - Bab.kernel.values).sum() / np.abs(Bab.kernel.values).sum())
    return {"error": err, "lhs": conv, "rhs": Bab.kernel, "tables": fam,
            "boundary_mass": conv.meta.get("boundary_mass")}


def abelian_bessel_closed_form(n: int, a: float, r: np.ndarray, n_t: int = 4000) -> np.ndarray:
    """Radial B_a on R^n for I - Laplacian, by the same t-integral of Gaussians."""
    r = np.asarray(r, dtype=float)
    u = np.linspace(math.log(1e-8), math.log(60.0), n_t)
    t = np.exp(u)
    s = a / 2
    dens = t ** s * np.exp(-t) / gamma_fn(s) * (u[1] - u[0])
    out = np.zeros(r.shape)
    for tk, wk in zip(t, dens):
        out += wk * (4 * np.pi * tk) ** (-n / 2) * np.exp(-r ** 2 / (4 * tk))
    return out

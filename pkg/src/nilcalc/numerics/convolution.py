"""Group convolution (f1 * f2)(x) = int f1(y) f2(y^{-1} x) dy on grids.

Two routes:

* layered: for laws where (y^{-1}x)_k = x_k - y_k + s_k(y_D, x_D) with s bilinear
  in the first-block coordinates D (all step-two groups, abelian with D empty).
  The loop runs over y_D; the remaining axes are handled with zero-padded FFTs,
  and the twist s becomes a phase.
* direct: nodal quadrature with spline interpolation of f2 at y^{-1}x. Any group,
  small grids only.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import fft as sfft

from ..lie_core import GradedLieAlgebra, group_law
from ..polynomial import Polynomial
from .grid import GridFunction, GridSpec

BOUNDARY_WARN = 1e-3


@dataclass(frozen=True)
class ConvolutionPlan:
    method: str            # "layered" or "direct"
    D: tuple               # loop axes
    S: tuple               # FFT axes
    twist: dict            # {k: {(a, b): c}} with s_k = sum c y_a x_b


@lru_cache(maxsize=None)
def convolution_plan(spec: GradedLieAlgebra) -> ConvolutionPlan:
    """Inspect the law of y^{-1} x and pick the fastest exact route."""
    n = spec.dim
    law = group_law(spec)
    v = law.variables  # x1..xn, y1..yn; product is x.y
    # (y^{-1} x)_k: substitute x -> -y and y -> x in the product x.y
    sub = [-Polynomial.variable(v, n + i) for i in range(n)] + \
          [Polynomial.variable(v, i) for i in range(n)]
    twist, involved = {}, set()
    for k, p in enumerate(law.coordinates):
        q = p.substitute(sub, v)
        corr = q - Polynomial.variable(v, k) + Polynomial.variable(v, n + k)
        if corr.is_zero():
            continue
        terms = {}
        for e, c in corr.terms.items():
            xs = [i for i in range(n) if e[i]]
            ys = [i for i in range(n) if e[n + i]]
            if sum(e) != 2 or len(xs) != 1 or len(ys) != 1:
                return ConvolutionPlan("direct", (), tuple(range(n)), {})
            terms[(ys[0], xs[0])] = float(c)
            involved.update(xs + ys)
        twist[k] = terms
    D = tuple(sorted(involved))
    S = tuple(k for k in range(n) if k not in involved)
    if any(k in involved for k in twist):
        return ConvolutionPlan("direct", (), tuple(range(n)), {})
    return ConvolutionPlan("layered", D, S, twist)


def group_convolve(spec: GradedLieAlgebra, f1: GridFunction, f2: GridFunction,
                   method: str = "auto", rel_skip: float = 1e-13,
                   dtype=np.complex128) -> GridFunction:
    """(f1 * f2) sampled on the common grid; ``meta['boundary_warning']`` flags leakage."""
    if f1.grid != f2.grid:
        raise ValueError("convolution needs a common grid")
    grid = f1.grid
    if grid.ndim != spec.dim:
        raise ValueError("grid dimension does not match the group")
    plan = convolution_plan(spec)
    if method == "auto":
        method = plan.method
    if method == "layered":
        if plan.method != "layered":
            raise ValueError("the layered route needs a step-two group law")
        vals = _layered(grid, f1.values, f2.values, plan, rel_skip, dtype)
    elif method == "direct":
        vals = _direct(spec, f1, f2)
    else:
        raise ValueError(f"unknown method {method!r}")
    if not (np.iscomplexobj(f1.values) or np.iscomplexobj(f2.values)):
        vals = vals.real
    out = GridFunction(grid, vals)
    leak = max(f1.boundary_mass(), f2.boundary_mass())
    out.meta["boundary_mass"] = leak
    out.meta["boundary_warning"] = leak > BOUNDARY_WARN
    if out.meta["boundary_warning"]:
        warnings.warn(f"convolution inputs carry {leak:.2e} of their mass on the boundary",
                      RuntimeWarning, stacklevel=2)
    return out


def _layered(grid: GridSpec, v1, v2, plan: ConvolutionPlan, rel_skip, dtype):
    D, S = plan.D, plan.S
    h, L, N = grid.h, grid.L, grid.N
    for a in D:
        if N[a] % 2 == 0:
            raise ValueError("the layered route needs an odd node count on the loop axes")
    # move axes to (D..., S...)
    order = D + S
    a1 = np.transpose(v1, order)
    a2 = np.transpose(v2, order)
    nd = len(D)
    s_axes = tuple(range(nd, nd + len(S)))
    P = [sfft.next_fast_len(3 * N[k]) for k in S]
    real = not (np.iscomplexobj(v1) or np.iscomplexobj(v2))
    fwd = (lambda a: sfft.rfftn(a, s=P, axes=s_axes)) if real else \
        (lambda a: sfft.fftn(a, s=P, axes=s_axes))
    F1 = fwd(a1).astype(dtype)
    F2 = fwd(a2).astype(dtype)
    # angular frequencies on the S axes
    omegas = []
    for i, k in enumerate(S):
        if real and i == len(S) - 1:
            f = sfft.rfftfreq(P[i], d=h[k])
        else:
            f = sfft.fftfreq(P[i], d=h[k])
        omegas.append(2 * np.pi * f)
    om = np.meshgrid(*omegas, indexing="ij", sparse=True) if S else []
    # sample index m on the padded axis is the coordinate -2L + m h; reading the
    # output at x = -L + k h is a shift by L, folded into the phase
    base = np.ones(F1.shape[nd:], dtype=dtype)
    for i, k in enumerate(S):
        base = base * np.exp(1j * om[i] * L[k]).astype(dtype)
    acc = np.zeros(tuple(N[a] for a in D) + F1.shape[nd:], dtype=dtype)
    axes_x = [np.linspace(-L[a], L[a], N[a]) for a in D]
    weights = np.abs(a1).reshape(a1.shape[:nd] + (-1,)).max(axis=-1) if nd else None
    skip = rel_skip * (weights.max() if nd and weights.size else 0.0)
    cell_D = float(np.prod([h[a] for a in D])) if D else 1.0
    cell_S = float(np.prod([h[k] for k in S])) if S else 1.0
    if nd == 0:
        acc = F1 * F2 * base
    else:
        centers = [(N[a] - 1) // 2 for a in D]
        for jidx in np.ndindex(*(N[a] for a in D)):
            if weights[jidx] <= skip:
                continue
            y = [axes_x[i][j] for i, j in enumerate(jidx)]
            # x index range with w = x - y on the grid
            xs, ws = [], []
            for i, j in enumerate(jidx):
                lo = max(0, j - centers[i])
                hi = min(N[D[i]], j + centers[i] + 1)
                xs.append(slice(lo, hi))
                ws.append(slice(lo - j + centers[i], hi - j + centers[i]))
            term = F2[tuple(ws)] * F1[jidx]
            if plan.twist:
                # sum_k omega_k s_k = sum_b x_b * (sum_k omega_k sum_a c y_a)
                for bi, b in enumerate(D):
                    coeff = 0.0
                    for k, terms in plan.twist.items():
                        c_b = sum(c * y[D.index(a)] for (a, bb), c in terms.items() if bb == b)
                        if c_b:
                            coeff = coeff + c_b * om[S.index(k)]
                    if np.isscalar(coeff) and coeff == 0.0:
                        continue
                    xb = axes_x[bi][xs[bi]]
                    shape = [1] * nd
                    shape[bi] = xb.size
                    phase = np.exp(1j * xb.reshape(shape + [1] * len(S)) * coeff).astype(dtype)
                    term = term * phase
            acc[tuple(xs)] += term
        acc = acc * base
    if S:
        inv = (lambda a: sfft.irfftn(a, s=P, axes=s_axes)) if real else \
            (lambda a: sfft.ifftn(a, s=P, axes=s_axes))
        out = inv(acc)
        out = out[(slice(None),) * nd + tuple(slice(0, N[k]) for k in S)]
    else:
        out = acc
    out = out * (cell_D * cell_S)
    inverse = np.argsort(order)
    return np.transpose(out, inverse)


def _direct(spec, f1: GridFunction, f2: GridFunction) -> np.ndarray:
    grid = f1.grid
    law = group_law(spec)
    mesh = [m.ravel() for m in grid.dense_mesh()]
    out = np.zeros(mesh[0].shape, dtype=np.result_type(f1.values, f2.values, float))
    flat1 = f1.values.ravel()
    nz = np.nonzero(flat1)[0]
    for idx in nz:
        y = [m[idx] for m in mesh]
        yinv = [-c for c in y]
        pts = law.product_array([np.full_like(mesh[0], c) for c in yinv], mesh)
        out += flat1[idx] * f2.interpolate(pts)
    return (out * grid.cell).reshape(grid.N)

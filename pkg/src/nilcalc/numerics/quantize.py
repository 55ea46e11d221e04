"""Kernel-side quantization, L1 seminorm surrogates and the grid Leibniz check."""

from __future__ import annotations

from typing import Callable, Sequence

import numpy as np

from ..diffops import RocklandSpec
from ..group_poly import decomposition_coeffs, dual_basis
from ..lie_core import GradedLieAlgebra
from .convolution import group_convolve
from .grid import GridFunction
from .sobolev import bessel_power


def _coefficient_values(c, grid) -> np.ndarray | float:
    if isinstance(c, GridFunction):
        return c.values
    if callable(c):
        return c(*grid.mesh())
    return c


def quantize_kernel(spec: GradedLieAlgebra, kernel, f: GridFunction, **kw) -> GridFunction:
    """T f(x) = (f * kappa_x)(x).

    ``kernel`` is either one GridFunction (kappa independent of x, so T f = f * kappa)
    or a list of pairs (c_i, kappa_i) meaning kappa_x = sum_i c_i(x) kappa_i, where c_i
    is a GridFunction, a callable on the mesh or a scalar.
    """
    if isinstance(kernel, GridFunction):
        return group_convolve(spec, f, kernel, **kw)
    out = None
    boundary = 0.0
    for c, kappa in kernel:
        conv = group_convolve(spec, f, kappa, **kw)
        boundary = max(boundary, conv.meta.get("boundary_mass", 0.0))
        term = _coefficient_values(c, f.grid) * conv.values
        out = term if out is None else out + term
    if out is None:
        raise ValueError("empty kernel expansion")
    res = GridFunction(f.grid, out)
    res.meta["boundary_mass"] = boundary
    return res


def q_tilde_values(spec: GradedLieAlgebra, alpha: Sequence[int], grid) -> np.ndarray:
    return np.broadcast_to(dual_basis(spec).q_tilde(alpha).evaluate_array(grid.mesh()),
                           grid.N).astype(float)


def l1_seminorm_bound(rockland: RocklandSpec, kappa: GridFunction, alpha: Sequence[int],
                      k: int) -> float:
    """||q~_alpha ((I + R)^k kappa)||_{L^1}: an upper-bound surrogate for symbol seminorms of T_kappa."""
    if k < 0 or int(k) != k:
        raise ValueError("k must be a nonnegative integer")
    g = bessel_power(rockland, kappa, int(k))
    w = q_tilde_values(rockland.spec, alpha, kappa.grid)
    return float((np.abs(w * g.values)).sum() * kappa.grid.cell)


def multiplier_seminorm(phi: Callable | np.ndarray, lams: np.ndarray, m: float, k: int) -> float:
    """max_{k1 <= k} sup_lam (1 + lam)^{-m + k1} |d^{k1} phi(lam)| on a lam-grid (lam >= 0).

    Derivatives are second-order differences on the (possibly nonuniform) grid; a
    log-spaced grid resolves both small and large lam.
    """
    lams = np.asarray(lams, dtype=float)
    if lams.ndim != 1 or lams.size < 3 or np.any(np.diff(lams) <= 0) or lams[0] < 0:
        raise ValueError("need an increasing grid of at least 3 nonnegative points")
    vals = np.asarray(phi(lams) if callable(phi) else phi, dtype=float)
    if vals.shape != lams.shape:
        raise ValueError("samples and grid differ in length")
    best = 0.0
    d = vals
    # the outermost k1 points of each derivative carry one-sided error; drop them
    for k1 in range(k + 1):
        if k1:
            d = np.gradient(d, lams, edge_order=2)
        inner = slice(k1, lams.size - k1) if k1 else slice(None)
        w = (1 + lams[inner]) ** (-m + k1) * np.abs(d[inner])
        best = max(best, float(w.max()))
    return best


def leibniz_numeric_check(spec: GradedLieAlgebra, alpha: Sequence[int], f1: GridFunction,
                          f2: GridFunction) -> dict:
    """Grid check of q~_alpha (f2 * f1) = sum c_{a1,a2} (q~_{a2} f2) * (q~_{a1} f1).

    Follows from q_alpha(xy) = sum c q_{a1}(x) q_{a2}(y) applied to x^{-1} = (y^{-1}x)^{-1} y^{-1}.
    Returns the relative L2 error and the number of terms.
    """
    alpha = tuple(alpha)
    grid = f1.grid
    lhs = q_tilde_values(spec, alpha, grid) * group_convolve(spec, f2, f1).values
    coeffs = decomposition_coeffs(spec, alpha)
    rhs = np.zeros(grid.N)
    cache = {}

    def weighted(f, a, tag):
        key = (tag, a)
        if key not in cache:
            cache[key] = GridFunction(grid, q_tilde_values(spec, a, grid) * f.values)
        return cache[key]

    for (a1, a2), c in sorted(coeffs.items()):
        conv = group_convolve(spec, weighted(f2, a2, 2), weighted(f1, a1, 1))
        rhs = rhs + float(c) * conv.values
    den = np.linalg.norm(lhs)
    err = float(np.linalg.norm(lhs - rhs) / den) if den else float(np.linalg.norm(rhs))
    return {"error": err, "terms": len(coeffs), "lhs": GridFunction(grid, lhs),
            "rhs": GridFunction(grid, rhs)}

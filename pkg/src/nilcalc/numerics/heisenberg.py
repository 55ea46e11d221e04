"""Closed forms on the three-dimensional Heisenberg group used as oracles.

Coordinates (x1, x2, x3) with x3 central and (x y)_3 = x3 + y3 + (x1 y2 - x2 y1)/2.
"""

from __future__ import annotations

import numpy as np
from scipy.interpolate import RegularGridInterpolator


def heat_kernel_h1(t: float, x1, x2, x3, n_lambda: int = 4001, lam_max: float | None = None):
    """Kernel of exp(-t R), R = -(X1^2 + X2^2), by the Mehler-type lambda integral.

    h_t(x, z) = (1/2pi) int e^{i lam z} lam / (4 pi sinh(lam t))
                exp(-(lam/4) coth(lam t) |x|^2) d lam.
    """
    x1, x2, x3 = np.broadcast_arrays(*(np.asarray(v, dtype=float) for v in (x1, x2, x3)))
    r2 = x1 ** 2 + x2 ** 2
    lam_max = lam_max or 80.0 / t
    lam = np.linspace(0.0, lam_max, n_lambda)[1:]
    w = np.full(lam.shape, lam[1] - lam[0])
    lt = lam * t
    amp = lam / (4 * np.pi * np.sinh(lt))
    coth = 1.0 / np.tanh(lt)
    out = np.empty(r2.shape)
    flat_r2, flat_z = r2.ravel(), x3.ravel()
    res = out.ravel()
    chunk = max(1, 2_000_000 // lam.size)
    for s in range(0, flat_r2.size, chunk):
        rr = flat_r2[s:s + chunk, None]
        zz = flat_z[s:s + chunk, None]
        integrand = amp * np.exp(-(lam / 4) * coth * rr) * np.cos(lam * zz)
        # lam -> 0 limit of the integrand is 1/(4 pi t) exp(-|x|^2/(4t))
        zero = np.exp(-flat_r2[s:s + chunk] / (4 * t)) / (4 * np.pi * t)
        res[s:s + chunk] = (integrand @ w + 0.5 * (lam[0]) * zero) / np.pi
    return out.reshape(r2.shape)


def heat_kernel_h1_table(t: float, r_max: float, z_max: float, n_r: int = 400, n_z: int = 400):
    """Interpolating table of h_t as a function of (|x|, z) for fast repeated sampling."""
    r = np.linspace(0.0, r_max, n_r)
    z = np.linspace(0.0, z_max, n_z)
    R, Z = np.meshgrid(r, z, indexing="ij")
    vals = heat_kernel_h1(t, R, 0.0 * R, Z)
    interp = RegularGridInterpolator((r, z), vals, method="cubic", bounds_error=False,
                                     fill_value=0.0)

    def h(x1, x2, x3):
        x1, x2, x3 = np.broadcast_arrays(x1, x2, x3)
        pts = np.stack([np.sqrt(x1 ** 2 + x2 ** 2).ravel(), np.abs(x3).ravel()], axis=-1)
        return interp(pts).reshape(x1.shape)

    return h

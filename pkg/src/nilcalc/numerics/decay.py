"""Log-log decay exponents of sampled kernels over homogeneous-norm shells."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..lie_core import GradedLieAlgebra, homogeneous_norm_array
from .grid import GridFunction

MIN_SHELLS = 6


@dataclass
class FitReport:
    exponent: float
    r_min: float
    r_max: float
    residual: float
    shells: list          # (shell_radius, mean_abs, count)

    def rows(self):
        return [{"shell_radius": r, "mean_abs": m, "fitted_slope": self.exponent}
                for r, m, _ in self.shells]


def fit_window(spec: GradedLieAlgebra, f: GridFunction) -> tuple:
    """Largest admissible window: r_min = 3h (first-layer spacing), r_max = L/2."""
    first = [j for j, w in enumerate(spec.weights) if w == 1] or list(range(spec.dim))
    h = max(f.grid.h[j] for j in first)
    L = min(f.grid.L[j] for j in first)
    return 3 * h, L / 2


def decay_exponent(spec: GradedLieAlgebra, f: GridFunction, r_min: float | None = None,
                   r_max: float | None = None, n_shells: int = 10) -> FitReport:
    """Least-squares slope of log mean|f| against log |x| over shells in [r_min, r_max]."""
    lo, hi = fit_window(spec, f)
    r_min = lo if r_min is None else r_min
    r_max = hi if r_max is None else r_max
    if r_min < lo * (1 - 1e-12) or r_max > hi * (1 + 1e-12):
        raise ValueError(f"window [{r_min:.3g}, {r_max:.3g}] leaves the admissible "
                         f"range [{lo:.3g}, {hi:.3g}]")
    if not r_max > r_min:
        raise ValueError("empty fit window")
    r = homogeneous_norm_array(spec, f.grid.mesh())
    r = np.broadcast_to(r, f.grid.N)
    edges = np.geomspace(r_min, r_max, n_shells + 1)
    vals = np.abs(f.values)
    shells = []
    for a, b in zip(edges[:-1], edges[1:]):
        m = (r >= a) & (r < b)
        cnt = int(m.sum())
        if cnt == 0:
            continue
        mean = float(vals[m].mean())
        if mean <= 0:
            continue
        shells.append((float(np.sqrt(a * b)), mean, cnt))
    if len(shells) < MIN_SHELLS:
        raise ValueError(f"only {len(shells)} populated shells; need at least {MIN_SHELLS}")
    x = np.log([s[0] for s in shells])
    y = np.log([s[1] for s in shells])
    slope, icpt = np.polyfit(x, y, 1)
    resid = float(np.sqrt(np.mean((y - (slope * x + icpt)) ** 2)))
    return FitReport(float(slope), float(r_min), float(r_max), resid, shells)

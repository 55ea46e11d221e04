"""Sobolev norms on grids and the embedding inequality ||f||_inf <= C_a ||f||_{L^2_a}."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..diffops import InvariantOperator, RocklandSpec
from ..lie_core import multi_indices_upto
from .fd import FDOperator
from .grid import GridFunction


def _power_steps(rockland: RocklandSpec, a: float) -> int:
    k = a / rockland.degree
    if abs(k - round(k)) > 1e-12 or k < 0:
        raise ValueError(f"a={a} is not a multiple of the operator degree {rockland.degree}")
    return int(round(k))


def bessel_power(rockland: RocklandSpec, f: GridFunction, k: int) -> GridFunction:
    """(I + R)^k f by repeated finite differences."""
    R = FDOperator(rockland.operator, f.grid)
    u = f.values
    for _ in range(k):
        u = u + R(u)
    return GridFunction(f.grid, u)


def sobolev_norm(f: GridFunction, a: float, spec=None, rockland: RocklandSpec | None = None,
                 kind: str = "equivalent") -> float:
    """Sobolev norm of order a.

    kind="equivalent": sum_{[alpha] <= a} ||X^alpha f||_2 (needs integer a);
    kind="exact": ||(I + R)^{a/nu} f||_2 with a/nu a nonnegative integer.
    """
    if kind == "exact":
        if rockland is None:
            raise ValueError("the exact norm needs a Rockland operator")
        return bessel_power(rockland, f, _power_steps(rockland, a)).norm_l2()
    if kind != "equivalent":
        raise ValueError(f"unknown kind {kind!r}")
    spec = spec if spec is not None else rockland.spec
    if a != int(a) or a < 0:
        raise ValueError("the equivalent norm needs a nonnegative integer order")
    total = 0.0
    for alpha in multi_indices_upto(spec, int(a)):
        op = InvariantOperator(spec, {alpha: 1})
        total += GridFunction(f.grid, FDOperator(op, f.grid)(f.values)).norm_l2()
    return total


@dataclass
class SobolevCheck:
    ratio: float
    sup: float
    sobolev: float
    constant: float


def sobolev_inequality_check(f: GridFunction, a: float, rockland: RocklandSpec,
                             constant: float) -> SobolevCheck:
    """||f||_inf / (C_a ||(I+R)^{a/nu} f||_2); at most 1 up to discretisation error when a > Q/2."""
    Q = rockland.spec.homogeneous_dimension
    if not a > Q / 2:
        raise ValueError(f"embedding needs a > Q/2 = {Q / 2}")
    sup = f.norm_linf()
    if sup == 0:
        return SobolevCheck(0.0, 0.0, 0.0, constant)
    s = sobolev_norm(f, a, rockland=rockland, kind="exact")
    return SobolevCheck(sup / (constant * s), sup, s, constant)


def fourier_sobolev_norm(f: GridFunction, a: float) -> float:
    """Abelian oracle: ||(1 + |xi|^2)^{a/2} f^||_2 by FFT (Plancherel-normalised)."""
    vals = f.values
    axes = tuple(range(vals.ndim))
    F = np.fft.fftn(vals)
    xi2 = 0.0
    for ax, (n, h) in enumerate(zip(f.grid.N, f.grid.h)):
        k = 2 * np.pi * np.fft.fftfreq(n, d=h)
        shape = [1] * vals.ndim
        shape[ax] = n
        xi2 = xi2 + k.reshape(shape) ** 2
    G = np.fft.ifftn(F * (1 + xi2) ** (a / 2), axes=axes)
    return float(np.sqrt((np.abs(G) ** 2).sum() * f.grid.cell))

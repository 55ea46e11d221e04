"""Schrodinger representations of the three-dimensional Heisenberg group.

Realisation on L^2(R):
    pi_lam(x1, x2, x3) phi(u) = exp(i lam (x3 + x2 u + x1 x2 / 2)) phi(u + x1),
a unitary representation for the law (x y)_3 = x3 + y3 + (x1 y2 - x2 y1)/2.
Its derivative gives pi(X1) = d/du, pi(X2) = i lam u, pi(X3) = i lam.
Matrices use the lam-adapted Hermite functions h_n^lam(u) = |lam|^{1/4} h_n(|lam|^{1/2} u).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..lie_core import ConsistencyError
from .grid import GridFunction


def hermite_functions(n: int, v: np.ndarray) -> np.ndarray:
    """Orthonormal Hermite functions h_0..h_{n-1} at v, shape (n,) + v.shape."""
    v = np.asarray(v, dtype=float)
    out = np.empty((n,) + v.shape)
    out[0] = np.pi ** -0.25 * np.exp(-v ** 2 / 2)
    if n > 1:
        out[1] = np.sqrt(2.0) * v * out[0]
    for k in range(1, n - 1):
        out[k + 1] = np.sqrt(2.0 / (k + 1)) * v * out[k] - np.sqrt(k / (k + 1)) * out[k - 1]
    return out


def _u_grid(lam: float, n: int, shift: float = 0.0, dv: float = 0.05):
    """Quadrature nodes in u covering the first n adapted Hermite functions."""
    s = np.sqrt(abs(lam))
    vmax = np.sqrt(2 * n + 1) + 8.0 + abs(shift) * s
    v = np.arange(-vmax, vmax + dv / 2, dv)
    return v / s, dv / s


def adapted_hermite(lam: float, n: int, u: np.ndarray) -> np.ndarray:
    s = np.sqrt(abs(lam))
    return np.sqrt(s) * hermite_functions(n, s * u)


@dataclass
class RepMatrix:
    lam: float
    N: int
    matrix: np.ndarray
    meta: dict = field(default_factory=dict)

    @property
    def block(self) -> int:
        return self.N // 2

    def lower(self, M=None):
        M = self.matrix if M is None else M
        return M[:self.block, :self.block]

    def hs_norm(self) -> float:
        return float(np.linalg.norm(self.matrix))

    def unitarity_defect(self) -> float:
        M = self.matrix
        k = self.block
        return float(max(np.abs((M @ M.conj().T)[:k, :k] - np.eye(k)).max(),
                         np.abs((M.conj().T @ M)[:k, :k] - np.eye(k)).max()))


def schrodinger_rep(lam: float, x, N: int = 64, check: bool = False,
                    tol: float = 1e-6) -> RepMatrix:
    """Matrix <pi_lam(x) h_m, h_n> on the first N adapted Hermite functions."""
    if lam == 0:
        raise ValueError("lam must be nonzero")
    x1, x2, x3 = (float(c) for c in x)
    u, du = _u_grid(lam, N, x1)
    Hn = adapted_hermite(lam, N, u)
    Hm = adapted_hermite(lam, N, u + x1)
    phase = np.exp(1j * lam * (x3 + x2 * u + x1 * x2 / 2))
    M = (Hn * phase) @ Hm.T * du
    rep = RepMatrix(lam, N, M)
    if check:
        d = rep.unitarity_defect()
        rep.meta["unitarity_defect"] = d
        if d > tol:
            raise ConsistencyError(f"truncation defect {d:.2e} above {tol}; increase N")
    return rep


def homomorphism_defect(lam: float, x, y, N: int = 64) -> float:
    """max |(pi(x) pi(y) - pi(xy))_{nm}| over n, m < N/2."""
    x1, x2, x3 = x
    y1, y2, y3 = y
    xy = (x1 + y1, x2 + y2, x3 + y3 + (x1 * y2 - x2 * y1) / 2)
    A = schrodinger_rep(lam, x, N).matrix
    B = schrodinger_rep(lam, y, N).matrix
    C = schrodinger_rep(lam, xy, N).matrix
    k = N // 2
    return float(np.abs((A @ B)[:k, :k] - C[:k, :k]).max())


def generator_matrix(lam: float, j: int, N: int) -> np.ndarray:
    """pi_lam(X_j) on the first N adapted Hermite functions (j = 0, 1, 2)."""
    s = np.sqrt(abs(lam))
    n = np.arange(N)
    up = np.sqrt((n[:-1] + 1) / 2.0)        # coefficient linking h_n and h_{n+1}
    M = np.zeros((N, N), dtype=complex)
    if j == 0:
        # d/du h_n = s (sqrt(n/2) h_{n-1} - sqrt((n+1)/2) h_{n+1})
        M[n[:-1], n[:-1] + 1] = s * up
        M[n[:-1] + 1, n[:-1]] = -s * up
    elif j == 1:
        # i lam u h_n = i lam / s (sqrt(n/2) h_{n-1} + sqrt((n+1)/2) h_{n+1})
        M[n[:-1], n[:-1] + 1] = 1j * lam / s * up
        M[n[:-1] + 1, n[:-1]] = 1j * lam / s * up
    elif j == 2:
        M = 1j * lam * np.eye(N)
    else:
        raise ValueError("generator index out of range")
    return M


def group_fourier_h1(f: GridFunction, lam: float, N: int = 32) -> RepMatrix:
    """f^(pi_lam) = int f(x) pi_lam(x)^* dx by quadrature, as an N x N matrix."""
    g = f.grid
    a1, a2, a3 = g.axes()
    h1, h2, h3 = g.h
    # int f e^{-i lam x3} dx3
    Ft = np.tensordot(f.values, np.exp(-1j * lam * a3), axes=([2], [0])) * h3
    shift = max(abs(a1[0]), abs(a1[-1]))
    u, du = _u_grid(lam, N, shift)
    # A(x1, u) = int Ft(x1, x2) exp(i lam x2 (x1/2 - u)) dx2
    E1 = np.exp(1j * lam * np.outer(a1, a2) / 2)
    E2 = np.exp(-1j * lam * np.outer(a2, u))
    A = (Ft * E1) @ E2 * h2
    Hn = adapted_hermite(lam, N, u)
    M = np.zeros((N, N), dtype=complex)
    for i, x1 in enumerate(a1):
        Hm = adapted_hermite(lam, N, u - x1)
        M += (Hn * A[i]) @ Hm.T
    M *= du * h1
    return RepMatrix(lam, N, M)


@dataclass
class PlancherelReport:
    lhs: float
    rhs: float
    constant: float
    rel_error: float


def plancherel_integral(f: GridFunction, lams: np.ndarray, N: int = 32) -> float:
    """int_R ||f^(pi_lam)||_HS^2 |lam| d lam over the grid lams (> 0), even extension.

    The segment [0, lams[0]] uses the value at lams[0]; the rest is trapezoidal.
    Real f gives equal norms at lam and -lam.
    """
    lams = np.asarray(lams, dtype=float)
    vals = np.array([group_fourier_h1(f, lam, N).hs_norm() ** 2 * lam for lam in lams])
    total = vals[0] * lams[0] + np.trapezoid(vals, lams)
    if np.iscomplexobj(f.values):
        neg = np.array([group_fourier_h1(f, -lam, N).hs_norm() ** 2 * lam for lam in lams])
        total += neg[0] * lams[0] + np.trapezoid(neg, lams)
        return float(total)
    return float(2 * total)


def default_lambda_grid(lam_min: float = 0.05, lam_max: float = 14.0, n: int = 40) -> np.ndarray:
    return np.geomspace(lam_min, lam_max, n)


def calibrate_plancherel(references, lams=None, N: int = 32, drift_tol: float = 0.01) -> float:
    """Constant c with ||f||_2^2 = c int ||f^||_HS^2 |lam| d lam, fixed on references[0].

    A second reference must reproduce the same constant within ``drift_tol``.
    """
    lams = default_lambda_grid() if lams is None else lams
    cs = []
    for f in references:
        cs.append(f.norm_l2() ** 2 / plancherel_integral(f, lams, N))
    for c in cs[1:]:
        if abs(c / cs[0] - 1) > drift_tol:
            raise ConsistencyError(f"Plancherel constant drifts: {cs[0]:.5g} vs {c:.5g}")
    return cs[0]


def plancherel_check_h1(f: GridFunction, constant: float, lams=None, N: int = 32) -> PlancherelReport:
    lams = default_lambda_grid() if lams is None else lams
    lhs = f.norm_l2() ** 2
    rhs = constant * plancherel_integral(f, lams, N)
    rel = abs(rhs - lhs) / lhs if lhs else abs(rhs)
    return PlancherelReport(lhs, rhs, constant, float(rel))


def intertwining_error(f: GridFunction, Xf: GridFunction, j: int, lam: float, N: int = 32) -> float:
    """|| (X_j f)^ - pi(X_j) f^ ||_HS / || pi(X_j) f^ ||_HS on rows n < N/2."""
    F = group_fourier_h1(f, lam, N).matrix
    G = group_fourier_h1(Xf, lam, N).matrix
    P = generator_matrix(lam, j, N) @ F
    k = N // 2
    return float(np.linalg.norm((G - P)[:k]) / np.linalg.norm(P[:k]))

"""Polynomial algebra on a graded group.

Invariant vector fields in coordinates, the basis q_alpha dual to the
ordered monomials X^beta under <X, p> = (X p)(0), the expansion of q_alpha(xy)
in the tensor basis, and Taylor polynomials adapted to the dilations.
"""

from __future__ import annotations

from fractions import Fraction
from functools import lru_cache
from typing import Mapping, Sequence

from .lie_core import (ConsistencyError, GradedLieAlgebra, GroupLaw, group_law,
                       index_key, multi_indices, multi_indices_upto, require_valid)
from .polynomial import Polynomial, multi_factorial, variable_names


class CoordinateOperator:
    """Differential operator sum_gamma p_gamma(x) d^gamma in coordinates."""

    __slots__ = ("variables", "terms")

    def __init__(self, variables, terms: Mapping | None = None):
        self.variables = tuple(variables)
        self.terms = {}
        for g, p in (terms or {}).items():
            g = tuple(g)
            if not isinstance(p, Polynomial):
                p = Polynomial.constant(self.variables, p)
            if not p.is_zero():
                self.terms[g] = self.terms[g] + p if g in self.terms else p
        self.terms = {g: p for g, p in self.terms.items() if not p.is_zero()}

    @classmethod
    def identity(cls, variables):
        variables = tuple(variables)
        return cls(variables, {(0,) * len(variables): Polynomial.constant(variables, 1)})

    def apply(self, f: Polynomial) -> Polynomial:
        if f.variables != self.variables:
            raise ValueError("operator and polynomial use different variables")
        out = Polynomial(self.variables)
        for g, p in self.terms.items():
            d = f
            for i, k in enumerate(g):
                if k:
                    d = d.diff(i, k)
                    if d.is_zero():
                        break
            if not d.is_zero():
                out = out + p * d
        return out

    def __add__(self, other):
        terms = dict(self.terms)
        for g, p in other.terms.items():
            terms[g] = terms[g] + p if g in terms else p
        return CoordinateOperator(self.variables, terms)

    def __sub__(self, other):
        return self + other * (-1)

    def __mul__(self, c):
        return CoordinateOperator(self.variables, {g: p * c for g, p in self.terms.items()})

    __rmul__ = __mul__

    def __eq__(self, other):
        return isinstance(other, CoordinateOperator) and self.variables == other.variables \
            and self.terms == other.terms

    def compose(self, other: "CoordinateOperator") -> "CoordinateOperator":
        """self o other, via the multivariate Leibniz rule."""
        out: dict = {}
        for g1, p1 in self.terms.items():
            for g2, p2 in other.terms.items():
                for split in _sub_multi_indices(g1):
                    rest = tuple(a - b for a, b in zip(g1, split))
                    coef = 1
                    d = p2
                    for i, k in enumerate(split):
                        if k:
                            d = d.diff(i, k)
                    if d.is_zero():
                        continue
                    for a, b in zip(g1, split):
                        coef *= _binom(a, b)
                    g = tuple(a + b for a, b in zip(rest, g2))
                    term = p1 * d * coef
                    out[g] = out[g] + term if g in out else term
        return CoordinateOperator(self.variables, out)

    def embedded(self, variables, positions: Sequence[int]) -> "CoordinateOperator":
        """Same operator acting on the variables at ``positions`` of a larger set."""
        variables = tuple(variables)
        out = {}
        for g, p in self.terms.items():
            ng = [0] * len(variables)
            for i, k in enumerate(g):
                ng[positions[i]] = k
            out[tuple(ng)] = p.embed(variables, positions)
        return CoordinateOperator(variables, out)

    def order(self) -> int:
        return max((sum(g) for g in self.terms), default=-1)

    def to_string(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        for g, p in sorted(self.terms.items(), key=lambda t: tuple(-a for a in t[0])):
            d = "*".join(f"d{i + 1}" + (f"^{k}" if k > 1 else "") for i, k in enumerate(g) if k)
            parts.append(f"({p}){'*' + d if d else ''}")
        return " + ".join(parts)

    __str__ = to_string

    def __repr__(self):
        return f"CoordinateOperator({self.to_string()})"


def _binom(a, b):
    from math import comb
    return comb(a, b)


def _sub_multi_indices(g):
    out = [()]
    for k in g:
        out = [s + (i,) for s in out for i in range(k + 1)]
    return out


# ---------------------------------------------------------------- group law helpers

GroupLawTable = GroupLaw


def group_law_polynomials(spec: GradedLieAlgebra) -> GroupLaw:
    return group_law(spec)


def substitute_group_law(spec: GradedLieAlgebra, p: Polynomial) -> Polynomial:
    """p(xy) as a polynomial in (x, y), for p in the x variables."""
    table = group_law(spec)
    if p.nvars != spec.dim:
        raise ValueError("polynomial must be in the group coordinates")
    return p.substitute(list(table.coordinates), table.variables)


@lru_cache(maxsize=None)
def left_invariant_fields(spec: GradedLieAlgebra) -> tuple:
    table = group_law(spec)
    n = spec.dim
    xv = spec.x_vars()
    fields = []
    for j in range(n):
        terms = {}
        for k in range(n):
            a = table.coordinates[k].diff(n + j)
            a = _set_zero(a, range(n, 2 * n)).restrict(xv, list(range(n)))
            if not a.is_zero():
                terms[_unit(n, k)] = a
        fields.append(CoordinateOperator(xv, terms))
    return tuple(fields)


@lru_cache(maxsize=None)
def right_invariant_fields(spec: GradedLieAlgebra) -> tuple:
    table = group_law(spec)
    n = spec.dim
    xv = spec.x_vars()
    fields = []
    for j in range(n):
        terms = {}
        for k in range(n):
            # d/dt of (exp(tX_j) x)_k at t=0: differentiate in the left factor
            a = table.coordinates[k].diff(j)
            a = _set_zero(a, range(n)).restrict(xv, list(range(n, 2 * n)))
            if not a.is_zero():
                terms[_unit(n, k)] = a
        fields.append(CoordinateOperator(xv, terms))
    return tuple(fields)


def left_invariant_field(spec: GradedLieAlgebra, j: int) -> CoordinateOperator:
    return left_invariant_fields(spec)[j]


def right_invariant_field(spec: GradedLieAlgebra, j: int) -> CoordinateOperator:
    return right_invariant_fields(spec)[j]


def _unit(n, k):
    return tuple(int(i == k) for i in range(n))


def _set_zero(p: Polynomial, indices) -> Polynomial:
    idx = set(indices)
    return Polynomial(p.variables, {
        e: c for e, c in p.terms.items() if not any(e[i] for i in idx)})


def apply_word(spec: GradedLieAlgebra, word: Sequence[int], f: Polynomial,
               fields=None) -> Polynomial:
    """X_{w1} X_{w2} ... X_{wk} f (rightmost letter acts first)."""
    fields = fields or left_invariant_fields(spec)
    for j in reversed(word):
        f = fields[j].apply(f)
        if f.is_zero():
            break
    return f


def word_of(alpha: Sequence[int]) -> tuple:
    """The word of the ordered monomial X_1^{a_1} ... X_n^{a_n}."""
    out = []
    for j, a in enumerate(alpha):
        out.extend([j] * a)
    return tuple(out)


def apply_monomial(spec: GradedLieAlgebra, alpha: Sequence[int], f: Polynomial,
                   fields=None) -> Polynomial:
    return apply_word(spec, word_of(alpha), f, fields)


def apply_all_monomials(spec: GradedLieAlgebra, f: Polynomial, max_degree: int,
                        fields=None) -> dict:
    """{alpha: X^alpha f} for every [alpha] <= max_degree, sharing work."""
    fields = fields or left_invariant_fields(spec)
    n = spec.dim
    out = {(0,) * n: f}
    for alpha in multi_indices_upto(spec, max_degree):
        if alpha in out:
            continue
        j = next(i for i, a in enumerate(alpha) if a)
        prev = alpha[:j] + (alpha[j] - 1,) + alpha[j + 1:]
        g = out[prev]
        out[alpha] = g if g.is_zero() else fields[j].apply(g)
    return out


# ---------------------------------------------------------------- dual basis

@lru_cache(maxsize=None)
def second_kind_map(spec: GradedLieAlgebra) -> tuple:
    """exp(t_1 X_1) ... exp(t_n X_n) in exponential coordinates, as polynomials in t."""
    n = spec.dim
    tv = variable_names("t", n)
    table = group_law(spec)
    point = [Polynomial(tv) for _ in range(n)]
    for j in range(n):
        step = [Polynomial.variable(tv, j) if k == j else Polynomial(tv) for k in range(n)]
        point = [c.substitute(point + step, tv) for c in table.coordinates]
    return tuple(point)


class DualBasis:
    """Degree-by-degree tables of q_alpha and of the pairing <X^beta, x^gamma>.

    The pairing uses (X^beta p)(0) = d_t^beta p(exp(t_1X_1)...exp(t_nX_n))|_{t=0}.
    """

    def __init__(self, spec: GradedLieAlgebra):
        self.spec = require_valid(spec)
        self.variables = spec.x_vars()
        self._phi = second_kind_map(spec)
        self._phi_powers: dict = {}
        self._pairing: dict = {}
        self._q: dict = {}

    def _phi_power(self, k, a):
        key = (k, a)
        if key not in self._phi_powers:
            self._phi_powers[key] = (self._phi[k] ** a) if a <= 1 else \
                self._phi_power(k, a - 1) * self._phi[k]
        return self._phi_powers[key]

    def pairing_matrix(self, d: int) -> dict:
        """{beta: {gamma: <X^beta, x^gamma>}} over [beta] = [gamma] = d."""
        if d not in self._pairing:
            tv = self._phi[0].variables
            rows = {beta: {} for beta in multi_indices(self.spec, d)}
            for gamma in multi_indices(self.spec, d):
                image = Polynomial.constant(tv, 1)
                for k, a in enumerate(gamma):
                    if a:
                        image = image * self._phi_power(k, a)
                for e, c in image.terms.items():
                    if e in rows:
                        rows[e][gamma] = c * multi_factorial(e)
            self._pairing[d] = rows
        return self._pairing[d]

    def degree_slice(self, d: int) -> dict:
        """{alpha: q_alpha} for [alpha] = d, from an exact sparse solve."""
        if d not in self._q:
            rows = self.pairing_matrix(d)
            keys = list(multi_indices(self.spec, d))
            inverse = _sparse_inverse(rows, keys)
            # q_alpha = sum_gamma (A^{-1})[gamma, alpha] x^gamma
            out = {}
            for alpha in keys:
                out[alpha] = Polynomial(self.variables, {
                    gamma: inverse[gamma].get(alpha, 0) for gamma in keys})
            self._q[d] = out
        return self._q[d]

    def q(self, alpha: Sequence[int]) -> Polynomial:
        alpha = tuple(alpha)
        return self.degree_slice(self.spec.degree(alpha))[alpha]

    def q_tilde(self, alpha: Sequence[int]) -> Polynomial:
        """q_alpha(x^{-1}) = q_alpha(-x)."""
        return self.q(alpha).dilate((1,) * self.spec.dim, -1)

    def coordinates(self, p: Polynomial) -> dict:
        """Coefficients of p in the q basis: p = sum_alpha <X^alpha, p> q_alpha."""
        out = {}
        w = self.spec.weights
        by_degree: dict = {}
        for gamma, c in p.terms.items():
            by_degree.setdefault(sum(a * b for a, b in zip(w, gamma)), []).append((gamma, c))
        for d, items in by_degree.items():
            rows = self.pairing_matrix(d)
            for alpha, row in rows.items():
                v = sum((c * row.get(gamma, 0) for gamma, c in items), Fraction(0))
                if v:
                    out[alpha] = v
        return out

    def from_coordinates(self, coords: Mapping) -> Polynomial:
        out = Polynomial(self.variables)
        for alpha, c in coords.items():
            out = out + self.q(alpha) * c
        return out


def _sparse_inverse(rows: Mapping, keys: Sequence) -> dict:
    """Exact inverse of a sparse square matrix given as {row: {col: value}}."""
    work = {r: dict(rows.get(r, {})) for r in keys}
    aug = {r: {r: Fraction(1)} for r in keys}
    pivot_of = {}
    remaining = set(keys)
    for col in keys:
        candidates = [r for r in remaining if work[r].get(col)]
        if not candidates:
            raise ConsistencyError("duality system is singular; group-law data is corrupted")
        piv = min(candidates, key=lambda r: (len(work[r]), index_key((1,) * len(r), r)))
        remaining.discard(piv)
        pivot_of[col] = piv
        pv = work[piv][col]
        if pv != 1:
            work[piv] = {c: v / pv for c, v in work[piv].items()}
            aug[piv] = {c: v / pv for c, v in aug[piv].items()}
        for r in keys:
            if r == piv:
                continue
            f = work[r].get(col)
            if not f:
                continue
            row, arow = work[r], aug[r]
            for c, v in work[piv].items():
                nv = row.get(c, 0) - f * v
                if nv:
                    row[c] = nv
                else:
                    row.pop(c, None)
            for c, v in aug[piv].items():
                nv = arow.get(c, 0) - f * v
                if nv:
                    arow[c] = nv
                else:
                    arow.pop(c, None)
    # row pivot_of[col] of the augmented block is row `col` of the inverse
    return {col: aug[pivot_of[col]] for col in keys}


@lru_cache(maxsize=None)
def dual_basis(spec: GradedLieAlgebra) -> DualBasis:
    return DualBasis(spec)


def dual_polynomials(spec: GradedLieAlgebra, d: int) -> dict:
    if d < 0:
        raise ValueError("degree must be nonnegative")
    return dual_basis(spec).degree_slice(d)


def pairing(spec: GradedLieAlgebra, beta: Sequence[int], p: Polynomial) -> Fraction:
    """<X^beta, p> = (X^beta p)(0) through the second-kind parametrisation."""
    d = spec.degree(beta)
    row = dual_basis(spec).pairing_matrix(d)[tuple(beta)]
    return sum((c * row.get(g, 0) for g, c in p.terms.items()), Fraction(0))


# ---------------------------------------------------------------- Lemma-type expansions

def decomposition_coeffs(spec: GradedLieAlgebra, alpha: Sequence[int],
                         check: bool = True) -> dict:
    """{(alpha1, alpha2): c} with q_alpha(xy) = sum c q_alpha1(x) q_alpha2(y)."""
    basis = dual_basis(spec)
    n = spec.dim
    qa = basis.q(alpha)
    expanded = substitute_group_law(spec, qa)
    # split each term into x-part and y-part, then project both factors
    by_y: dict = {}
    for e, c in expanded.terms.items():
        by_y.setdefault(e[n:], {})[e[:n]] = c
    coeffs: dict = {}
    for ey, xpart in by_y.items():
        xcoords = basis.coordinates(Polynomial(basis.variables, xpart))
        ycoords = basis.coordinates(Polynomial.monomial(basis.variables, ey))
        for a1, c1 in xcoords.items():
            for a2, c2 in ycoords.items():
                key = (a1, a2)
                coeffs[key] = coeffs.get(key, 0) + c1 * c2
    coeffs = {k: v for k, v in coeffs.items() if v}
    if check:
        table = group_law(spec)
        recon = Polynomial(table.variables)
        xpos, ypos = list(range(n)), list(range(n, 2 * n))
        for (a1, a2), c in coeffs.items():
            recon = recon + basis.q(a1).embed(table.variables, xpos) * \
                basis.q(a2).embed(table.variables, ypos) * c
        if not (recon - expanded).is_zero():
            raise ConsistencyError(f"decomposition of q_{tuple(alpha)} leaves a residual")
    return coeffs


def product_projection(spec: GradedLieAlgebra, alpha1, alpha2):
    """Coefficients of q_alpha1 q_alpha2 in the q basis, and the exact residual."""
    basis = dual_basis(spec)
    prod = basis.q(alpha1) * basis.q(alpha2)
    coords = basis.coordinates(prod)
    residual = prod - basis.from_coordinates(coords)
    return coords, residual


def taylor_polynomial(spec: GradedLieAlgebra, f: Polynomial, M: int) -> Polynomial:
    """P_{x,M}(z) = sum_{[alpha] <= M} (X^alpha f)(x) q_alpha(z), in variables (x, z)."""
    n = spec.dim
    basis = dual_basis(spec)
    xz = spec.x_vars() + variable_names("z", n)
    derivs = apply_all_monomials(spec, f, M)
    out = Polynomial(xz)
    for alpha in multi_indices_upto(spec, M):
        d = derivs[alpha]
        if d.is_zero():
            continue
        out = out + d.embed(xz, list(range(n))) * basis.q(alpha).embed(xz, list(range(n, 2 * n)))
    return out


def taylor_remainder(spec: GradedLieAlgebra, f: Polynomial, M: int) -> Polynomial:
    """f(xz) - P_{x,M}(z) in variables (x, z)."""
    n = spec.dim
    xz = spec.x_vars() + variable_names("z", n)
    fxz = substitute_group_law(spec, f).rename(xz)
    return fxz - taylor_polynomial(spec, f, M)


def z_fields(spec: GradedLieAlgebra) -> tuple:
    """Left-invariant fields acting on the z block of (x, z)."""
    n = spec.dim
    xz = spec.x_vars() + variable_names("z", n)
    return tuple(_z_embed(F, xz, n) for F in left_invariant_fields(spec))


def _z_embed(F: CoordinateOperator, xz, n):
    zvars = variable_names("z", n)
    renamed = CoordinateOperator(zvars, {g: p.rename(zvars) for g, p in F.terms.items()})
    return renamed.embedded(xz, list(range(n, 2 * n)))


def qbasis_table(spec: GradedLieAlgebra, max_degree: int) -> list:
    """Rows (alpha, [alpha], q_alpha) in canonical order."""
    basis = dual_basis(spec)
    return [(alpha, spec.degree(alpha), basis.q(alpha))
            for alpha in multi_indices_upto(spec, max_degree)]

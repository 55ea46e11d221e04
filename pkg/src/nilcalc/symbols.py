"""Symbols of differential operators, difference operators and symbolic calculus.

A symbol sigma(x, pi) = sum_beta p_beta(x) pi(X)^beta is stored like a
:class:`~nilcalc.diffops.VarCoeffOperator`. Its kernel is
kappa_x = sum_beta p_beta(x) X^beta delta_0, where X^beta delta_0 is the
distribution with <X^beta delta_0, f> = X^beta[f(v^{-1})](v=0), so that
Tf(x) = (f * kappa_x)(x) with f * kappa(x) = <kappa, u -> f(x u^{-1})>.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Mapping, Sequence

from .diffops import (VarCoeffOperator, _subword_splits, compose, formal_adjoint,
                      pbw, random_operator, rockland_example, sub_laplacian)
from .group_poly import (apply_all_monomials, apply_word, decomposition_coeffs,
                         dual_basis, left_invariant_fields, word_of)
from .lie_core import GradedLieAlgebra, multi_indices_upto
from .polynomial import Polynomial


class DiffOpSymbol:
    """sigma(x, pi) = sum_beta p_beta(x) pi(X)^beta with normal-ordered beta."""

    def __init__(self, spec: GradedLieAlgebra, terms: Mapping | None = None):
        op = VarCoeffOperator(spec, terms or {})
        self.spec = spec
        self.variables = op.variables
        self.terms = op.terms

    @classmethod
    def from_operator(cls, op: VarCoeffOperator) -> "DiffOpSymbol":
        return cls(op.spec, op.terms)

    @classmethod
    def identity(cls, spec):
        return cls(spec, {(0,) * spec.dim: 1})

    @classmethod
    def monomial(cls, spec, beta, coefficient=1):
        return cls(spec, {tuple(beta): coefficient})

    @classmethod
    def multiplication(cls, spec, p: Polynomial):
        return cls(spec, {(0,) * spec.dim: p})

    def op(self) -> VarCoeffOperator:
        return VarCoeffOperator(self.spec, self.terms)

    def __add__(self, other):
        return DiffOpSymbol.from_operator(self.op() + other.op())

    def __sub__(self, other):
        return DiffOpSymbol.from_operator(self.op() - other.op())

    def __mul__(self, other):
        if isinstance(other, DiffOpSymbol):
            return symbol_product(self, other)
        return DiffOpSymbol.from_operator(self.op() * other)

    def __rmul__(self, c):
        return DiffOpSymbol.from_operator(self.op() * c)

    def __eq__(self, other):
        return isinstance(other, DiffOpSymbol) and self.spec == other.spec \
            and self.terms == other.terms

    def is_zero(self):
        return not self.terms

    def is_constant_coefficient(self):
        return all(p.total_degree() <= 0 for p in self.terms.values())

    def order(self) -> int:
        return symbol_order(self)

    def to_string(self):
        """Same layout as the operator, X^beta standing for pi(X)^beta."""
        return self.op().to_string()

    __str__ = to_string

    def __repr__(self):
        return f"DiffOpSymbol({self.to_string()})"


@dataclass(frozen=True)
class SymbolClassTag:
    """S^m_{rho,delta}: order m and type (rho, delta), 1 >= rho >= delta >= 0, delta != 1."""
    m: float
    rho: float = 1.0
    delta: float = 0.0

    def __post_init__(self):
        if not (1 >= self.rho >= self.delta >= 0) or self.delta == 1:
            raise ValueError(f"invalid type (rho, delta) = ({self.rho}, {self.delta})")

    def contained_in(self, other: "SymbolClassTag") -> bool:
        return self.m <= other.m and self.delta <= other.delta and self.rho >= other.rho

    def __le__(self, other):
        return self.contained_in(other)


@dataclass(frozen=True)
class SeminormRequest:
    """Index triple (a, b, c) of a symbol seminorm; gamma is fixed to 0."""
    a: int
    b: int
    c: int
    gamma: int = 0

    def __post_init__(self):
        for name in ("a", "b", "c"):
            v = getattr(self, name)
            if not isinstance(v, int) or v < 0:
                raise ValueError(f"{name} must be a nonnegative integer")
        if self.gamma != 0:
            raise ValueError("only gamma = 0 is supported")


def class_tag(sigma: DiffOpSymbol) -> SymbolClassTag:
    """Sufficient class for a differential symbol with bounded coefficients."""
    return SymbolClassTag(symbol_order(sigma), 1.0, 0.0)


# ---------------------------------------------------------------- difference operators

class _DeltaTable:
    """Cache of Delta^alpha pi(X)^beta as {beta': c}."""

    def __init__(self, spec):
        self.spec = spec
        self.fields = left_invariant_fields(spec)
        self.basis = dual_basis(spec)
        self._values: dict = {}
        self._table: dict = {}

    def value(self, sub: tuple, alpha: tuple) -> Fraction:
        key = (sub, alpha)
        if key not in self._values:
            w = self.spec.weights
            if sum(w[j] for j in sub) != self.spec.degree(alpha):
                v = Fraction(0)
            else:
                v = apply_word(self.spec, sub, self.basis.q(alpha), self.fields).constant_term()
            self._values[key] = v
        return self._values[key]

    def apply(self, alpha: tuple, beta: tuple) -> dict:
        key = (alpha, beta)
        if key in self._table:
            return self._table[key]
        spec = self.spec
        out: dict = {}
        if spec.degree(alpha) <= spec.degree(beta):
            P = pbw(spec)
            for sub, rest in _subword_splits(word_of(beta)):
                c = self.value(sub, alpha)
                if not c:
                    continue
                for b, v in P.normal_order(rest).items():
                    out[b] = out.get(b, 0) + c * v
        out = {b: v for b, v in out.items() if v}
        self._table[key] = out
        return out


@lru_cache(maxsize=None)
def _delta_table(spec) -> _DeltaTable:
    return _DeltaTable(spec)


def difference_op(alpha: Sequence[int], sigma: DiffOpSymbol) -> DiffOpSymbol:
    """Delta^alpha sigma: multiply the kernel by q~_alpha(u) = q_alpha(u^{-1})."""
    alpha = tuple(alpha)
    if len(alpha) != sigma.spec.dim or any(a < 0 for a in alpha):
        raise ValueError(f"invalid multi-index {alpha}")
    table = _delta_table(sigma.spec)
    out: dict = {}
    for beta, p in sigma.terms.items():
        for b, c in table.apply(alpha, beta).items():
            out[b] = out[b] + p * c if b in out else p * c
    return DiffOpSymbol(sigma.spec, out)


def delta_monomial(spec: GradedLieAlgebra, alpha, beta) -> dict:
    """Delta^alpha pi(X)^beta as {beta': rational}."""
    return dict(_delta_table(spec).apply(tuple(alpha), tuple(beta)))


def kernel_pairing(spec: GradedLieAlgebra, terms: Mapping, g: Polynomial,
                   weight: Polynomial | None = None) -> Fraction:
    """<weight * sum_beta c_beta X^beta delta_0, g> for constant c_beta.

    Computed directly: X^beta[(weight * g)(v^{-1})] at v = 0, with polynomial
    inversion v^{-1} = -v in exponential coordinates.
    """
    n = spec.dim
    if weight is not None:
        g = g * weight
    gi = g.dilate((1,) * n, -1)
    total = Fraction(0)
    for beta, c in terms.items():
        total += c * apply_word(spec, word_of(beta), gi).constant_term()
    return total


def x_derivative(beta: Sequence[int], sigma: DiffOpSymbol) -> DiffOpSymbol:
    """Apply X^beta (in x) to every coefficient."""
    fields = left_invariant_fields(sigma.spec)
    word = word_of(beta)
    return DiffOpSymbol(sigma.spec, {
        b: apply_word(sigma.spec, word, p, fields) for b, p in sigma.terms.items()})


def symbol_product(s1: DiffOpSymbol, s2: DiffOpSymbol) -> DiffOpSymbol:
    """Pointwise operator product sigma1(x, pi) sigma2(x, pi)."""
    if s1.spec != s2.spec:
        raise ValueError("symbols live on different groups")
    P = pbw(s1.spec)
    out: dict = {}
    for b1, p1 in s1.terms.items():
        for b2, p2 in s2.terms.items():
            pp = p1 * p2
            for b, c in P.multiply(b1, b2).items():
                out[b] = out[b] + pp * c if b in out else pp * c
    return DiffOpSymbol(s1.spec, out)


def op_compose_direct(s1: DiffOpSymbol, s2: DiffOpSymbol) -> DiffOpSymbol:
    return DiffOpSymbol.from_operator(compose(s1.op(), s2.op()))


def op_adjoint_direct(sigma: DiffOpSymbol) -> DiffOpSymbol:
    return DiffOpSymbol.from_operator(formal_adjoint(sigma.op()))


def compose_expansion(s1: DiffOpSymbol, s2: DiffOpSymbol, M: int) -> DiffOpSymbol:
    """sum_{[alpha] <= M} Delta^alpha sigma1 . X_x^alpha sigma2."""
    if M < 0:
        raise ValueError("M must be nonnegative")
    spec = s1.spec
    out = DiffOpSymbol(spec)
    derived = _x_derivatives(s2, M)
    for alpha in multi_indices_upto(spec, M):
        d2 = derived.get(alpha)
        if d2 is None or d2.is_zero():
            continue
        d1 = difference_op(alpha, s1)
        if d1.is_zero():
            continue
        out = out + symbol_product(d1, d2)
    return out


def _x_derivatives(sigma: DiffOpSymbol, M: int) -> dict:
    """{alpha: X_x^alpha sigma} for [alpha] <= M, sharing work per coefficient."""
    spec = sigma.spec
    per_beta = {b: apply_all_monomials(spec, p, M) for b, p in sigma.terms.items()}
    return {alpha: DiffOpSymbol(spec, {b: d[alpha] for b, d in per_beta.items()})
            for alpha in multi_indices_upto(spec, M)}


def pointwise_adjoint(sigma: DiffOpSymbol) -> DiffOpSymbol:
    """sigma(x, pi)^*: real coefficients, (pi(X)^beta)^* = (-1)^{|beta|} pi(X)^{reversed}."""
    P = pbw(sigma.spec)
    out: dict = {}
    for beta, p in sigma.terms.items():
        word = tuple(reversed(word_of(beta)))
        sign = -1 if len(word) % 2 else 1
        for b, c in P.normal_order(word).items():
            out[b] = out[b] + p * (c * sign) if b in out else p * (c * sign)
    return DiffOpSymbol(sigma.spec, out)


def adjoint_expansion(sigma: DiffOpSymbol, M: int) -> DiffOpSymbol:
    """sum_{[alpha] <= M} Delta^alpha X_x^alpha sigma^*."""
    if M < 0:
        raise ValueError("M must be nonnegative")
    star = pointwise_adjoint(sigma)
    out = DiffOpSymbol(sigma.spec)
    for alpha, d in _x_derivatives(star, M).items():
        if d.is_zero():
            continue
        out = out + difference_op(alpha, d)
    return out


def symbol_order(sigma: DiffOpSymbol) -> int:
    """max [beta] over nonzero coefficients; -1 for the zero symbol.

    An upper bound for the S^m order when the coefficients and all their
    derivatives are bounded; polynomial coefficients are read formally.
    """
    w = sigma.spec.weights
    return max((sum(a * b for a, b in zip(w, beta)) for beta in sigma.terms), default=-1)


# ---------------------------------------------------------------- Leibniz rule

def leibniz_coeff_table(spec: GradedLieAlgebra, alpha: Sequence[int]) -> dict:
    """{(alpha1, alpha2): c} for Delta^alpha(s1 s2) = sum c Delta^alpha1 s1 Delta^alpha2 s2."""
    return decomposition_coeffs(spec, tuple(alpha))


def leibniz_rhs(spec, alpha, s1: DiffOpSymbol, s2: DiffOpSymbol, table=None) -> DiffOpSymbol:
    table = table if table is not None else leibniz_coeff_table(spec, alpha)
    out = DiffOpSymbol(spec)
    for (a1, a2), c in table.items():
        d1 = difference_op(a1, s1)
        if d1.is_zero():
            continue
        d2 = difference_op(a2, s2)
        if d2.is_zero():
            continue
        out = out + symbol_product(d1, d2) * c
    return out


def verify_leibniz(spec, alpha, s1: DiffOpSymbol, s2: DiffOpSymbol):
    """Return (ok, lhs, rhs) for the Leibniz rule on the pair (s1, s2)."""
    lhs = difference_op(alpha, symbol_product(s1, s2))
    rhs = leibniz_rhs(spec, alpha, s1, s2)
    return lhs == rhs, lhs, rhs


# ---------------------------------------------------------------- kernels

@dataclass(frozen=True)
class KernelTerm:
    coefficient: Polynomial
    beta: tuple

    def to_string(self) -> str:
        mono = "*".join(f"X{j + 1}" + (f"^{a}" if a > 1 else "")
                        for j, a in enumerate(self.beta) if a)
        d = f"{mono}*delta_0" if mono else "delta_0"
        p = self.coefficient
        if p == 1:
            return d
        return f"({p})*{d}"


@dataclass(frozen=True)
class KernelDescription:
    terms: tuple
    identity: str = "Tf(x) = (f * kappa_x)(x),  (f * kappa)(x) = <kappa, u -> f(x u^{-1})>"
    pairing: str = "<X^beta delta_0, f> = X^beta[v -> f(v^{-1})](0)"

    def to_string(self) -> str:
        body = " + ".join(t.to_string() for t in self.terms) or "0"
        return f"kappa_x = {body}\n{self.identity}\n{self.pairing}"

    def to_dict(self) -> dict:
        return {"terms": [{"coefficient": str(t.coefficient), "beta": list(t.beta)}
                          for t in self.terms],
                "identity": self.identity, "pairing": self.pairing}

    __str__ = to_string


def kernel_description(sigma: DiffOpSymbol) -> KernelDescription:
    """Kernel kappa_x = sum p_beta(x) X^beta delta_0 (pairing as in the module docstring)."""
    w = sigma.spec.weights
    order = sorted(sigma.terms, key=lambda b: (-sum(a * c for a, c in zip(w, b)),
                                               tuple(-a for a in b)))
    return KernelDescription(tuple(KernelTerm(sigma.terms[b], b) for b in order))


# ---------------------------------------------------------------- generators

def random_symbol(spec: GradedLieAlgebra, rng, max_order: int = 4, max_coeff_degree: int = 3,
                  n_terms: int = 3) -> DiffOpSymbol:
    return DiffOpSymbol.from_operator(
        random_operator(spec, rng, max_order, max_coeff_degree, n_terms))


def random_constant_symbol(spec: GradedLieAlgebra, rng, max_order: int = 4,
                           n_terms: int = 3) -> DiffOpSymbol:
    betas = multi_indices_upto(spec, max_order)
    terms: dict = {}
    for _ in range(n_terms):
        b = betas[int(rng.integers(len(betas)))]
        terms[b] = terms.get(b, 0) + Fraction(int(rng.integers(1, 5)) * int(rng.choice([-1, 1])),
                                              int(rng.integers(1, 3)))
    return DiffOpSymbol(spec, terms)


def rockland_symbol(spec: GradedLieAlgebra, kind: str = "sub-laplacian") -> DiffOpSymbol:
    if kind == "sub-laplacian":
        r = sub_laplacian(spec)
    else:
        r = rockland_example(spec, variant=1 if kind.endswith("1") else 2)
    return DiffOpSymbol.from_operator(r.operator.to_var_coeff())

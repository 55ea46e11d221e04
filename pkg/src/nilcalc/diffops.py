"""Left-invariant differential operators with polynomial coefficients.

An operator is stored in canonical form sum_beta p_beta(x) X^beta, where
X^beta = X_1^{b_1} ... X_n^{b_n} is an ordered (PBW) monomial and p_beta is an
exact polynomial multiplying on the left.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from itertools import combinations
from typing import Mapping, Sequence

from .group_poly import (CoordinateOperator, apply_word,
                         left_invariant_fields, word_of)
from .lie_core import GradedLieAlgebra, SpecError, multi_indices_upto, require_valid
from .polynomial import Polynomial, as_fraction


class PBW:
    """Normal ordering in the universal enveloping algebra of ``spec``."""

    def __init__(self, spec: GradedLieAlgebra):
        self.spec = spec
        self._words: dict = {}
        self._products: dict = {}

    def normal_order(self, word: Sequence[int]) -> dict:
        """Rewrite X_{i1}...X_{ik} as {beta: coefficient} over ordered monomials."""
        word = tuple(word)
        if word in self._words:
            return self._words[word]
        n = self.spec.dim
        descent = next((i for i in range(len(word) - 1) if word[i] > word[i + 1]), None)
        if descent is None:
            beta = [0] * n
            for j in word:
                beta[j] += 1
            result = {tuple(beta): Fraction(1)}
        else:
            a, b = word[descent], word[descent + 1]
            head, tail = word[:descent], word[descent + 2:]
            result = dict(self.normal_order(head + (b, a) + tail))
            for k, c in self.spec.bracket_basis(a, b).items():
                for beta, v in self.normal_order(head + (k,) + tail).items():
                    result[beta] = result.get(beta, 0) + c * v
            result = {beta: v for beta, v in result.items() if v}
        self._words[word] = result
        return result

    def multiply(self, beta: Sequence[int], gamma: Sequence[int]) -> dict:
        key = (tuple(beta), tuple(gamma))
        if key not in self._products:
            self._products[key] = self.normal_order(word_of(beta) + word_of(gamma))
        return self._products[key]


@lru_cache(maxsize=None)
def pbw(spec: GradedLieAlgebra) -> PBW:
    return PBW(require_valid(spec))


def pbw_normal_order(spec: GradedLieAlgebra, word: Sequence[int]) -> "InvariantOperator":
    return InvariantOperator(spec, pbw(spec).normal_order(word))


def _degree(weights, beta):
    return sum(w * b for w, b in zip(weights, beta))


class InvariantOperator:
    """Element of U(g): finite combination of ordered monomials with rational coefficients."""

    def __init__(self, spec: GradedLieAlgebra, terms: Mapping | None = None):
        self.spec = spec
        self.terms = {tuple(b): as_fraction(c) for b, c in (terms or {}).items()
                      if as_fraction(c)}

    @classmethod
    def generator(cls, spec, j):
        return cls(spec, {tuple(int(i == j) for i in range(spec.dim)): 1})

    @classmethod
    def identity(cls, spec):
        return cls(spec, {(0,) * spec.dim: 1})

    def __add__(self, other):
        out = dict(self.terms)
        for b, c in other.terms.items():
            out[b] = out.get(b, 0) + c
        return InvariantOperator(self.spec, out)

    def __sub__(self, other):
        return self + other * -1

    def __mul__(self, other):
        if isinstance(other, InvariantOperator):
            out: dict = {}
            P = pbw(self.spec)
            for b1, c1 in self.terms.items():
                for b2, c2 in other.terms.items():
                    for b, c in P.multiply(b1, b2).items():
                        out[b] = out.get(b, 0) + c1 * c2 * c
            return InvariantOperator(self.spec, out)
        c = as_fraction(other)
        return InvariantOperator(self.spec, {b: v * c for b, v in self.terms.items()})

    def __rmul__(self, c):
        return self * c

    def __eq__(self, other):
        return isinstance(other, InvariantOperator) and self.terms == other.terms

    def to_var_coeff(self) -> "VarCoeffOperator":
        xv = self.spec.x_vars()
        return VarCoeffOperator(self.spec, {
            b: Polynomial.constant(xv, c) for b, c in self.terms.items()})

    def homogeneous_degree(self):
        return operator_homogeneous_degree(self.to_var_coeff())

    def to_string(self) -> str:
        return self.to_var_coeff().to_string()

    __str__ = to_string

    def __repr__(self):
        return f"InvariantOperator({self.to_string()})"


class VarCoeffOperator:
    """sum_beta p_beta(x) X^beta in canonical (normal-ordered) form."""

    def __init__(self, spec: GradedLieAlgebra, terms: Mapping | None = None):
        self.spec = spec
        self.variables = spec.x_vars()
        clean = {}
        for b, p in (terms or {}).items():
            b = tuple(b)
            if len(b) != spec.dim:
                raise SpecError(f"multi-index {b} has wrong length")
            if not isinstance(p, Polynomial):
                p = Polynomial.constant(self.variables, p)
            if p.variables != self.variables:
                raise ValueError("coefficient polynomials must use the group coordinates")
            if b in clean:
                p = clean[b] + p
            if p.is_zero():
                clean.pop(b, None)
            else:
                clean[b] = p
        self.terms = clean

    # constructors ------------------------------------------------------
    @classmethod
    def identity(cls, spec):
        return cls(spec, {(0,) * spec.dim: 1})

    @classmethod
    def generator(cls, spec, j):
        return cls(spec, {tuple(int(i == j) for i in range(spec.dim)): 1})

    @classmethod
    def monomial(cls, spec, beta, coefficient=1):
        return cls(spec, {tuple(beta): coefficient})

    @classmethod
    def multiplication(cls, spec, p: Polynomial):
        return cls(spec, {(0,) * spec.dim: p})

    # algebra -------------------------------------------------------------
    def __add__(self, other):
        out = dict(self.terms)
        for b, p in other.terms.items():
            out[b] = out[b] + p if b in out else p
        return VarCoeffOperator(self.spec, out)

    def __sub__(self, other):
        return self + other * -1

    def __neg__(self):
        return self * -1

    def __mul__(self, c):
        if isinstance(c, VarCoeffOperator):
            return compose(self, c)
        return VarCoeffOperator(self.spec, {b: p * c for b, p in self.terms.items()})

    def __rmul__(self, c):
        return VarCoeffOperator(self.spec, {b: p * c for b, p in self.terms.items()})

    def __matmul__(self, other):
        return compose(self, other)

    def __eq__(self, other):
        return isinstance(other, VarCoeffOperator) and self.spec == other.spec \
            and self.terms == other.terms

    def is_zero(self):
        return not self.terms

    def apply(self, f: Polynomial) -> Polynomial:
        return apply(self, f)

    def order(self) -> int:
        """Maximal homogeneous degree [beta] carried by a nonzero coefficient."""
        return max((_degree(self.spec.weights, b) for b in self.terms), default=-1)

    def to_string(self) -> str:
        if not self.terms:
            return "0"
        w = self.spec.weights
        parts = []
        for b in sorted(self.terms, key=lambda b: (-_degree(w, b), tuple(-a for a in b))):
            mono = "*".join(f"X{j + 1}" + (f"^{a}" if a > 1 else "") for j, a in enumerate(b) if a)
            p = self.terms[b]
            neg = len(p.terms) == 1 and next(iter(p.terms.values())) < 0
            if neg:
                p = -p
            if not mono:
                body = f"({p})*Id" if len(p.terms) > 1 else f"{p}*Id"
            elif p == 1:
                body = mono
            elif len(p.terms) == 1:
                body = f"{p}*{mono}"
            else:
                body = f"({p})*{mono}"
            parts.append(("-" if neg else "+", body))
        s = ("-" if parts[0][0] == "-" else "") + parts[0][1]
        for sign, body in parts[1:]:
            s += f" {sign} {body}"
        return s

    __str__ = to_string

    def __repr__(self):
        return f"VarCoeffOperator({self.to_string()})"


# ---------------------------------------------------------------- operations

def _subword_splits(word):
    """All (S, complement) splits of a word, both as order-preserving subwords."""
    k = len(word)
    idx = range(k)
    for r in range(k + 1):
        for chosen in combinations(idx, r):
            s = set(chosen)
            yield (tuple(word[i] for i in chosen),
                   tuple(word[i] for i in idx if i not in s))


def compose(a: VarCoeffOperator, b: VarCoeffOperator) -> VarCoeffOperator:
    """Canonical form of a o b using X_j(p f) = (X_j p) f + p X_j f."""
    if a.spec != b.spec:
        raise ValueError("operators live on different groups")
    spec = a.spec
    P = pbw(spec)
    fields = left_invariant_fields(spec)
    out: dict = {}
    for beta, p in a.terms.items():
        word = word_of(beta)
        for gamma, r in b.terms.items():
            gword = word_of(gamma)
            for sub, rest in _subword_splits(word):
                dr = apply_word(spec, sub, r, fields)
                if dr.is_zero():
                    continue
                coef = p * dr
                for delta, c in P.normal_order(rest + gword).items():
                    term = coef * c
                    out[delta] = out[delta] + term if delta in out else term
    return VarCoeffOperator(spec, out)


def apply(a: VarCoeffOperator, f: Polynomial) -> Polynomial:
    """Exact action on a polynomial in the group coordinates."""
    if f.variables != a.variables:
        raise ValueError("polynomial must use the group coordinates")
    out = Polynomial(a.variables)
    if not a.terms:
        return out
    fields = left_invariant_fields(a.spec)
    for beta, p in a.terms.items():
        g = apply_word(a.spec, word_of(beta), f, fields)
        if not g.is_zero():
            out = out + p * g
    return out


def formal_adjoint(a: VarCoeffOperator) -> VarCoeffOperator:
    """Adjoint for (f1, f2) = int f1 conj(f2) dx, using X_j^* = -X_j.

    (p X^beta)^* = (-1)^{|beta|} X_{reversed word} o p; coefficients are real.
    """
    spec = a.spec
    P = pbw(spec)
    out = VarCoeffOperator(spec)
    for beta, p in a.terms.items():
        word = tuple(reversed(word_of(beta)))
        sign = -1 if len(word) % 2 else 1
        left = VarCoeffOperator(spec, {d: c * sign for d, c in P.normal_order(word).items()})
        out = out + compose(left, VarCoeffOperator.multiplication(spec, p))
    return out


def operator_homogeneous_degree(a) -> int | str:
    """Common degree [beta] of all terms, or "inhomogeneous" for mixed degrees.

    Constant coefficients are assumed; polynomial coefficients count with
    negative weight in the dilation covariance, which is accounted for here.
    """
    if isinstance(a, InvariantOperator):
        a = a.to_var_coeff()
    if not a.terms:
        return 0
    w = a.spec.weights
    degs = set()
    for beta, p in a.terms.items():
        pd = {sum(x * y for x, y in zip(w, e)) for e in p.terms}
        for d in pd:
            degs.add(_degree(w, beta) - d)
    if len(degs) != 1:
        return "inhomogeneous"
    return degs.pop()


def to_coordinates(a: VarCoeffOperator) -> CoordinateOperator:
    """Rewrite sum p_beta X^beta as a coordinate differential operator."""
    spec = a.spec
    fields = left_invariant_fields(spec)
    xv = a.variables
    cache = {(0,) * spec.dim: CoordinateOperator.identity(xv)}

    def mono(beta):
        if beta not in cache:
            j = next(i for i, b in enumerate(beta) if b)
            prev = beta[:j] + (beta[j] - 1,) + beta[j + 1:]
            cache[beta] = fields[j].compose(mono(prev))
        return cache[beta]

    out = CoordinateOperator(xv)
    for beta, p in a.terms.items():
        out = out + CoordinateOperator(xv, {(0,) * spec.dim: p}).compose(mono(beta))
    return out


# ---------------------------------------------------------------- Rockland operators

@dataclass(frozen=True)
class RocklandSpec:
    operator: InvariantOperator
    degree: int
    provenance: str
    coefficients: tuple = ()

    @property
    def spec(self):
        return self.operator.spec


def rockland_example(spec: GradedLieAlgebra, nu_o: int | None = None, coeffs=None,
                     variant: int = 1) -> RocklandSpec:
    """The two families of positive Rockland operators built from powers of X_j.

    variant 1: sum_j (-1)^{nu_o/w_j} c_j X_j^{2 nu_o/w_j}, degree 2 nu_o;
    variant 2: sum_j c_j X_j^{4 nu_o/w_j}, degree 4 nu_o.
    """
    require_valid(spec)
    nu_o = spec.nu_o if nu_o is None else int(nu_o)
    if nu_o <= 0 or any(nu_o % w for w in spec.weights):
        raise ValueError(f"nu_o={nu_o} is not a common multiple of the weights {spec.weights}")
    n = spec.dim
    coeffs = tuple(as_fraction(c) for c in (coeffs if coeffs is not None else [1] * n))
    if len(coeffs) != n or any(c <= 0 for c in coeffs):
        raise ValueError("need one positive coefficient per generator")
    if variant not in (1, 2):
        raise ValueError("variant must be 1 or 2")
    terms = {}
    for j, (w, c) in enumerate(zip(spec.weights, coeffs)):
        k = nu_o // w
        beta = tuple((2 * k if variant == 1 else 4 * k) if i == j else 0 for i in range(n))
        terms[beta] = c * ((-1) ** k if variant == 1 else 1)
    degree = 2 * nu_o if variant == 1 else 4 * nu_o
    return RocklandSpec(InvariantOperator(spec, terms), degree, f"variant-{variant}", coeffs)


def sub_laplacian(spec: GradedLieAlgebra) -> RocklandSpec:
    """R = -(X_1^2 + ... + X_{n1}^2) over the first layer of a stratified algebra."""
    require_valid(spec)
    first = [j for j, w in enumerate(spec.weights) if w == 1]
    if not first:
        raise ValueError("no weight-one generators; the algebra is not stratified")
    terms = {tuple(2 if i == j else 0 for i in range(spec.dim)): -1 for j in first}
    return RocklandSpec(InvariantOperator(spec, terms), 2, "sub-Laplacian",
                        tuple(Fraction(1) for _ in first))


def is_stratified(spec: GradedLieAlgebra) -> bool:
    """True if the weight-one layer generates the algebra with weights = layer index."""
    span_weights = {w for w in spec.weights}
    if 1 not in span_weights:
        return False
    # every X_k of weight > 1 must arise from brackets of lower weight
    produced = {j for j, w in enumerate(spec.weights) if w == 1}
    changed = True
    while changed:
        changed = False
        for (i, j), row in spec.structure_constants.items():
            if i in produced and j in produced:
                for k in row:
                    if k not in produced:
                        produced.add(k)
                        changed = True
    return len(produced) == spec.dim


def random_operator(spec: GradedLieAlgebra, rng, max_order: int = 4,
                    max_coeff_degree: int = 3, n_terms: int = 3,
                    coeff_range: int = 3) -> VarCoeffOperator:
    """Random sum of p_beta X^beta with small-integer polynomial coefficients."""
    xv = spec.x_vars()
    betas = multi_indices_upto(spec, max_order)
    coeff_monos = [e for e in _all_exponents(spec.dim, max_coeff_degree)]
    terms = {}
    for _ in range(n_terms):
        beta = betas[int(rng.integers(len(betas)))]
        p = Polynomial(xv)
        for _ in range(int(rng.integers(1, 4))):
            e = coeff_monos[int(rng.integers(len(coeff_monos)))]
            c = int(rng.integers(-coeff_range, coeff_range + 1)) or 1
            p = p + Polynomial.monomial(xv, e, Fraction(c, int(rng.integers(1, 3))))
        terms[beta] = terms[beta] + p if beta in terms else p
    return VarCoeffOperator(spec, terms)


def _all_exponents(n, max_total):
    out = [()]
    for _ in range(n):
        out = [e + (a,) for e in out for a in range(max_total + 1)]
    return [e for e in out if sum(e) <= max_total]

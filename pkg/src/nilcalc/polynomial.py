"""Exact multivariate polynomials with rational coefficients.

A polynomial lives over a fixed, named variable set; terms map exponent
tuples to :class:`fractions.Fraction`. Zero coefficients are never stored.
"""

from __future__ import annotations

from fractions import Fraction
from math import factorial
from numbers import Rational
from typing import Iterable, Mapping, Sequence

import numpy as np

Exponent = tuple


def as_fraction(value) -> Fraction:
    """Convert ints, Fractions and "p/q" strings to Fraction (floats rejected)."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, (int, Rational)):
        return Fraction(value)
    if isinstance(value, str):
        return Fraction(value.strip())
    raise TypeError(f"expected an exact rational, got {type(value).__name__}")


def variable_names(prefix: str, n: int) -> tuple:
    return tuple(f"{prefix}{i + 1}" for i in range(n))


class Polynomial:
    """Polynomial over ``variables`` with exact rational coefficients."""

    __slots__ = ("variables", "terms")

    def __init__(self, variables: Sequence[str], terms: Mapping | None = None):
        self.variables = tuple(variables)
        n = len(self.variables)
        clean = {}
        if terms:
            for exp, c in terms.items():
                exp = tuple(exp)
                if len(exp) != n:
                    raise ValueError(f"exponent {exp} does not match {n} variables")
                c = as_fraction(c)
                if c:
                    clean[exp] = clean.get(exp, 0) + c
                    if not clean[exp]:
                        del clean[exp]
        self.terms = clean

    # constructors -----------------------------------------------------
    @classmethod
    def zero(cls, variables):
        return cls(variables)

    @classmethod
    def constant(cls, variables, c):
        variables = tuple(variables)
        return cls(variables, {(0,) * len(variables): c})

    @classmethod
    def variable(cls, variables, i: int):
        variables = tuple(variables)
        exp = [0] * len(variables)
        exp[i] = 1
        return cls(variables, {tuple(exp): 1})

    @classmethod
    def monomial(cls, variables, exp, c=1):
        return cls(variables, {tuple(exp): c})

    @classmethod
    def _raw(cls, variables, terms):
        # trusted constructor: terms already reduced, zero-free
        p = cls.__new__(cls)
        p.variables = variables
        p.terms = terms
        return p

    # basic protocol ---------------------------------------------------
    @property
    def nvars(self) -> int:
        return len(self.variables)

    def is_zero(self) -> bool:
        return not self.terms

    def __bool__(self):
        return bool(self.terms)

    def __eq__(self, other):
        if isinstance(other, Polynomial):
            return self.variables == other.variables and self.terms == other.terms
        if isinstance(other, (int, Fraction)):
            return self == Polynomial.constant(self.variables, other)
        return NotImplemented

    def __hash__(self):
        return hash((self.variables, frozenset(self.terms.items())))

    def _coerce(self, other) -> "Polynomial":
        if isinstance(other, Polynomial):
            if other.variables != self.variables:
                raise ValueError(
                    f"variable sets differ: {self.variables} vs {other.variables}")
            return other
        return Polynomial.constant(self.variables, as_fraction(other))

    def __add__(self, other):
        other = self._coerce(other)
        out = dict(self.terms)
        for e, c in other.terms.items():
            v = out.get(e, 0) + c
            if v:
                out[e] = v
            else:
                out.pop(e, None)
        return Polynomial._raw(self.variables, out)

    __radd__ = __add__

    def __neg__(self):
        return Polynomial._raw(self.variables, {e: -c for e, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        if not isinstance(other, Polynomial):
            c = as_fraction(other)
            if not c:
                return Polynomial(self.variables)
            return Polynomial._raw(self.variables, {e: v * c for e, v in self.terms.items()})
        other = self._coerce(other)
        out: dict = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                v = out.get(e, 0) + c1 * c2
                if v:
                    out[e] = v
                else:
                    out.pop(e, None)
        return Polynomial._raw(self.variables, out)

    __rmul__ = __mul__

    def __pow__(self, k: int):
        if k < 0:
            raise ValueError("negative powers are not polynomials")
        result = Polynomial.constant(self.variables, 1)
        base = self
        while k:
            if k & 1:
                result = result * base
            k >>= 1
            if k:
                base = base * base
        return result

    # calculus ---------------------------------------------------------
    def diff(self, i: int, order: int = 1) -> "Polynomial":
        out = {}
        for e, c in self.terms.items():
            if e[i] < order:
                continue
            f = 1
            for m in range(e[i] - order + 1, e[i] + 1):
                f *= m
            ne = e[:i] + (e[i] - order,) + e[i + 1:]
            out[ne] = c * f
        return Polynomial._raw(self.variables, out)

    def coefficient(self, exp) -> Fraction:
        return self.terms.get(tuple(exp), Fraction(0))

    def constant_term(self) -> Fraction:
        return self.terms.get((0,) * self.nvars, Fraction(0))

    def total_degree(self) -> int:
        return max((sum(e) for e in self.terms), default=-1)

    def homogeneous_degree(self, weights: Sequence[int]) -> int:
        """Maximal weighted degree of a term; -1 for the zero polynomial."""
        return max((sum(w * a for w, a in zip(weights, e)) for e in self.terms), default=-1)

    def is_homogeneous(self, weights, degree: int | None = None) -> bool:
        degs = {sum(w * a for w, a in zip(weights, e)) for e in self.terms}
        if not degs:
            return True
        if len(degs) != 1:
            return False
        return degree is None or degs == {degree}

    def homogeneous_component(self, weights, degree: int) -> "Polynomial":
        return Polynomial._raw(self.variables, {
            e: c for e, c in self.terms.items()
            if sum(w * a for w, a in zip(weights, e)) == degree})

    def dilate(self, weights, r) -> "Polynomial":
        """p(r^{w_1} x_1, ..., r^{w_n} x_n), exact for rational r."""
        r = as_fraction(r)
        return Polynomial._raw(self.variables, {
            e: c * r ** sum(w * a for w, a in zip(weights, e)) for e, c in self.terms.items()})

    # evaluation and substitution ----------------------------------------
    def evaluate(self, point: Sequence):
        """Evaluate at a point; exact for rational input, float otherwise."""
        if len(point) != self.nvars:
            raise ValueError("point has wrong dimension")
        total = 0
        for e, c in self.terms.items():
            term = c
            for x, a in zip(point, e):
                if a:
                    term = term * x ** a
            total = total + term
        return total

    def evaluate_array(self, arrays: Sequence[np.ndarray]) -> np.ndarray:
        """Vectorised float evaluation on broadcastable arrays."""
        arrays = [np.asarray(a, dtype=float) for a in arrays]
        shape = np.broadcast_shapes(*(a.shape for a in arrays)) if arrays else ()
        out = np.zeros(shape)
        for e, c in self.terms.items():
            term = np.full(shape, float(c))
            for x, a in zip(arrays, e):
                if a:
                    term = term * x ** a
            out = out + term
        return out

    def substitute(self, images: Sequence["Polynomial"], variables=None) -> "Polynomial":
        """Compose: replace variable i by ``images[i]`` (all over a common set)."""
        if len(images) != self.nvars:
            raise ValueError("need one image per variable")
        if variables is None:
            variables = images[0].variables if images else ()
        variables = tuple(variables)
        powers: list[dict] = [dict() for _ in images]

        def power(i, k):
            cache = powers[i]
            if k not in cache:
                if k == 0:
                    cache[k] = Polynomial.constant(variables, 1)
                elif k == 1:
                    cache[k] = images[i]
                else:
                    cache[k] = power(i, k - 1) * images[i]
            return cache[k]

        out = Polynomial(variables)
        for e, c in self.terms.items():
            term = Polynomial.constant(variables, c)
            for i, a in enumerate(e):
                if a:
                    term = term * power(i, a)
            out = out + term
        return out

    def embed(self, variables, positions: Sequence[int]) -> "Polynomial":
        """Re-express over a larger variable set; variable i goes to ``positions[i]``."""
        variables = tuple(variables)
        n = len(variables)
        out = {}
        for e, c in self.terms.items():
            ne = [0] * n
            for i, a in enumerate(e):
                ne[positions[i]] += a
            out[tuple(ne)] = c
        return Polynomial(variables, out)

    def restrict(self, variables, positions: Sequence[int]) -> "Polynomial":
        """Inverse of :meth:`embed`; raises if other variables occur."""
        variables = tuple(variables)
        keep = set(positions)
        out = {}
        for e, c in self.terms.items():
            if any(a and i not in keep for i, a in enumerate(e)):
                raise ValueError("polynomial depends on dropped variables")
            out[tuple(e[p] for p in positions)] = c
        return Polynomial(variables, out)

    def rename(self, variables) -> "Polynomial":
        variables = tuple(variables)
        if len(variables) != self.nvars:
            raise ValueError("rename needs the same number of variables")
        return Polynomial._raw(variables, dict(self.terms))

    # printing -----------------------------------------------------------
    def sorted_terms(self, weights=None):
        """Terms in graded-lex order (highest degree first)."""
        weights = weights or (1,) * self.nvars

        def key(item):
            e = item[0]
            return (-sum(w * a for w, a in zip(weights, e)), tuple(-a for a in e))

        return sorted(self.terms.items(), key=key)

    def to_string(self, weights=None) -> str:
        if not self.terms:
            return "0"
        parts = []
        for e, c in self.sorted_terms(weights):
            mono = "*".join(
                v if a == 1 else f"{v}^{a}" for v, a in zip(self.variables, e) if a)
            if not mono:
                body = str(abs(c))
            elif abs(c) == 1:
                body = mono
            else:
                body = f"{abs(c)}*{mono}"
            sign = "-" if c < 0 else "+"
            parts.append((sign, body))
        first_sign, first = parts[0]
        s = ("-" if first_sign == "-" else "") + first
        for sign, body in parts[1:]:
            s += f" {sign} {body}"
        return s

    def __str__(self):
        return self.to_string()

    def __repr__(self):
        return f"Polynomial({self.to_string()!r}, vars={self.variables})"


def multi_factorial(alpha: Iterable[int]) -> int:
    out = 1
    for a in alpha:
        out *= factorial(a)
    return out

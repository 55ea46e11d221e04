"""Graded nilpotent Lie algebras and their groups in exponential coordinates.

Indices are 0-based inside the library; spec files and the CLI use 1-based
generator labels ``X1 .. Xn``.
"""

from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property, lru_cache
from pathlib import Path
from typing import Sequence

import numpy as np

from .polynomial import Polynomial, as_fraction, variable_names


class SpecError(ValueError):
    """Malformed or inconsistent group specification."""


class ConsistencyError(RuntimeError):
    """Internal exact computation produced an impossible result."""


@dataclass(frozen=True)
class ValidationReport:
    ok: bool
    violations: tuple = ()

    def __bool__(self):
        return self.ok


@dataclass(frozen=True)
class GradedLieAlgebra:
    """Basis X_1..X_n adapted to a gradation, with rational structure constants.

    ``brackets`` holds records ``(i, j, k, c)`` meaning the coefficient of
    X_k in [X_i, X_j] is c. Records given only for i < j are completed by
    antisymmetry.
    """

    name: str
    weights: tuple
    brackets: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "weights", tuple(int(w) for w in self.weights))
        recs = tuple((int(i), int(j), int(k), as_fraction(c)) for i, j, k, c in self.brackets)
        object.__setattr__(self, "brackets", recs)
        n = len(self.weights)
        if n == 0:
            raise SpecError("dimension must be positive")
        for w in self.weights:
            if w <= 0:
                raise SpecError(f"weights must be positive integers, got {w}")
        for i, j, k, _ in recs:
            for idx in (i, j, k):
                if not 0 <= idx < n:
                    raise SpecError(f"bracket index {idx + 1} out of range 1..{n}")

    @property
    def dim(self) -> int:
        return len(self.weights)

    @cached_property
    def structure_constants(self) -> dict:
        """Mapping (i, j) -> {k: c} for all ordered pairs with nonzero bracket."""
        given = {}
        for i, j, k, c in self.brackets:
            given.setdefault((i, j), {})
            given[(i, j)][k] = given[(i, j)].get(k, 0) + c
        table = {}
        for (i, j), row in given.items():
            table[(i, j)] = {k: c for k, c in row.items() if c}
            if (j, i) not in given:
                table[(j, i)] = {k: -c for k, c in row.items() if c}
        return {key: row for key, row in table.items() if row}

    def bracket_basis(self, i: int, j: int) -> dict:
        return self.structure_constants.get((i, j), {})

    def bracket(self, a: Sequence, b: Sequence) -> list:
        """[a, b] for coefficient vectors over any ring (Fractions, Polynomials, floats)."""
        out = [0] * self.dim
        for (i, j), row in self.structure_constants.items():
            if not _nonzero(a[i]) or not _nonzero(b[j]):
                continue
            prod = a[i] * b[j]
            for k, c in row.items():
                out[k] = out[k] + prod * c
        return out

    @property
    def homogeneous_dimension(self) -> int:
        return sum(self.weights)

    @property
    def nu_o(self) -> int:
        return math.lcm(*self.weights)

    @cached_property
    def step(self) -> int:
        """Nilpotency step from the lower central series (0 for the zero algebra)."""
        n = self.dim
        current = [[Fraction(int(i == j)) for j in range(n)] for i in range(n)]
        s = 0
        while current:
            s += 1
            nxt = []
            for i in range(n):
                e = [Fraction(int(i == m)) for m in range(n)]
                for v in current:
                    nxt.append(self.bracket(e, v))
            nxt = _row_basis(nxt)
            if len(nxt) == len(current):
                raise SpecError("algebra is not nilpotent")
            current = nxt
            if s > n + 1:
                raise SpecError("algebra is not nilpotent")
        return s

    @property
    def is_abelian(self) -> bool:
        return not self.structure_constants

    def layers(self) -> dict:
        out = {}
        for j, w in enumerate(self.weights):
            out.setdefault(w, []).append(j)
        return out

    def degree(self, alpha: Sequence[int]) -> int:
        return homogeneous_degree(self, alpha)

    def x_vars(self, prefix="x"):
        return variable_names(prefix, self.dim)

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "dim": self.dim,
            "weights": list(self.weights),
            "brackets": [
                {"i": i + 1, "j": j + 1, "k": k + 1, "c": str(c)}
                for i, j, k, c in self.brackets],
        }


def _nonzero(v) -> bool:
    if isinstance(v, Polynomial):
        return not v.is_zero()
    return v != 0


def _row_basis(rows):
    """Exact row-echelon basis of the span of ``rows`` (lists of Fractions)."""
    basis = []
    pivots = []
    for r in rows:
        r = list(r)
        for b, p in zip(basis, pivots):
            if r[p]:
                f = r[p] / b[p]
                r = [x - f * y for x, y in zip(r, b)]
        nz = next((i for i, x in enumerate(r) if x), None)
        if nz is not None:
            basis.append(r)
            pivots.append(nz)
    return basis


# ---------------------------------------------------------------- validation

def validate_gradation(spec: GradedLieAlgebra) -> ValidationReport:
    """Check antisymmetry, gradation compatibility and the Jacobi identity."""
    n = spec.dim
    violations = []
    if list(spec.weights) != sorted(spec.weights):
        violations.append(f"weights {spec.weights} are not nondecreasing")
    given = {}
    for i, j, k, c in spec.brackets:
        given[(i, j, k)] = given.get((i, j, k), 0) + c
    for (i, j, k), c in sorted(given.items()):
        if i == j and c:
            violations.append(f"({i + 1},{j + 1})->{k + 1}: [X{i + 1},X{i + 1}] must vanish")
        if (j, i, k) in given and given[(j, i, k)] != -c:
            violations.append(f"({i + 1},{j + 1})->{k + 1}: antisymmetry fails")
    for (i, j), row in sorted(spec.structure_constants.items()):
        if i > j:
            continue
        for k in sorted(row):
            wi, wj, wk = spec.weights[i], spec.weights[j], spec.weights[k]
            if wk != wi + wj:
                violations.append(
                    f"({i + 1},{j + 1})->{k + 1}: weight {wk} != {wi + wj}")
    basis = [[Fraction(int(a == b)) for b in range(n)] for a in range(n)]
    for i in range(n):
        for j in range(i + 1, n):
            for k in range(j + 1, n):
                a, b, c = basis[i], basis[j], basis[k]
                t = [x + y + z for x, y, z in zip(
                    spec.bracket(a, spec.bracket(b, c)),
                    spec.bracket(b, spec.bracket(c, a)),
                    spec.bracket(c, spec.bracket(a, b)))]
                if any(t):
                    violations.append(f"Jacobi fails on (X{i + 1},X{j + 1},X{k + 1})")
    if not violations:
        try:
            spec.step
        except SpecError as exc:
            violations.append(str(exc))
    return ValidationReport(ok=not violations, violations=tuple(violations))


def require_valid(spec: GradedLieAlgebra) -> GradedLieAlgebra:
    report = validate_gradation(spec)
    if not report.ok:
        raise SpecError("; ".join(report.violations))
    return spec


# ---------------------------------------------------------------- catalog

def abelian(n: int, weights=None) -> GradedLieAlgebra:
    weights = tuple(weights) if weights is not None else (1,) * n
    return GradedLieAlgebra(f"abelian:{n}", weights)


def heisenberg(n: int = 1) -> GradedLieAlgebra:
    brackets = tuple((i, n + i, 2 * n, Fraction(1)) for i in range(n))
    return GradedLieAlgebra(f"heisenberg:{n}", (1,) * (2 * n) + (2,), brackets)


def engel() -> GradedLieAlgebra:
    return GradedLieAlgebra("engel", (1, 1, 2, 3), ((0, 1, 2, 1), (0, 2, 3, 1)))


CATALOG_PATTERN = re.compile(r"^(abelian|heisenberg):(\d+)$|^engel$")


def load_group(ref: str) -> GradedLieAlgebra:
    """Resolve a catalog name (``abelian:n``, ``heisenberg:n``, ``engel``) or a spec file."""
    m = CATALOG_PATTERN.match(ref)
    if m:
        if ref == "engel":
            return engel()
        kind, n = m.group(1), int(m.group(2))
        if n < 1:
            raise SpecError(f"catalog dimension must be positive: {ref}")
        return abelian(n) if kind == "abelian" else heisenberg(n)
    path = Path(ref)
    if not path.exists():
        raise FileNotFoundError(f"no catalog group or spec file named {ref!r}")
    return parse_spec_text(path.read_text(), suffix=path.suffix)


def parse_spec_text(text: str, suffix: str = ".json") -> GradedLieAlgebra:
    if suffix.lower() == ".toml":
        try:
            import tomllib  # type: ignore[import-not-found]
        except ModuleNotFoundError:
            try:
                import tomli as tomllib  # type: ignore[no-redef]
            except ModuleNotFoundError as exc:
                raise SpecError("TOML spec files need Python >= 3.11 or tomli") from exc
        data = tomllib.loads(text)
    else:
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise SpecError(f"invalid JSON: {exc}") from exc
    return spec_from_dict(data)


def spec_from_dict(data: dict) -> GradedLieAlgebra:
    try:
        name = str(data.get("name", "custom"))
        weights = [int(w) for w in data["weights"]]
        dim = int(data.get("dim", len(weights)))
        raw = data.get("brackets", [])
    except (KeyError, TypeError, ValueError) as exc:
        raise SpecError(f"malformed spec: {exc}") from exc
    if dim != len(weights):
        raise SpecError(f"dim={dim} but {len(weights)} weights given")
    recs = []
    for r in raw:
        try:
            i, j, k = int(r["i"]), int(r["j"]), int(r["k"])
            c = as_fraction(str(r.get("c", "1")))
        except (KeyError, TypeError, ValueError, ZeroDivisionError) as exc:
            raise SpecError(f"malformed bracket record {r!r}: {exc}") from exc
        for idx in (i, j, k):
            if not 1 <= idx <= dim:
                raise SpecError(f"bracket index {idx} out of range 1..{dim}")
        recs.append((i - 1, j - 1, k - 1, c))
    return GradedLieAlgebra(name, tuple(weights), tuple(recs))


# ---------------------------------------------------------------- multi-indices

def homogeneous_degree(spec: GradedLieAlgebra, alpha: Sequence[int]) -> int:
    if len(alpha) != spec.dim:
        raise SpecError(f"multi-index {tuple(alpha)} has wrong length for dim {spec.dim}")
    return sum(w * a for w, a in zip(spec.weights, alpha))


def index_key(weights, alpha):
    """Canonical order: by homogeneous degree, ties lexicographically (x1 first)."""
    return (sum(w * a for w, a in zip(weights, alpha)), tuple(-a for a in alpha))


@lru_cache(maxsize=None)
def _indices_of_degree(weights: tuple, d: int) -> tuple:
    out = []

    def rec(pos, remaining, acc):
        if pos == len(weights):
            if remaining == 0:
                out.append(tuple(acc))
            return
        w = weights[pos]
        for a in range(remaining // w + 1):
            acc.append(a)
            rec(pos + 1, remaining - a * w, acc)
            acc.pop()

    rec(0, d, [])
    return tuple(sorted(out, key=lambda a: index_key(weights, a)))


def multi_indices(spec_or_weights, degree: int) -> tuple:
    """All alpha with [alpha] == degree, in canonical order."""
    weights = spec_or_weights.weights if isinstance(spec_or_weights, GradedLieAlgebra) \
        else tuple(spec_or_weights)
    if degree < 0:
        return ()
    return _indices_of_degree(weights, degree)


def multi_indices_upto(spec_or_weights, max_degree: int) -> list:
    out = []
    for d in range(max_degree + 1):
        out.extend(multi_indices(spec_or_weights, d))
    return out


def unit_index(n: int, j: int) -> tuple:
    return tuple(int(i == j) for i in range(n))


# ---------------------------------------------------------------- BCH

def _nc_mul(a: dict, b: dict, order: int) -> dict:
    out: dict = {}
    for wa, ca in a.items():
        for wb, cb in b.items():
            if len(wa) + len(wb) > order:
                continue
            w = wa + wb
            out[w] = out.get(w, 0) + ca * cb
    return {w: c for w, c in out.items() if c}


@lru_cache(maxsize=None)
def bch_lie_terms(order: int) -> tuple:
    """log(e^X e^Y) up to word length ``order`` as left-nested brackets.

    Returns ``(coefficient, word)`` pairs, word letters 0 (=X) and 1 (=Y), where a
    word (a1,...,am) stands for [...[[a1,a2],a3],...,am]. Obtained from the
    truncated series in the free associative algebra and the
    Dynkin-Specht-Wever projection.
    """
    def exp_letter(letter):
        return {(letter,) * k: Fraction(1, math.factorial(k)) for k in range(order + 1)}

    prod = _nc_mul(exp_letter(0), exp_letter(1), order)
    z = {w: c for w, c in prod.items() if w}
    log: dict = {}
    power = {(): Fraction(1)}
    for k in range(1, order + 1):
        power = _nc_mul(power, z, order)
        sign = Fraction((-1) ** (k + 1), k)
        for w, c in power.items():
            log[w] = log.get(w, 0) + sign * c
    terms: dict = {}
    for w, c in log.items():
        if not c:
            continue
        if len(w) >= 2 and w[0] == w[1]:
            continue
        terms[w] = terms.get(w, 0) + c / len(w)
    return tuple(sorted(((c, w) for w, c in terms.items() if c), key=lambda t: (len(t[1]), t[1])))


def bch_series(spec: GradedLieAlgebra, a: Sequence, b: Sequence) -> list:
    """exp-coordinates of exp(a)exp(b) for vectors over any commutative ring."""
    memo = {(0,): list(a), (1,): list(b)}

    def nested(word):
        if word not in memo:
            memo[word] = spec.bracket(nested(word[:-1]), memo[(word[-1],)])
        return memo[word]

    out = [0] * spec.dim
    for c, w in bch_lie_terms(spec.step):
        v = nested(w)
        for k in range(spec.dim):
            if _nonzero(v[k]):
                out[k] = out[k] + v[k] * c
    return out


class GroupLaw:
    """Polynomial group law (x y)_k in variables (x_1..x_n, y_1..y_n)."""

    def __init__(self, spec: GradedLieAlgebra):
        self.spec = spec
        n = spec.dim
        self.variables = variable_names("x", n) + variable_names("y", n)
        xs = [Polynomial.variable(self.variables, i) for i in range(n)]
        ys = [Polynomial.variable(self.variables, n + i) for i in range(n)]
        coords = bch_series(spec, xs, ys)
        self.coordinates = tuple(
            c if isinstance(c, Polynomial) else Polynomial.constant(self.variables, c)
            for c in coords)

    def product(self, x: Sequence, y: Sequence) -> tuple:
        point = tuple(x) + tuple(y)
        return tuple(p.evaluate(point) for p in self.coordinates)

    def product_array(self, x: Sequence[np.ndarray], y: Sequence[np.ndarray]) -> list:
        arrays = list(x) + list(y)
        return [p.evaluate_array(arrays) for p in self.coordinates]

    def correction(self, k: int) -> Polynomial:
        """(xy)_k - x_k - y_k."""
        n = self.spec.dim
        return (self.coordinates[k] - Polynomial.variable(self.variables, k)
                - Polynomial.variable(self.variables, n + k))


@lru_cache(maxsize=None)
def group_law(spec: GradedLieAlgebra) -> GroupLaw:
    require_valid(spec)
    return GroupLaw(spec)


def bch_product(spec: GradedLieAlgebra, x: Sequence, y: Sequence) -> tuple:
    """Exponential coordinates of exp(X) exp(Y); exact for rational input."""
    if len(x) != spec.dim or len(y) != spec.dim:
        raise SpecError("point dimension does not match the algebra")
    return group_law(spec).product(x, y)


def group_inverse(x: Sequence) -> tuple:
    return tuple(-v for v in x)


def dilate(spec: GradedLieAlgebra, r, x: Sequence) -> tuple:
    if r <= 0:
        raise ValueError(f"dilation factor must be positive, got {r}")
    return tuple(r ** w * v for w, v in zip(spec.weights, x))


def dilate_array(spec: GradedLieAlgebra, r, arrays: Sequence[np.ndarray]) -> list:
    if np.any(np.asarray(r) <= 0):
        raise ValueError("dilation factor must be positive")
    return [np.asarray(r) ** w * a for w, a in zip(spec.weights, arrays)]


def homogeneous_norm(spec: GradedLieAlgebra, x: Sequence) -> float:
    """(sum_j x_j^{2 nu_o / w_j})^{1/(2 nu_o)} with nu_o the lcm of the weights."""
    nu = spec.nu_o
    total = sum(float(v) ** (2 * nu // w) for w, v in zip(spec.weights, x))
    return total ** (1.0 / (2 * nu))


def homogeneous_norm_array(spec: GradedLieAlgebra, arrays: Sequence[np.ndarray]) -> np.ndarray:
    nu = spec.nu_o
    total = sum(np.asarray(a, dtype=float) ** (2 * nu // w) for w, a in zip(spec.weights, arrays))
    return total ** (1.0 / (2 * nu))


def homogeneous_dimension(spec: GradedLieAlgebra) -> int:
    return spec.homogeneous_dimension


def random_rational_point(spec: GradedLieAlgebra, rng, size: int = 5, denom: int = 6) -> tuple:
    return tuple(Fraction(int(rng.integers(-size * denom, size * denom + 1)), denom)
                 for _ in range(spec.dim))

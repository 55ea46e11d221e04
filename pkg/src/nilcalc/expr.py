"""Parse polynomials and differential operators written as arithmetic expressions.

Coordinates are x1..xn, left-invariant fields X1..Xn. Products of operators are
compositions, so "X1*x2" is the operator f -> X1(x2 f). Powers use ** or ^.
"""

from __future__ import annotations

import ast
import re
from fractions import Fraction

from .diffops import VarCoeffOperator
from .lie_core import GradedLieAlgebra, SpecError
from .polynomial import Polynomial

_NAME = re.compile(r"^([xX])(\d+)$")


class _Evaluator:
    def __init__(self, spec: GradedLieAlgebra, operators: bool):
        self.spec = spec
        self.operators = operators
        self.xv = spec.x_vars()

    def const(self, c):
        if self.operators:
            return VarCoeffOperator.identity(self.spec) * Fraction(c)
        return Polynomial.constant(self.xv, Fraction(c))

    def name(self, ident: str):
        m = _NAME.match(ident)
        if not m:
            raise SpecError(f"unknown symbol {ident!r}")
        j = int(m.group(2)) - 1
        if not 0 <= j < self.spec.dim:
            raise SpecError(f"index out of range in {ident!r}")
        if m.group(1) == "x":
            p = Polynomial.variable(self.xv, j)
            return VarCoeffOperator.multiplication(self.spec, p) if self.operators else p
        if not self.operators:
            raise SpecError(f"vector field {ident!r} inside a polynomial")
        return VarCoeffOperator.generator(self.spec, j)

    def eval(self, node):
        if isinstance(node, ast.Expression):
            return self.eval(node.body)
        if isinstance(node, ast.Constant) and isinstance(node.value, int) \
                and not isinstance(node.value, bool):
            return self.const(node.value)
        if isinstance(node, ast.Name):
            return self.name(node.id)
        if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
            v = self.eval(node.operand)
            return v * -1 if isinstance(node.op, ast.USub) else v
        if isinstance(node, ast.BinOp):
            if isinstance(node.op, ast.Pow):
                k = _int_literal(node.right)
                base = self.eval(node.left)
                out = self.const(1)
                for _ in range(k):
                    out = out * base
                return out
            if isinstance(node.op, ast.Div):
                num = self.eval(node.left)
                den = _rational_literal(node.right)
                return num * (1 / den)
            a, b = self.eval(node.left), self.eval(node.right)
            if isinstance(node.op, ast.Add):
                return a + b
            if isinstance(node.op, ast.Sub):
                return a - b
            if isinstance(node.op, ast.Mult):
                return a * b
        raise SpecError(f"unsupported expression element: {ast.dump(node)[:60]}")


def _int_literal(node) -> int:
    if isinstance(node, ast.Constant) and isinstance(node.value, int) and node.value >= 0:
        return node.value
    raise SpecError("exponents must be nonnegative integer literals")


def _rational_literal(node) -> Fraction:
    if isinstance(node, ast.Constant) and isinstance(node.value, int) and node.value != 0:
        return Fraction(node.value)
    if isinstance(node, ast.BinOp) and isinstance(node.op, ast.Div):
        return _rational_literal(node.left) / _rational_literal(node.right)
    raise SpecError("division only by nonzero integer literals")


def _parse(text: str):
    try:
        return ast.parse(text.strip().replace("^", "**"), mode="eval")
    except SyntaxError as exc:
        raise SpecError(f"cannot parse {text!r}: {exc.msg}") from exc


def parse_polynomial(spec: GradedLieAlgebra, text: str) -> Polynomial:
    return _Evaluator(spec, operators=False).eval(_parse(text))


def parse_operator(spec: GradedLieAlgebra, text: str) -> VarCoeffOperator:
    return _Evaluator(spec, operators=True).eval(_parse(text))

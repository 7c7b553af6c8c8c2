"""Parser for the field expression grammar used in scenario files.

Grammar (Python-like infix, ``^`` accepted as power)::

    expr  := number | pi | e | x1 .. xn
           | expr (+ - * /) expr | -expr | expr ^ int
           | abs(expr) | min(expr, expr, ...) | max(expr, expr, ...)
           | bump(c, r)              tensor bump over all coordinates,
                                     c a number or an n-tuple
           | bump(expr, c, r)        univariate bump profile of expr
           | pwl(expr, (k1, ...), (v1, ...))
           | smoothstep(expr, lo, hi)
           | sin(expr) | cos(expr) | exp(expr) | sqrt(expr) | atan2(expr, expr)
           | steklov(expr, eps) | steklov_d(expr, eps, j)
           | compose(expr, m1, ..., mk)
           | jacdet(expr, (g1, ...), (i1, ...))
"""

from __future__ import annotations

import ast
import math
import re

from . import nodes as nd
from .errors import ParseError
from .fields import ScalarField, bump

_COORD = re.compile(r"^x([1-9][0-9]*)$")


def parse_field(text: str, arity: int, lip_bound: float | None = None) -> ScalarField:
    """Parse ``text`` into a :class:`ScalarField` of the given arity."""
    if not isinstance(text, (str, int, float)):
        raise ParseError(f"expression must be a string, got {type(text).__name__}")
    return ScalarField(parse_node(str(text), arity), arity, lip_bound)


def parse_node(text: str, arity: int) -> nd.Node:
    try:
        tree = ast.parse(text.replace("^", "**"), mode="eval")
    except SyntaxError as exc:
        raise ParseError(f"cannot parse {text!r}: {exc.msg}") from None
    return _Builder(arity, text).build(tree.body)


class _Builder:
    def __init__(self, arity: int, source: str):
        self.arity = arity
        self.source = source

    def fail(self, msg: str):
        raise ParseError(f"{msg} in {self.source!r}")

    def number(self, node) -> float:
        n = self.build(node)
        if not isinstance(n, nd.Const):
            self.fail("expected a constant")
        return n.c

    def numbers(self, node) -> tuple[float, ...]:
        if isinstance(node, (ast.Tuple, ast.List)):
            return tuple(self.number(e) for e in node.elts)
        return (self.number(node),)

    def build(self, node) -> nd.Node:
        if isinstance(node, ast.Constant):
            if isinstance(node.value, bool) or not isinstance(node.value, (int, float)):
                self.fail(f"unsupported literal {node.value!r}")
            return nd.Const(float(node.value))
        if isinstance(node, ast.Name):
            if node.id == "pi":
                return nd.Const(math.pi)
            if node.id == "e":
                return nd.Const(math.e)
            m = _COORD.match(node.id)
            if not m:
                self.fail(f"unknown name {node.id!r}")
            j = int(m.group(1))
            if j > self.arity:
                self.fail(f"coordinate {node.id} exceeds dimension {self.arity}")
            return nd.Coord(j - 1)
        if isinstance(node, ast.UnaryOp):
            a = self.build(node.operand)
            if isinstance(node.op, ast.USub):
                return nd.neg(a)
            if isinstance(node.op, ast.UAdd):
                return a
            self.fail("unsupported unary operator")
        if isinstance(node, ast.BinOp):
            a = self.build(node.left)
            if isinstance(node.op, ast.Pow):
                k = self.number(node.right)
                if k != int(k) or k < 0:
                    self.fail("exponent must be a nonnegative integer")
                if isinstance(a, nd.Const):
                    return nd.Const(a.c ** int(k))
                return nd.Pow(a, int(k))
            b = self.build(node.right)
            ops = {ast.Add: nd.add, ast.Sub: nd.sub, ast.Mult: nd.mul, ast.Div: nd.div}
            for op, fn in ops.items():
                if isinstance(node.op, op):
                    return fn(a, b)
            self.fail("unsupported operator")
        if isinstance(node, ast.Call) and isinstance(node.func, ast.Name):
            return self.call(node.func.id, node.args)
        self.fail(f"unsupported syntax {type(node).__name__}")

    def call(self, name: str, args) -> nd.Node:
        def want(k):
            if len(args) != k:
                self.fail(f"{name}() takes {k} arguments")

        if name == "abs":
            want(1)
            return nd.Abs(self.build(args[0]))
        if name in ("min", "max"):
            if len(args) < 2:
                self.fail(f"{name}() needs at least two arguments")
            cls = nd.Min if name == "min" else nd.Max
            out = self.build(args[0])
            for a in args[1:]:
                out = cls(out, self.build(a))
            return out
        if name == "bump":
            if len(args) == 2:
                c = self.numbers(args[0])
                if len(c) not in (1, self.arity):
                    self.fail("bump center must be a number or an n-tuple")
                return bump(c if len(c) > 1 else c[0], self.number(args[1]), self.arity).expr
            want(3)
            r = self.number(args[2])
            if r <= 0:
                self.fail("bump radius must be positive")
            return nd.Bump1(self.build(args[0]), self.number(args[1]), r)
        if name == "pwl":
            want(3)
            ks, vs = self.numbers(args[1]), self.numbers(args[2])
            if len(ks) != len(vs) or len(ks) < 2 or any(b <= a for a, b in zip(ks, ks[1:])):
                self.fail("pwl needs matching increasing knots and values")
            return nd.PiecewiseLinear(self.build(args[0]), ks, vs)
        if name == "smoothstep":
            want(3)
            lo, hi = self.number(args[1]), self.number(args[2])
            if hi <= lo:
                self.fail("smoothstep needs lo < hi")
            return nd.SmoothStep(self.build(args[0]), lo, hi)
        if name in ("sin", "cos", "exp", "sqrt"):
            want(1)
            return nd.Func(name, self.build(args[0]))
        if name == "atan2":
            want(2)
            return nd.Atan2(self.build(args[0]), self.build(args[1]))
        if name == "steklov":
            want(2)
            eps = self.number(args[1])
            if eps <= 0:
                self.fail("steklov width must be positive")
            return nd.Steklov(self.build(args[0]), eps, self.arity)
        if name == "steklov_d":
            want(3)
            eps, j = self.number(args[1]), int(self.number(args[2]))
            if eps <= 0 or not 1 <= j <= self.arity:
                self.fail("bad steklov_d arguments")
            return nd.SteklovDerivative(self.build(args[0]), eps, j - 1, self.arity)
        if name == "compose":
            if len(args) < 2:
                self.fail("compose() needs an expression and its component maps")
            inner = _Builder(len(args) - 1, self.source).build(args[0])
            return nd.compose(inner, tuple(self.build(a) for a in args[1:]))
        if name == "jacdet":
            want(3)
            if not isinstance(args[1], (ast.Tuple, ast.List)):
                self.fail("jacdet factors must be a tuple")
            factors = tuple(self.build(a) for a in args[1].elts)
            axes = tuple(int(a) - 1 for a in self.numbers(args[2]))
            if len(axes) != len(factors):
                self.fail("jacdet needs one axis per factor")
            return nd.Minor(self.build(args[0]), factors, axes)
        self.fail(f"unknown function {name!r}")

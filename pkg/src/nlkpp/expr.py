"""Tiny arithmetic grammar for coefficient and initial-data expressions.

Accepted: numbers, the variables ``x`` and ``y``, the constant ``pi``, the
functions ``sin``, ``cos`` and ``exp``, infix ``+ - * /``, unary signs and
parentheses.  Anything else is rejected.
"""

from __future__ import annotations

import ast
import math

import numpy as np

from .exceptions import ConfigurationError

__all__ = ["Expression", "parse_expression"]

_FUNCS = {"sin": np.sin, "cos": np.cos, "exp": np.exp}
_BINOPS = {ast.Add: np.add, ast.Sub: np.subtract, ast.Mult: np.multiply, ast.Div: np.divide}
_UNARY = {ast.USub: np.negative, ast.UAdd: np.positive}


class Expression:
    """A validated expression, callable as ``f(x)`` or ``f(x, y)``."""

    def __init__(self, text: str):
        self.text = text.strip()
        try:
            tree = ast.parse(self.text, mode="eval")
        except SyntaxError as exc:
            raise ConfigurationError(f"malformed expression {text!r}: {exc.msg}") from None
        self._check(tree.body)
        self._tree = tree.body

    def _check(self, node):
        if isinstance(node, ast.BinOp):
            if type(node.op) not in _BINOPS:
                raise ConfigurationError(f"operator {type(node.op).__name__} not allowed in {self.text!r}")
            self._check(node.left)
            self._check(node.right)
        elif isinstance(node, ast.UnaryOp):
            if type(node.op) not in _UNARY:
                raise ConfigurationError(f"unary operator not allowed in {self.text!r}")
            self._check(node.operand)
        elif isinstance(node, ast.Call):
            if not isinstance(node.func, ast.Name) or node.func.id not in _FUNCS:
                raise ConfigurationError(f"unknown function in {self.text!r}; allowed: {sorted(_FUNCS)}")
            if len(node.args) != 1 or node.keywords:
                raise ConfigurationError(f"{node.func.id} takes exactly one argument")
            self._check(node.args[0])
        elif isinstance(node, ast.Name):
            if node.id not in ("x", "y", "pi"):
                raise ConfigurationError(f"unknown name {node.id!r} in {self.text!r}")
        elif isinstance(node, ast.Constant):
            if isinstance(node.value, bool) or not isinstance(node.value, (int, float)):
                raise ConfigurationError(f"only numeric constants are allowed in {self.text!r}")
        else:
            raise ConfigurationError(f"unsupported syntax {type(node).__name__} in {self.text!r}")

    def _eval(self, node, env):
        if isinstance(node, ast.BinOp):
            return _BINOPS[type(node.op)](self._eval(node.left, env), self._eval(node.right, env))
        if isinstance(node, ast.UnaryOp):
            return _UNARY[type(node.op)](self._eval(node.operand, env))
        if isinstance(node, ast.Call):
            return _FUNCS[node.func.id](self._eval(node.args[0], env))
        if isinstance(node, ast.Name):
            return env[node.id]
        return float(node.value)

    def __call__(self, x, y=None):
        x = np.asarray(x, dtype=float)
        env = {"x": x, "y": np.zeros_like(x) if y is None else np.asarray(y, dtype=float), "pi": math.pi}
        return np.broadcast_to(np.asarray(self._eval(self._tree, env), dtype=float), x.shape).copy()

    def __repr__(self):
        return f"Expression({self.text!r})"


def parse_expression(text: str) -> Expression:
    return Expression(text)

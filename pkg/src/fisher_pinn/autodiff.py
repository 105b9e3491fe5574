"""Scalar expression graphs with nested differentiation.

Expressions form immutable acyclic graphs over a small primitive set
(add, sub, mul, div, neg, pow, tanh, exp).  Differentiation with respect
to an input variable produces a *new expression graph*, so derivatives
such as u_xx remain differentiable with respect to any other variable
(e.g. network parameters).  Numeric gradients over many variables use
reverse mode on the evaluated graph.

Variables may be bound to Python floats or numpy arrays; array bindings
evaluate the same graph elementwise (one independent scalar graph per
array element).
"""

from __future__ import annotations

import math
from typing import Iterable, Mapping, Union

import numpy as np

Number = Union[float, np.ndarray]

_BINARY = {"add", "sub", "mul", "div"}
_UNARY = {"neg", "tanh", "exp"}


class UnboundVariableError(KeyError):
    """Raised when evaluation encounters a variable with no binding."""

    def __init__(self, name: str):
        super().__init__(name)
        self.name = name

    def __str__(self) -> str:
        return f"variable '{self.name}' is not bound"


class Expr:
    """One node of an immutable expression graph."""

    __slots__ = ("kind", "args", "name", "value", "exponent")

    def __init__(self, kind, args=(), name=None, value=None, exponent=None):
        self.kind = kind
        self.args = args
        self.name = name          # variable nodes only
        self.value = value        # constant nodes only
        self.exponent = exponent  # pow nodes only (constant real exponent)

    # -- constructors -------------------------------------------------

    @staticmethod
    def constant(value: float) -> "Expr":
        return Expr("const", value=float(value))

    @staticmethod
    def var(name: str) -> "Expr":
        return Expr("var", name=name)

    # -- operator sugar -----------------------------------------------

    @staticmethod
    def _wrap(other) -> "Expr":
        if isinstance(other, Expr):
            return other
        return Expr.constant(other)

    def __add__(self, other):
        return add(self, self._wrap(other))

    def __radd__(self, other):
        return add(self._wrap(other), self)

    def __sub__(self, other):
        return sub(self, self._wrap(other))

    def __rsub__(self, other):
        return sub(self._wrap(other), self)

    def __mul__(self, other):
        return mul(self, self._wrap(other))

    def __rmul__(self, other):
        return mul(self._wrap(other), self)

    def __truediv__(self, other):
        return div(self, self._wrap(other))

    def __rtruediv__(self, other):
        return div(self._wrap(other), self)

    def __neg__(self):
        return neg(self)

    def __pow__(self, exponent):
        return power(self, exponent)

    def __repr__(self):
        if self.kind == "const":
            return f"Expr(const {self.value})"
        if self.kind == "var":
            return f"Expr(var {self.name})"
        return f"Expr({self.kind}, {len(self.args)} args)"


def _const_value(e: Expr):
    return e.value if e.kind == "const" else None


def _is_const(e: Expr, v: float) -> bool:
    return e.kind == "const" and e.value == v


# -- smart constructors (fold constants so derivative graphs stay small) --

def add(a: Expr, b: Expr) -> Expr:
    if a.kind == "const" and b.kind == "const":
        return Expr.constant(a.value + b.value)
    if _is_const(a, 0.0):
        return b
    if _is_const(b, 0.0):
        return a
    return Expr("add", (a, b))


def sub(a: Expr, b: Expr) -> Expr:
    if a.kind == "const" and b.kind == "const":
        return Expr.constant(a.value - b.value)
    if _is_const(b, 0.0):
        return a
    if _is_const(a, 0.0):
        return neg(b)
    return Expr("sub", (a, b))


def mul(a: Expr, b: Expr) -> Expr:
    if a.kind == "const" and b.kind == "const":
        return Expr.constant(a.value * b.value)
    if _is_const(a, 0.0) or _is_const(b, 0.0):
        return Expr.constant(0.0)
    if _is_const(a, 1.0):
        return b
    if _is_const(b, 1.0):
        return a
    return Expr("mul", (a, b))


def div(a: Expr, b: Expr) -> Expr:
    if a.kind == "const" and b.kind == "const":
        return Expr.constant(a.value / b.value)
    if _is_const(a, 0.0):
        return Expr.constant(0.0)
    if _is_const(b, 1.0):
        return a
    return Expr("div", (a, b))


def neg(a: Expr) -> Expr:
    if a.kind == "const":
        return Expr.constant(-a.value)
    return Expr("neg", (a,))


def power(base: Expr, exponent: float) -> Expr:
    if isinstance(exponent, Expr):
        if exponent.kind != "const":
            raise TypeError("pow exponent must be a constant")
        exponent = exponent.value
    exponent = float(exponent)
    if exponent == 0.0:
        return Expr.constant(1.0)
    if exponent == 1.0:
        return base
    if base.kind == "const":
        return Expr.constant(base.value ** exponent)
    return Expr("pow", (base,), exponent=exponent)


def tanh(a: Expr) -> Expr:
    if a.kind == "const":
        return Expr.constant(math.tanh(a.value))
    return Expr("tanh", (a,))


def exp(a: Expr) -> Expr:
    if a.kind == "const":
        return Expr.constant(math.exp(a.value))
    return Expr("exp", (a,))


# -- traversal ------------------------------------------------------------

def _topo_order(root: Expr) -> list[Expr]:
    """Children-before-parents order over the reachable DAG."""
    order: list[Expr] = []
    seen: set[int] = set()
    stack: list[tuple[Expr, bool]] = [(root, False)]
    while stack:
        node, expanded = stack.pop()
        if expanded:
            order.append(node)
            continue
        if id(node) in seen:
            continue
        seen.add(id(node))
        stack.append((node, True))
        for child in node.args:
            if id(child) not in seen:
                stack.append((child, False))
    return order


def evaluate(expr: Expr, bindings: Mapping[str, Number]) -> Number:
    """Evaluate the graph with the given variable bindings.

    Bindings may mix scalars and equally-shaped numpy arrays; the result
    broadcasts like the underlying numpy operations.
    """
    values: dict[int, Number] = {}
    for node in _topo_order(expr):
        k = node.kind
        if k == "const":
            v = node.value
        elif k == "var":
            if node.name not in bindings:
                raise UnboundVariableError(node.name)
            v = bindings[node.name]
        else:
            a = values[id(node.args[0])]
            if k == "add":
                v = a + values[id(node.args[1])]
            elif k == "sub":
                v = a - values[id(node.args[1])]
            elif k == "mul":
                v = a * values[id(node.args[1])]
            elif k == "div":
                v = a / values[id(node.args[1])]
            elif k == "neg":
                v = -a
            elif k == "pow":
                v = a ** node.exponent
            elif k == "tanh":
                v = np.tanh(a) if isinstance(a, np.ndarray) else math.tanh(a)
            elif k == "exp":
                v = np.exp(a) if isinstance(a, np.ndarray) else math.exp(a)
            else:  # pragma: no cover
                raise ValueError(f"unknown node kind {k!r}")
        values[id(node)] = v
    return values[id(expr)]


def derivative(expr: Expr, wrt: str) -> Expr:
    """Build the expression graph of d(expr)/d(wrt).

    The result is itself an Expr, so it can be differentiated again
    (second input derivatives) or with respect to other variables
    (parameter gradients of losses containing u_t, u_xx).
    """
    derivs: dict[int, Expr] = {}
    zero = Expr.constant(0.0)
    for node in _topo_order(expr):
        k = node.kind
        if k == "const":
            d = zero
        elif k == "var":
            d = Expr.constant(1.0) if node.name == wrt else zero
        else:
            da = derivs[id(node.args[0])]
            if k == "add":
                d = add(da, derivs[id(node.args[1])])
            elif k == "sub":
                d = sub(da, derivs[id(node.args[1])])
            elif k == "mul":
                a, b = node.args
                d = add(mul(da, b), mul(a, derivs[id(b)]))
            elif k == "div":
                a, b = node.args
                db = derivs[id(b)]
                # (a/b)' = a'/b - a b' / b^2
                d = sub(div(da, b), div(mul(a, db), mul(b, b)))
            elif k == "neg":
                d = neg(da)
            elif k == "pow":
                a = node.args[0]
                d = mul(mul(Expr.constant(node.exponent),
                            power(a, node.exponent - 1.0)), da)
            elif k == "tanh":
                # reuse `node` so tanh is evaluated once per graph
                d = mul(sub(Expr.constant(1.0), mul(node, node)), da)
            elif k == "exp":
                d = mul(node, da)
            else:  # pragma: no cover
                raise ValueError(f"unknown node kind {k!r}")
        derivs[id(node)] = d
    return derivs[id(expr)]


def grad(expr: Expr, wrt: Iterable[str],
         bindings: Mapping[str, Number]) -> dict[str, Number]:
    """Exact first derivatives of expr with respect to each named variable.

    Reverse mode over the evaluated graph: one forward sweep, one adjoint
    sweep, regardless of how many variables are requested.  The returned
    map has an entry for every requested variable, including zeros.
    """
    wanted = list(wrt)
    order = _topo_order(expr)

    values: dict[int, Number] = {}
    for node in order:
        k = node.kind
        if k == "const":
            values[id(node)] = node.value
        elif k == "var":
            if node.name not in bindings:
                raise UnboundVariableError(node.name)
            values[id(node)] = bindings[node.name]
        elif k == "add":
            values[id(node)] = values[id(node.args[0])] + values[id(node.args[1])]
        elif k == "sub":
            values[id(node)] = values[id(node.args[0])] - values[id(node.args[1])]
        elif k == "mul":
            values[id(node)] = values[id(node.args[0])] * values[id(node.args[1])]
        elif k == "div":
            values[id(node)] = values[id(node.args[0])] / values[id(node.args[1])]
        elif k == "neg":
            values[id(node)] = -values[id(node.args[0])]
        elif k == "pow":
            values[id(node)] = values[id(node.args[0])] ** node.exponent
        elif k == "tanh":
            a = values[id(node.args[0])]
            values[id(node)] = np.tanh(a) if isinstance(a, np.ndarray) else math.tanh(a)
        elif k == "exp":
            a = values[id(node.args[0])]
            values[id(node)] = np.exp(a) if isinstance(a, np.ndarray) else math.exp(a)

    adjoints: dict[int, Number] = {id(expr): 1.0}
    result: dict[str, Number] = {name: 0.0 for name in wanted}
    wanted_set = set(wanted)
    for node in reversed(order):
        bar = adjoints.get(id(node))
        if bar is None:
            continue
        k = node.kind
        if k == "var":
            if node.name in wanted_set:
                result[node.name] = result[node.name] + bar
            continue
        if k in ("const",):
            continue
        a = node.args[0]
        if k == "add":
            b = node.args[1]
            adjoints[id(a)] = adjoints.get(id(a), 0.0) + bar
            adjoints[id(b)] = adjoints.get(id(b), 0.0) + bar
        elif k == "sub":
            b = node.args[1]
            adjoints[id(a)] = adjoints.get(id(a), 0.0) + bar
            adjoints[id(b)] = adjoints.get(id(b), 0.0) - bar
        elif k == "mul":
            b = node.args[1]
            adjoints[id(a)] = adjoints.get(id(a), 0.0) + bar * values[id(b)]
            adjoints[id(b)] = adjoints.get(id(b), 0.0) + bar * values[id(a)]
        elif k == "div":
            b = node.args[1]
            vb = values[id(b)]
            adjoints[id(a)] = adjoints.get(id(a), 0.0) + bar / vb
            adjoints[id(b)] = adjoints.get(id(b), 0.0) - bar * values[id(node)] / vb
        elif k == "neg":
            adjoints[id(a)] = adjoints.get(id(a), 0.0) - bar
        elif k == "pow":
            va = values[id(a)]
            adjoints[id(a)] = (adjoints.get(id(a), 0.0)
                               + bar * node.exponent * va ** (node.exponent - 1.0))
        elif k == "tanh":
            t = values[id(node)]
            adjoints[id(a)] = adjoints.get(id(a), 0.0) + bar * (1.0 - t * t)
        elif k == "exp":
            adjoints[id(a)] = adjoints.get(id(a), 0.0) + bar * values[id(node)]
    return result


def second_derivative(expr: Expr, wrt: str,
                      bindings: Mapping[str, Number]) -> Number:
    """Exact second derivative of expr with respect to one variable."""
    return evaluate(derivative(derivative(expr, wrt), wrt), bindings)

import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from fisher_pinn import autodiff
from fisher_pinn.autodiff import Expr, UnboundVariableError


def fd1(f, x, h=1e-6):
    return (f(x + h) - f(x - h)) / (2 * h)


def fd2(f, x, h=1e-4):
    return (f(x + h) - 2 * f(x) + f(x - h)) / (h * h)


class TestEvaluate:
    def test_tanh_at_zero(self):
        assert autodiff.evaluate(autodiff.tanh(Expr.constant(0.0)), {}) == 0.0

    def test_tanh_at_one(self):
        x = Expr.var("x")
        got = autodiff.evaluate(autodiff.tanh(x), {"x": 1.0})
        assert got == pytest.approx(0.7615941559557649, abs=1e-15)

    def test_logistic_vertex(self):
        x = Expr.var("x")
        expr = x * (Expr.constant(1.0) - x)
        assert autodiff.evaluate(expr, {"x": 0.5}) == 0.25

    def test_unbound_variable_names_it(self):
        x = Expr.var("mystery")
        with pytest.raises(UnboundVariableError, match="mystery"):
            autodiff.evaluate(x + Expr.constant(1.0), {})

    def test_array_bindings(self):
        x = Expr.var("x")
        expr = autodiff.tanh(x) * Expr.constant(2.0)
        vals = np.array([0.0, 1.0, -1.0])
        got = autodiff.evaluate(expr, {"x": vals})
        np.testing.assert_allclose(got, 2 * np.tanh(vals), rtol=1e-15)

    def test_deterministic(self):
        x = Expr.var("x")
        expr = autodiff.exp(x) / (Expr.constant(1.0) + autodiff.exp(x))
        a = autodiff.evaluate(expr, {"x": 0.3})
        b = autodiff.evaluate(expr, {"x": 0.3})
        assert a == b


class TestGrad:
    def test_power_rule(self):
        x = Expr.var("x")
        g = autodiff.grad(autodiff.power(x, 2), ["x"], {"x": 3.0})
        assert g["x"] == pytest.approx(6.0, abs=1e-12)

    def test_tanh_derivative(self):
        x = Expr.var("x")
        g = autodiff.grad(autodiff.tanh(x), ["x"], {"x": 1.0})
        assert g["x"] == pytest.approx(1 - math.tanh(1.0) ** 2, abs=1e-15)

    def test_bilinear(self):
        x, y = Expr.var("x"), Expr.var("y")
        g = autodiff.grad(x * y, ["y"], {"x": 2.0, "y": 5.0})
        assert g["y"] == 2.0

    def test_var_wrt_itself(self):
        x = Expr.var("x")
        assert autodiff.grad(x, ["x"], {"x": 7.0})["x"] == 1.0

    def test_zero_entries_for_unused_vars(self):
        x, y = Expr.var("x"), Expr.var("y")
        g = autodiff.grad(x * x, ["x", "y"], {"x": 2.0, "y": 3.0})
        assert g["y"] == 0.0

    def test_linearity_exact(self):
        x = Expr.var("x")
        f = autodiff.tanh(x)
        g = autodiff.exp(x)
        combo = Expr.constant(2.5) * f + Expr.constant(-1.5) * g
        at = {"x": 0.7}
        d_combo = autodiff.grad(combo, ["x"], at)["x"]
        d_f = autodiff.grad(f, ["x"], at)["x"]
        d_g = autodiff.grad(g, ["x"], at)["x"]
        assert d_combo == 2.5 * d_f + (-1.5) * d_g


class TestSecondDerivative:
    def test_cubic(self):
        x = Expr.var("x")
        got = autodiff.second_derivative(autodiff.power(x, 3), "x", {"x": 2.0})
        assert got == pytest.approx(12.0, abs=1e-10)

    def test_tanh_at_zero(self):
        x = Expr.var("x")
        got = autodiff.second_derivative(autodiff.tanh(x), "x", {"x": 0.0})
        assert got == 0.0

    def test_tanh_at_one(self):
        x = Expr.var("x")
        got = autodiff.second_derivative(autodiff.tanh(x), "x", {"x": 1.0})
        t = math.tanh(1.0)
        assert got == pytest.approx(-2 * t * (1 - t * t), abs=1e-12)

    def test_parameter_grad_flows_through_second_derivative(self):
        # f(theta, x) = theta * tanh(x): d/dtheta of f_xx is tanh''(x)
        theta, x = Expr.var("theta"), Expr.var("x")
        f = theta * autodiff.tanh(x)
        fxx = autodiff.derivative(autodiff.derivative(f, "x"), "x")
        g = autodiff.grad(fxx, ["theta"], {"theta": 3.0, "x": 1.0})
        t = math.tanh(1.0)
        assert g["theta"] == pytest.approx(-2 * t * (1 - t * t), abs=1e-12)


def _random_expr(rng, vars_, depth):
    if depth == 0:
        if rng.random() < 0.4:
            return Expr.constant(float(rng.uniform(-2, 2))), lambda b: None
        name = vars_[rng.integers(len(vars_))]
        return Expr.var(name), None
    kind = rng.integers(7)
    a, _ = _random_expr(rng, vars_, depth - 1)
    if kind == 0:
        b, _ = _random_expr(rng, vars_, depth - 1)
        return a + b, None
    if kind == 1:
        b, _ = _random_expr(rng, vars_, depth - 1)
        return a - b, None
    if kind == 2:
        b, _ = _random_expr(rng, vars_, depth - 1)
        return a * b, None
    if kind == 3:
        # keep denominators away from zero
        b, _ = _random_expr(rng, vars_, depth - 1)
        return a / (autodiff.exp(b * Expr.constant(0.1)) + Expr.constant(1.5)), None
    if kind == 4:
        return autodiff.tanh(a), None
    if kind == 5:
        return autodiff.exp(a * Expr.constant(0.3)), None
    return -a, None


@given(seed=st.integers(0, 10_000))
def test_grad_matches_finite_differences(seed):
    rng = np.random.default_rng(seed)
    expr, _ = _random_expr(rng, ["x", "y"], depth=4)
    x0, y0 = rng.uniform(-1.5, 1.5, 2)
    g = autodiff.grad(expr, ["x", "y"], {"x": x0, "y": y0})
    for name, v0 in (("x", x0), ("y", y0)):
        def f(v, name=name):
            b = {"x": x0, "y": y0}
            b[name] = v
            return autodiff.evaluate(expr, b)
        approx = fd1(f, v0)
        # roundoff floor of the central difference at h=1e-6 is about
        # eps*|f|/(2h) ~ 1e-10*|f|
        noise = 1e-9 * (1.0 + abs(f(v0)))
        assert abs(g[name] - approx) <= max(1e-8, 1e-6 * abs(approx), noise)


@given(seed=st.integers(0, 10_000))
def test_second_derivative_matches_finite_differences(seed):
    rng = np.random.default_rng(seed)
    expr, _ = _random_expr(rng, ["x"], depth=3)
    x0 = float(rng.uniform(-1.0, 1.0))

    def f(v):
        return autodiff.evaluate(expr, {"x": v})

    got = autodiff.second_derivative(expr, "x", {"x": x0})
    approx = fd2(f, x0)
    # the second central difference at h=1e-4 carries cancellation noise
    # of roughly 4*eps*|f|/h^2 ~ 1e-7*|f|, so the absolute branch of the
    # magnitude guard must sit above that floor
    noise = 1e-7 * (1.0 + abs(f(x0)))
    if abs(approx) > max(1e-8, noise):
        assert got == pytest.approx(approx, rel=1e-4)
    else:
        assert got == pytest.approx(approx, abs=noise)


def test_deep_graph_no_recursion_limit():
    x = Expr.var("x")
    expr = x
    for _ in range(20_000):
        expr = expr + Expr.constant(1.0)
    assert autodiff.evaluate(expr, {"x": 0.5}) == pytest.approx(20_000.5)
    assert autodiff.grad(expr, ["x"], {"x": 0.5})["x"] == 1.0


def test_derivative_returns_expr():
    x = Expr.var("x")
    d = autodiff.derivative(autodiff.tanh(x), "x")
    assert isinstance(d, Expr)
    assert autodiff.evaluate(d, {"x": 0.0}) == 1.0

import math

import numpy as np
import pytest

from fisher_pinn import autodiff, network
from fisher_pinn.network import (Architecture, ParameterShapeError, forward,
                                 param_vars, predict, predict_grid,
                                 split_params, xavier_init)


@pytest.fixture
def tiny_arch():
    return Architecture(hidden_layers=1, hidden_width=1)  # 2 -> 1 -> 1


class TestArchitecture:
    def test_default_is_7x50(self):
        a = Architecture()
        assert a.hidden_layers == 7 and a.hidden_width == 50
        assert a.layer_sizes() == [2] + [50] * 7 + [1]

    def test_param_count(self, small_arch):
        # 2->8: 16+8; 8->8: 64+8; 8->1: 8+1
        assert small_arch.param_count() == 24 + 72 + 9

    @pytest.mark.parametrize("kwargs", [{"hidden_layers": 0},
                                        {"hidden_width": 0},
                                        {"input_dim": 3},
                                        {"activation": "relu"}])
    def test_invalid_rejected(self, kwargs):
        with pytest.raises(ValueError):
            Architecture(**kwargs)


class TestXavierInit:
    def test_biases_are_zero(self):
        arch = Architecture(hidden_layers=3, hidden_width=10)
        theta = xavier_init(arch, 7)
        for w, b in split_params(arch, theta):
            assert np.all(b == 0.0)

    def test_weight_std_matches_xavier_formula(self):
        arch = Architecture()  # >13k weights across layers
        theta = xavier_init(arch, 0)
        normalized = []
        sizes = arch.layer_sizes()
        for (w, b), (fi, fo) in zip(split_params(arch, theta),
                                    zip(sizes[:-1], sizes[1:])):
            normalized.append(w.ravel() / math.sqrt(2.0 / (fi + fo)))
        z = np.concatenate(normalized)
        assert z.std() == pytest.approx(1.0, rel=0.05)
        assert abs(z.mean()) < 0.05

    def test_deterministic(self):
        arch = Architecture(hidden_layers=2, hidden_width=5)
        np.testing.assert_array_equal(xavier_init(arch, 42),
                                      xavier_init(arch, 42))
        assert not np.array_equal(xavier_init(arch, 42), xavier_init(arch, 43))


class TestForward:
    def test_zero_params_is_zero_map(self, small_arch):
        theta = np.zeros(small_arch.param_count())
        expr = forward(small_arch, theta, 0.3, 0.7)
        assert autodiff.evaluate(expr, {}) == 0.0

    def test_all_ones_tiny_net(self, tiny_arch):
        theta = np.zeros(tiny_arch.param_count())
        # weights 1, biases 0: layout is [W1 (1x2), b1, W2 (1x1), b2]
        theta[[0, 1, 3]] = 1.0
        expr = forward(tiny_arch, theta, 0.5, 0.5)
        assert autodiff.evaluate(expr, {}) == pytest.approx(math.tanh(1.0),
                                                            abs=1e-15)
        expr0 = forward(tiny_arch, theta, 0.0, 0.0)
        assert autodiff.evaluate(expr0, {}) == 0.0

    def test_shape_mismatch_reports_lengths(self, small_arch):
        with pytest.raises(ParameterShapeError) as exc:
            forward(small_arch, np.zeros(10), 0.0, 0.0)
        assert exc.value.expected == small_arch.param_count()
        assert exc.value.actual == 10

    def test_parameter_gradient_matches_fd(self, small_arch, rng):
        theta = xavier_init(small_arch, 1)
        pvars = param_vars(small_arch)
        t_v, x_v = autodiff.Expr.var("t"), autodiff.Expr.var("x")
        expr = forward(small_arch, pvars, t_v, x_v)
        names = [v.name for v in pvars]
        h = 1e-6
        for t0, x0 in rng.uniform(0, 1, (20, 2)):
            bindings = {n: v for n, v in zip(names, theta)}
            bindings.update(t=t0, x=x0)
            g = autodiff.grad(expr, names, bindings)
            for i in rng.choice(len(theta), 5, replace=False):
                bp = dict(bindings); bp[names[i]] = theta[i] + h
                bm = dict(bindings); bm[names[i]] = theta[i] - h
                approx = (autodiff.evaluate(expr, bp)
                          - autodiff.evaluate(expr, bm)) / (2 * h)
                assert abs(g[names[i]] - approx) <= \
                    max(1e-8, 1e-6 * abs(approx))

    def test_continuity_under_tiny_perturbation(self, rng):
        arch = Architecture()
        theta = xavier_init(arch, 3)
        t0, x0 = 0.4, 0.6
        base = predict(arch, theta, t0, x0)[0]
        moved = predict(arch, theta, t0 + 1e-9, x0 - 1e-9)[0]
        assert abs(base - moved) < 1e-6


class TestPredict:
    def test_predict_matches_expr_forward(self, small_arch, rng):
        theta = xavier_init(small_arch, 2)
        ts, xs = rng.uniform(0, 1, (2, 30))
        fast = predict(small_arch, theta, ts, xs)
        slow = np.array([autodiff.evaluate(forward(small_arch, theta, t, x), {})
                         for t, x in zip(ts, xs)])
        np.testing.assert_allclose(fast, slow, rtol=1e-12, atol=1e-15)

    def test_grid_zero_params(self, small_arch):
        theta = np.zeros(small_arch.param_count())
        grid = predict_grid(small_arch, theta, [0.0, 1.0], [0.0, 1.0])
        np.testing.assert_array_equal(grid, np.zeros((2, 2)))

    def test_grid_single_point_consistency(self, small_arch):
        theta = xavier_init(small_arch, 5)
        grid = predict_grid(small_arch, theta, [0.25], [0.75])
        expected = autodiff.evaluate(forward(small_arch, theta, 0.25, 0.75), {})
        assert grid.shape == (1, 1)
        assert grid[0, 0] == pytest.approx(expected, rel=1e-12)

    def test_grid_all_ones_tiny_net(self, tiny_arch):
        theta = np.zeros(tiny_arch.param_count())
        theta[[0, 1, 3]] = 1.0
        grid = predict_grid(tiny_arch, theta, [0.0, 0.5], [0.0, 0.5])
        assert grid[0, 0] == 0.0
        assert grid[1, 1] == pytest.approx(math.tanh(1.0), abs=1e-15)

    def test_grid_equals_pointwise_forward(self, small_arch, rng):
        theta = xavier_init(small_arch, 9)
        times = rng.uniform(0, 1, 4)
        positions = rng.uniform(0, 1, 5)
        grid = predict_grid(small_arch, theta, times, positions)
        for i, t in enumerate(times):
            for j, x in enumerate(positions):
                # batched GEMM vs single-row GEMM may differ in the last ulp
                assert grid[i, j] == pytest.approx(
                    predict(small_arch, theta, t, x)[0], rel=1e-12)

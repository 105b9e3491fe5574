import json

import numpy as np
import pytest

from fisher_pinn.cli import main
from fisher_pinn.experiment import (ExperimentConfig, load_checkpoint,
                                    read_grid_csv, write_json)
from fisher_pinn.network import Architecture, xavier_init


TINY = {
    "architecture": {"hidden_layers": 1, "hidden_width": 4},
    "sampling": {"n_collocation": 30, "n_ic": 10, "n_bc_per_side": 5,
                 "seed": 0},
    "nx": 21,
    "nt": 40,
    "iterations": 5,
    "retrain_iterations": 4,
}


@pytest.fixture
def tiny_config(tmp_path):
    path = tmp_path / "config.json"
    write_json(path, TINY)
    return path


def run(*argv):
    return main([str(a) for a in argv])


class TestFdmCommand:
    def test_writes_grid_and_report(self, tmp_path, tiny_config):
        out = tmp_path / "fdm"
        assert run("fdm", "--config", tiny_config, "--out", out) == 0
        grid, times, positions = read_grid_csv(out / "fdm_grid.csv")
        assert grid.shape == (41, 21)
        report = json.loads((out / "report.json").read_text())
        assert report["relative_l2"] >= 0
        assert (out / "config_used.json").exists()

    def test_default_grid_shape(self, tmp_path):
        out = tmp_path / "fdm_default"
        assert run("fdm", "--out", out) == 0
        lines = (out / "fdm_grid.csv").read_text().splitlines()
        assert len(lines) == 1602  # header + 1601 time levels
        assert len(lines[0].split(",")) == 202  # "t" + 201 x nodes

    def test_cfl_violation_exits_2(self, tmp_path, capsys):
        out = tmp_path / "fdm_bad"
        assert run("fdm", "--out", out, "--nt", 500) == 2
        err = capsys.readouterr().err
        assert "0.00125" in err

    def test_deterministic_bytes(self, tmp_path, tiny_config):
        a, b = tmp_path / "a", tmp_path / "b"
        run("fdm", "--config", tiny_config, "--out", a)
        run("fdm", "--config", tiny_config, "--out", b)
        assert (a / "fdm_grid.csv").read_bytes() == \
            (b / "fdm_grid.csv").read_bytes()


class TestTrainCommand:
    def test_writes_artifact_set(self, tmp_path, tiny_config):
        out = tmp_path / "train"
        assert run("train", "--config", tiny_config, "--out", out) == 0
        for name in ("checkpoint.json", "loss_history.csv", "pinn_grid.csv",
                     "report.json", "config_used.json"):
            assert (out / name).exists(), name
        report = json.loads((out / "report.json").read_text())
        assert report["relative_l2"] >= 0
        ckpt = load_checkpoint(out / "checkpoint.json")
        assert ckpt.iteration == 5

    def test_zero_iterations_checkpoint_is_xavier_init(self, tmp_path,
                                                       tiny_config):
        out = tmp_path / "train0"
        assert run("train", "--config", tiny_config, "--out", out,
                   "--iterations", 0, "--seed", 7) == 0
        ckpt = load_checkpoint(out / "checkpoint.json")
        expected = xavier_init(Architecture(hidden_layers=1, hidden_width=4),
                               7)
        np.testing.assert_array_equal(ckpt.params, expected)

    def test_reproducible_apart_from_metadata(self, tmp_path, tiny_config):
        a, b = tmp_path / "a", tmp_path / "b"
        run("train", "--config", tiny_config, "--out", a)
        run("train", "--config", tiny_config, "--out", b)
        for name in ("loss_history.csv", "pinn_grid.csv", "config_used.json"):
            assert (a / name).read_bytes() == (b / name).read_bytes(), name
        ca = json.loads((a / "checkpoint.json").read_text())
        cb = json.loads((b / "checkpoint.json").read_text())
        ca.pop("metadata"), cb.pop("metadata")
        assert ca == cb

    def test_weight_mode_flag(self, tmp_path, tiny_config):
        out = tmp_path / "fixed"
        assert run("train", "--config", tiny_config, "--out", out,
                   "--weight-mode", "fixed") == 0
        cfg = json.loads((out / "config_used.json").read_text())
        assert cfg["weight_mode"] == "fixed"


class TestRetrainCommand:
    @pytest.fixture
    def trained(self, tmp_path, tiny_config):
        out = tmp_path / "base"
        run("train", "--config", tiny_config, "--out", out)
        return out / "checkpoint.json"

    def test_emits_retrain_report(self, tmp_path, trained):
        out = tmp_path / "re"
        assert run("retrain", trained, "--out", out, "--lr", "1e-4",
                   "--iterations", 4) == 0
        report = json.loads((out / "retrain_report.json").read_text())
        assert report["mode"] == "reset"
        assert report["lr"] == 1e-4
        assert "relative_l2" in report["before"]
        assert "relative_l2" in report["after"]

    def test_preserve_mode_recorded(self, tmp_path, trained):
        out = tmp_path / "rp"
        assert run("retrain", trained, "--out", out, "--iterations", 2,
                   "--preserve-optimizer") == 0
        report = json.loads((out / "retrain_report.json").read_text())
        assert report["mode"] == "preserve"

    def test_preserve_requires_optimizer_state(self, tmp_path, trained,
                                               capsys):
        ckpt = json.loads(trained.read_text())
        ckpt["adam"] = None
        bare = tmp_path / "bare.json"
        write_json(bare, ckpt)
        out = tmp_path / "rf"
        assert run("retrain", bare, "--out", out, "--iterations", 1,
                   "--preserve-optimizer") == 1
        assert "optimizer state" in capsys.readouterr().err

    def test_architecture_mismatch_rejected(self, tmp_path, trained, capsys):
        other = dict(TINY, architecture={"hidden_layers": 2,
                                         "hidden_width": 3})
        cfg = tmp_path / "other.json"
        write_json(cfg, other)
        out = tmp_path / "rm"
        assert run("retrain", trained, "--config", cfg, "--out", out) == 1
        assert "architecture" in capsys.readouterr().err

    def test_missing_checkpoint_exits_1(self, tmp_path):
        assert run("retrain", tmp_path / "nope.json",
                   "--out", tmp_path / "o") == 1


class TestCompareCommand:
    def test_three_way_report_and_error_fields(self, tmp_path, tiny_config):
        base = tmp_path / "base"
        run("train", "--config", tiny_config, "--out", base)
        out = tmp_path / "cmp"
        assert run("compare", base / "checkpoint.json", "--config",
                   tiny_config, "--out", out) == 0
        cmp_report = json.loads((out / "comparison.json").read_text())
        whole = cmp_report["whole_domain"]
        assert set(whole) == {"exact_vs_fdm", "exact_vs_pinn", "pinn_vs_fdm"}
        for rep in whole.values():
            assert rep["relative_l2"] >= 0
        for name in ("error_exact_fdm.csv", "error_exact_pinn.csv",
                     "error_pinn_fdm.csv"):
            field, _, _ = read_grid_csv(out / name)
            assert np.all(field >= 0)

    def test_triangle_bound_on_final_slice(self, tmp_path, tiny_config):
        # || pinn - fdm || <= || pinn - exact || + || exact - fdm ||, all
        # normalized by the shared || exact ||
        base = tmp_path / "base"
        run("train", "--config", tiny_config, "--out", base)
        out = tmp_path / "cmp"
        run("compare", base / "checkpoint.json", "--config", tiny_config,
            "--out", out)
        from fisher_pinn import fdm, physics
        from fisher_pinn.network import predict_grid
        cfg = ExperimentConfig.from_dict(TINY)
        ckpt = load_checkpoint(base / "checkpoint.json")
        grid = cfg.grid()
        x = grid.x_nodes(cfg.domain)
        t = grid.t_levels(cfg.domain)
        exact = physics.exact_solution(cfg.pde, x, cfg.domain.t_max)
        f = fdm.solve(cfg.pde, cfg.domain, grid, keep_history=False)
        u = predict_grid(ckpt.architecture, ckpt.params,
                         [cfg.domain.t_max], x)[0]
        denom = np.linalg.norm(exact)
        lhs = np.linalg.norm(u - f) / denom
        rhs = (np.linalg.norm(u - exact) + np.linalg.norm(exact - f)) / denom
        assert lhs <= rhs * (1 + 1e-12)


class TestUsageErrors:
    def test_unknown_command_exits_1(self):
        assert run("explode") == 1

    def test_missing_out_flag_exits_1(self):
        assert run("fdm") == 1

    def test_bad_thread_env_exits_1(self, tmp_path, monkeypatch, capsys):
        monkeypatch.setenv("FISHER_PINN_THREADS", "many")
        assert run("fdm", "--out", tmp_path / "o") == 1
        assert "FISHER_PINN_THREADS" in capsys.readouterr().err

    def test_thread_cap_accepted(self, tmp_path, monkeypatch, tiny_config):
        monkeypatch.setenv("FISHER_PINN_THREADS", "1")
        assert run("fdm", "--config", tiny_config,
                   "--out", tmp_path / "o") == 0

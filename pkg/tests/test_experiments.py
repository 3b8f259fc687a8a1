import csv
import dataclasses
import json
import math
import pathlib

import numpy as np
import pytest

from finrank_krr import make_tntk
from finrank_krr.cli import main
from finrank_krr.experiments import (
    BOUNDS_HEADER,
    ExperimentConfig,
    cmd_bounds,
    cmd_enclose,
    cmd_sweep,
    cmd_train,
    summarize,
)
from finrank_krr.validation import run_validation

CONFIG_DIR = pathlib.Path(__file__).resolve().parent.parent / "configs"
TNTK = {"family": "tntk", "rank": 7}
LEG = {"family": "legendre", "rank": 5}
GRID = [10, 20, 50, 100, 150, 200]


def config(tmp_path, **kw):
    base = dict(kernel=TNTK, target={"preset": "cos"}, noise_var=0.05, n_grid=GRID,
                lambda_rule={"sigma2_over_n": True}, trials=10, seed=0,
                output_dir=str(tmp_path / "out"))
    base.update(kw)
    return ExperimentConfig(**base)


def read(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def col(rows, name):
    return np.array([float(r[name]) for r in rows])


class TestConfig:
    @pytest.mark.parametrize("grid", [[7, 20], [2, 20], [50, 5]])
    def test_grid_must_exceed_rank(self, tmp_path, grid):
        with pytest.raises(ValueError):
            config(tmp_path, n_grid=grid)

    def test_unknown_key(self):
        with pytest.raises(ValueError, match="unknown config keys"):
            ExperimentConfig.from_dict({"kernel": TNTK, "target": {}, "bogus": 1})

    def test_lambda_rules(self, tmp_path):
        assert config(tmp_path).lambda_for(50) == pytest.approx(0.001)
        assert config(tmp_path, lambda_rule="sigma2_over_n").lambda_for(10) == 0.005
        assert config(tmp_path, lambda_rule={"fixed": 0.2}).lambda_for(10) == 0.2
        assert config(tmp_path, lambda_rule={"fixed_ref_n": 50}).lambda_for(200) == 0.001
        with pytest.raises(ValueError):
            config(tmp_path, lambda_rule={"nope": 1})

    def test_hash_ignores_output_location(self, tmp_path):
        a = config(tmp_path)
        b = dataclasses.replace(a, output_dir="elsewhere", workers=4)
        assert a.config_hash() == b.config_hash()
        assert a.config_hash() != dataclasses.replace(a, seed=1).config_hash()

    def test_summary_type7(self):
        med, q25, q75 = summarize([4, 1, 3, 2])
        assert (med, q25, q75) == (2.5, 1.75, 3.25)


class TestTrain:
    def test_interpolation_regime(self, tmp_path):
        cfg = config(tmp_path, noise_var=0.0, n_grid=[50], lambda_rule={"fixed": 1e-12})
        rows = read(cmd_train(cfg))
        grid = [r for r in rows if r["kind"] == "grid"]
        assert len(grid) == 256 and sum(r["kind"] == "sample" for r in rows) == 50
        assert np.max(np.abs(col(grid, "prediction") - col(grid, "target"))) <= 1e-6
        assert all(r["label"] == "nan" for r in grid)

    def test_sidecar(self, tmp_path):
        cfg = config(tmp_path, n_grid=[50])
        cmd_train(cfg)
        meta = json.loads((tmp_path / "out" / "train.json").read_text())
        assert meta["config_hash"] == cfg.config_hash()
        assert meta["seed"] == 0 and meta["lambda"] == 0.001
        assert meta["quartile_method"].startswith("linear")

    def test_io_error_has_path(self, tmp_path):
        blocker = tmp_path / "file"
        blocker.write_text("")
        with pytest.raises(OSError, match="file"):
            cmd_train(config(tmp_path, n_grid=[50], output_dir=str(blocker)))


class TestSweep:
    def test_noiseless_interpolation(self, tmp_path):
        cfg = config(tmp_path, noise_var=0.0, lambda_rule={"fixed": 1e-12}, trials=3)
        assert np.all(col(read(cmd_sweep(cfg)), "median") <= 1e-8)

    @pytest.mark.parametrize("rule", [{"sigma2_over_n": True}, {"fixed_ref_n": 50}])
    def test_medians_decrease(self, tmp_path, rule):
        rows = read(cmd_sweep(config(tmp_path, lambda_rule=rule)))
        med = col(rows, "median")
        assert np.all(np.diff(med) < 0)
        assert np.all(col(rows, "q25") <= med) and np.all(med <= col(rows, "q75"))
        trials = read(tmp_path / "out" / "sweep_trials.csv")
        assert len(trials) == 10 * len(GRID)

    def test_variance_dominated(self, tmp_path):
        rows = read(cmd_sweep(config(tmp_path, n_grid=[100, 200])))
        assert col(rows, "median")[-1] == pytest.approx(0.05 * 7 / 200, rel=0.5)

    def test_needs_two_points(self, tmp_path):
        with pytest.raises(ValueError):
            cmd_sweep(config(tmp_path, n_grid=[50]))

    def test_workers_do_not_change_output(self, tmp_path):
        a = config(tmp_path / "a", n_grid=[20, 40], trials=4)
        b = dataclasses.replace(a, output_dir=str(tmp_path / "b"), workers=2)
        assert open(cmd_sweep(a), "rb").read() == open(cmd_sweep(b), "rb").read()


class TestBounds:
    @pytest.fixture(params=["tntk", "legendre"])
    def outputs(self, tmp_path, request):
        grid = [float(v) for v in np.logspace(-6, -1, 11)] + [0.0]
        setup = {} if request.param == "tntk" else {"kernel": LEG, "target": {"preset": "square"}}
        cfg = config(tmp_path, lambda_rule={"fixed_ref_n": 50}, lambda_grid=grid, n_ref=50,
                     trials=3, **setup)
        cmd_bounds(cfg)
        out = tmp_path / "out"
        return read(out / "bounds_n.csv"), read(out / "bounds_lambda.csv")

    def test_header(self, outputs, tmp_path):
        with open(tmp_path / "out" / "bounds_n.csv") as fh:
            assert fh.readline().strip().split(",") == BOUNDS_HEADER

    def test_ours_below_bach(self, outputs):
        for rows in outputs:
            assert np.all(col(rows, "ours_upper") < col(rows, "bach_upper"))

    def test_ridgeless_sentinel(self, outputs):
        last = outputs[1][-1]
        assert float(last["lambda"]) == 0.0
        assert last["bach_upper"] == "inf"
        assert math.isfinite(float(last["ours_upper"]))

    def test_ridge_insensitive_for_tiny_ridge(self, outputs):
        rows = [r for r in outputs[1] if 1e-6 <= float(r["lambda"]) <= 1e-4]
        ours = col(rows, "ours_upper")
        assert ours.max() / ours.min() < 1.2


class TestEnclose:
    def test_large_n_enclosed(self, tmp_path):
        cfg = config(tmp_path, kernel=LEG, target={"preset": "square"})
        rows = read(cmd_enclose(cfg))
        for r in rows:
            if int(r["N"]) >= 100:
                assert r["enclosed"] == "true"
        gap = col(rows, "upper") - col(rows, "lower")
        assert np.all(np.diff(gap) < 0)


@pytest.mark.parametrize("name", ["tntk_cos", "tntk_bounds", "legendre_square",
                                  "legendre_bounds", "legendre_enclose"])
def test_shipped_configs_load(name):
    cfg = ExperimentConfig.load(f"{CONFIG_DIR}/{name}.json")
    cfg.build()
    assert cfg.noise_var == 0.05 and cfg.trials == 10


class TestCli:
    def _write(self, tmp_path, **kw):
        path = tmp_path / "cfg.json"
        path.write_text(json.dumps(config(tmp_path, **kw).to_dict()))
        return str(path)

    @pytest.mark.parametrize("cmd", ["train", "sweep", "bounds", "enclose"])
    def test_rerun_byte_identical(self, tmp_path, cmd, capsys):
        cfg = self._write(tmp_path, n_grid=[20, 40], trials=3, n_ref=40,
                          lambda_grid=[1e-4, 1e-3])
        assert main([cmd, "--config", cfg, "--out", str(tmp_path / "r1")]) == 0
        assert main([cmd, "--config", cfg, "--out", str(tmp_path / "r2")]) == 0
        files = sorted(p.name for p in (tmp_path / "r1").iterdir())
        assert files
        for name in files:
            assert (tmp_path / "r1" / name).read_bytes() == (tmp_path / "r2" / name).read_bytes()

    def test_overrides(self, tmp_path):
        cfg = self._write(tmp_path, n_grid=[20, 40], trials=3, n_ref=40, lambda_grid=[1e-3])
        out = tmp_path / "o"
        assert main(["bounds", "--config", cfg, "--out", str(out), "--seed", "7",
                     "--trials", "2", "--residue", "on"]) == 0
        meta = json.loads((out / "bounds.json").read_text())
        assert meta["seed"] == 7 and meta["trials"] == 2 and meta["include_residue"] is True

    def test_missing_config(self, tmp_path):
        with pytest.raises(SystemExit):
            main(["sweep", "--out", str(tmp_path)])

    def test_bad_config_exit_code(self, tmp_path, capsys):
        bad = tmp_path / "bad.json"
        bad.write_text(json.dumps({"kernel": TNTK, "target": {"preset": "cos"}, "n_grid": [5]}))
        assert main(["sweep", "--config", str(bad)]) == 2
        assert "exceed the kernel rank" in capsys.readouterr().err

    def test_bad_residue_flag(self):
        with pytest.raises(SystemExit):
            main(["bounds", "--residue", "maybe"])

    def test_validate(self, tmp_path):
        assert main(["validate", "--out", str(tmp_path / "v1")]) == 0
        assert main(["validate", "--out", str(tmp_path / "v2")]) == 0
        a = (tmp_path / "v1" / "validate.json").read_bytes()
        assert a == (tmp_path / "v2" / "validate.json").read_bytes()
        report = json.loads(a)
        names = [c["name"] for c in report["checks"]]
        assert [f"neumann_tail[n={n}]" for n in range(6)] == [n for n in names if "neumann" in n]
        assert report["passed"]
        assert all({"tolerance", "observed", "passed"} <= set(c) for c in report["checks"])


def test_corrupted_eigenvalue_fails_validation():
    good = make_tntk(7)
    eig = good.eigenvalues.copy()
    eig[3] *= 1.01
    bad = dataclasses.replace(good, eigenvalues=eig)
    report = run_validation(0, kernels=[bad], n_configs=4, n_draws=10)
    failed = [c["name"] for c in report["checks"] if not c["passed"]]
    assert not report["passed"]
    assert failed == ["spectrum[tntk(7)]"]

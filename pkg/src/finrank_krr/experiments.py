"""Experiment harness behind the train, sweep, bounds and enclose commands.

Every command writes CSV files plus a JSON sidecar carrying the config, its
SHA-256 hash, the master seed and the quartile convention. Nothing
time-dependent is written, so reruns with the same config and seed are
byte-identical.

Trial ``t`` at every grid point uses seed ``master_seed + t``.
"""

from __future__ import annotations

import csv
import dataclasses
import hashlib
import json
import logging
import math
import os
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from . import __version__, _backend
from . import bounds as bnd
from .data import TargetSpec, sample_dataset
from .exact import error_report
from .regressor import fit, predict
from .spectral import TWO_PI, SpectralKernel

log = logging.getLogger(__name__)

QUARTILE_METHOD = "linear"  # Hyndman-Fan type 7
DEFAULT_LAMBDA_GRID = [float(v) for v in np.logspace(-6, -1, 11)]
TRAIN_GRID_POINTS = 256


@dataclasses.dataclass
class ExperimentConfig:
    kernel: dict
    target: dict
    noise_var: float = 0.05
    n_grid: list = dataclasses.field(default_factory=lambda: [50])
    lambda_rule: object = dataclasses.field(default_factory=lambda: {"sigma2_over_n": True})
    trials: int = 10
    seed: int = 0
    output_dir: str = "out"
    lambda_grid: list = dataclasses.field(default_factory=lambda: list(DEFAULT_LAMBDA_GRID))
    n_ref: int = 50
    rademacher_c: float | None = None
    residue: bool = False
    workers: int = 1

    def __post_init__(self):
        self.n_grid = [int(n) for n in self.n_grid]
        self.trials = int(self.trials)
        self.seed = int(self.seed)
        self.noise_var = float(self.noise_var)
        if self.noise_var < 0:
            raise ValueError("noise_var must be non-negative")
        if self.trials < 1:
            raise ValueError("trials must be at least 1")
        rank = int(self.kernel["rank"])
        for n in self.n_grid + [int(self.n_ref)]:
            if n < 3 or n <= rank:
                raise ValueError(
                    f"sample size {n} must be >= 3 and exceed the kernel rank {rank}"
                )
        self.lambda_for(self.n_grid[0])

    @classmethod
    def from_dict(cls, raw):
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(raw) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        return cls(**raw)

    @classmethod
    def load(cls, path):
        with open(path, encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))

    def to_dict(self):
        return dataclasses.asdict(self)

    def config_hash(self):
        payload = {k: v for k, v in self.to_dict().items() if k not in ("output_dir", "workers")}
        blob = json.dumps(payload, sort_keys=True, separators=(",", ":")).encode()
        return hashlib.sha256(blob).hexdigest()

    def lambda_for(self, n):
        """Ridge at sample size n under the configured rule.

        ``{"fixed": v}`` gives v; ``{"sigma2_over_n": true}`` (or the string
        ``"sigma2_over_n"``) gives sigma^2 / n; ``{"fixed_ref_n": m}`` gives
        sigma^2 / m at every n.
        """
        rule = self.lambda_rule
        if rule == "sigma2_over_n" or (isinstance(rule, dict) and "sigma2_over_n" in rule):
            return self.noise_var / n
        if isinstance(rule, dict) and "fixed" in rule:
            return float(rule["fixed"])
        if isinstance(rule, dict) and "fixed_ref_n" in rule:
            return self.noise_var / float(rule["fixed_ref_n"])
        raise ValueError(f"unknown lambda_rule {rule!r}")

    def build(self):
        kernel = SpectralKernel.from_dict(self.kernel)
        return kernel, TargetSpec.from_dict(self.target, kernel)


def _fmt(v):
    if v is None:
        return "nan"
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    v = float(v)
    if math.isinf(v):
        return "inf" if v > 0 else "-inf"
    return repr(v)


def _open(path):
    try:
        return open(path, "w", encoding="utf-8", newline="")
    except OSError as exc:
        raise OSError(f"cannot write artifact {path}: {exc.strerror or exc}") from exc


def write_csv(path, header, rows):
    with _open(path) as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) if not isinstance(v, str) else v for v in row])


def write_sidecar(path, command, config, files, extra=None):
    meta = {
        "command": command,
        "config": config.to_dict(),
        "config_hash": config.config_hash(),
        "seed": config.seed,
        "trials": config.trials,
        "quartile_method": QUARTILE_METHOD + " (type 7)",
        "average": "median",
        "rng": "numpy PCG64 via default_rng(seed + trial)",
        "backend": _backend.BACKEND,
        "version": __version__,
        "files": files,
    }
    if extra:
        meta.update(extra)
    meta["config"].pop("output_dir", None)
    meta["config"].pop("workers", None)
    with _open(path) as fh:
        json.dump(meta, fh, indent=2, sort_keys=True)
        fh.write("\n")


def summarize(values):
    """(median, q25, q75) with linear interpolation between order statistics."""
    v = np.sort(np.asarray(values, dtype=float))
    q25, med, q75 = np.quantile(v, [0.25, 0.5, 0.75], method=QUARTILE_METHOD)
    return float(med), float(q25), float(q75)


def _trial(args):
    kernel_spec, target_spec, n, lam, sigma2, seed = args
    kernel = SpectralKernel.from_dict(kernel_spec)
    target = TargetSpec.from_dict(target_spec, kernel)
    ds = sample_dataset(target, n, sigma2, seed)
    return error_report(kernel, target, ds.inputs, lam, sigma2)


def run_trials(config, n, lam):
    """Exact error reports for every trial at one grid point, in trial order."""
    jobs = [
        (config.kernel, config.target, n, lam, config.noise_var, config.seed + t)
        for t in range(config.trials)
    ]
    if config.workers > 1:
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            return list(pool.map(_trial, jobs))
    return [_trial(j) for j in jobs]


def _out(config, *name):
    try:
        os.makedirs(config.output_dir, exist_ok=True)
    except OSError as exc:
        raise OSError(f"cannot create output directory {config.output_dir}: {exc}") from exc
    return os.path.join(config.output_dir, *name)


def cmd_train(config):
    """Fit once at the first N and dump predictions on an even grid."""
    kernel, target = config.build()
    n = config.n_grid[0]
    lam = config.lambda_for(n)
    ds = sample_dataset(target, n, config.noise_var, config.seed)
    fitted = fit(kernel, ds, lam)
    if kernel.domain == "circle":
        grid = TWO_PI * np.arange(TRAIN_GRID_POINTS) / TRAIN_GRID_POINTS
    else:
        grid = np.linspace(-1.0, 1.0, TRAIN_GRID_POINTS)
    rows = [("grid", x, t, p, None) for x, t, p in zip(grid, target(grid), predict(fitted, grid))]
    rows += [
        ("sample", x, t, p, y)
        for x, t, p, y in zip(ds.inputs, target(ds.inputs), predict(fitted, ds.inputs), ds.labels)
    ]
    path = _out(config, "train.csv")
    write_csv(path, ["kind", "x", "target", "prediction", "label"], rows)
    write_sidecar(_out(config, "train.json"), "train", config, ["train.csv"],
                  {"n": n, "lambda": lam})
    return path


def cmd_sweep(config):
    """Exact test error per trial over the N grid, with median and quartiles."""
    if len(config.n_grid) < 2:
        raise ValueError("sweep needs at least two sample sizes")
    summary, per_trial = [], []
    for n in config.n_grid:
        lam = config.lambda_for(n)
        reports = run_trials(config, n, lam)
        err = [r.test_error for r in reports]
        med, q25, q75 = summarize(err)
        summary.append((n, lam, config.trials, med, q25, q75,
                        summarize([r.bias for r in reports])[0],
                        summarize([r.variance for r in reports])[0]))
        for t, r in enumerate(reports):
            per_trial.append((n, t, config.seed + t, r.bias, r.variance, r.test_error,
                              r.delta_norm))
        log.info("sweep N=%d lambda=%.3g median=%.4g", n, lam, med)
    write_csv(_out(config, "sweep.csv"),
              ["N", "lambda", "trials", "median", "q25", "q75", "median_bias",
               "median_variance"], summary)
    write_csv(_out(config, "sweep_trials.csv"),
              ["N", "trial", "seed", "bias", "variance", "test_error", "delta_norm"], per_trial)
    write_sidecar(_out(config, "sweep.json"), "sweep", config, ["sweep.csv", "sweep_trials.csv"])
    return _out(config, "sweep.csv")


BOUNDS_HEADER = ["N", "lambda", "ours_upper", "ours_lower", "bach_upper", "rademacher",
                 "empirical_median", "empirical_q25", "empirical_q75"]


def bounds_row(config, target, n, lam, with_empirical=True):
    lo, up = bnd.test_error_bounds(target, n, lam, config.noise_var, residue=config.residue)
    if lam > 0:
        b = bnd.bach_bounds(target, n, lam, config.noise_var)
        bach = b.bias_upper + b.variance_upper
    else:
        bach = math.inf
    rad = (bnd.rademacher_gap(n, 2.0 / n, config.rademacher_c)
           if config.rademacher_c is not None else None)
    if with_empirical:
        med, q25, q75 = summarize([r.test_error for r in run_trials(config, n, lam)])
    else:
        med = q25 = q75 = None
    return (n, lam, up, lo, bach, rad, med, q25, q75)


def cmd_bounds(config):
    """Our residue-free upper bound against Bach's, over N and over lambda."""
    _, target = config.build()
    by_n = [bounds_row(config, target, n, config.lambda_for(n)) for n in config.n_grid]
    by_lam = [bounds_row(config, target, config.n_ref, float(lam)) for lam in config.lambda_grid]
    write_csv(_out(config, "bounds_n.csv"), BOUNDS_HEADER, by_n)
    write_csv(_out(config, "bounds_lambda.csv"), BOUNDS_HEADER, by_lam)
    write_sidecar(_out(config, "bounds.json"), "bounds", config,
                  ["bounds_n.csv", "bounds_lambda.csv"], {"include_residue": config.residue})
    return _out(config, "bounds_n.csv")


def enclose_rows(config, target):
    rows = []
    for n in config.n_grid:
        lam = config.lambda_for(n)
        lo, up = bnd.enclosure_bounds(target, n, lam, config.noise_var)
        med, q25, q75 = summarize([r.test_error for r in run_trials(config, n, lam)])
        rows.append((n, lam, lo, up, med, q25, q75, bool(lo <= med <= up)))
    return rows


def cmd_enclose(config):
    """Residue-free upper/lower test-error bracket against the empirical median."""
    _, target = config.build()
    rows = enclose_rows(config, target)
    write_csv(_out(config, "enclose.csv"),
              ["N", "lambda", "lower", "upper", "median", "q25", "q75", "enclosed"], rows)
    write_sidecar(_out(config, "enclose.json"), "enclose", config, ["enclose.csv"])
    return _out(config, "enclose.csv")


COMMANDS = {
    "train": cmd_train,
    "sweep": cmd_sweep,
    "bounds": cmd_bounds,
    "enclose": cmd_enclose,
}

"""Experiment engine and CSV persistence for the Monte Carlo studies.

Five experiment kinds:

* ``refine``          -- spectral baselines, their power-iteration refinements,
  and the randomly seeded power method, swept over the noise grid;
* ``seed-sweep``      -- randomly seeded one-step recovery across seed overlaps;
* ``iter-sweep``      -- iteration-count sweep at a fixed seed overlap;
* ``sparsify-sweep``  -- dense input versus the three sparsification schemes;
* ``tau-heatmap``     -- binarized input over a grid of target densities.

Every (noise level, run) pair samples its own ground truth and graph pair
from a child RNG stream derived from ``(master_seed, tag, sigma_index,
run_index)``, so all methods and grid values within a run are paired on the
same instance, results are independent of the worker count, and the CSV
emitted from a sorted record list is byte-identical across executions.

Failures never drop records: a failed grid point is emitted with an error
status and a NaN overlap.

Desk-scale defaults (n=500, 10 runs) keep each experiment in the minutes
range; pass ``--n 800 --runs 25`` for the full-scale presets.
"""

from __future__ import annotations

import csv
import dataclasses
import json
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterable, Sequence

import numpy as np

from .baselines import (
    SpectralDecomposition,
    grampa_similarity,
    spectral_decomposition,
    umeyama_similarity,
)
from .errors import ConfigError, PpmatchError
from .matching import MatchResult, PpmOptions, gmwm, ppmgm
from .models import (
    Permutation,
    sample_cgw,
    sample_permutation_uniform,
    sample_seed_with_overlap,
    substream,
)
from .sparsify import Binarize, HardThreshold, TopK, apply_scheme, default_top_k, threshold_for_density
from .theory import overlap

EXPERIMENTS = ("refine", "seed-sweep", "iter-sweep", "sparsify-sweep", "tau-heatmap")
METHODS = ("ppmgm", "grampa", "umeyama", "grampa+ppmgm", "umeyama+ppmgm")
SCHEME_LABELS = ("dense", "binarize", "hard-threshold", "top-k")

CSV_HEADER = (
    "experiment,method,n,sigma,param_name,param_value,run_index,"
    "result_overlap,iterations_run,wall_seconds,status"
)

_DEFAULT_SIGMA_GRID = (0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8)
_DEFAULT_OVERLAP_GRID = (0.04, 0.0425, 0.045, 0.05, 0.06, 0.1)
_DEFAULT_ITERATION_GRID = (1, 2, 4, 8)
# Uniform six-point density grid between 42e-3 and 54e-3.
_DEFAULT_DENSITY_GRID = (0.042, 0.0444, 0.0468, 0.0492, 0.0516, 0.054)


@dataclass
class ExperimentConfig:
    """Declarative description of one experiment sweep.

    Only the grids relevant to ``experiment`` are consulted; the rest keep
    their defaults. ``remove_diagonal=None`` means automatic: diagonals are
    kept for single-iteration runs and removed for multi-iteration runs.
    """

    experiment: str
    n: int = 500
    sigma_grid: list[float] = field(default_factory=lambda: list(_DEFAULT_SIGMA_GRID))
    mc_runs: int = 10
    master_seed: int = 0
    methods: list[str] = field(default_factory=lambda: list(METHODS))
    overlap_grid: list[float] = field(default_factory=lambda: list(_DEFAULT_OVERLAP_GRID))
    iteration_grid: list[int] = field(default_factory=lambda: list(_DEFAULT_ITERATION_GRID))
    scheme_grid: list[str] = field(default_factory=lambda: list(SCHEME_LABELS))
    seed_overlap: float = 0.1
    iterations: int = 1
    remove_diagonal: bool | None = None
    early_stop_on_fixpoint: bool = False
    eta: float = 0.2
    sparsify_density: float = 0.05
    density_grid: list[float] = field(default_factory=lambda: list(_DEFAULT_DENSITY_GRID))
    record_timing: bool = True


@dataclass(frozen=True)
class RunRecord:
    """One CSV row: a single (method, grid point, Monte Carlo run) outcome."""

    experiment: str
    method: str
    n: int
    sigma: float
    param_name: str
    param_value: str | int | float
    run_index: int
    result_overlap: float
    iterations_run: int
    wall_seconds: float
    status: str = "ok"


def validate_config(config: ExperimentConfig) -> None:
    """Raise :class:`ConfigError` on any malformed or inconsistent field."""

    def fail(msg: str) -> None:
        raise ConfigError(msg)

    if config.experiment not in EXPERIMENTS:
        fail(f"unknown experiment {config.experiment!r}; expected one of {EXPERIMENTS}")
    if not isinstance(config.n, int) or config.n < 2:
        fail(f"n must be an integer >= 2, got {config.n!r}")
    if not config.sigma_grid:
        fail("sigma_grid must be non-empty")
    for s in config.sigma_grid:
        if not isinstance(s, (int, float)) or not 0.0 <= float(s) < 1.0:
            fail(f"sigma values must lie in [0, 1), got {s!r}")
    if not isinstance(config.mc_runs, int) or config.mc_runs < 1:
        fail(f"mc_runs must be an integer >= 1, got {config.mc_runs!r}")
    if not isinstance(config.master_seed, int) or config.master_seed < 0:
        fail(f"master_seed must be a non-negative integer, got {config.master_seed!r}")
    if not config.methods:
        fail("methods must be non-empty")
    for m in config.methods:
        if m not in METHODS:
            fail(f"unknown method {m!r}; expected one of {METHODS}")
    if not config.overlap_grid:
        fail("overlap_grid must be non-empty")
    for o in config.overlap_grid:
        if not isinstance(o, (int, float)) or not 0.0 <= float(o) <= 1.0:
            fail(f"overlap values must lie in [0, 1], got {o!r}")
    if not config.iteration_grid:
        fail("iteration_grid must be non-empty")
    for it in config.iteration_grid:
        if not isinstance(it, int) or it < 1:
            fail(f"iteration counts must be integers >= 1, got {it!r}")
    if not config.scheme_grid:
        fail("scheme_grid must be non-empty")
    for label in config.scheme_grid:
        if label not in SCHEME_LABELS:
            fail(f"unknown scheme {label!r}; expected one of {SCHEME_LABELS}")
    if not 0.0 <= config.seed_overlap <= 1.0:
        fail(f"seed_overlap must lie in [0, 1], got {config.seed_overlap!r}")
    if not isinstance(config.iterations, int) or config.iterations < 1:
        fail(f"iterations must be an integer >= 1, got {config.iterations!r}")
    if config.remove_diagonal is not None and not isinstance(config.remove_diagonal, bool):
        fail(f"remove_diagonal must be true, false or null, got {config.remove_diagonal!r}")
    if not isinstance(config.early_stop_on_fixpoint, bool):
        fail(f"early_stop_on_fixpoint must be a boolean, got {config.early_stop_on_fixpoint!r}")
    if not isinstance(config.eta, (int, float)) or config.eta <= 0:
        fail(f"eta must be positive, got {config.eta!r}")
    if not 0.0 < config.sparsify_density <= 1.0:
        fail(f"sparsify_density must lie in (0, 1], got {config.sparsify_density!r}")
    if not config.density_grid:
        fail("density_grid must be non-empty")
    for p in config.density_grid:
        if not isinstance(p, (int, float)) or not 0.0 < float(p) <= 1.0:
            fail(f"density values must lie in (0, 1], got {p!r}")
    if not isinstance(config.record_timing, bool):
        fail(f"record_timing must be a boolean, got {config.record_timing!r}")


def config_from_dict(data: dict) -> ExperimentConfig:
    """Build a config from a parsed JSON document; unknown keys are errors."""
    if not isinstance(data, dict):
        raise ConfigError(f"config document must be a JSON object, got {type(data).__name__}")
    known = {f.name for f in dataclasses.fields(ExperimentConfig)}
    unknown = sorted(set(data) - known)
    if unknown:
        raise ConfigError(f"unknown config key(s): {', '.join(unknown)}")
    if "experiment" not in data:
        raise ConfigError("config is missing the required key 'experiment'")
    config = ExperimentConfig(**data)
    validate_config(config)
    return config


def load_config(path: str | Path) -> ExperimentConfig:
    """Load and validate a JSON experiment config."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            data = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
    return config_from_dict(data)


def dump_config(config: ExperimentConfig, path: str | Path) -> None:
    """Write a config as JSON; ``load_config`` round-trips it."""
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(dataclasses.asdict(config), fh, indent=2, sort_keys=True)
        fh.write("\n")


def _resolve_remove_diagonal(config: ExperimentConfig, iterations: int) -> bool:
    if config.remove_diagonal is not None:
        return config.remove_diagonal
    return iterations > 1


def _ppm_options(config: ExperimentConfig, iterations: int) -> PpmOptions:
    return PpmOptions(
        max_iterations=iterations,
        remove_diagonal=_resolve_remove_diagonal(config, iterations),
        early_stop_on_fixpoint=config.early_stop_on_fixpoint,
    )


def _agreement_count(config: ExperimentConfig, fraction: float) -> int:
    return int(round(fraction * config.n))


class _Timer:
    def __init__(self, enabled: bool) -> None:
        self.enabled = enabled
        self.start = time.monotonic()

    def elapsed(self) -> float:
        return time.monotonic() - self.start if self.enabled else 0.0


def _record_or_error(
    config: ExperimentConfig,
    *,
    method: str,
    sigma: float,
    param_name: str,
    param_value: str | int | float,
    run_index: int,
    compute: Callable[[], tuple[float, int]],
) -> RunRecord:
    timer = _Timer(config.record_timing)
    try:
        result_overlap, iterations_run = compute()
        return RunRecord(
            experiment=config.experiment,
            method=method,
            n=config.n,
            sigma=sigma,
            param_name=param_name,
            param_value=param_value,
            run_index=run_index,
            result_overlap=result_overlap,
            iterations_run=iterations_run,
            wall_seconds=timer.elapsed(),
            status="ok",
        )
    except (PpmatchError, np.linalg.LinAlgError) as exc:
        return RunRecord(
            experiment=config.experiment,
            method=method,
            n=config.n,
            sigma=sigma,
            param_name=param_name,
            param_value=param_value,
            run_index=run_index,
            result_overlap=float("nan"),
            iterations_run=0,
            wall_seconds=timer.elapsed(),
            status=f"error:{type(exc).__name__}",
        )


def _sample_unit_pair(config: ExperimentConfig, sigma_idx: int, run_idx: int):
    sigma = float(config.sigma_grid[sigma_idx])
    rng = substream(config.master_seed, "pair", sigma_idx, run_idx)
    xstar = sample_permutation_uniform(config.n, rng)
    pair = sample_cgw(config.n, sigma, xstar, rng)
    return sigma, pair


def _refine_unit(config: ExperimentConfig, sigma_idx: int, run_idx: int) -> list[RunRecord]:
    sigma, pair = _sample_unit_pair(config, sigma_idx, run_idx)
    xstar = pair.ground_truth
    decomps: tuple[SpectralDecomposition, SpectralDecomposition] | None = None
    baseline_cache: dict[str, Permutation] = {}

    def get_decomps():
        nonlocal decomps
        if decomps is None:
            decomps = (spectral_decomposition(pair.a), spectral_decomposition(pair.b))
        return decomps

    def baseline_estimate(name: str) -> Permutation:
        if name not in baseline_cache:
            da, db = get_decomps()
            if name == "grampa":
                similarity = grampa_similarity(da, db, config.eta)
            else:
                similarity = umeyama_similarity(da, db)
            baseline_cache[name] = gmwm(similarity)
        return baseline_cache[name]

    opts = _ppm_options(config, config.iterations)
    records = []
    for method in config.methods:
        def compute(method: str = method) -> tuple[float, int]:
            if method in ("grampa", "umeyama"):
                return overlap(baseline_estimate(method), xstar), 0
            if method in ("grampa+ppmgm", "umeyama+ppmgm"):
                seed = baseline_estimate(method.split("+")[0])
            else:  # randomly seeded power method
                seed = sample_seed_with_overlap(
                    xstar,
                    _agreement_count(config, config.seed_overlap),
                    substream(config.master_seed, "seed", sigma_idx, run_idx),
                )
            result = ppmgm(pair.a, pair.b, seed, opts, ground_truth=xstar)
            return overlap(result.estimate, xstar), result.iterations_run

        records.append(
            _record_or_error(
                config,
                method=method,
                sigma=sigma,
                param_name="iterations",
                param_value=0 if method in ("grampa", "umeyama") else config.iterations,
                run_index=run_idx,
                compute=compute,
            )
        )
    return records


def _seed_sweep_unit(config: ExperimentConfig, sigma_idx: int, run_idx: int) -> list[RunRecord]:
    sigma, pair = _sample_unit_pair(config, sigma_idx, run_idx)
    xstar = pair.ground_truth
    opts = _ppm_options(config, config.iterations)
    records = []
    for overlap_idx, fraction in enumerate(config.overlap_grid):
        def compute(fraction: float = fraction, overlap_idx: int = overlap_idx):
            seed = sample_seed_with_overlap(
                xstar,
                _agreement_count(config, float(fraction)),
                substream(config.master_seed, "seed", sigma_idx, run_idx, overlap_idx),
            )
            result = ppmgm(pair.a, pair.b, seed, opts, ground_truth=xstar)
            return overlap(result.estimate, xstar), result.iterations_run

        records.append(
            _record_or_error(
                config,
                method="ppmgm",
                sigma=sigma,
                param_name="seed_overlap",
                param_value=float(fraction),
                run_index=run_idx,
                compute=compute,
            )
        )
    return records


def _shared_seed(config: ExperimentConfig, xstar: Permutation, sigma_idx: int, run_idx: int):
    """Lazily sample the run's seed once, shared across the grid (pairing).

    Sampling happens inside the per-record compute so an infeasible overlap
    becomes one error record per grid point instead of dropping the unit.
    """
    cache: list[Permutation] = []

    def get() -> Permutation:
        if not cache:
            cache.append(
                sample_seed_with_overlap(
                    xstar,
                    _agreement_count(config, config.seed_overlap),
                    substream(config.master_seed, "seed", sigma_idx, run_idx),
                )
            )
        return cache[0]

    return get


def _iter_sweep_unit(config: ExperimentConfig, sigma_idx: int, run_idx: int) -> list[RunRecord]:
    sigma, pair = _sample_unit_pair(config, sigma_idx, run_idx)
    xstar = pair.ground_truth
    # One seed per run, shared across the iteration grid: paired comparison.
    get_seed = _shared_seed(config, xstar, sigma_idx, run_idx)
    records = []
    for iterations in config.iteration_grid:
        def compute(iterations: int = iterations):
            result = ppmgm(
                pair.a, pair.b, get_seed(), _ppm_options(config, iterations), ground_truth=xstar
            )
            return overlap(result.estimate, xstar), result.iterations_run

        records.append(
            _record_or_error(
                config,
                method="ppmgm",
                sigma=sigma,
                param_name="iterations",
                param_value=int(iterations),
                run_index=run_idx,
                compute=compute,
            )
        )
    return records


def _scheme_for_label(config: ExperimentConfig, label: str):
    if label == "binarize":
        return Binarize(threshold_for_density(config.sparsify_density, config.n))
    if label == "hard-threshold":
        return HardThreshold(threshold_for_density(config.sparsify_density, config.n))
    if label == "top-k":
        return TopK(default_top_k(config.n))
    return None  # dense


def _sparsify_unit(config: ExperimentConfig, sigma_idx: int, run_idx: int) -> list[RunRecord]:
    sigma, pair = _sample_unit_pair(config, sigma_idx, run_idx)
    xstar = pair.ground_truth
    get_seed = _shared_seed(config, xstar, sigma_idx, run_idx)
    opts = _ppm_options(config, config.iterations)
    records = []
    if config.experiment == "sparsify-sweep":
        grid: Sequence[tuple[str, str | float]] = [(label, label) for label in config.scheme_grid]
    else:  # tau-heatmap: binarize across the density grid
        grid = [("binarize", float(p)) for p in config.density_grid]

    for label, param_value in grid:
        def compute(label: str = label, param_value=param_value):
            if config.experiment == "tau-heatmap":
                scheme = Binarize(threshold_for_density(float(param_value), config.n))
            else:
                scheme = _scheme_for_label(config, label)
            if scheme is None:
                a_in, b_in = pair.a, pair.b
            else:
                a_in = apply_scheme(pair.a, scheme)
                b_in = apply_scheme(pair.b, scheme)
            result = ppmgm(a_in, b_in, get_seed(), opts, ground_truth=xstar)
            return overlap(result.estimate, xstar), result.iterations_run

        records.append(
            _record_or_error(
                config,
                method="ppmgm",
                sigma=sigma,
                param_name="scheme" if config.experiment == "sparsify-sweep" else "density",
                param_value=param_value,
                run_index=run_idx,
                compute=compute,
            )
        )
    return records


_UNIT_RUNNERS = {
    "refine": _refine_unit,
    "seed-sweep": _seed_sweep_unit,
    "iter-sweep": _iter_sweep_unit,
    "sparsify-sweep": _sparsify_unit,
    "tau-heatmap": _sparsify_unit,
}


def _unit_worker(args: tuple[ExperimentConfig, int, int]) -> list[RunRecord]:
    config, sigma_idx, run_idx = args
    return _UNIT_RUNNERS[config.experiment](config, sigma_idx, run_idx)


def run_experiment(config: ExperimentConfig, workers: int = 1) -> list[RunRecord]:
    """Run all (noise level, run) units of an experiment and sort the records.

    ``workers > 1`` distributes independent units over a process pool; the
    per-unit RNG streams and the final deterministic sort make the output
    independent of the worker count.
    """
    validate_config(config)
    if workers < 1:
        raise ConfigError(f"workers must be >= 1, got {workers}")
    units = [
        (config, sigma_idx, run_idx)
        for sigma_idx in range(len(config.sigma_grid))
        for run_idx in range(config.mc_runs)
    ]
    if workers == 1:
        batches = map(_unit_worker, units)
        records = [record for batch in batches for record in batch]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            records = [
                record
                for batch in pool.map(_unit_worker, units, chunksize=1)
                for record in batch
            ]
    return sort_records(records)


def run_refine(config: ExperimentConfig, workers: int = 1) -> list[RunRecord]:
    """Baselines, refined baselines, and the randomly seeded power method."""
    _require_kind(config, "refine")
    return run_experiment(config, workers)


def run_seed_sweep(config: ExperimentConfig, workers: int = 1) -> list[RunRecord]:
    """Recovery as a function of the seed overlap."""
    _require_kind(config, "seed-sweep")
    return run_experiment(config, workers)


def run_iter_sweep(config: ExperimentConfig, workers: int = 1) -> list[RunRecord]:
    """Recovery as a function of the iteration budget (paired seeds)."""
    _require_kind(config, "iter-sweep")
    return run_experiment(config, workers)


def run_sparsify_sweep(config: ExperimentConfig, workers: int = 1) -> list[RunRecord]:
    """Dense versus sparsified inputs, or the density heatmap grid."""
    if config.experiment not in ("sparsify-sweep", "tau-heatmap"):
        raise ConfigError(
            f"expected a sparsify-sweep or tau-heatmap config, got {config.experiment!r}"
        )
    return run_experiment(config, workers)


def _require_kind(config: ExperimentConfig, kind: str) -> None:
    if config.experiment != kind:
        raise ConfigError(f"expected a {kind!r} config, got {config.experiment!r}")


def _param_sort_key(value: str | int | float) -> tuple[int, float, str]:
    if isinstance(value, (int, float)) and not isinstance(value, bool):
        return (0, float(value), "")
    return (1, 0.0, str(value))


def sort_records(records: Iterable[RunRecord]) -> list[RunRecord]:
    """Deterministic order: (experiment, method, sigma, grid param, run)."""
    return sorted(
        records,
        key=lambda r: (
            r.experiment,
            r.method,
            r.sigma,
            r.param_name,
            _param_sort_key(r.param_value),
            r.run_index,
        ),
    )


def _format_value(value: str | int | float) -> str:
    if isinstance(value, str):
        return value
    if isinstance(value, int) and not isinstance(value, bool):
        return str(value)
    return repr(float(value))


def emit_csv(records: Iterable[RunRecord], path: str | Path) -> None:
    """Write records to ``path`` with the fixed schema, sorted for stability."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(CSV_HEADER.split(","))
        for r in sort_records(records):
            writer.writerow(
                [
                    r.experiment,
                    r.method,
                    str(r.n),
                    repr(float(r.sigma)),
                    r.param_name,
                    _format_value(r.param_value),
                    str(r.run_index),
                    repr(float(r.result_overlap)),
                    str(r.iterations_run),
                    f"{r.wall_seconds:.6f}",
                    r.status,
                ]
            )


SUMMARY_HEADER = (
    "experiment,method,n,sigma,param_name,param_value,mc_runs,"
    "mean_overlap,p05_overlap,p95_overlap"
)


def emit_summary_csv(records: Iterable[RunRecord], path: str | Path) -> None:
    """Per-grid-point mean and 5th/95th percentile bands of the overlap."""
    groups: dict[tuple, list[float]] = {}
    for r in sort_records(records):
        if r.status != "ok":
            continue
        key = (r.experiment, r.method, r.n, r.sigma, r.param_name, r.param_value)
        groups.setdefault(key, []).append(r.result_overlap)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(SUMMARY_HEADER.split(","))
        for key, values in groups.items():
            experiment, method, n, sigma, param_name, param_value = key
            arr = np.array(values)
            writer.writerow(
                [
                    experiment,
                    method,
                    str(n),
                    repr(float(sigma)),
                    param_name,
                    _format_value(param_value),
                    str(arr.size),
                    repr(float(arr.mean())),
                    repr(float(np.percentile(arr, 5))),
                    repr(float(np.percentile(arr, 95))),
                ]
            )


def mean_overlap_by(
    records: Iterable[RunRecord], *, method: str | None = None
) -> dict[tuple[float, str | int | float], float]:
    """Mean overlap keyed by (sigma, param_value), optionally per method."""
    groups: dict[tuple[float, str | int | float], list[float]] = {}
    for r in records:
        if r.status != "ok":
            continue
        if method is not None and r.method != method:
            continue
        groups.setdefault((r.sigma, r.param_value), []).append(r.result_overlap)
    return {key: math.fsum(vals) / len(vals) for key, vals in groups.items()}

"""Monte Carlo experiment engine: replication campaigns over (algo, T, k, sigma)
grids, the perturbation scatter study, and CSV aggregation.

Every trial's seed is derived from the master seed and the cell coordinates,
so campaigns are reproducible regardless of execution order or worker count.
"""

from __future__ import annotations

import hashlib
import math
import struct
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .algorithms import AlgoConfig, run_sf, run_sp
from .errors import (
    ConfigError,
    EmptyInput,
    NoConvergence,
    RankDeficientBasis,
    RedrawBudgetExhausted,
)
from .estimation import estimation_error
from .riccati import CostPair, solve_dare, spectral_radius
from .system import DynamicsParameter, NoiseModel, load_system, preset_benchmark

TRIAL_CSV_HEADER = "algo,T,k,sigma,rep,seed,error_norm,closed_loop_radius,stabilized,overflow,redraws,reason"
SCATTER_CSV_HEADER = "perturbation_norm,closed_loop_radius"
SUMMARY_CSV_HEADER = "algo,T,k,sigma,n,median_error,iqr_error,stabilized_pct"


@dataclass
class ExperimentConfig:
    """A full replication campaign over the cross product of the grids."""

    algo: str = "both"
    T_grid: tuple[int, ...] = (100, 200, 400, 800, 1600, 3200)
    k_grid: tuple[int, ...] = (2, 3, 4, 5)
    sigma_grid: tuple[float, ...] = (1.0,)
    replications: int = 100
    master_seed: int = 0
    system_source: str = "preset"
    output_path: str | None = None

    def __post_init__(self):
        if self.algo not in ("sf", "sp", "both"):
            raise ConfigError(f"algo must be sf, sp or both, got {self.algo!r}")
        if not self.T_grid or not self.k_grid or not self.sigma_grid:
            raise ConfigError("all grids must be nonempty")
        if self.replications < 1:
            raise ConfigError("replications must be >= 1")
        self.T_grid = tuple(int(t) for t in self.T_grid)
        self.k_grid = tuple(int(k) for k in self.k_grid)
        self.sigma_grid = tuple(float(s) for s in self.sigma_grid)

    @property
    def algos(self) -> tuple[str, ...]:
        return ("sf", "sp") if self.algo == "both" else (self.algo,)


@dataclass
class TrialRecord:
    """One Monte Carlo replication row."""

    algo: str
    T: int
    k: int
    sigma: float
    rep: int
    seed: int
    error_norm: float
    closed_loop_radius: float
    stabilized: bool
    overflow: bool
    redraws: int
    reason: str

    def to_csv_row(self) -> str:
        return ",".join(
            [
                self.algo,
                str(self.T),
                str(self.k),
                repr(self.sigma),
                str(self.rep),
                str(self.seed),
                repr(self.error_norm),
                repr(self.closed_loop_radius),
                "true" if self.stabilized else "false",
                "true" if self.overflow else "false",
                str(self.redraws),
                self.reason,
            ]
        )


@dataclass
class ScatterRecord:
    """One perturbation sample: distance from the truth and resulting radius."""

    perturbation_norm: float
    closed_loop_radius: float

    def to_csv_row(self) -> str:
        return f"{self.perturbation_norm!r},{self.closed_loop_radius!r}"


@dataclass
class SummaryRow:
    """Aggregates for one (algo, T, k, sigma) cell."""

    algo: str
    T: int
    k: int
    sigma: float
    n: int
    median_error: float
    iqr_error: float
    stabilized_pct: float

    def to_csv_row(self) -> str:
        return (
            f"{self.algo},{self.T},{self.k},{self.sigma!r},{self.n},"
            f"{self.median_error!r},{self.iqr_error!r},{self.stabilized_pct!r}"
        )


_ALGO_IDS = {"sf": 1, "sp": 2}


def derive_seed(master_seed: int, algo: str, T: int, k: int, sigma: float, rep: int) -> int:
    """Stable 64-bit seed for one campaign cell, independent of run order."""
    payload = struct.pack(
        "<QBqqdq", master_seed & 0xFFFFFFFFFFFFFFFF, _ALGO_IDS[algo], T, k, sigma, rep
    )
    return int.from_bytes(hashlib.blake2b(payload, digest_size=8).digest(), "little")


def _load(system_source: str) -> tuple[DynamicsParameter, CostPair]:
    if system_source == "preset":
        return preset_benchmark()
    return load_system(system_source)


def run_trial(
    plant: DynamicsParameter,
    costs: CostPair,
    algo: str,
    T: int,
    k: int,
    sigma: float,
    rep: int,
    master_seed: int,
) -> TrialRecord:
    """Execute one replication and judge its output against the true plant.

    Per-trial failures (overflow, rank deficiency, redraw exhaustion, final
    Riccati non-convergence) become reason codes with infinite radius, never
    exceptions; campaign-level configuration problems still raise.
    """
    T, k, sigma = int(T), int(k), float(sigma)
    seed = derive_seed(master_seed, algo, T, k, sigma, rep)
    rng = np.random.default_rng(seed)
    cfg = AlgoConfig(T=T, k=k, sigma=sigma, algo=algo)
    noise = NoiseModel(kind="gaussian", covariance=np.eye(plant.p))
    runner = run_sf if algo == "sf" else run_sp

    error_norm = math.inf
    radius = math.inf
    overflow = False
    redraws = 0
    reason = "ok"
    try:
        result = runner(plant, noise, costs, cfg, rng)
        redraws = result.redraw_count
        overflow = result.overflow
        if overflow:
            reason = "overflow"
        else:
            error_norm = estimation_error(result.theta_hat, plant)
            try:
                sol = solve_dare(result.theta_hat, costs)
                radius = spectral_radius(plant.A + plant.B @ sol.L)
            except NoConvergence:
                reason = "dare_no_convergence"
    except RankDeficientBasis:
        reason = "rank_deficient"
    except RedrawBudgetExhausted as exc:
        reason = "redraw_exhausted"
        redraws = exc.redraws
    stabilized = (radius < 1.0) and not overflow
    return TrialRecord(
        algo=algo, T=T, k=k, sigma=sigma, rep=rep, seed=seed,
        error_norm=error_norm, closed_loop_radius=radius,
        stabilized=stabilized, overflow=overflow, redraws=redraws, reason=reason,
    )


def _trial_args(cfg: ExperimentConfig, plant, costs):
    for algo in cfg.algos:
        for T in cfg.T_grid:
            for k in cfg.k_grid:
                for sigma in cfg.sigma_grid:
                    for rep in range(cfg.replications):
                        yield (plant, costs, algo, T, k, sigma, rep, cfg.master_seed)


def run_experiment(cfg: ExperimentConfig, workers: int = 1) -> list[TrialRecord]:
    """Run the whole campaign; rows come back in deterministic cell order.

    With workers > 1 the cells are farmed out to a process pool; the derived
    per-cell seeds make the output identical to the serial run.
    """
    plant, costs = _load(cfg.system_source)
    # Surface configuration problems before any work is queued.
    for T in cfg.T_grid:
        for k in cfg.k_grid:
            AlgoConfig(T=T, k=k, sigma=cfg.sigma_grid[0]).validate_for(plant)
    args = list(_trial_args(cfg, plant, costs))

    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            records = list(pool.map(_run_trial_star, args, chunksize=8))
    else:
        records = [run_trial(*a) for a in args]

    if cfg.output_path:
        write_trials_csv(cfg.output_path, records)
    return records


def _run_trial_star(args) -> TrialRecord:
    return run_trial(*args)


def write_trials_csv(path: str, records: list[TrialRecord]) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write(TRIAL_CSV_HEADER + "\n")
        for rec in records:
            f.write(rec.to_csv_row() + "\n")


def lemma1_scatter(
    n_samples: int,
    radius_grid: list[float],
    seed: int,
    output_path: str | None = None,
) -> list[ScatterRecord]:
    """Perturb the benchmark parameter and record the resulting closed-loop radii.

    For each epsilon in the grid, draws n_samples directions uniform on the
    operator-norm unit sphere (normalized Gaussian), perturbs theta by
    epsilon in that direction, re-solves the Riccati equation and measures
    the spectral radius of the true plant under the perturbed gain. Draws
    whose Riccati equation does not converge are recorded with an infinite
    radius sentinel.
    """
    plant, costs = preset_benchmark()
    theta0 = plant.joined
    rng = np.random.default_rng(seed)
    records = []
    for eps in radius_grid:
        for _ in range(n_samples):
            direction = rng.standard_normal(theta0.shape)
            direction /= np.linalg.norm(direction, 2)
            theta_hat = DynamicsParameter.from_joined(theta0 + eps * direction, plant.p)
            try:
                sol = solve_dare(theta_hat, costs)
                radius = spectral_radius(plant.A + plant.B @ sol.L)
            except NoConvergence:
                radius = math.inf
            records.append(ScatterRecord(perturbation_norm=eps, closed_loop_radius=radius))
    if output_path:
        with open(output_path, "w", encoding="utf-8", newline="\n") as f:
            f.write(SCATTER_CSV_HEADER + "\n")
            for rec in records:
                f.write(rec.to_csv_row() + "\n")
    return records


def summarize(records: list[TrialRecord], output_path: str | None = None) -> list[SummaryRow]:
    """Group trials by (algo, T, k, sigma): median / IQR of the error norm and
    the stabilized percentage. Failed trials stay in with infinite error."""
    if not records:
        raise EmptyInput("no trial records to summarize")
    groups: dict[tuple, list[TrialRecord]] = {}
    order = []
    for rec in records:
        key = (rec.algo, rec.T, rec.k, rec.sigma)
        if key not in groups:
            groups[key] = []
            order.append(key)
        groups[key].append(rec)
    rows = []
    for key in order:
        cell = groups[key]
        errors = np.array([r.error_norm for r in cell])
        n_stab = sum(1 for r in cell if r.stabilized)
        rows.append(
            SummaryRow(
                algo=key[0], T=key[1], k=key[2], sigma=key[3], n=len(cell),
                median_error=float(np.median(errors)),
                iqr_error=float(np.percentile(errors, 75) - np.percentile(errors, 25)),
                stabilized_pct=100.0 * n_stab / len(cell),
            )
        )
    if output_path:
        with open(output_path, "w", encoding="utf-8", newline="\n") as f:
            f.write(SUMMARY_CSV_HEADER + "\n")
            for row in rows:
                f.write(row.to_csv_row() + "\n")
    return rows


def read_trials_csv(path: str) -> list[TrialRecord]:
    """Parse a trial CSV back into records (inverse of write_trials_csv)."""
    records = []
    with open(path, "r", encoding="utf-8") as f:
        header = f.readline().strip()
        if header != TRIAL_CSV_HEADER:
            raise ValueError(f"unexpected header in {path}: {header!r}")
        for line in f:
            line = line.strip()
            if not line:
                continue
            (algo, T, k, sigma, rep, seed, err, rad, stab, ovf, red, reason) = line.split(",")
            records.append(
                TrialRecord(
                    algo=algo, T=int(T), k=int(k), sigma=float(sigma), rep=int(rep),
                    seed=int(seed), error_norm=float(err), closed_loop_radius=float(rad),
                    stabilized=stab == "true", overflow=ovf == "true",
                    redraws=int(red), reason=reason,
                )
            )
    return records

"""The two randomized stabilization procedures.

SF (stochastic feedback) applies k independently drawn Gaussian feedback
matrices, one per episode of length floor(T/k); SP (stochastic parameter)
draws random dynamics parameters instead and applies their certainty-
equivalent Riccati gains. Both then identify each episode's closed-loop
matrix and recover the open-loop parameter from the stack.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, NoConvergence, RedrawBudgetExhausted
from .estimation import ClosedLoopEstimate, GainBasis, closed_loop_ls, recover_theta
from .riccati import CostPair, SolverOptions, solve_dare
from .system import DynamicsParameter, NoiseModel, simulate_episode


@dataclass
class AlgoConfig:
    """One run's parameters: horizon T, episode count k, draw scale sigma.

    sigma should be positive for meaningful runs; sigma = 0 is accepted and
    degenerates to identical zero draws, which the recovery step rejects as
    rank-deficient.

    Randomized gains make the closed loop exponentially unstable for most of
    the run, so the raw state leaves float64 range for horizons beyond a few
    hundred steps. Episodes are therefore simulated in segments: whenever the
    state norm passes `scale_cap` it is rescaled to unit norm (direction
    kept), which leaves every logged transition a true closed-loop transition
    while keeping the regression data representable. A capped segment with
    fewer than `explosion_window` transitions means the state shot through
    the cap's orders of magnitude before a minimal regression window existed;
    that run is flagged as a destabilizing explosion (overflow). Setting
    scale_cap >= overflow_cap disables renormalization entirely and makes any
    capped episode an overflow failure.
    """

    T: int
    k: int
    sigma: float
    algo: str = "sf"
    max_redraws: int = 50
    overflow_cap: float = 1e100
    scale_cap: float = 1e8
    explosion_window: int = 8

    def __post_init__(self):
        if self.algo not in ("sf", "sp"):
            raise ConfigError(f"algo must be 'sf' or 'sp', got {self.algo!r}")
        if self.sigma < 0:
            raise ConfigError(f"sigma must be nonnegative, got {self.sigma}")
        if self.scale_cap <= 0 or self.overflow_cap <= 0:
            raise ConfigError("caps must be positive")
        if self.explosion_window < 1:
            raise ConfigError("explosion_window must be >= 1")

    def validate_for(self, plant: DynamicsParameter) -> None:
        """Check the plant-dependent constraints T >= k and k >= 1 + ceil(r/p)."""
        k_min = 1 + math.ceil(plant.r / plant.p)
        if self.k < k_min:
            raise ConfigError(
                f"k = {self.k} below the identifiability bound {k_min} "
                f"for p = {plant.p}, r = {plant.r}"
            )
        if self.T < self.k:
            raise ConfigError(f"T = {self.T} shorter than k = {self.k} episodes")


@dataclass
class RunResult:
    """Output of one SF/SP run."""

    theta_hat: DynamicsParameter | None
    episode_estimates: list[ClosedLoopEstimate]
    gains_applied: list[np.ndarray]
    redraw_count: int = 0
    overflow: bool = False


def split_streams(rng: np.random.Generator, k: int) -> tuple[list[np.random.Generator], np.random.Generator]:
    """Split k per-episode draw streams plus one noise stream off `rng`.

    Episode i's randomization consumes only stream i, so the gains are
    statistically independent of each other and of the process noise.
    """
    children = rng.spawn(k + 1)
    return children[:k], children[k]


def draw_feedback(rng: np.random.Generator, sigma: float, r: int, p: int) -> np.ndarray:
    """An r x p gain whose p columns are i.i.d. N(0, sigma^2 I_r)."""
    if sigma < 0:
        raise ValueError("sigma must be nonnegative")
    return sigma * rng.standard_normal((r, p))


def draw_parameter(rng: np.random.Generator, sigma: float, p: int, q: int) -> DynamicsParameter:
    """A p x q parameter whose q columns are i.i.d. N(0, sigma^2 I_p)."""
    if sigma < 0:
        raise ValueError("sigma must be nonnegative")
    if q <= p:
        raise ValueError(f"q = {q} must exceed p = {p}")
    return DynamicsParameter.from_joined(sigma * rng.standard_normal((p, q)), p)


def _zero_sample_estimate(p: int) -> ClosedLoopEstimate:
    # Placeholder for episodes never simulated after an overflow: the LS
    # objective over zero samples is minimized by the zero matrix.
    return ClosedLoopEstimate(D_hat=np.zeros((p, p)), sample_count=0, regressor_rank=0)


def _run_episodes(
    plant: DynamicsParameter,
    noise: NoiseModel,
    cfg: AlgoConfig,
    rng: np.random.Generator,
    gain_for_episode,
) -> RunResult:
    """Shared SF/SP engine: k episodes of floor(T/k) steps on one trajectory.

    `gain_for_episode(stream) -> (gain, redraws)` supplies each episode's
    controller from that episode's private stream. The state direction
    carries over between episodes (magnitude renormalized for conditioning,
    see AlgoConfig); the trailing T - k*floor(T/k) steps are never simulated.
    Each episode draws its full noise block up front, so the disturbances are
    a pure function of the seed regardless of segmentation. Once a run
    overflows, later episodes still draw their gains (keeping the result's
    lists full-length and the draws reproducible) but are not simulated, and
    no recovery is attempted.
    """
    cfg.validate_for(plant)
    ep_len = cfg.T // cfg.k
    renormalizing = cfg.scale_cap < cfg.overflow_cap
    gain_streams, noise_stream = split_streams(rng, cfg.k)

    gains: list[np.ndarray] = []
    estimates: list[ClosedLoopEstimate] = []
    redraw_count = 0
    overflow = False
    x = np.zeros(plant.p)
    for i in range(cfg.k):
        gain, redraws = gain_for_episode(gain_streams[i])
        redraw_count += redraws
        gains.append(gain)
        if overflow:
            estimates.append(_zero_sample_estimate(plant.p))
            continue

        xi = noise.sample_block(noise_stream, ep_len)
        norm_x = float(np.linalg.norm(x))
        if renormalizing and norm_x > 1.0:
            x = x / norm_x
        segments = []
        used = 0
        while used < ep_len and not overflow:
            seg = simulate_episode(
                plant, gain, x, ep_len - used, xi[used:], cap=cfg.scale_cap
            )
            if seg.n_transitions == 0:
                overflow = True
                break
            segments.append(seg)
            used += seg.n_transitions
            x = seg.states[-1]
            if seg.overflow:
                norm_x = float(np.linalg.norm(x))
                if (
                    not renormalizing
                    or norm_x > cfg.overflow_cap
                    or seg.n_transitions < cfg.explosion_window
                ):
                    overflow = True
                else:
                    x = x / norm_x
        if segments:
            estimates.append(closed_loop_ls(segments))
        else:
            estimates.append(_zero_sample_estimate(plant.p))

    if overflow:
        return RunResult(
            theta_hat=None, episode_estimates=estimates, gains_applied=gains,
            redraw_count=redraw_count, overflow=True,
        )
    theta_hat = recover_theta(estimates, GainBasis.from_gains(gains))
    return RunResult(
        theta_hat=theta_hat, episode_estimates=estimates, gains_applied=gains,
        redraw_count=redraw_count, overflow=False,
    )


def run_sf(
    plant: DynamicsParameter,
    noise: NoiseModel,
    costs: CostPair,
    cfg: AlgoConfig,
    rng: np.random.Generator,
) -> RunResult:
    """Stochastic feedback: episode gains are raw Gaussian draws.

    `costs` is accepted for signature symmetry with run_sp but plays no role
    until a gain is designed from the returned estimate.
    """
    if cfg.algo != "sf":
        raise ConfigError(f"run_sf called with algo = {cfg.algo!r}")

    def gain_for_episode(stream):
        return draw_feedback(stream, cfg.sigma, plant.r, plant.p), 0

    return _run_episodes(plant, noise, cfg, rng, gain_for_episode)


def run_sp(
    plant: DynamicsParameter,
    noise: NoiseModel,
    costs: CostPair,
    cfg: AlgoConfig,
    rng: np.random.Generator,
    solver_opts: SolverOptions | None = None,
) -> RunResult:
    """Stochastic parameter: episode gains are Riccati gains of random draws.

    A draw whose Riccati equation does not converge is discarded and redrawn,
    up to cfg.max_redraws redraws per episode.
    """
    if cfg.algo != "sp":
        raise ConfigError(f"run_sp called with algo = {cfg.algo!r}")
    opts = solver_opts or SolverOptions()

    def gain_for_episode(stream):
        for redraws in range(cfg.max_redraws + 1):
            theta_i = draw_parameter(stream, cfg.sigma, plant.p, plant.q)
            try:
                return solve_dare(theta_i, costs, opts).L, redraws
            except NoConvergence:
                continue
        raise RedrawBudgetExhausted(
            f"episode exhausted {cfg.max_redraws} redraws without a solvable draw",
            redraws=cfg.max_redraws,
        )

    return _run_episodes(plant, noise, cfg, rng, gain_for_episode)

"""SF / SP algorithm tests: draws, scheduling, determinism, failure modes."""

import numpy as np
import pytest

from randstab import (
    AlgoConfig,
    ConfigError,
    NoiseModel,
    RankDeficientBasis,
    RedrawBudgetExhausted,
    DynamicsParameter,
    draw_feedback,
    draw_parameter,
    estimation_error,
    preset_benchmark,
    run_sf,
    run_sp,
    split_streams,
)

PLANT, COSTS = preset_benchmark()
NOISE = NoiseModel(kind="gaussian", covariance=np.eye(3))


def test_draw_feedback_zero_sigma_and_shape():
    rng = np.random.default_rng(0)
    assert np.array_equal(draw_feedback(rng, 0.0, 2, 5), np.zeros((2, 5)))
    assert draw_feedback(rng, 1.0, 3, 3).shape == (3, 3)
    with pytest.raises(ValueError):
        draw_feedback(rng, -1.0, 3, 3)


def test_draw_feedback_entry_variance():
    """Per-entry sample variance over 1e5 draws sits in [0.98, 1.02] at sigma=1."""
    rng = np.random.default_rng(314)
    draws = np.stack([draw_feedback(rng, 1.0, 3, 3) for _ in range(100_000)])
    var = draws.var(axis=0)
    assert var.min() >= 0.98 and var.max() <= 1.02, f"variance range {var.min()}..{var.max()}"
    assert np.abs(draws.mean(axis=0)).max() <= 0.02


def test_draw_parameter_zero_sigma_and_shape():
    rng = np.random.default_rng(1)
    theta = draw_parameter(rng, 0.0, 3, 6)
    assert np.array_equal(theta.joined, np.zeros((3, 6)))
    theta = draw_parameter(rng, 1.0, 3, 6)
    assert theta.joined.shape == (3, 6)
    assert theta.A.shape == (3, 3) and theta.B.shape == (3, 3)
    with pytest.raises(ValueError):
        draw_parameter(rng, 1.0, 3, 3)


def test_draw_parameter_cross_column_independence():
    """Off-diagonal correlations between the 18 entries stay below 0.02."""
    rng = np.random.default_rng(217)
    flat = np.stack([draw_parameter(rng, 1.0, 3, 6).joined.ravel() for _ in range(100_000)])
    corr = np.corrcoef(flat.T)
    off = corr - np.diag(np.diag(corr))
    assert np.abs(off).max() <= 0.02, f"max off-diagonal correlation {np.abs(off).max()}"


def test_config_bounds():
    with pytest.raises(ConfigError):
        run_sf(PLANT, NOISE, COSTS, AlgoConfig(T=100, k=1, sigma=1.0), np.random.default_rng(0))
    with pytest.raises(ConfigError):
        run_sf(PLANT, NOISE, COSTS, AlgoConfig(T=2, k=3, sigma=1.0), np.random.default_rng(0))
    with pytest.raises(ConfigError):
        AlgoConfig(T=100, k=3, sigma=-0.5)
    with pytest.raises(ConfigError):
        AlgoConfig(T=100, k=3, sigma=1.0, algo="nope")
    with pytest.raises(ConfigError):
        run_sf(PLANT, NOISE, COSTS, AlgoConfig(T=100, k=3, sigma=1.0, algo="sp"),
               np.random.default_rng(0))
    with pytest.raises(ConfigError):
        run_sp(PLANT, NOISE, COSTS, AlgoConfig(T=100, k=3, sigma=1.0, algo="sf"),
               np.random.default_rng(0))


def test_sf_output_shapes_and_schedule():
    cfg = AlgoConfig(T=300, k=3, sigma=1.0)
    result = run_sf(PLANT, NOISE, COSTS, cfg, np.random.default_rng(7))
    assert result.theta_hat.joined.shape == (3, 6)
    assert len(result.episode_estimates) == 3
    assert len(result.gains_applied) == 3
    assert all(e.sample_count == 100 for e in result.episode_estimates)
    assert all(g.shape == (3, 3) for g in result.gains_applied)
    assert result.redraw_count == 0
    assert not result.overflow


def test_trailing_steps_are_never_simulated():
    """floor(305/3) = floor(303/3): the two horizons give bit-identical runs."""
    cfg_a = AlgoConfig(T=305, k=3, sigma=1.0)
    cfg_b = AlgoConfig(T=303, k=3, sigma=1.0)
    res_a = run_sf(PLANT, NOISE, COSTS, cfg_a, np.random.default_rng(21))
    res_b = run_sf(PLANT, NOISE, COSTS, cfg_b, np.random.default_rng(21))
    assert np.array_equal(res_a.theta_hat.joined, res_b.theta_hat.joined)
    assert all(e.sample_count == 101 for e in res_a.episode_estimates)


def test_sf_deterministic_for_fixed_seed():
    cfg = AlgoConfig(T=200, k=4, sigma=1.0)
    r1 = run_sf(PLANT, NOISE, COSTS, cfg, np.random.default_rng(99))
    r2 = run_sf(PLANT, NOISE, COSTS, cfg, np.random.default_rng(99))
    assert np.array_equal(r1.theta_hat.joined, r2.theta_hat.joined)
    for g1, g2 in zip(r1.gains_applied, r2.gains_applied):
        assert np.array_equal(g1, g2)


def test_sp_deterministic_for_fixed_seed():
    cfg = AlgoConfig(T=200, k=4, sigma=1.0, algo="sp")
    r1 = run_sp(PLANT, NOISE, COSTS, cfg, np.random.default_rng(99))
    r2 = run_sp(PLANT, NOISE, COSTS, cfg, np.random.default_rng(99))
    assert np.array_equal(r1.theta_hat.joined, r2.theta_hat.joined)
    assert r1.redraw_count == r2.redraw_count
    for g1, g2 in zip(r1.gains_applied, r2.gains_applied):
        assert np.array_equal(g1, g2)


def test_sp_zero_sigma_is_rank_deficient():
    """sigma = 0 forces every draw to A = 0, hence K = Q, L = 0: no identifiability."""
    cfg = AlgoConfig(T=40, k=2, sigma=0.0, algo="sp")
    with pytest.raises(RankDeficientBasis):
        run_sp(PLANT, NOISE, COSTS, cfg, np.random.default_rng(5))


def test_gains_come_from_streams_disjoint_from_noise():
    """Changing the noise law changes trajectories but not the drawn gains."""
    cfg = AlgoConfig(T=120, k=3, sigma=1.0)
    r1 = run_sf(PLANT, NOISE, COSTS, cfg, np.random.default_rng(31))
    other_noise = NoiseModel(kind="uniform", covariance=4.0 * np.eye(3))
    r2 = run_sf(PLANT, other_noise, COSTS, cfg, np.random.default_rng(31))
    for g1, g2 in zip(r1.gains_applied, r2.gains_applied):
        assert np.array_equal(g1, g2)
    assert not np.array_equal(r1.theta_hat.joined, r2.theta_hat.joined)


def test_reseeding_one_episode_stream_changes_only_that_gain():
    streams, _ = split_streams(np.random.default_rng(808), 4)
    gains = [draw_feedback(s, 1.0, 3, 3) for s in streams]
    streams2, _ = split_streams(np.random.default_rng(808), 4)
    streams2[2] = np.random.default_rng(424242)
    gains2 = [draw_feedback(s, 1.0, 3, 3) for s in streams2]
    for i in range(4):
        if i == 2:
            assert not np.array_equal(gains[i], gains2[i])
        else:
            assert np.array_equal(gains[i], gains2[i])


def test_learning_error_shrinks_with_horizon():
    """Median error over 20 seeds at T=2000 beats T=200 for both algorithms."""
    for runner, algo in ((run_sf, "sf"), (run_sp, "sp")):
        medians = {}
        for T in (200, 2000):
            errs = []
            for seed in range(20):
                cfg = AlgoConfig(T=T, k=5, sigma=1.0, algo=algo)
                result = runner(PLANT, NOISE, COSTS, cfg, np.random.default_rng(5000 + seed))
                if result.overflow:
                    errs.append(np.inf)
                else:
                    errs.append(estimation_error(result.theta_hat, PLANT))
            medians[T] = float(np.median(errs))
        assert medians[2000] < medians[200], f"{algo}: medians {medians}"


def test_overflow_flags_run_and_skips_recovery():
    """Without renormalization (scale_cap = overflow_cap) long unstable runs
    blow past the cap; the run is flagged, never crashes."""
    cfg = AlgoConfig(T=800, k=4, sigma=1.0, scale_cap=1e100, overflow_cap=1e100)
    hit = False
    for seed in range(5):
        result = run_sf(PLANT, NOISE, COSTS, cfg, np.random.default_rng(seed))
        assert len(result.episode_estimates) == 4
        assert len(result.gains_applied) == 4
        if result.overflow:
            hit = True
            assert result.theta_hat is None
    assert hit, "expected at least one overflow in literal-cap mode at T = 800"


def test_renormalized_engine_keeps_large_horizons_alive():
    """Default scale_cap keeps T=3200 runs finite, unflagged, and accurate."""
    cfg = AlgoConfig(T=3200, k=5, sigma=1.0)
    result = run_sf(PLANT, NOISE, COSTS, cfg, np.random.default_rng(11))
    assert not result.overflow
    assert all(e.sample_count == 640 for e in result.episode_estimates)
    assert estimation_error(result.theta_hat, PLANT) < 0.2


class RiggedStream:
    """Stand-in rng whose every draw is the same fixed matrix."""

    def __init__(self, value):
        self.value = np.asarray(value, dtype=float)

    def spawn(self, n):
        return [RiggedStream(self.value) for _ in range(n)]

    def standard_normal(self, size=None):
        return np.broadcast_to(self.value, size).copy()


def test_sp_redraw_budget_exhausted():
    """A draw with unstable A and a dead input column can never be solved."""
    plant = DynamicsParameter(A=[[2.0]], B=[[1.0]])
    costs = type(COSTS)(Q=[[1.0]], R=[[1.0]])
    cfg = AlgoConfig(T=10, k=2, sigma=1.0, algo="sp", max_redraws=3)
    noise = NoiseModel(kind="gaussian", covariance=np.eye(1))
    rng = RiggedStream([[2.0, 1e-9]])
    with pytest.raises(RedrawBudgetExhausted) as exc_info:
        run_sp(plant, noise, costs, cfg, rng)
    assert exc_info.value.redraws == 3


def test_sp_counts_redraws():
    """With a tight iteration budget some draws fail and are redrawn."""
    from randstab import SolverOptions

    cfg = AlgoConfig(T=40, k=2, sigma=1.0, algo="sp", max_redraws=50)
    opts = SolverOptions(max_iterations=25)
    seen = 0
    for seed in range(10):
        try:
            result = run_sp(PLANT, NOISE, COSTS, cfg, np.random.default_rng(seed),
                            solver_opts=opts)
            seen += result.redraw_count
        except RedrawBudgetExhausted as exc:
            seen += exc.redraws
    assert seen > 0, "expected at least one redraw across 10 seeds"

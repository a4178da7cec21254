"""Closed-loop least squares and parameter recovery tests."""

import numpy as np
import pytest

from randstab import (
    ClosedLoopEstimate,
    DimensionMismatch,
    DynamicsParameter,
    EmptyTrajectory,
    GainBasis,
    NoiseModel,
    RankDeficientBasis,
    TrajectoryLog,
    closed_loop_ls,
    estimation_error,
    preset_benchmark,
    recover_theta,
    simulate_episode,
    solve_dare,
)


def exact_estimate(plant, L) -> ClosedLoopEstimate:
    """The noiseless closed-loop map A + B L as a fully identified estimate."""
    D = plant.A + plant.B @ np.asarray(L, dtype=float)
    return ClosedLoopEstimate(D_hat=D, sample_count=plant.p, regressor_rank=plant.p)


def traj_from_states(states) -> TrajectoryLog:
    states = np.asarray(states, dtype=float)
    n, p = states.shape[0] - 1, states.shape[1]
    return TrajectoryLog(states=states, inputs=np.zeros((n, 0)).reshape(n, 0))


def test_single_exact_scalar_sample():
    est = closed_loop_ls(traj_from_states([[2.0], [1.0]]))
    assert est.D_hat[0, 0] == pytest.approx(0.5)
    assert est.sample_count == 1
    assert est.regressor_rank == 1


def test_two_by_two_normal_equations_oracle():
    """Noiseless diagonal system: LS must reproduce D exactly.

    Oracle: solve the normal equations (X'X) D' = X'Y directly.
    """
    D = np.array([[0.5, 0.0], [0.0, 0.25]])
    states = [[1.0, 1.0], [0.5, 0.25], [0.25, 0.0625]]
    est = closed_loop_ls(traj_from_states(states))
    X = np.asarray(states)[:-1]
    Y = np.asarray(states)[1:]
    oracle = np.linalg.solve(X.T @ X, X.T @ Y).T
    assert np.max(np.abs(est.D_hat - oracle)) < 1e-12
    assert np.max(np.abs(est.D_hat - D)) < 1e-10
    assert est.regressor_rank == 2


def test_rank_deficient_regressors_zero_unidentified_column():
    """States confined to span(e1): column 2 is unidentified and left at zero."""
    states = [[1.0, 0.0], [2.0, 0.0], [4.0, 0.0]]
    est = closed_loop_ls(traj_from_states(states))
    assert est.regressor_rank == 1
    assert np.allclose(est.D_hat[:, 1], 0.0, atol=1e-14)
    # identified direction: argmin over d of (2 - d)^2 + (4 - 2d)^2 -> d = 2
    assert est.D_hat[0, 0] == pytest.approx(2.0)


def test_empty_trajectory_raises():
    with pytest.raises(EmptyTrajectory):
        closed_loop_ls(traj_from_states([[1.0, 1.0]]))


def test_ls_residual_optimality():
    """Perturbing the minimizer never decreases the objective (50 random cases)."""
    rng = np.random.default_rng(17)

    def objective(states, D):
        X, Y = states[:-1], states[1:]
        return float(np.sum((Y - X @ D.T) ** 2))

    for _ in range(50):
        n, p = int(rng.integers(2, 12)), 3
        states = rng.standard_normal((n + 1, p))
        est = closed_loop_ls(traj_from_states(states))
        base = objective(states, est.D_hat)
        delta = rng.standard_normal((p, p))
        delta *= 1e-3 / np.linalg.norm(delta, 2)
        perturbed = objective(states, est.D_hat + delta)
        assert perturbed >= base - 1e-9 * max(1.0, base)


def test_recover_theta_exact_consistency():
    """Exact closed-loop maps for k=3 random gains recover theta exactly."""
    rng = np.random.default_rng(23)
    plant = DynamicsParameter(A=rng.standard_normal((3, 3)), B=rng.standard_normal((3, 3)))
    gains = [rng.standard_normal((3, 3)) for _ in range(3)]
    estimates = [exact_estimate(plant, L) for L in gains]
    theta_hat = recover_theta(estimates, GainBasis.from_gains(gains))
    assert np.max(np.abs(theta_hat.joined - plant.joined)) < 1e-9


def test_recover_theta_scalar_two_gains():
    """p = r = 1, L1 = 0, L2 = 1: a 2 x 2 linear solve recovers (a, b)."""
    a, b = 1.07, -0.48
    basis = GainBasis.from_gains([np.array([[0.0]]), np.array([[1.0]])])
    estimates = [
        ClosedLoopEstimate(D_hat=np.array([[a]]), sample_count=1, regressor_rank=1),
        ClosedLoopEstimate(D_hat=np.array([[a + b]]), sample_count=1, regressor_rank=1),
    ]
    theta_hat = recover_theta(estimates, basis)
    assert theta_hat.joined == pytest.approx(np.array([[1.07, -0.48]]), abs=1e-12)


def test_recover_theta_identical_zero_gains_is_rank_deficient():
    basis = GainBasis.from_gains([np.zeros((1, 1)), np.zeros((1, 1))])
    estimates = [
        ClosedLoopEstimate(D_hat=np.array([[1.0]]), sample_count=1, regressor_rank=1),
        ClosedLoopEstimate(D_hat=np.array([[1.0]]), sample_count=1, regressor_rank=1),
    ]
    with pytest.raises(RankDeficientBasis):
        recover_theta(estimates, basis)


def test_recover_theta_is_permutation_invariant():
    rng = np.random.default_rng(31)
    plant = DynamicsParameter(A=rng.standard_normal((3, 3)), B=rng.standard_normal((3, 3)))
    gains = [rng.standard_normal((3, 3)) for _ in range(5)]
    estimates = [
        ClosedLoopEstimate(
            D_hat=plant.A + plant.B @ L + 0.01 * rng.standard_normal((3, 3)),
            sample_count=3, regressor_rank=3,
        )
        for L in gains
    ]
    theta1 = recover_theta(estimates, GainBasis.from_gains(gains))
    perm = [3, 0, 4, 1, 2]
    theta2 = recover_theta(
        [estimates[i] for i in perm], GainBasis.from_gains([gains[i] for i in perm])
    )
    assert np.max(np.abs(theta1.joined - theta2.joined)) <= 1e-12


def test_recover_theta_length_mismatch():
    basis = GainBasis.from_gains([np.zeros((1, 1))])
    with pytest.raises(DimensionMismatch):
        recover_theta([], basis)


def test_gain_basis_blocks_have_identity_top():
    gains = [np.random.default_rng(1).standard_normal((2, 3)) for _ in range(3)]
    basis = GainBasis.from_gains(gains)
    assert basis.k == 3
    for block, L in zip(basis.blocks, gains):
        assert np.array_equal(block[:3], np.eye(3))
        assert np.array_equal(block[3:], L)


def test_closed_loop_error_shrinks_with_episode_length():
    """Median identification error over 20 seeds decreases through {50, 200, 800}."""
    plant, costs = preset_benchmark()
    gain = solve_dare(plant, costs).L
    closed = plant.A + plant.B @ gain
    noise = NoiseModel(kind="gaussian", covariance=np.eye(3))
    medians = []
    for n_steps in (50, 200, 800):
        errs = []
        for seed in range(20):
            traj = simulate_episode(
                plant, gain, np.zeros(3), n_steps, noise,
                np.random.default_rng(1000 + seed),
            )
            est = closed_loop_ls(traj)
            errs.append(np.linalg.norm(est.D_hat - closed, 2))
        medians.append(float(np.median(errs)))
    assert medians[0] > medians[1] > medians[2], f"medians {medians}"


def test_estimation_error_cases():
    plant, _ = preset_benchmark()
    assert estimation_error(plant, plant) == 0.0

    bumped = DynamicsParameter(A=plant.A.copy(), B=plant.B.copy())
    bumped.A[1, 1] += 0.3
    assert estimation_error(bumped, plant) == pytest.approx(0.3, abs=1e-12)

    # rectangular difference diag(3, 4) zero-padded has operator norm 4
    za = np.zeros((2, 2))
    t1 = DynamicsParameter(A=za, B=np.zeros((2, 3)))
    t2 = DynamicsParameter(A=np.array([[3.0, 0.0], [0.0, 4.0]]), B=np.zeros((2, 3)))
    assert estimation_error(t1, t2) == pytest.approx(4.0, abs=1e-12)

    with pytest.raises(DimensionMismatch):
        estimation_error(t1, plant)

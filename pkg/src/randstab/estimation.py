"""Least-squares identification: per-episode closed-loop matrices and recovery
of the open-loop parameter from the stacked episode estimates."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, EmptyTrajectory, RankDeficientBasis
from .system import DynamicsParameter, TrajectoryLog

# Singular values below RCOND * sigma_max are treated as zero; early short
# episodes are routinely rank-deficient.
RCOND = 1e-10


@dataclass
class ClosedLoopEstimate:
    """Least-squares estimate of one episode's closed-loop matrix A + B L_i."""

    D_hat: np.ndarray
    sample_count: int
    regressor_rank: int


@dataclass
class GainBasis:
    """The [I_p; L_i] regressor blocks that link closed-loop estimates to theta."""

    blocks: list[np.ndarray]

    @classmethod
    def from_gains(cls, gains: list[np.ndarray]) -> "GainBasis":
        blocks = []
        for L in gains:
            L = np.asarray(L, dtype=float)
            blocks.append(np.vstack([np.eye(L.shape[1]), L]))
        return cls(blocks=blocks)

    @property
    def k(self) -> int:
        return len(self.blocks)


def closed_loop_ls(traj) -> ClosedLoopEstimate:
    """Minimize sum_l ||x(l+1) - D x(l)||^2 over p x p matrices D.

    `traj` is one TrajectoryLog or a sequence of them; with several logs the
    minimization pools all their transitions (used for episodes simulated in
    renormalized segments). When the regressor Gram matrix is rank-deficient
    the minimal-norm minimizer is returned (pseudo-inverse convention),
    leaving unidentified directions of D at zero.
    """
    trajs = [traj] if isinstance(traj, TrajectoryLog) else list(traj)
    if not trajs:
        raise EmptyTrajectory("no trajectories given")
    X = np.vstack([np.asarray(t.states, dtype=float)[:-1] for t in trajs])
    Y = np.vstack([np.asarray(t.states, dtype=float)[1:] for t in trajs])
    n = X.shape[0]
    if n < 1:
        raise EmptyTrajectory("trajectory has no transitions")
    Dt, _, rank, _ = np.linalg.lstsq(X, Y, rcond=RCOND)
    return ClosedLoopEstimate(D_hat=Dt.T, sample_count=n, regressor_rank=int(rank))


def recover_theta(estimates: list[ClosedLoopEstimate], basis: GainBasis) -> DynamicsParameter:
    """Recover theta from the episode estimates by one joint least squares.

    Solves min over theta of sum_i ||D_hat_i - theta [I_p; L_i]||^2, i.e.
    theta M = [D_hat_1 ... D_hat_k] with M = [block_1 ... block_k].
    """
    if len(estimates) != basis.k:
        raise DimensionMismatch(
            f"{len(estimates)} estimates but basis has {basis.k} blocks"
        )
    M = np.hstack(basis.blocks)
    q = M.shape[0]
    p = basis.blocks[0].shape[1]
    D_stack = np.hstack([np.asarray(e.D_hat, dtype=float) for e in estimates])
    if D_stack.shape != (p, M.shape[1]):
        raise DimensionMismatch(
            f"stacked estimates have shape {D_stack.shape}, expected {(p, M.shape[1])}"
        )
    theta_t, _, rank, _ = np.linalg.lstsq(M.T, D_stack.T, rcond=RCOND)
    if rank < q:
        raise RankDeficientBasis(
            f"gain basis spans only {rank} of {q} parameter directions"
        )
    return DynamicsParameter.from_joined(theta_t.T, p)


def estimation_error(theta_hat: DynamicsParameter, theta_true: DynamicsParameter) -> float:
    """Operator norm (largest singular value) of theta_hat - theta_true."""
    if theta_hat.p != theta_true.p or theta_hat.r != theta_true.r:
        raise DimensionMismatch(
            f"parameter shapes differ: {theta_hat.p}x{theta_hat.q} vs "
            f"{theta_true.p}x{theta_true.q}"
        )
    return float(np.linalg.norm(theta_hat.joined - theta_true.joined, 2))

"""Discrete algebraic Riccati equation, feedback gains, and spectral radii.

The central object is the fixed point K of

    K = Q + A'KA - A'KB (B'KB + R)^{-1} B'KA

solved by value iteration from K0 = Q, and the induced feedback gain

    L = -(B'KB + R)^{-1} B'KA

which stabilizes the plant whenever the parameter used to compute it is
close enough to the truth.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np

from .errors import DimensionMismatch, NoConvergence, NonFinite, SingularInnerMatrix

if TYPE_CHECKING:
    from .system import DynamicsParameter


@dataclass
class CostPair:
    """Positive definite state / input cost matrices (Q, R)."""

    Q: np.ndarray
    R: np.ndarray

    def __post_init__(self):
        self.Q = _check_spd(self.Q, "Q")
        self.R = _check_spd(self.R, "R")


def _check_spd(m, name: str) -> np.ndarray:
    arr = np.asarray(m, dtype=float)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise DimensionMismatch(f"{name} must be square, got shape {arr.shape}")
    if not np.isfinite(arr).all():
        raise NonFinite(f"{name} must have finite entries")
    if not np.allclose(arr, arr.T, rtol=0, atol=1e-12 * max(1.0, abs(arr).max())):
        raise ValueError(f"{name} must be symmetric")
    arr = 0.5 * (arr + arr.T)
    if np.linalg.eigvalsh(arr).min() <= 1e-10:
        raise ValueError(f"{name} must be positive definite (min eigenvalue > 1e-10)")
    return arr


@dataclass
class SolverOptions:
    """Stopping rules for the Riccati value iteration.

    The iteration stops once successive iterates differ by less than
    max(tolerance, residual_floor): evaluating the Riccati map carries
    round-off proportional to ||A||^2 ||K||, so for strongly scaled systems
    an absolute 1e-12 test sits below what float64 can resolve and would
    stall forever.
    """

    tolerance: float = 1e-12
    max_iterations: int = 10_000
    divergence_cap: float = 1e12


def residual_floor(theta: "DynamicsParameter", costs: CostPair, K: np.ndarray) -> float:
    """Round-off scale of one Riccati-map evaluation at K."""
    intermediate = _opnorm(costs.Q) + _opnorm(theta.A) ** 2 * max(1.0, _opnorm(K))
    return 64 * np.finfo(float).eps * intermediate


@dataclass
class RiccatiSolution:
    """Converged Riccati fixed point K, its gain L, and convergence diagnostics."""

    K: np.ndarray
    L: np.ndarray
    iterations: int
    residual: float


def _opnorm(m: np.ndarray) -> float:
    return float(np.linalg.norm(m, 2))


def _riccati_map(K: np.ndarray, A: np.ndarray, B: np.ndarray,
                 Q: np.ndarray, R: np.ndarray) -> np.ndarray:
    KA = K @ A
    KB = K @ B
    inner = B.T @ KB + R
    return Q + A.T @ KA - KA.T @ B @ np.linalg.solve(inner, KB.T @ A)


def solve_dare(
    theta: "DynamicsParameter",
    costs: CostPair,
    opts: SolverOptions | None = None,
) -> RiccatiSolution:
    """Solve the DARE for the plant theta = [A, B] by value iteration.

    Iterates K <- Q + A'KA - A'KB(B'KB+R)^{-1}B'KA from K0 = Q, symmetrizing
    each iterate, until successive iterates differ by less than the tolerance
    in operator norm. Divergence past `divergence_cap` or exhausting
    `max_iterations` raises NoConvergence, which doubles as the existence
    test: parameters without a stabilizing solution blow the iteration up.
    """
    opts = opts or SolverOptions()
    A, B = theta.A, theta.B
    p = theta.p
    if costs.Q.shape != (p, p):
        raise DimensionMismatch(f"Q must be {p} x {p}, got {costs.Q.shape}")
    if costs.R.shape != (theta.r, theta.r):
        raise DimensionMismatch(f"R must be {theta.r} x {theta.r}, got {costs.R.shape}")
    Q, R = costs.Q, costs.R

    K = Q.copy()
    for iterations in range(1, opts.max_iterations + 1):
        try:
            K_next = _riccati_map(K, A, B, Q, R)
        except np.linalg.LinAlgError as exc:
            raise NoConvergence(f"inner matrix became singular: {exc}") from exc
        K_next = 0.5 * (K_next + K_next.T)
        diff = _opnorm(K_next - K)
        K = K_next
        if not np.isfinite(K).all() or _opnorm(K) > opts.divergence_cap:
            raise NoConvergence(
                f"iterate norm exceeded divergence cap after {iterations} iterations"
            )
        threshold = max(opts.tolerance, residual_floor(theta, costs, K))
        if diff <= threshold:
            residual = _opnorm(_riccati_map(K, A, B, Q, R) - K)
            if residual <= threshold:
                return RiccatiSolution(
                    K=K, L=feedback_gain(K, theta, R),
                    iterations=iterations, residual=residual,
                )
    raise NoConvergence(
        f"no fixed point within {opts.max_iterations} iterations "
        f"(last step size {diff:.3e})"
    )


def feedback_gain(K: np.ndarray, theta: "DynamicsParameter", R: np.ndarray) -> np.ndarray:
    """The feedback matrix L = -(B'KB + R)^{-1} B'KA."""
    A, B = theta.A, theta.B
    K = np.asarray(K, dtype=float)
    if K.shape != (theta.p, theta.p):
        raise DimensionMismatch(f"K must be {theta.p} x {theta.p}, got {K.shape}")
    inner = B.T @ K @ B + np.asarray(R, dtype=float)
    try:
        return -np.linalg.solve(inner, B.T @ K @ A)
    except np.linalg.LinAlgError as exc:
        raise SingularInnerMatrix(f"B'KB + R is singular: {exc}") from exc


def spectral_radius(M: np.ndarray) -> float:
    """Largest eigenvalue magnitude of a square matrix (real or complex spectrum)."""
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise DimensionMismatch(f"matrix must be square, got shape {M.shape}")
    if not np.isfinite(M).all():
        raise NonFinite("matrix has NaN or Inf entries")
    return float(np.abs(np.linalg.eigvals(M)).max())

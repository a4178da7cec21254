"""Plant representation, noise models, and closed-loop trajectory simulation.

The plant is the linear stochastic system

    x(t+1) = A x(t) + B u(t) + xi(t+1)

with state dimension p, input dimension r, and i.i.d. mean-zero noise xi.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionMismatch, NonFinite
from .riccati import CostPair


def _as_matrix(m, name: str) -> np.ndarray:
    arr = np.asarray(m, dtype=float)
    if arr.ndim != 2:
        raise DimensionMismatch(f"{name} must be a 2-d matrix, got shape {arr.shape}")
    return arr


@dataclass
class DynamicsParameter:
    """The pair theta = [A, B]: transition matrix A (p x p) and input matrix B (p x r).

    The joined p x q form (q = p + r) is what the identification step learns;
    `joined`/`from_joined` round-trip losslessly.
    """

    A: np.ndarray
    B: np.ndarray

    def __post_init__(self):
        self.A = _as_matrix(self.A, "A")
        self.B = _as_matrix(self.B, "B")
        p, pc = self.A.shape
        if p != pc:
            raise DimensionMismatch(f"A must be square, got {self.A.shape}")
        if self.B.shape[0] != p:
            raise DimensionMismatch(
                f"B has {self.B.shape[0]} rows but A is {p} x {p}"
            )
        if not (np.isfinite(self.A).all() and np.isfinite(self.B).all()):
            raise NonFinite("dynamics matrices must have finite entries")

    @property
    def p(self) -> int:
        return self.A.shape[0]

    @property
    def r(self) -> int:
        return self.B.shape[1]

    @property
    def q(self) -> int:
        return self.p + self.r

    @property
    def joined(self) -> np.ndarray:
        """The p x q matrix [A, B]."""
        return np.hstack([self.A, self.B])

    @classmethod
    def from_joined(cls, theta: np.ndarray, p: int) -> "DynamicsParameter":
        """Split a p x q matrix back into (A, B)."""
        theta = _as_matrix(theta, "theta")
        if theta.shape[0] != p or theta.shape[1] <= p:
            raise DimensionMismatch(
                f"joined parameter must be {p} x (>{p}), got {theta.shape}"
            )
        return cls(A=theta[:, :p].copy(), B=theta[:, p:].copy())


@dataclass
class NoiseModel:
    """Mean-zero noise with covariance `covariance`; gaussian or bounded uniform.

    The uniform kind draws components from U(-sqrt(3), sqrt(3)) (unit variance)
    before the covariance transform, so both kinds share the same second moment
    while the uniform one has bounded support.
    """

    kind: str
    covariance: np.ndarray
    _chol: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        if self.kind not in ("gaussian", "uniform"):
            raise ValueError(f"unknown noise kind {self.kind!r}")
        sigma = _as_matrix(self.covariance, "covariance")
        if sigma.shape[0] != sigma.shape[1]:
            raise DimensionMismatch(f"covariance must be square, got {sigma.shape}")
        if not np.allclose(sigma, sigma.T, rtol=0, atol=1e-12 * max(1.0, abs(sigma).max())):
            raise ValueError("covariance must be symmetric")
        sigma = 0.5 * (sigma + sigma.T)
        if np.linalg.eigvalsh(sigma).min() <= 1e-10:
            raise ValueError("covariance must be positive definite (min eigenvalue > 1e-10)")
        self.covariance = sigma
        self._chol = np.linalg.cholesky(sigma)

    @property
    def p(self) -> int:
        return self.covariance.shape[0]

    def sample_block(self, rng: np.random.Generator, n: int) -> np.ndarray:
        """Draw n noise vectors as an (n, p) array."""
        if self.kind == "gaussian":
            z = rng.standard_normal((n, self.p))
        else:
            z = rng.uniform(-math.sqrt(3.0), math.sqrt(3.0), size=(n, self.p))
        return z @ self._chol.T


@dataclass
class TrajectoryLog:
    """One episode's history: states x(0..n), inputs u(0..n-1).

    `overflow` marks an episode that was cut short because the state norm
    exceeded the cap; the first offending state is the last one stored.
    """

    states: np.ndarray
    inputs: np.ndarray
    overflow: bool = False

    @property
    def n_transitions(self) -> int:
        return len(self.inputs)


def step(sys: DynamicsParameter, x: np.ndarray, u: np.ndarray, xi: np.ndarray) -> np.ndarray:
    """One transition of the plant: A x + B u + xi."""
    x = np.asarray(x, dtype=float)
    u = np.asarray(u, dtype=float)
    xi = np.asarray(xi, dtype=float)
    if x.shape != (sys.p,):
        raise DimensionMismatch(f"state must have shape ({sys.p},), got {x.shape}")
    if u.shape != (sys.r,):
        raise DimensionMismatch(f"input must have shape ({sys.r},), got {u.shape}")
    if xi.shape != (sys.p,):
        raise DimensionMismatch(f"noise must have shape ({sys.p},), got {xi.shape}")
    return sys.A @ x + sys.B @ u + xi


def simulate_episode(
    sys: DynamicsParameter,
    gain: np.ndarray,
    x0: np.ndarray,
    n_steps: int,
    noise: NoiseModel | np.ndarray,
    rng: np.random.Generator | None = None,
    cap: float = 1e100,
) -> TrajectoryLog:
    """Run the closed loop u(t) = gain @ x(t) for n_steps transitions.

    `noise` is either a NoiseModel sampled through `rng`, or a pre-drawn
    (n_steps, p) array of noise vectors (used by tests to inject deterministic
    disturbances). Stops early with overflow=True as soon as a stored state
    norm exceeds `cap`, so logs never contain non-finite entries.
    """
    if n_steps < 1:
        raise ValueError("n_steps must be >= 1")
    gain = _as_matrix(gain, "gain")
    if gain.shape != (sys.r, sys.p):
        raise DimensionMismatch(
            f"gain must be {sys.r} x {sys.p}, got {gain.shape}"
        )
    x = np.asarray(x0, dtype=float)
    if x.shape != (sys.p,):
        raise DimensionMismatch(f"x0 must have shape ({sys.p},), got {x.shape}")

    if isinstance(noise, NoiseModel):
        if rng is None:
            raise ValueError("rng is required when noise is a NoiseModel")
        xi = noise.sample_block(rng, n_steps)
    else:
        xi = np.asarray(noise, dtype=float)
        if xi.shape != (n_steps, sys.p):
            raise DimensionMismatch(
                f"injected noise must have shape ({n_steps}, {sys.p}), got {xi.shape}"
            )

    states = [x]
    inputs = []
    overflow = False
    if float(np.linalg.norm(x)) > cap:
        overflow = True
    else:
        A, B = sys.A, sys.B
        for t in range(n_steps):
            u = gain @ x
            x = A @ x + B @ u + xi[t]
            inputs.append(u)
            states.append(x)
            if float(np.linalg.norm(x)) > cap:
                overflow = True
                break
    return TrajectoryLog(
        states=np.asarray(states), inputs=np.asarray(inputs).reshape(len(inputs), sys.r),
        overflow=overflow,
    )


def preset_benchmark() -> tuple[DynamicsParameter, CostPair]:
    """The 3-state / 3-input benchmark system and its cost matrices.

    Returned bit-for-bit as the decimal literals below; the open loop is
    mildly unstable and the pair (A, B) is stabilizable.
    """
    a = np.array(
        [
            [1.07, 0.0, -0.37],
            [0.48, -0.88, 0.85],
            [0.0, 0.03, -0.92],
        ]
    )
    b = np.array(
        [
            [-0.48, 0.44, -0.29],
            [-0.51, 0.59, 0.26],
            [0.29, 0.0, -0.74],
        ]
    )
    q = np.array(
        [
            [1.31, -0.17, -0.28],
            [-0.17, 1.14, 0.51],
            [-0.28, 0.51, 5.01],
        ]
    )
    r = np.array(
        [
            [2.01, 0.54, 0.77],
            [0.54, 1.38, 0.42],
            [0.77, 0.42, 2.38],
        ]
    )
    return DynamicsParameter(A=a, B=b), CostPair(Q=q, R=r)


def load_system(path: str) -> tuple[DynamicsParameter, CostPair]:
    """Load a plant (and optional costs) from a JSON description file.

    Expected fields: `p`, `r`, `A` (p x p), `B` (p x r), optional `Q`, `R`
    as row-major nested arrays. Missing Q/R default to identity costs.
    """
    with open(path, "r", encoding="utf-8") as f:
        doc = json.load(f)
    try:
        p = int(doc["p"])
        r = int(doc["r"])
        a = np.asarray(doc["A"], dtype=float)
        b = np.asarray(doc["B"], dtype=float)
    except (KeyError, TypeError, ValueError) as exc:
        raise ValueError(f"malformed system file {path}: {exc}") from exc
    if a.shape != (p, p):
        raise DimensionMismatch(f"A must be {p} x {p}, got {a.shape}")
    if b.shape != (p, r):
        raise DimensionMismatch(f"B must be {p} x {r}, got {b.shape}")
    q = np.asarray(doc["Q"], dtype=float) if "Q" in doc else np.eye(p)
    rr = np.asarray(doc["R"], dtype=float) if "R" in doc else np.eye(r)
    return DynamicsParameter(A=a, B=b), CostPair(Q=q, R=rr)

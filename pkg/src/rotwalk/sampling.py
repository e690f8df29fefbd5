"""Random inputs for the event loop and reproducible stream derivation.

Streams come from numpy's Philox generator: counter based, so trajectory i
of a run is reproducible from (master seed, i) alone and streams for
different indices never overlap. Scalar samplers consume the stream in a
fixed documented order; batch variants exist for estimators and tests and
consume the stream in a different (vectorized) order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

RngState = np.random.Generator

__all__ = [
    "RngState",
    "EtaLaw",
    "NoiseLaw",
    "PathLengthLaw",
    "derive_stream",
    "sample_xi",
    "sample_delta",
    "sample_eta",
    "sample_xi_batch",
    "sample_eta_batch",
]


@dataclass(frozen=True)
class EtaLaw:
    """Scattering factor law: uniform on the closed ball of radius rho.

    rho = 0 is allowed as the degenerate point mass at the origin (every
    collision absorbs the relative velocity completely), which is useful as
    a controlled limit in tests.
    """

    rho: float = 0.9
    kind: str = "uniform-ball"

    def __post_init__(self) -> None:
        if self.kind != "uniform-ball":
            raise ValueError("eta.kind must be 'uniform-ball'")
        if not (0.0 <= self.rho < 1.0):
            raise ValueError("eta.rho must be in [0, 1)")

    @property
    def mean_norm(self) -> float:
        """E|eta|, which is 3 rho / 4 for the uniform ball."""
        return 0.75 * self.rho


@dataclass(frozen=True)
class NoiseLaw:
    """Thermal noise law: independent N(0, sigma^2) per coordinate."""

    sigma: float

    def __post_init__(self) -> None:
        if not self.sigma >= 0.0:
            raise ValueError("sigma must be nonnegative")

    @property
    def mean_norm(self) -> float:
        """E|delta|, the scaled mean of a 3 degree of freedom chi law."""
        return 2.0 * self.sigma * math.sqrt(2.0 / math.pi)


@dataclass(frozen=True)
class PathLengthLaw:
    """Exponential path length with rate lam (config key "lambda")."""

    lam: float

    def __post_init__(self) -> None:
        if not self.lam > 0.0:
            raise ValueError("lambda must be positive")


def derive_stream(master_seed: int, trajectory_index: int) -> RngState:
    """Independent, reproducible generator for one trajectory of a run."""
    ss = np.random.SeedSequence(entropy=master_seed, spawn_key=(trajectory_index,))
    return np.random.Generator(np.random.Philox(ss))


def sample_xi(rng: RngState, law: PathLengthLaw) -> float:
    """One exponential path length by inverse CDF (consumes one uniform)."""
    return -math.log1p(-rng.random()) / law.lam


def sample_delta(rng: RngState, law: NoiseLaw) -> tuple[float, float, float]:
    """One thermal noise vector (consumes three normals, even when sigma = 0)."""
    g = rng.standard_normal(3)
    s = law.sigma
    return (s * g[0], s * g[1], s * g[2])


def sample_eta(rng: RngState, law: EtaLaw) -> tuple[float, float, float]:
    """One scattering factor: radius by inverse CDF, direction by normalized
    Gaussian (consumes one uniform then three normals)."""
    r = law.rho * rng.random() ** (1.0 / 3.0)
    g = rng.standard_normal(3)
    n = math.sqrt(g[0] * g[0] + g[1] * g[1] + g[2] * g[2])
    while n < 1e-300:  # never observed; guards the division
        g = rng.standard_normal(3)
        n = math.sqrt(g[0] * g[0] + g[1] * g[1] + g[2] * g[2])
    f = r / n
    return (f * g[0], f * g[1], f * g[2])


def sample_xi_batch(rng: RngState, law: PathLengthLaw, n: int) -> np.ndarray:
    """n exponential path lengths at once (vectorized stream order)."""
    return -np.log1p(-rng.random(n)) / law.lam


def sample_eta_batch(rng: RngState, law: EtaLaw, n: int) -> np.ndarray:
    """n scattering factors at once, shape (n, 3) (vectorized stream order)."""
    r = law.rho * rng.random(n) ** (1.0 / 3.0)
    g = rng.standard_normal((n, 3))
    norms = np.linalg.norm(g, axis=1)
    norms[norms < 1e-300] = 1.0
    return g * (r / norms)[:, None]

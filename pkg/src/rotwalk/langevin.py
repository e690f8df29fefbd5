"""Continuous comparator: Euler-Maruyama for the planar linear SDE

    dX = (rotation_rate J + drift_gain I) X dt + noise_scale dB,
    J = ((0, -1), (1, 0)),

whose radius grows exponentially at rate drift_gain. compare_growth fits
exponential and polynomial growth laws to both this process and the
collision walk and names the better model for each, which is the point of
the comparison: the walk grows polynomially, the SDE does not.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Iterable, Optional, Tuple

import numpy as np

from .analysis import _as_columns
from .sampling import RngState

__all__ = [
    "LangevinConfig",
    "LangevinSummary",
    "GrowthLawFit",
    "GrowthComparison",
    "integrate",
    "growth_law_fit",
    "compare_growth",
]

_BLOCK = 4096

Sample = Tuple[float, Tuple[float, float]]


@dataclass(frozen=True)
class LangevinConfig:
    rotation_rate: float = 1.0
    drift_gain: float = 0.1
    noise_scale: float = 1.0
    h: float = 1e-3
    x0: Tuple[float, float] = (1.0, 0.0)
    seed: int = 0
    max_time: float = 100.0
    stride: int = 100

    def validate(self) -> None:
        if not (self.h > 0.0 and math.isfinite(self.h)):
            raise ValueError("h must be positive")
        if not (self.max_time > 0.0 and math.isfinite(self.max_time)):
            raise ValueError("max_time must be positive")
        if not (self.noise_scale >= 0.0 and math.isfinite(self.noise_scale)):
            raise ValueError("noise_scale must be nonnegative")
        if not (isinstance(self.stride, int) and self.stride > 0):
            raise ValueError("stride must be a positive integer")
        if len(self.x0) != 2 or not all(math.isfinite(c) for c in self.x0):
            raise ValueError("x0 must be two finite numbers")
        if not (isinstance(self.seed, int) and 0 <= self.seed < 2**64):
            raise ValueError("seed must be a 64-bit unsigned integer")
        for name in ("rotation_rate", "drift_gain"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")

    @classmethod
    def from_dict(cls, raw: dict) -> "LangevinConfig":
        known = {
            "rotation_rate",
            "drift_gain",
            "noise_scale",
            "h",
            "x0",
            "seed",
            "max_time",
            "stride",
        }
        for key in raw:
            if key not in known:
                raise ValueError(f"unknown config key: {key}")
        kwargs = dict(raw)
        if "x0" in kwargs:
            kwargs["x0"] = tuple(float(c) for c in kwargs["x0"])
        if "seed" in kwargs and isinstance(kwargs["seed"], str):
            kwargs["seed"] = int(kwargs["seed"], 0)
        config = cls(**kwargs)
        config.validate()
        return config

    def to_dict(self) -> dict:
        return {
            "rotation_rate": self.rotation_rate,
            "drift_gain": self.drift_gain,
            "noise_scale": self.noise_scale,
            "h": self.h,
            "x0": list(self.x0),
            "seed": self.seed,
            "max_time": self.max_time,
            "stride": self.stride,
        }


@dataclass(frozen=True)
class LangevinSummary:
    final_x: Tuple[float, float]
    steps: int
    t_final: float


def integrate(
    config: LangevinConfig,
    rng: Optional[RngState],
    sink: Optional[Callable[[Sample], None]] = None,
) -> LangevinSummary:
    """Euler-Maruyama from t = 0 to (just past) max_time.

    sink receives (t, (x1, x2)) at step 0, every stride-th step, and the
    final step. Noise is drawn in blocks of standard normal pairs, one pair
    per step in step order; noiseless runs consume no randomness (rng may
    then be None).
    """
    config.validate()
    h = config.h
    n_steps = max(1, math.ceil(config.max_time / h - 1e-9))
    r = config.rotation_rate
    g = config.drift_gain
    sigma = config.noise_scale * math.sqrt(h)
    x1, x2 = float(config.x0[0]), float(config.x0[1])
    if sink is not None:
        sink((0.0, (x1, x2)))
    stride = config.stride
    i = 0
    while i < n_steps:
        block = min(_BLOCK, n_steps - i)
        if sigma != 0.0:
            noise = rng.standard_normal((block, 2)).tolist()
        else:
            noise = None
        for j in range(block):
            d1 = h * (g * x1 - r * x2)
            d2 = h * (r * x1 + g * x2)
            if noise is not None:
                z = noise[j]
                x1 += d1 + sigma * z[0]
                x2 += d2 + sigma * z[1]
            else:
                x1 += d1
                x2 += d2
            i += 1
            if sink is not None and (i % stride == 0 or i == n_steps):
                sink((i * h, (x1, x2)))
    return LangevinSummary(final_x=(x1, x2), steps=n_steps, t_final=n_steps * h)


@dataclass(frozen=True)
class GrowthLawFit:
    winner: str
    exponential_rate: float
    polynomial_exponent: float
    rss_exponential: float
    rss_polynomial: float
    n_points: int

    def to_dict(self) -> dict:
        return {
            "winner": self.winner,
            "exponential_rate": self.exponential_rate,
            "polynomial_exponent": self.polynomial_exponent,
            "rss_exponential": self.rss_exponential,
            "rss_polynomial": self.rss_polynomial,
            "n_points": self.n_points,
        }


def _ols(x: np.ndarray, y: np.ndarray) -> Tuple[float, float]:
    xbar = x.mean()
    ybar = y.mean()
    dx = x - xbar
    slope = float((dx * (y - ybar)).sum() / (dx * dx).sum())
    resid = y - ybar - slope * dx
    return slope, float((resid * resid).sum())


def growth_law_fit(times, radii, min_radius: float = 100.0) -> GrowthLawFit:
    """Fit log r against t (exponential law) and against log t (polynomial
    law) past the burn-in radius, on the same points; the winner has the
    smaller residual sum of squares. Needs at least 10 points spanning a
    factor of 10 in time.
    """
    t = np.asarray(times, dtype=float)
    r = np.asarray(radii, dtype=float)
    keep = (r > min_radius) & (t > 0.0)
    t = t[keep]
    r = r[keep]
    if t.size < 10 or t.max() / t.min() < 10.0:
        raise ValueError("insufficient data span")
    y = np.log(r)
    rate, rss_exp = _ols(t, y)
    expo, rss_poly = _ols(np.log(t), y)
    winner = "exponential" if rss_exp < rss_poly else "polynomial"
    return GrowthLawFit(winner, rate, expo, rss_exp, rss_poly, int(t.size))


@dataclass(frozen=True)
class GrowthComparison:
    collision: GrowthLawFit
    langevin: GrowthLawFit

    def to_dict(self) -> dict:
        return {
            "collision": self.collision.to_dict(),
            "langevin": self.langevin.to_dict(),
        }


def _split_samples(samples: Iterable) -> Tuple[np.ndarray, np.ndarray]:
    times = []
    radii = []
    for row in samples:
        if len(row) == 2:
            t, (x1, x2) = row
        else:
            t, x1, x2 = row
        times.append(float(t))
        radii.append(math.hypot(float(x1), float(x2)))
    return np.asarray(times), np.asarray(radii)


def compare_growth(
    collision_events,
    langevin_samples: Iterable,
    min_radius: float = 100.0,
) -> GrowthComparison:
    """Fit both growth laws to the collision walk (radius of the collision
    points against collision time) and to the Langevin samples, past the
    same burn-in radius."""
    cols = _as_columns(collision_events)
    walk = growth_law_fit(cols.t_after, cols.dr, min_radius)
    t, r = _split_samples(langevin_samples)
    sde = growth_law_fit(t, r, min_radius)
    return GrowthComparison(collision=walk, langevin=sde)

"""Event loop for the collision random walk.

A trajectory alternates straight flights with instantaneous collisions. The
flight time comes from inverting the relative arc-length clock at an
exponential path length, and the collision resets the velocity to

    v' = w + |v - w| R(v - w) eta,    w = F(x') + delta,

where x' is the landing point, R(z) is the rotation taking e1 onto z, eta
is a contraction factor drawn from the ball of radius rho < 1, and delta is
thermal noise. Each collision therefore shrinks the speed relative to the
local medium while the rotation field pumps the lab-frame velocity.

Per-event draw order is fixed (xi, then delta, then eta) so event logs are
reproducible from the seed alone.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Tuple

from .arclength import (
    ClockInversionError,
    DegenerateFlightError,
    flight_problem,
    invert_arc_length,
)
from .geometry import Vec3, field_at, matvec, norm, radial_distance, rotation_to
from .sampling import (
    EtaLaw,
    NoiseLaw,
    PathLengthLaw,
    RngState,
    sample_delta,
    sample_eta,
    sample_xi,
)

#: below this relative speed the collision keeps the medium velocity exactly
_ZERO_REL = 1e-14

EventSink = Callable[["CollisionEvent"], None]

__all__ = [
    "ParticleState",
    "CollisionEvent",
    "StopRule",
    "SimConfig",
    "RunSummary",
    "SimulationError",
    "EventSink",
    "resolve_collision",
    "next_event",
    "run_trajectory",
    "position_at",
]


class SimulationError(RuntimeError):
    """A trajectory died before reaching its stop rule."""


@dataclass(frozen=True)
class ParticleState:
    """Particle snapshot immediately after collision number k (k = 0 is the
    initial condition)."""

    x: Vec3
    v: Vec3
    t: float
    k: int


@dataclass(frozen=True)
class CollisionEvent:
    """Everything about one flight and the collision that ends it.

    k counts collisions starting at 1. The flight runs from t_before to
    t_after = t_before + tau and ends at position x, where the medium moves
    with u = F(x). e_after = v_after - u is the velocity error that the
    fluctuation bounds track.
    """

    k: int
    t_before: float
    t_after: float
    tau: float
    x: Vec3
    v_before: Vec3
    v_after: Vec3
    xi: float
    delta: Vec3
    eta: Vec3
    u: Vec3
    e_after: Vec3


@dataclass(frozen=True)
class StopRule:
    """First trigger wins; at least one bound must be set."""

    max_events: Optional[int] = None
    max_time: Optional[float] = None
    max_radius: Optional[float] = None

    def validate(self) -> None:
        if self.max_events is None and self.max_time is None and self.max_radius is None:
            raise ValueError(
                "stop must set at least one of max_events, max_time, max_radius"
            )
        if self.max_events is not None and (
            not isinstance(self.max_events, int) or self.max_events < 1
        ):
            raise ValueError("stop.max_events must be a positive integer")
        if self.max_time is not None and not self.max_time > 0.0:
            raise ValueError("stop.max_time must be positive")
        if self.max_radius is not None and not self.max_radius > 0.0:
            raise ValueError("stop.max_radius must be positive")


def _vec3(value, key: str) -> Vec3:
    try:
        x, y, z = (float(c) for c in value)
    except (TypeError, ValueError):
        raise ValueError(f"{key} must be three finite numbers") from None
    if not (math.isfinite(x) and math.isfinite(y) and math.isfinite(z)):
        raise ValueError(f"{key} must be three finite numbers")
    return (x, y, z)


def _seed(value) -> int:
    if isinstance(value, str):
        try:
            value = int(value, 0)
        except ValueError:
            raise ValueError("seed must be a 64-bit unsigned integer") from None
    if isinstance(value, bool) or not isinstance(value, int) or not 0 <= value < 2 ** 64:
        raise ValueError("seed must be a 64-bit unsigned integer")
    return value


@dataclass(frozen=True)
class SimConfig:
    """Resolved configuration of one trajectory (or of every trajectory of
    an ensemble, which differ only in their derived stream index)."""

    omega: float = 1.0
    lam: float = 1.0
    sigma: float = 0.1
    eta_law: EtaLaw = field(default_factory=EtaLaw)
    x0: Vec3 = (1.0, 0.0, 0.0)
    v0: Vec3 = (0.0, 0.0, 0.0)
    seed: int = 0
    stop: StopRule = field(default_factory=lambda: StopRule(max_events=100_000))

    def validate(self) -> None:
        if not self.omega > 0.0:
            raise ValueError("omega must be positive")
        if not self.lam > 0.0:
            raise ValueError("lambda must be positive")
        if not self.sigma >= 0.0:
            raise ValueError("sigma must be nonnegative")
        _vec3(self.x0, "x0")
        _vec3(self.v0, "v0")
        _seed(self.seed)
        self.stop.validate()

    @classmethod
    def from_dict(cls, raw: dict) -> "SimConfig":
        """Build and validate a config from its JSON form.

        Unknown keys are rejected so typos fail loudly instead of silently
        running the defaults.
        """
        known = {"omega", "lambda", "sigma", "eta", "x0", "v0", "seed", "stop"}
        for key in raw:
            if key not in known:
                raise ValueError(f"unknown config key: {key}")
        eta_raw = dict(raw.get("eta", {}))
        for key in eta_raw:
            if key not in {"kind", "rho"}:
                raise ValueError(f"unknown config key: eta.{key}")
        stop_raw = dict(raw.get("stop", {"max_events": 100_000}))
        for key in stop_raw:
            if key not in {"max_events", "max_time", "max_radius"}:
                raise ValueError(f"unknown config key: stop.{key}")
        try:
            eta_law = EtaLaw(
                rho=float(eta_raw.get("rho", 0.9)),
                kind=str(eta_raw.get("kind", "uniform-ball")),
            )
        except (TypeError, ValueError) as exc:
            raise ValueError(str(exc)) from None
        max_events = stop_raw.get("max_events")
        if max_events is not None:
            if isinstance(max_events, bool) or not isinstance(max_events, int):
                raise ValueError("stop.max_events must be a positive integer")
        max_time = stop_raw.get("max_time")
        max_radius = stop_raw.get("max_radius")
        config = cls(
            omega=float(raw.get("omega", 1.0)),
            lam=float(raw.get("lambda", 1.0)),
            sigma=float(raw.get("sigma", 0.1)),
            eta_law=eta_law,
            x0=_vec3(raw.get("x0", (1.0, 0.0, 0.0)), "x0"),
            v0=_vec3(raw.get("v0", (0.0, 0.0, 0.0)), "v0"),
            seed=_seed(raw.get("seed", 0)),
            stop=StopRule(
                max_events=max_events,
                max_time=None if max_time is None else float(max_time),
                max_radius=None if max_radius is None else float(max_radius),
            ),
        )
        config.validate()
        return config

    def to_dict(self) -> dict:
        """Fully resolved JSON form, inverse of from_dict."""
        stop: dict = {}
        if self.stop.max_events is not None:
            stop["max_events"] = self.stop.max_events
        if self.stop.max_time is not None:
            stop["max_time"] = self.stop.max_time
        if self.stop.max_radius is not None:
            stop["max_radius"] = self.stop.max_radius
        return {
            "omega": self.omega,
            "lambda": self.lam,
            "sigma": self.sigma,
            "eta": {"kind": self.eta_law.kind, "rho": self.eta_law.rho},
            "x0": list(self.x0),
            "v0": list(self.v0),
            "seed": self.seed,
            "stop": stop,
        }


@dataclass(frozen=True)
class RunSummary:
    final_state: ParticleState
    events: int
    stop_reason: str


def resolve_collision(v: Vec3, u: Vec3, delta: Vec3, eta: Vec3) -> Vec3:
    """Post-collision velocity for incoming v against medium velocity u.

    The relative speed |v - w| is preserved up to the factor |eta| < 1 and
    its direction is re-randomized by rotating eta from the e1 frame into
    the frame of the incoming relative velocity. When the particle already
    rides the medium (|v - w| below _ZERO_REL) it keeps doing so.
    """
    w = (u[0] + delta[0], u[1] + delta[1], u[2] + delta[2])
    rel = (v[0] - w[0], v[1] - w[1], v[2] - w[2])
    speed = norm(rel)
    if speed < _ZERO_REL:
        return w
    spun = matvec(rotation_to(rel), eta)
    return (w[0] + speed * spun[0], w[1] + speed * spun[1], w[2] + speed * spun[2])


def next_event(
    state: ParticleState, config: SimConfig, rng: RngState
) -> Tuple[ParticleState, CollisionEvent]:
    """Advance one flight and resolve the collision at its end."""
    x = state.x
    v = state.v
    xi = sample_xi(rng, PathLengthLaw(config.lam))
    tau = invert_arc_length(flight_problem(x, v, config.omega), xi)
    xp = (x[0] + tau * v[0], x[1] + tau * v[1], x[2] + tau * v[2])
    delta = sample_delta(rng, NoiseLaw(config.sigma))
    eta = sample_eta(rng, config.eta_law)
    u = field_at(config.omega, xp)
    vp = resolve_collision(v, u, delta, eta)
    if not (
        math.isfinite(tau)
        and math.isfinite(vp[0])
        and math.isfinite(vp[1])
        and math.isfinite(vp[2])
    ):
        raise SimulationError("non-finite state update")
    t_after = state.t + tau
    k = state.k + 1
    event = CollisionEvent(
        k=k,
        t_before=state.t,
        t_after=t_after,
        tau=tau,
        x=xp,
        v_before=v,
        v_after=vp,
        xi=xi,
        delta=delta,
        eta=eta,
        u=u,
        e_after=(vp[0] - u[0], vp[1] - u[1], vp[2] - u[2]),
    )
    return ParticleState(xp, vp, t_after, k), event


def run_trajectory(config: SimConfig, rng: RngState, sink: EventSink) -> RunSummary:
    """Run the event loop until the stop rule fires.

    Every event is delivered to sink exactly once, in order, before the
    stop rule is consulted. Degenerate flights and solver failures surface
    as SimulationError tagged with the offending event index.
    """
    stop = config.stop
    state = ParticleState(config.x0, config.v0, 0.0, 0)
    while True:
        try:
            state, event = next_event(state, config, rng)
        except (DegenerateFlightError, ClockInversionError, SimulationError) as exc:
            raise SimulationError(f"event {state.k + 1}: {exc}") from exc
        sink(event)
        if stop.max_events is not None and state.k >= stop.max_events:
            return RunSummary(state, state.k, "max_events")
        if stop.max_time is not None and state.t >= stop.max_time:
            return RunSummary(state, state.k, "max_time")
        if stop.max_radius is not None and radial_distance(state.x) >= stop.max_radius:
            return RunSummary(state, state.k, "max_radius")


def position_at(state: ParticleState, t: float) -> Vec3:
    """Position along the current flight at lab time t >= state.t."""
    if t < state.t:
        raise ValueError("time before current event")
    dt = t - state.t
    return (
        state.x[0] + dt * state.v[0],
        state.x[1] + dt * state.v[1],
        state.x[2] + dt * state.v[2],
    )

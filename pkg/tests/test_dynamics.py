import math

import numpy as np
import pytest

from rotwalk.analysis import (
    check_collision_norms,
    check_corotating_displacement,
    check_radial_increment,
)
from rotwalk.arclength import arc_length, flight_problem
from rotwalk.dynamics import (
    ParticleState,
    SimConfig,
    SimulationError,
    StopRule,
    next_event,
    position_at,
    resolve_collision,
    run_trajectory,
)
from rotwalk.geometry import field_at, norm, sub
from rotwalk.sampling import EtaLaw, derive_stream


class ScriptedRng:
    """Replays canned uniforms and normal blocks in draw order."""

    def __init__(self, uniforms, normals):
        self.uniforms = list(uniforms)
        self.normals = list(normals)

    def random(self):
        return self.uniforms.pop(0)

    def standard_normal(self, shape):
        block = np.asarray(self.normals.pop(0), dtype=float)
        assert block.shape == (shape,)
        return block


def collect(config):
    events = []
    summary = run_trajectory(config, derive_stream(config.seed, 0), events.append)
    return events, summary


def test_single_event_worked_example():
    # Stationary particle at (1, 0, 0): a = -F(x) = (0, -1, 0), b = -F(v) = 0,
    # so the relative speed is exactly 1 and tau = xi. The particle does not
    # move (v = 0), the medium at the landing point is u = (0, 1, 0), and a
    # scripted eta = rho e1 lands the new velocity at u + |v - u| R(v-u) eta.
    config = SimConfig(sigma=0.0, stop=StopRule(max_events=1))
    xi = 2.0
    rng = ScriptedRng(
        uniforms=[1.0 - math.exp(-xi), 1.0],
        normals=[(0.3, -0.1, 0.7), (1.0, 0.0, 0.0)],
    )
    state, ev = next_event(ParticleState(config.x0, config.v0, 0.0, 0), config, rng)
    assert ev.xi == pytest.approx(xi, rel=1e-15)
    assert ev.tau == ev.xi
    assert ev.x == (1.0, 0.0, 0.0)
    assert ev.u == (0.0, 1.0, 0.0)
    assert ev.delta == (0.0, 0.0, 0.0)
    assert ev.eta == (0.9, 0.0, 0.0)
    # R maps e1 onto the unit relative velocity (0, -1, 0)
    assert ev.v_after == (0.0, 1.0 - 0.9, 0.0)
    assert ev.e_after == (0.0, (1.0 - 0.9) - 1.0, 0.0)
    assert state.x == ev.x and state.v == ev.v_after and state.k == 1


def test_resolve_collision_keeps_medium_when_comoving():
    u = (0.0, 2.0, 0.0)
    v = (1e-16, 2.0, 0.0)
    out = resolve_collision(v, u, (0.0, 0.0, 0.0), (0.5, 0.0, 0.0))
    assert out == u


def test_resolve_collision_norm_identity():
    rng = np.random.default_rng(21)
    for _ in range(200):
        v, u, delta = (tuple(rng.standard_normal(3)) for _ in range(3))
        eta = tuple(0.3 * rng.standard_normal(3))
        out = resolve_collision(v, u, delta, eta)
        w = tuple(u[i] + delta[i] for i in range(3))
        assert norm(sub(out, w)) == pytest.approx(
            norm(sub(v, w)) * norm(eta), rel=1e-12
        )


def test_clock_consistency_rebuilt_from_log():
    events, _ = collect(SimConfig(seed=31, stop=StopRule(max_events=200)))
    x = (1.0, 0.0, 0.0)
    for ev in events:
        problem = flight_problem(x, ev.v_before, 1.0)
        assert arc_length(problem, ev.tau) == pytest.approx(ev.xi, rel=1e-9)
        assert ev.t_after == pytest.approx(ev.t_before + ev.tau, rel=1e-12)
        x = ev.x


def test_flight_geometry_checks_pass(medium_run):
    _, cols, _ = medium_run
    assert check_collision_norms(cols).passed
    assert check_corotating_displacement(cols).passed
    assert check_radial_increment(cols).passed


def test_determinism():
    config = SimConfig(seed=77, stop=StopRule(max_events=500))
    a, sa = collect(config)
    b, sb = collect(config)
    assert a == b
    assert sa == sb


def test_seed_changes_trajectory():
    a, _ = collect(SimConfig(seed=1, stop=StopRule(max_events=50)))
    b, _ = collect(SimConfig(seed=2, stop=StopRule(max_events=50)))
    assert a != b


def test_stop_max_events():
    events, summary = collect(SimConfig(seed=5, stop=StopRule(max_events=17)))
    assert len(events) == 17
    assert summary.events == 17
    assert summary.stop_reason == "max_events"


def test_stop_max_time():
    events, summary = collect(SimConfig(seed=5, stop=StopRule(max_time=3.0)))
    assert summary.stop_reason == "max_time"
    assert summary.final_state.t >= 3.0
    assert events[-2].t_after < 3.0


def test_stop_max_radius():
    events, summary = collect(SimConfig(seed=5, stop=StopRule(max_radius=5.0)))
    assert summary.stop_reason == "max_radius"
    assert math.hypot(*summary.final_state.x[:2]) >= 5.0
    assert all(math.hypot(*ev.x[:2]) < 5.0 for ev in events[:-1])


def test_position_at():
    state = ParticleState((1.0, 2.0, 3.0), (0.5, 0.0, -1.0), 10.0, 4)
    assert position_at(state, 10.0) == (1.0, 2.0, 3.0)
    assert position_at(state, 12.0) == (2.0, 2.0, 1.0)
    with pytest.raises(ValueError, match="time before current event"):
        position_at(state, 9.0)


def test_axis_start_is_degenerate():
    config = SimConfig(
        sigma=0.0, x0=(0.0, 0.0, 0.0), v0=(0.0, 0.0, 0.0), stop=StopRule(max_events=1)
    )
    with pytest.raises(
        SimulationError,
        match="event 1: particle permanently comoving on axis; no collision ever",
    ):
        collect(config)


def test_noiseless_absorbing_walk_has_zero_error():
    # sigma = 0 and rho = 0 make every collision land exactly on the medium
    # velocity, so the tracked error is identically zero from event 1 on
    x0 = (2.0, 0.0, 0.0)
    config = SimConfig(
        sigma=0.0,
        eta_law=EtaLaw(rho=0.0),
        x0=x0,
        v0=field_at(1.0, x0),
        seed=3,
        stop=StopRule(max_events=100),
    )
    events, _ = collect(config)
    assert all(ev.e_after == (0.0, 0.0, 0.0) for ev in events)


def test_from_dict_roundtrip():
    raw = {
        "omega": 2.0,
        "lambda": 0.5,
        "sigma": 0.0,
        "eta": {"rho": 0.25},
        "x0": [1, 2, 3],
        "v0": [0, 0, 0],
        "seed": "0x10",
        "stop": {"max_events": 10},
    }
    config = SimConfig.from_dict(raw)
    assert config.seed == 16
    assert config.x0 == (1.0, 2.0, 3.0)
    assert config.eta_law.rho == 0.25
    assert SimConfig.from_dict(config.to_dict()) == config


def test_from_dict_rejects_unknown_keys():
    with pytest.raises(ValueError, match="unknown config key: omga"):
        SimConfig.from_dict({"omga": 1.0})
    with pytest.raises(ValueError, match="unknown config key: eta.radius"):
        SimConfig.from_dict({"eta": {"radius": 0.5}})
    with pytest.raises(ValueError, match="unknown config key: stop.max_steps"):
        SimConfig.from_dict({"stop": {"max_steps": 10}})


def test_from_dict_validation_messages():
    with pytest.raises(ValueError, match="omega must be positive"):
        SimConfig.from_dict({"omega": -1.0})
    with pytest.raises(ValueError, match="lambda must be positive"):
        SimConfig.from_dict({"lambda": 0.0})
    with pytest.raises(ValueError, match="sigma must be nonnegative"):
        SimConfig.from_dict({"sigma": -0.5})
    with pytest.raises(ValueError, match="x0 must be three finite numbers"):
        SimConfig.from_dict({"x0": [1.0, 2.0]})
    with pytest.raises(ValueError, match="seed must be a 64-bit unsigned integer"):
        SimConfig.from_dict({"seed": -1})
    with pytest.raises(ValueError, match="stop must set at least one of"):
        SimConfig.from_dict({"stop": {}})
    with pytest.raises(ValueError, match="stop.max_events must be a positive integer"):
        SimConfig.from_dict({"stop": {"max_events": 0}})

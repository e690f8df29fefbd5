import math

import numpy as np
import pytest

from rotwalk.geometry import (
    decompose_velocity,
    field_at,
    norm,
    radial_distance,
    rotate_point,
    rotation_to,
)


def test_field_is_planar_rotation():
    assert field_at(2.0, (3.0, -1.0, 5.0)) == (2.0, 6.0, 0.0)


def test_field_speed_is_omega_times_radius():
    rng = np.random.default_rng(0)
    for _ in range(100):
        y = tuple(rng.standard_normal(3) * 10.0)
        omega = float(rng.uniform(0.1, 5.0))
        assert np.isclose(norm(field_at(omega, y)), omega * radial_distance(y))


def test_field_perpendicular_to_radius():
    y = (3.0, 4.0, 7.0)
    f = field_at(1.5, y)
    assert f[0] * y[0] + f[1] * y[1] == pytest.approx(0.0, abs=1e-12)


def test_rotate_point_quarter_turn():
    got = rotate_point(math.pi / 2.0, (1.0, 0.0, 5.0), 1.0)
    assert np.allclose(got, (0.0, 1.0, 5.0), atol=1e-15)


def test_rotate_point_preserves_radius_and_height():
    rng = np.random.default_rng(1)
    for _ in range(200):
        x = tuple(rng.standard_normal(3) * 5.0)
        omega = float(rng.uniform(-3.0, 3.0))
        t = float(rng.uniform(0.0, 10.0))
        moved = rotate_point(omega, x, t)
        assert np.isclose(radial_distance(moved), radial_distance(x))
        assert moved[2] == x[2]


def test_rotate_point_matches_field_derivative():
    # d/dt rotate_point(omega, x, t) at t = 0 is the medium velocity
    x = (2.0, -1.0, 3.0)
    omega = 1.7
    h = 1e-7
    moved = rotate_point(omega, x, h)
    vel = tuple((m - c) / h for m, c in zip(moved, x))
    assert np.allclose(vel, field_at(omega, x), atol=1e-5)


def test_radial_distance():
    assert radial_distance((3.0, 4.0, 100.0)) == 5.0
    assert radial_distance((0.0, 0.0, 1.0)) == 0.0


def test_rotation_to_worked_example():
    got = rotation_to((0.0, 2.0, 0.0))
    want = ((0.0, -1.0, 0.0), (1.0, 0.0, 0.0), (0.0, 0.0, 1.0))
    assert np.allclose(got, want, atol=1e-15)


def test_rotation_to_maps_e1_to_direction():
    rng = np.random.default_rng(2)
    for _ in range(500):
        u = tuple(rng.standard_normal(3) * 10.0 ** rng.uniform(-3, 3))
        if norm(u) == 0.0:
            continue
        r = np.array(rotation_to(u))
        direction = np.array(u) / norm(u)
        assert np.allclose(r[:, 0], direction, atol=1e-14)


def test_rotation_to_is_orthogonal():
    rng = np.random.default_rng(3)
    for _ in range(500):
        u = tuple(rng.standard_normal(3))
        r = np.array(rotation_to(u))
        assert np.allclose(r @ r.T, np.eye(3), atol=5e-13)
        assert np.isclose(np.linalg.det(r), 1.0, atol=1e-12)


def test_rotation_to_aligned_is_identity():
    assert rotation_to((7.0, 0.0, 0.0)) == ((1.0, 0.0, 0.0), (0.0, 1.0, 0.0), (0.0, 0.0, 1.0))


def test_rotation_to_antipodal_half_turn():
    r = rotation_to((-1.0, 0.0, 0.0))
    assert r == ((-1.0, 0.0, 0.0), (0.0, -1.0, 0.0), (0.0, 0.0, 1.0))
    # still a rotation taking e1 to -e1
    assert np.allclose(np.array(r)[:, 0], (-1.0, 0.0, 0.0))


def test_rotation_to_near_antipodal_stays_finite():
    r = np.array(rotation_to((-1.0 + 1e-13, 1e-14, 0.0)))
    assert np.all(np.isfinite(r))
    assert np.allclose(r @ r.T, np.eye(3), atol=1e-10)


def test_rotation_to_zero_vector_raises():
    with pytest.raises(ValueError, match="degenerate rotation target"):
        rotation_to((0.0, 0.0, 0.0))


def test_decompose_velocity_parts_sum():
    rng = np.random.default_rng(4)
    for _ in range(200):
        x = tuple(rng.standard_normal(3) * 5.0)
        if radial_distance(x) == 0.0:
            continue
        v = tuple(rng.standard_normal(3) * 3.0)
        radial, azimuthal, axial = decompose_velocity(x, v)
        assert np.allclose(np.array(radial) + azimuthal + axial, v, atol=1e-13)
        # radial part along the horizontal direction of x, azimuthal normal to it
        assert np.isclose(radial[0] * x[1] - radial[1] * x[0], 0.0, atol=1e-10)
        assert np.isclose(azimuthal[0] * x[0] + azimuthal[1] * x[1], 0.0, atol=1e-10)
        assert azimuthal[2] == 0.0 and radial[2] == 0.0


def test_decompose_velocity_on_axis_raises():
    with pytest.raises(ValueError, match="radial frame undefined on axis"):
        decompose_velocity((0.0, 0.0, 3.0), (1.0, 0.0, 0.0))

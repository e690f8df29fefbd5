"""Vector algebra for a medium rigidly rotating about the x3 axis.

Everything here works on plain float tuples rather than numpy arrays: these
functions sit inside the event loop and run millions of times per trajectory,
where small-array overhead dominates the actual arithmetic.
"""

from __future__ import annotations

import math
from typing import Tuple

Vec3 = Tuple[float, float, float]
Mat3 = Tuple[Vec3, Vec3, Vec3]

#: targets of rotation_to this close to -e1 use the fixed half-turn fallback
_ANTIPODAL_EPS = 1e-12
#: below this cross-product norm the target counts as already aligned with e1
_ALIGNED_EPS = 1e-14

_IDENTITY: Mat3 = ((1.0, 0.0, 0.0), (0.0, 1.0, 0.0), (0.0, 0.0, 1.0))
_HALF_TURN: Mat3 = ((-1.0, 0.0, 0.0), (0.0, -1.0, 0.0), (0.0, 0.0, 1.0))

__all__ = [
    "Vec3",
    "Mat3",
    "add",
    "sub",
    "scale",
    "dot",
    "cross",
    "norm",
    "matvec",
    "field_at",
    "rotate_point",
    "radial_distance",
    "rotation_to",
    "decompose_velocity",
]


def add(a: Vec3, b: Vec3) -> Vec3:
    return (a[0] + b[0], a[1] + b[1], a[2] + b[2])


def sub(a: Vec3, b: Vec3) -> Vec3:
    return (a[0] - b[0], a[1] - b[1], a[2] - b[2])


def scale(c: float, a: Vec3) -> Vec3:
    return (c * a[0], c * a[1], c * a[2])


def dot(a: Vec3, b: Vec3) -> float:
    return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]


def cross(a: Vec3, b: Vec3) -> Vec3:
    return (
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    )


def norm(a: Vec3) -> float:
    return math.sqrt(a[0] * a[0] + a[1] * a[1] + a[2] * a[2])


def matvec(m: Mat3, w: Vec3) -> Vec3:
    """Apply a row-major 3x3 matrix to a vector."""
    return (
        m[0][0] * w[0] + m[0][1] * w[1] + m[0][2] * w[2],
        m[1][0] * w[0] + m[1][1] * w[1] + m[1][2] * w[2],
        m[2][0] * w[0] + m[2][1] * w[1] + m[2][2] * w[2],
    )


def field_at(omega: float, y: Vec3) -> Vec3:
    """Velocity of the medium at point y: rigid rotation with rate omega."""
    return (-omega * y[1], omega * y[0], 0.0)


def rotate_point(omega: float, x: Vec3, t: float) -> Vec3:
    """Where the medium carries the point x after time t."""
    ang = omega * t
    c = math.cos(ang)
    s = math.sin(ang)
    return (c * x[0] - s * x[1], s * x[0] + c * x[1], x[2])


def radial_distance(x: Vec3) -> float:
    """Distance from the rotation axis."""
    return math.hypot(x[0], x[1])


def rotation_to(u: Vec3) -> Mat3:
    """Rotation matrix taking e1 = (1, 0, 0) onto the direction of u.

    Uses the minimal (geodesic) rotation, built from the Rodrigues formula
    with axis e1 x u. Two degenerate directions get canonical fallbacks:
    a target within _ALIGNED_EPS of e1 returns the identity, and a target
    within _ANTIPODAL_EPS of -e1 returns the half turn about the x3 axis.

    Raises ValueError on the zero vector.
    """
    n = norm(u)
    if n == 0.0:
        raise ValueError("degenerate rotation target")
    ux = u[0] / n
    uy = u[1] / n
    uz = u[2] / n
    if ux < -1.0 + _ANTIPODAL_EPS:
        return _HALF_TURN
    if math.hypot(uy, uz) < _ALIGNED_EPS:
        return _IDENTITY
    q = 1.0 / (1.0 + ux)
    return (
        (ux, -uy, -uz),
        (uy, 1.0 - uy * uy * q, -uy * uz * q),
        (uz, -uy * uz * q, 1.0 - uz * uz * q),
    )


def decompose_velocity(x: Vec3, v: Vec3) -> Tuple[Vec3, Vec3, Vec3]:
    """Split v at the point x into (radial, azimuthal, axial) parts.

    The radial direction is the horizontal unit vector from the axis through
    x, the axial part is the x3 component, and the azimuthal part is the
    remainder. Undefined on the rotation axis.
    """
    d = radial_distance(x)
    if d == 0.0:
        raise ValueError("radial frame undefined on axis")
    rx = x[0] / d
    ry = x[1] / d
    vr = v[0] * rx + v[1] * ry
    radial = (vr * rx, vr * ry, 0.0)
    axial = (0.0, 0.0, v[2])
    azimuthal = (v[0] - radial[0], v[1] - radial[1], 0.0)
    return radial, azimuthal, axial

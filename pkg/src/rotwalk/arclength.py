"""Collision clock: closed-form relative arc length and its monotone inverse.

During a flight the particle moves in a straight line while the medium keeps
rotating, so the speed of the particle relative to the medium at flight time
s is |a + s b| with a = v - F(x) and b = -F(v). The relative distance
covered by time t is

    D(t) = integral_0^t |a + s b| ds,

the integral of the square root of a quadratic. A collision fires when D
reaches the sampled path length, so flight times come from inverting D.

The closed form is used instead of quadrature because the event loop
evaluates D millions of times; the adaptive-quadrature oracle lives in the
test suite.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .geometry import Vec3, cross, dot, field_at, sub

#: |b| below this is treated as zero and D(t) degenerates to |a| t
_B_TINY = 1e-14
#: a and b count as collinear when the sine of their angle falls below this
_COLLINEAR_EPS = 1e-14
_MAX_ITER = 200

__all__ = [
    "ArcLengthProblem",
    "ClockInversionError",
    "DegenerateFlightError",
    "flight_problem",
    "arc_length",
    "arc_speed",
    "invert_arc_length",
]


class ClockInversionError(RuntimeError):
    """The bracketed Newton solve did not reach tolerance."""


class DegenerateFlightError(ValueError):
    """Relative motion identically zero, so no arc ever accumulates."""


@dataclass(frozen=True)
class ArcLengthProblem:
    """One flight's integrand |a + s b| and its quadratic coefficients."""

    a: Vec3
    b: Vec3
    alpha: float  # |b|^2
    beta: float  # 2 a.b
    gamma: float  # |a|^2

    @classmethod
    def from_vectors(cls, a: Vec3, b: Vec3) -> "ArcLengthProblem":
        return cls(a, b, dot(b, b), 2.0 * dot(a, b), dot(a, a))


def flight_problem(x: Vec3, v: Vec3, omega: float) -> ArcLengthProblem:
    """Arc-length problem for a straight flight from x with velocity v."""
    fv = field_at(omega, v)
    return ArcLengthProblem.from_vectors(
        sub(v, field_at(omega, x)), (-fv[0], -fv[1], -fv[2])
    )


def arc_speed(problem: ArcLengthProblem, s: float) -> float:
    """The integrand |a + s b|, which is also D'(s)."""
    a = problem.a
    b = problem.b
    w0 = a[0] + s * b[0]
    w1 = a[1] + s * b[1]
    w2 = a[2] + s * b[2]
    return math.sqrt(w0 * w0 + w1 * w1 + w2 * w2)


def arc_length(problem: ArcLengthProblem, t: float) -> float:
    """Relative distance D(t) covered by flight time t >= 0."""
    if t <= 0.0:
        return 0.0
    alpha = problem.alpha
    beta = problem.beta
    gamma = problem.gamma
    if alpha < _B_TINY * _B_TINY:
        return math.sqrt(gamma) * t
    # The discriminant 4 alpha gamma - beta^2 equals 4 |a x b|^2. The cross
    # product form is used because the direct expression loses all precision
    # to cancellation exactly when a and b are nearly collinear.
    d = cross(problem.a, problem.b)
    disc = 4.0 * dot(d, d)
    if disc <= 4.0 * (_COLLINEAR_EPS * _COLLINEAR_EPS) * alpha * gamma:
        # Collinear: the integrand is sqrt(alpha) |s - s0| with the root at
        # s0, integrated piecewise around the root.
        s0 = -beta / (2.0 * alpha)
        root = math.sqrt(alpha)
        if s0 <= 0.0:
            return root * t * (0.5 * t - s0)
        if t <= s0:
            return root * t * (s0 - 0.5 * t)
        return root * 0.5 * (s0 * s0 + (t - s0) * (t - s0))
    return _arc_general(alpha, beta, disc, t)


def _arc_general(alpha: float, beta: float, disc: float, t: float) -> float:
    """Evaluate D(t) from the antiderivative of sqrt(alpha s^2 + beta s + gamma).

    With u(s) = 2 alpha s + beta the antiderivative is

        ( g(u) + disc * asinh(u / sqrt(disc)) ) / (8 alpha^{3/2}),
        g(u) = u sqrt(u^2 + disc),

    and D(t) is its difference between u1 = u(t) and u0 = u(0). Evaluating
    the difference naively cancels catastrophically when 2 alpha t << |beta|
    (the endpoints nearly coincide far from the vertex), so both pieces are
    computed as algebraically exact difference forms.
    """
    # du is the exact endpoint gap; u1 = u0 + du would round it away
    # entirely whenever 2 alpha t is below an ulp of beta, so du feeds the
    # difference forms directly and u1 only ever enters through sums.
    du = 2.0 * alpha * t
    if du == 0.0:
        # underflow guard: the speed is constant at this scale
        return t * math.sqrt(disc + beta * beta) / (2.0 * math.sqrt(alpha))
    u0 = beta
    u1 = u0 + du
    sd = math.sqrt(disc)
    if u1 <= 0.0:
        # g and asinh are odd, so reflecting both endpoints keeps the
        # differences and lets the same-sign branch assume nonnegatives.
        u0, u1 = -u1, -u0
    if u0 < 0.0:
        # Vertex inside the flight: both differences are sums of positives.
        g = u1 * math.sqrt(u1 * u1 + disc) - u0 * math.sqrt(u0 * u0 + disc)
        s = math.asinh(u1 / sd) - math.asinh(u0 / sd)
    else:
        r1 = math.sqrt(u1 * u1 + disc)
        r0 = math.sqrt(u0 * u0 + disc)
        g = du * (u1 + u0) * (u1 * u1 + u0 * u0 + disc) / (u1 * r1 + u0 * r0)
        x1 = u1 / sd
        x0 = u0 / sd
        q1 = math.sqrt(1.0 + x1 * x1)
        q0 = math.sqrt(1.0 + x0 * x0)
        s = math.log1p((du / sd) * (1.0 + (x1 + x0) / (q1 + q0)) / (x0 + q0))
    return (g + disc * s) / (8.0 * alpha ** 1.5)


def invert_arc_length(problem: ArcLengthProblem, xi: float) -> float:
    """Flight time tau with arc_length(problem, tau) = xi.

    Bracketed Newton iteration. The linear speed bounds

        |a| s - |b| s^2 / 2  <=  D(s)  <=  |a| s + |b| s^2 / 2

    give a guaranteed starting bracket, Newton steps use D'(s) = |a + s b|,
    and any step leaving the bracket falls back to bisection.

    Raises DegenerateFlightError when both a and b vanish (the particle
    rides the medium forever) and ClockInversionError if the iteration cap
    is hit, which no reachable input is known to do.
    """
    if xi <= 0.0:
        raise ValueError("xi must be positive")
    na = math.sqrt(problem.gamma)
    nb = math.sqrt(problem.alpha)
    if nb < _B_TINY:
        if na < _B_TINY:
            raise DegenerateFlightError(
                "particle permanently comoving on axis; no collision ever"
            )
        return xi / na
    s = math.sqrt(na * na + 2.0 * nb * xi)
    lo = 2.0 * xi / (na + s)  # D(lo) <= xi
    hi = (na + s) / nb  # D(hi) >= xi
    tol = 1e-12 * (1.0 + xi)
    t = lo
    for _ in range(_MAX_ITER):
        f = arc_length(problem, t) - xi
        if abs(f) <= tol:
            return t
        if f > 0.0:
            hi = t
        else:
            lo = t
        slope = arc_speed(problem, t)
        if slope > 0.0:
            t_next = t - f / slope
            if lo < t_next < hi:
                t = t_next
                continue
        t = 0.5 * (lo + hi)
    raise ClockInversionError("clock inversion failed to converge")

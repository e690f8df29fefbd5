"""Estimators and checkers for the collision walk's asymptotic behavior.

Three kinds of things live here: streaming column storage for event data
(TrajectoryColumns), deterministic inequality checkers that audit event
streams (the check_* functions, reporting through BoundReport), and the
statistical estimators behind the growth claims (radial velocity profile,
power-law fit, growth rate, and the Cramér comparison variable's closed
forms with their Monte Carlo cross-check).

Every checker accepts either an iterable of CollisionEvent or an already
collected TrajectoryColumns; the math runs vectorized on columns either
way. Estimators are fold style: per-trajectory partials (TrajectoryColumns,
RadialBinStats) merge associatively, so ensembles can be processed in any
worker layout and reduced in index order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, NamedTuple, Optional, Tuple, Union

import numpy as np

from .arclength import arc_length, flight_problem
from .geometry import Vec3, add, field_at, norm, radial_distance, sub
from .sampling import NoiseLaw, RngState

__all__ = [
    "TrajectoryColumns",
    "BoundReport",
    "RadialBinStats",
    "PowerLawFit",
    "GrowthRate",
    "Lemma2Result",
    "Lemma3Result",
    "prop1_bound",
    "check_fluctuation_bound",
    "fluctuation_report",
    "check_lemma1",
    "check_corotating_displacement",
    "check_radial_increment",
    "check_error_recursion",
    "check_collision_norms",
    "check_lemma2_instance",
    "check_lemma3_instance",
    "geometric_edges",
    "radial_velocity_profile",
    "fit_power_law",
    "check_collision_time_bounds",
    "growth_rate",
    "alignment_median",
    "cramer_constants",
    "cramer_mean_Y",
    "cramer_mgf_Y",
    "sample_cramer_Y",
]

#: default burn-in radius: fits and medians ignore events with d_r below this
DEFAULT_BURN_IN_RADIUS = 100.0

_COLS = 14
(
    _T_AFTER,
    _TAU,
    _XI,
    _X1,
    _X2,
    _X3,
    _U1,
    _U2,
    _U3,
    _E_NORM,
    _DELTA_NORM,
    _ETA_NORM,
    _REL_BEFORE,
    _REL_AFTER,
) = range(_COLS)


class TrajectoryColumns:
    """Event sink that keeps per-event scalars as flat numpy columns.

    Holds everything the checkers and estimators consume (times, positions,
    medium velocities, error/noise/scattering norms, relative speeds before
    and after the collision) at a fraction of the memory of event objects.
    Use as the sink of run_trajectory, or let the checkers build one from
    any event iterable.
    """

    def __init__(self, capacity: int = 4096) -> None:
        self._data = np.empty((max(capacity, 16), _COLS))
        self.n = 0

    def __call__(self, ev) -> None:
        i = self.n
        data = self._data
        if i == data.shape[0]:
            self._data = data = np.concatenate([data, np.empty_like(data)])
        x = ev.x
        u = ev.u
        d = ev.delta
        g = ev.eta
        e = ev.e_after
        vb = ev.v_before
        va = ev.v_after
        w0 = u[0] + d[0]
        w1 = u[1] + d[1]
        w2 = u[2] + d[2]
        data[i] = (
            ev.t_after,
            ev.tau,
            ev.xi,
            x[0],
            x[1],
            x[2],
            u[0],
            u[1],
            u[2],
            math.sqrt(e[0] * e[0] + e[1] * e[1] + e[2] * e[2]),
            math.sqrt(d[0] * d[0] + d[1] * d[1] + d[2] * d[2]),
            math.sqrt(g[0] * g[0] + g[1] * g[1] + g[2] * g[2]),
            math.sqrt(
                (vb[0] - w0) ** 2 + (vb[1] - w1) ** 2 + (vb[2] - w2) ** 2
            ),
            math.sqrt(
                (va[0] - w0) ** 2 + (va[1] - w1) ** 2 + (va[2] - w2) ** 2
            ),
        )
        self.n = i + 1

    def __len__(self) -> int:
        return self.n

    def _col(self, j: int) -> np.ndarray:
        return self._data[: self.n, j]

    @property
    def t_after(self) -> np.ndarray:
        return self._col(_T_AFTER)

    @property
    def tau(self) -> np.ndarray:
        return self._col(_TAU)

    @property
    def xi(self) -> np.ndarray:
        return self._col(_XI)

    @property
    def x(self) -> np.ndarray:
        """Positions, shape (n, 3)."""
        return self._data[: self.n, _X1 : _X3 + 1]

    @property
    def u(self) -> np.ndarray:
        """Medium velocities at the collision points, shape (n, 3)."""
        return self._data[: self.n, _U1 : _U3 + 1]

    @property
    def dr(self) -> np.ndarray:
        """Radial distance of each collision point."""
        return np.hypot(self._col(_X1), self._col(_X2))

    @property
    def e_norm(self) -> np.ndarray:
        return self._col(_E_NORM)

    @property
    def delta_norm(self) -> np.ndarray:
        return self._col(_DELTA_NORM)

    @property
    def eta_norm(self) -> np.ndarray:
        return self._col(_ETA_NORM)

    @property
    def rel_before(self) -> np.ndarray:
        return self._col(_REL_BEFORE)

    @property
    def rel_after(self) -> np.ndarray:
        return self._col(_REL_AFTER)


def _as_columns(events) -> TrajectoryColumns:
    if isinstance(events, TrajectoryColumns):
        return events
    cols = TrajectoryColumns()
    for ev in events:
        cols(ev)
    return cols


def _recover_omega(cols: TrajectoryColumns) -> float:
    """Rotation rate implied by the stored medium velocities, |u| / d_r."""
    dr = cols.dr
    fu = np.hypot(cols._col(_U1), cols._col(_U2))
    idx = np.flatnonzero((dr > 0.0) & (fu > 0.0))
    if idx.size == 0:
        # Every event sits on the axis; any rate satisfies the checks.
        return 1.0
    i = int(idx[0])
    return float(fu[i] / dr[i])


@dataclass
class BoundReport:
    """Outcome of one inequality check over an event stream.

    observed and bound are aligned per comparison (per event pair, per
    collision index, or per threshold, as named by x). count is the number
    of comparisons behind each entry (an array when x is a threshold grid).
    """

    name: str
    x: np.ndarray
    observed: np.ndarray
    bound: np.ndarray
    violation_fraction: float
    max_violation: float
    count: Union[int, np.ndarray]
    half_width: Optional[np.ndarray] = None
    warnings: Tuple[str, ...] = ()
    passed: bool = True

    def summary(self) -> dict:
        """JSON-ready digest (arrays reduced to their extremes)."""
        out = {
            "check": self.name,
            "passed": bool(self.passed),
            "violation_fraction": float(self.violation_fraction),
            "max_violation": float(self.max_violation),
        }
        if isinstance(self.count, np.ndarray):
            out["count"] = [int(c) for c in self.count]
        else:
            out["count"] = int(self.count)
        if self.warnings:
            out["warnings"] = list(self.warnings)
        return out


def _empty_report(name: str, passed: bool = True) -> BoundReport:
    z = np.empty(0)
    return BoundReport(name, z, z, z, 0.0, 0.0, 0, passed=passed)


def prop1_bound(
    eta_bar: float,
    delta_bar: float,
    lam: float,
    omega: float,
    e0_norm: float,
    k,
):
    """Closed-form ceiling for the mean velocity-error norm after k collisions.

    The steady term (delta_bar lam + omega eta_bar) / (lam (1 - eta_bar))
    plus the geometrically decaying memory of the initial error. k may be an
    integer or an integer array.
    """
    if not eta_bar < 1.0:
        raise ValueError("no energy loss; bound diverges")
    steady = (delta_bar * lam + omega * eta_bar) / (lam * (1.0 - eta_bar))
    return steady + e0_norm * eta_bar ** k


def fluctuation_report(
    e_sum: np.ndarray,
    e_sumsq: np.ndarray,
    counts: np.ndarray,
    n_trajectories: int,
    config,
) -> BoundReport:
    """Assemble the fluctuation-bound report from per-k ensemble sums.

    Split out of check_fluctuation_bound so aggregate files (which store
    exactly these sums) can be audited without replaying events.
    """
    if n_trajectories == 0 or counts.size == 0:
        raise ValueError("empty ensemble")
    counts = counts.astype(float)
    mean = e_sum / counts
    var = np.maximum(e_sumsq / counts - mean * mean, 0.0)
    half = 3.0 * np.sqrt(var / counts)
    e0 = norm(sub(config.v0, field_at(config.omega, config.x0)))
    k = np.arange(1, mean.size + 1)
    bound = prop1_bound(
        config.eta_law.mean_norm,
        NoiseLaw(config.sigma).mean_norm,
        config.lam,
        config.omega,
        e0,
        k,
    )
    excess = mean - bound
    violations = excess > 0.0
    warnings = ("low ensemble count",) if n_trajectories < 100 else ()
    return BoundReport(
        name="prop1",
        x=k.astype(float),
        observed=mean,
        bound=bound,
        violation_fraction=float(violations.mean()),
        max_violation=float(excess.max()),
        count=counts.astype(np.int64),
        half_width=half,
        warnings=warnings,
        passed=not bool(violations.any()),
    )


def check_fluctuation_bound(trajectories: Iterable, config) -> BoundReport:
    """Ensemble mean of the velocity-error norm per collision index, audited
    against prop1_bound. trajectories is an iterable of event streams (or
    TrajectoryColumns); fewer than 100 of them flags a low-count warning.
    """
    e_sum = np.zeros(0)
    e_sumsq = np.zeros(0)
    counts = np.zeros(0, dtype=np.int64)
    n_traj = 0
    for traj in trajectories:
        en = _as_columns(traj).e_norm
        if en.size > e_sum.size:
            pad = en.size - e_sum.size
            e_sum = np.concatenate([e_sum, np.zeros(pad)])
            e_sumsq = np.concatenate([e_sumsq, np.zeros(pad)])
            counts = np.concatenate([counts, np.zeros(pad, dtype=np.int64)])
        e_sum[: en.size] += en
        e_sumsq[: en.size] += en * en
        counts[: en.size] += 1
        n_traj += 1
    return fluctuation_report(e_sum, e_sumsq, counts, n_traj, config)


def check_lemma1(events, omega: Optional[float] = None, tol: float = 1e-9) -> BoundReport:
    """Audit |F(X_k) - F(X_k+1)| <= omega xi_k+1 over consecutive events.

    The medium velocities stored on the events supply both sides; omega is
    recovered from them unless given. Streams with fewer than two events
    yield an empty passing report.
    """
    cols = _as_columns(events)
    n = len(cols)
    if n < 2:
        return _empty_report("lemma1")
    u = cols.u
    du = u[1:] - u[:-1]
    lhs = np.sqrt(np.einsum("ij,ij->i", du, du))
    w = _recover_omega(cols) if omega is None else omega
    rhs = w * cols.xi[1:]
    return _pairwise_report("lemma1", np.arange(2, n + 1, dtype=float), lhs, rhs, tol)


def _pairwise_report(
    name: str, x: np.ndarray, lhs: np.ndarray, rhs: np.ndarray, tol: float
) -> BoundReport:
    excess = lhs - rhs
    violations = excess > tol
    return BoundReport(
        name=name,
        x=x,
        observed=lhs,
        bound=rhs,
        violation_fraction=float(violations.mean()),
        max_violation=float(excess.max()),
        count=lhs.size,
        passed=not bool(violations.any()),
    )


def check_corotating_displacement(
    events, omega: Optional[float] = None, tol: float = 1e-9
) -> BoundReport:
    """Audit the rotation-compensated chord bound on consecutive events.

    Carrying the previous collision point with the medium for the flight
    time, the chord to the next collision point cannot exceed the relative
    path length: |P_rot(X_k, tau) - X_k+1| <= xi_k+1. Unlike the plain
    field-difference inequality this holds deterministically for exact
    flights at every radius, so it is the sharp audit of the integrator.
    """
    cols = _as_columns(events)
    n = len(cols)
    if n < 2:
        return _empty_report("corotating-displacement")
    w = _recover_omega(cols) if omega is None else omega
    x = cols.x
    ang = w * cols.tau[1:]
    c = np.cos(ang)
    s = np.sin(ang)
    rx = c * x[:-1, 0] - s * x[:-1, 1]
    ry = s * x[:-1, 0] + c * x[:-1, 1]
    chord = np.sqrt(
        (rx - x[1:, 0]) ** 2 + (ry - x[1:, 1]) ** 2 + (x[:-1, 2] - x[1:, 2]) ** 2
    )
    return _pairwise_report(
        "corotating-displacement",
        np.arange(2, n + 1, dtype=float),
        chord,
        cols.xi[1:],
        tol,
    )


def check_radial_increment(events, tol: float = 1e-9) -> BoundReport:
    """Audit |d_r(X_k+1) - d_r(X_k)| <= xi_k+1 on consecutive events.

    The radial projection of the corotating chord bound; holds
    deterministically for exact flights.
    """
    cols = _as_columns(events)
    n = len(cols)
    if n < 2:
        return _empty_report("radial-increment")
    dr = cols.dr
    return _pairwise_report(
        "radial-increment",
        np.arange(2, n + 1, dtype=float),
        np.abs(np.diff(dr)),
        cols.xi[1:],
        tol,
    )


def check_error_recursion(
    events,
    omega: Optional[float] = None,
    exact_field_term: bool = False,
    tol: float = 1e-9,
) -> BoundReport:
    """Audit the one-step recursion on the velocity-error norm.

    Each collision satisfies |E_k+1| <= (|E_k| + m + |delta|) |eta| + |delta|
    where m bounds the medium-velocity change across the flight. With
    exact_field_term the measured |F(X_k) - F(X_k+1)| is used for m (a
    triangle-inequality consequence of the collision law, deterministic);
    otherwise m is the path-length surrogate omega xi.
    """
    cols = _as_columns(events)
    n = len(cols)
    if n < 2:
        return _empty_report("error-recursion")
    if exact_field_term:
        u = cols.u
        du = u[1:] - u[:-1]
        m = np.sqrt(np.einsum("ij,ij->i", du, du))
    else:
        w = _recover_omega(cols) if omega is None else omega
        m = w * cols.xi[1:]
    en = cols.e_norm
    bound = (en[:-1] + m + cols.delta_norm[1:]) * cols.eta_norm[1:] + cols.delta_norm[1:]
    name = "error-recursion-exact" if exact_field_term else "error-recursion"
    return _pairwise_report(name, np.arange(2, n + 1, dtype=float), en[1:], bound, tol)


def check_collision_norms(events, tol: float = 1e-12) -> BoundReport:
    """Audit |v_after - w| = |v_before - w| |eta| (relative tolerance tol)
    on every event. This is the norm-preservation identity of the collision
    rotation and should hold to solver precision on any run.
    """
    cols = _as_columns(events)
    n = len(cols)
    if n == 0:
        return _empty_report("collision-norms")
    expected = cols.rel_before * cols.eta_norm
    err = np.abs(cols.rel_after - expected) / (1.0 + expected)
    violations = err > tol
    return BoundReport(
        name="collision-norms",
        x=np.arange(1, n + 1, dtype=float),
        observed=cols.rel_after,
        bound=expected,
        violation_fraction=float(violations.mean()),
        max_violation=float(err.max()),
        count=n,
        passed=not bool(violations.any()),
    )


class Lemma2Result(NamedTuple):
    arc: float
    radial_gain: float
    passes: bool


def check_lemma2_instance(x: Vec3, e: Vec3, C: float, omega: float) -> Lemma2Result:
    """One instance of the short-flight gain inequality pair.

    A particle at x with velocity F(x) + e flies for t* = C / sqrt(d_r(x)).
    passes iff the relative arc D(t*) stays at most omega^2 C^2 and the
    radial distance grows by at least omega^2 C^2 / 6. Both hold for every
    |e| up to a fixed budget once d_r(x) is large enough.
    """
    z = radial_distance(x)
    if z == 0.0:
        raise ValueError("radial frame undefined on axis")
    v = add(field_at(omega, x), e)
    t_star = C / math.sqrt(z)
    arc = arc_length(flight_problem(x, v, omega), t_star)
    landing = (x[0] + t_star * v[0], x[1] + t_star * v[1], x[2] + t_star * v[2])
    gain = radial_distance(landing) - z
    ceiling = omega * omega * C * C
    return Lemma2Result(arc, gain, arc <= ceiling and gain >= ceiling / 6.0)


class Lemma3Result(NamedTuple):
    arc: float
    passes: bool


def check_lemma3_instance(x: Vec3, e: Vec3, xi: float, omega: float) -> Lemma3Result:
    """One instance of the long-flight coverage inequality.

    A particle at x with velocity F(x) + e flies for
    t* = 2 max(2, xi) / (omega sqrt(d_r(x))); passes iff the relative arc
    D(t*) reaches xi, i.e. the collision at path length xi happens within
    t*. Holds for every |e| up to a fixed budget once d_r(x) is large
    enough.
    """
    z = radial_distance(x)
    if z == 0.0:
        raise ValueError("radial frame undefined on axis")
    v = add(field_at(omega, x), e)
    t_star = 2.0 * max(2.0, xi) / (omega * math.sqrt(z))
    arc = arc_length(flight_problem(x, v, omega), t_star)
    return Lemma3Result(arc, arc >= xi)


def geometric_edges(lo: float, hi: float, n_bins: int) -> np.ndarray:
    """n_bins geometrically spaced bins covering [lo, hi)."""
    if not (0.0 < lo < hi):
        raise ValueError("bin edges must be strictly increasing")
    return np.geomspace(lo, hi, n_bins + 1)


class RadialBinStats:
    """Radial drift rate binned by start radius, as mergeable sums.

    For each consecutive event pair the sample is
    (d_r(X_k+1) - d_r(X_k)) / tau_k+1 at start radius d_r(X_k); bins are
    half open [edge_i, edge_i+1) and samples outside the edges are dropped.
    Stores count, rate sum, rate sum of squares, and flight-time sum per
    bin, so partial statistics merge associatively across trajectories.
    """

    def __init__(self, edges) -> None:
        edges = np.asarray(edges, dtype=float)
        if edges.ndim != 1 or edges.size < 2 or not np.all(np.diff(edges) > 0.0):
            raise ValueError("bin edges must be strictly increasing")
        self.edges = edges
        n_bins = edges.size - 1
        self.count = np.zeros(n_bins, dtype=np.int64)
        self.rate_sum = np.zeros(n_bins)
        self.rate_sumsq = np.zeros(n_bins)
        self.tau_sum = np.zeros(n_bins)

    def add(self, start_radius, rate, tau) -> None:
        start_radius = np.asarray(start_radius, dtype=float)
        rate = np.asarray(rate, dtype=float)
        tau = np.asarray(tau, dtype=float)
        idx = np.searchsorted(self.edges, start_radius, side="right") - 1
        ok = (idx >= 0) & (idx < self.count.size) & (start_radius < self.edges[-1])
        idx = idx[ok]
        n_bins = self.count.size
        self.count += np.bincount(idx, minlength=n_bins)
        self.rate_sum += np.bincount(idx, weights=rate[ok], minlength=n_bins)
        self.rate_sumsq += np.bincount(idx, weights=rate[ok] ** 2, minlength=n_bins)
        self.tau_sum += np.bincount(idx, weights=tau[ok], minlength=n_bins)

    def merge(self, other: "RadialBinStats") -> "RadialBinStats":
        if not np.array_equal(self.edges, other.edges):
            raise ValueError("bin edges must match to merge")
        self.count += other.count
        self.rate_sum += other.rate_sum
        self.rate_sumsq += other.rate_sumsq
        self.tau_sum += other.tau_sum
        return self

    @property
    def centers(self) -> np.ndarray:
        """Geometric bin centers."""
        return np.sqrt(self.edges[:-1] * self.edges[1:])

    @property
    def mean_rate(self) -> np.ndarray:
        """Per-bin mean drift rate; NaN for empty bins."""
        with np.errstate(invalid="ignore", divide="ignore"):
            return np.where(self.count > 0, self.rate_sum / self.count, np.nan)

    @property
    def var_rate(self) -> np.ndarray:
        """Per-bin population variance of the drift rate; NaN for empty bins."""
        with np.errstate(invalid="ignore", divide="ignore"):
            m = self.rate_sum / self.count
            v = self.rate_sumsq / self.count - m * m
            return np.where(self.count > 0, np.maximum(v, 0.0), np.nan)

    @property
    def mean_tau(self) -> np.ndarray:
        """Per-bin mean flight time; NaN for empty bins."""
        with np.errstate(invalid="ignore", divide="ignore"):
            return np.where(self.count > 0, self.tau_sum / self.count, np.nan)

    def to_dict(self) -> dict:
        return {
            "edges": [float(v) for v in self.edges],
            "count": [int(v) for v in self.count],
            "rate_sum": [float(v) for v in self.rate_sum],
            "rate_sumsq": [float(v) for v in self.rate_sumsq],
            "tau_sum": [float(v) for v in self.tau_sum],
        }

    @classmethod
    def from_dict(cls, raw: dict) -> "RadialBinStats":
        stats = cls(np.asarray(raw["edges"], dtype=float))
        stats.count = np.asarray(raw["count"], dtype=np.int64)
        stats.rate_sum = np.asarray(raw["rate_sum"], dtype=float)
        stats.rate_sumsq = np.asarray(raw["rate_sumsq"], dtype=float)
        stats.tau_sum = np.asarray(raw["tau_sum"], dtype=float)
        return stats


def radial_velocity_profile(events, bins) -> RadialBinStats:
    """Bin the per-flight radial drift rate by the flight's start radius."""
    stats = RadialBinStats(bins)
    cols = _as_columns(events)
    if len(cols) >= 2:
        dr = cols.dr
        tau = cols.tau[1:]
        stats.add(dr[:-1], np.diff(dr) / tau, tau)
    return stats


class PowerLawFit(NamedTuple):
    exponent: float
    amplitude: float
    stderr: float


def fit_power_law(stats: RadialBinStats) -> PowerLawFit:
    """Count-weighted log-log least squares over the populated bins.

    Needs at least 5 populated bins with positive mean rate whose edges
    span at least two decades. stderr is the weighted residual standard
    error of the exponent.
    """
    mean = stats.mean_rate
    use = (stats.count > 0) & np.isfinite(mean) & (mean > 0.0)
    if use.sum() < 5:
        raise ValueError("insufficient bins/decades")
    lo = stats.edges[:-1][use].min()
    hi = stats.edges[1:][use].max()
    if hi / lo < 99.99:
        raise ValueError("insufficient bins/decades")
    x = np.log(stats.centers[use])
    y = np.log(mean[use])
    w = stats.count[use].astype(float)
    sw = w.sum()
    xbar = (w * x).sum() / sw
    ybar = (w * y).sum() / sw
    dx = x - xbar
    sxx = (w * dx * dx).sum()
    slope = (w * dx * (y - ybar)).sum() / sxx
    intercept = ybar - slope * xbar
    resid = y - slope * x - intercept
    dof = int(use.sum()) - 2
    if dof > 0:
        stderr = math.sqrt(float((w * resid * resid).sum()) / dof / float(sxx))
    else:
        stderr = 0.0
    return PowerLawFit(float(slope), float(math.exp(intercept)), stderr)


def check_collision_time_bounds(
    events, radius_threshold, omega: Optional[float] = None
) -> BoundReport:
    """Fraction of flights leaving the open bracket
    (sqrt(xi / (omega^2 d_r)), 2 max(xi, 2) / (omega sqrt(d_r))) on their
    flight time, among flights starting at radius above the threshold.
    radius_threshold may be a scalar or a grid; the report carries one
    fraction and count per threshold. passed means no violations at all.
    """
    thresholds = np.atleast_1d(np.asarray(radius_threshold, dtype=float))
    cols = _as_columns(events)
    n = len(cols)
    if n < 2:
        zero = np.zeros(thresholds.size)
        return BoundReport(
            name="timebounds",
            x=thresholds,
            observed=zero,
            bound=np.zeros(thresholds.size),
            violation_fraction=0.0,
            max_violation=0.0,
            count=np.zeros(thresholds.size, dtype=np.int64),
            passed=True,
        )
    w = _recover_omega(cols) if omega is None else omega
    start = cols.dr[:-1]
    tau = cols.tau[1:]
    xi = cols.xi[1:]
    with np.errstate(divide="ignore"):
        lower = np.sqrt(xi / (w * w * start))
        upper = 2.0 * np.maximum(xi, 2.0) / (w * np.sqrt(start))
    outside = (tau <= lower) | (tau >= upper)
    fractions = np.zeros(thresholds.size)
    counts = np.zeros(thresholds.size, dtype=np.int64)
    for i, thr in enumerate(thresholds):
        m = start > thr
        counts[i] = int(m.sum())
        if counts[i]:
            fractions[i] = float(outside[m].mean())
    return BoundReport(
        name="timebounds",
        x=thresholds,
        observed=fractions,
        bound=np.zeros(thresholds.size),
        violation_fraction=float(fractions[-1]),
        max_violation=float(fractions.max()),
        count=counts,
        passed=not bool(fractions.any()),
    )


class GrowthRate(NamedTuple):
    beta_hat: float
    alpha_hat: float


def growth_rate(events) -> GrowthRate:
    """Envelope of d_r(X_n) / n over the last half of a long run.

    beta_hat is the minimum (a finite-run stand-in for the liminf slope of
    linear radial growth), alpha_hat the maximum. Requires at least 10^4
    events so the envelope sits past the transient.
    """
    cols = _as_columns(events)
    n = len(cols)
    if n < 10_000:
        raise ValueError("growth_rate needs at least 10000 events")
    ratio = cols.dr / np.arange(1, n + 1, dtype=float)
    tail = ratio[n // 2 :]
    return GrowthRate(float(tail.min()), float(tail.max()))


def alignment_median(events, burn_in_radius: float = DEFAULT_BURN_IN_RADIUS) -> float:
    """Median of |E_k| / |F(X_k)| over the final decade of event indices
    (k >= n/10), past the burn-in radius."""
    cols = _as_columns(events)
    n = len(cols)
    if n == 0:
        raise ValueError("no events beyond burn-in radius")
    start = n // 10
    e = cols.e_norm[start:]
    u = cols.u[start:]
    fu = np.sqrt(np.einsum("ij,ij->i", u, u))
    ok = (cols.dr[start:] > burn_in_radius) & (fu > 0.0)
    if not ok.any():
        raise ValueError("no events beyond burn-in radius")
    return float(np.median(e[ok] / fu[ok]))


def cramer_constants(lam: float, omega: float) -> Tuple[float, float]:
    """Reference parameters of the comparison variable: the arc budget C
    with lam omega^2 C^2 = 1/7 and the matched bad-event probability
    p = (7 - 6 e^(1/7)) / 14 evaluated at that coupling."""
    C = math.sqrt(1.0 / (7.0 * lam * omega * omega))
    p = (7.0 - 6.0 * math.exp(1.0 / 7.0)) / 14.0
    return C, p


def cramer_mean_Y(p: float, C: float, lam: float, omega: float) -> float:
    """Closed-form mean of the comparison variable Y.

    Y takes the value omega^2 C^2 / 6 when the flight's path length exceeds
    omega^2 C^2 and an independent bad event (probability p) does not fire,
    and -xi otherwise.
    """
    K = lam * omega * omega * C * C
    return (-6.0 + math.exp(-K) * (1.0 - p) * (6.0 + 7.0 * K)) / (6.0 * lam)


def cramer_mgf_Y(theta: float, p: float, C: float, lam: float, omega: float) -> float:
    """Moment generating function of the comparison variable at theta > -lam.

    theta = 0 returns exactly 1 (the normalization holds algebraically, so
    it is returned without routing through the exponentials).
    """
    if theta <= -lam:
        raise ValueError("theta must be greater than -lambda")
    if theta == 0.0:
        return 1.0
    K = omega * omega * C * C
    s = lam / (theta + lam)
    good = (1.0 - p) * math.exp(K * (theta / 6.0 - lam))
    tail = (1.0 - p) * math.exp(-K * (theta + lam))
    return good + s * (1.0 - tail)


def sample_cramer_Y(
    rng: RngState, p: float, C: float, lam: float, omega: float, n: int
) -> np.ndarray:
    """n Monte Carlo draws of the comparison variable (the oracle for the
    closed forms): xi ~ Exp(lam), an independent Bernoulli(p) bad event, and
    Y = omega^2 C^2 / 6 on (xi > omega^2 C^2, no bad event), else -xi."""
    xi = rng.exponential(scale=1.0 / lam, size=n)
    bad = rng.random(n) < p
    K = omega * omega * C * C
    return np.where((xi > K) & ~bad, K / 6.0, -xi)

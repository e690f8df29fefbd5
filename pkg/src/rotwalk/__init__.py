"""Event-driven random walk in a rotating medium.

A particle flies ballistically between collisions; the collision clock
ticks on the arc length of the particle's motion relative to the local
medium velocity, and each collision re-emits the velocity around the
drifted medium velocity with a contracting scatter. This package holds the
exact event-driven simulator, checkers and estimators for the walk's
growth behavior, a Langevin comparator, and a command line front end.
"""

__version__ = "0.1.0"

from .arclength import (
    ArcLengthProblem,
    ClockInversionError,
    DegenerateFlightError,
    arc_length,
    arc_speed,
    flight_problem,
    invert_arc_length,
)
from .dynamics import (
    CollisionEvent,
    ParticleState,
    RunSummary,
    SimConfig,
    SimulationError,
    StopRule,
    next_event,
    position_at,
    resolve_collision,
    run_trajectory,
)
from .geometry import (
    decompose_velocity,
    field_at,
    radial_distance,
    rotate_point,
    rotation_to,
)
from .sampling import (
    EtaLaw,
    NoiseLaw,
    PathLengthLaw,
    derive_stream,
    sample_delta,
    sample_eta,
    sample_xi,
)
from .analysis import (
    BoundReport,
    GrowthRate,
    PowerLawFit,
    RadialBinStats,
    TrajectoryColumns,
    alignment_median,
    check_collision_time_bounds,
    check_fluctuation_bound,
    check_lemma1,
    check_lemma2_instance,
    check_lemma3_instance,
    cramer_constants,
    cramer_mean_Y,
    cramer_mgf_Y,
    fit_power_law,
    geometric_edges,
    growth_rate,
    prop1_bound,
    radial_velocity_profile,
    sample_cramer_Y,
)
from .langevin import (
    GrowthComparison,
    GrowthLawFit,
    LangevinConfig,
    compare_growth,
    growth_law_fit,
    integrate,
)
from .events_io import EventWriter, read_events, read_header

__all__ = [
    "__version__",
    "ArcLengthProblem",
    "ClockInversionError",
    "DegenerateFlightError",
    "arc_length",
    "arc_speed",
    "flight_problem",
    "invert_arc_length",
    "CollisionEvent",
    "ParticleState",
    "RunSummary",
    "SimConfig",
    "SimulationError",
    "StopRule",
    "next_event",
    "position_at",
    "resolve_collision",
    "run_trajectory",
    "decompose_velocity",
    "field_at",
    "radial_distance",
    "rotate_point",
    "rotation_to",
    "EtaLaw",
    "NoiseLaw",
    "PathLengthLaw",
    "derive_stream",
    "sample_delta",
    "sample_eta",
    "sample_xi",
    "BoundReport",
    "GrowthRate",
    "PowerLawFit",
    "RadialBinStats",
    "TrajectoryColumns",
    "alignment_median",
    "check_collision_time_bounds",
    "check_fluctuation_bound",
    "check_lemma1",
    "check_lemma2_instance",
    "check_lemma3_instance",
    "cramer_constants",
    "cramer_mean_Y",
    "cramer_mgf_Y",
    "fit_power_law",
    "geometric_edges",
    "growth_rate",
    "prop1_bound",
    "radial_velocity_profile",
    "sample_cramer_Y",
    "GrowthComparison",
    "GrowthLawFit",
    "LangevinConfig",
    "compare_growth",
    "growth_law_fit",
    "integrate",
    "EventWriter",
    "read_events",
    "read_header",
]

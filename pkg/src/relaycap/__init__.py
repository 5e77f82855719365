"""Capacity regions, bit-level relaying schedules and constant-gap power
allocations for multi-pair bidirectional relay networks."""

from .cutset import (
    Cut,
    CutViolation,
    Membership,
    RegionSizeError,
    det_cut_bound,
    directed_rate_caps,
    enumerate_cuts,
    enumerate_integral_region,
    in_det_cutset,
)
from .detnet import (
    FULL_DUPLEX,
    DetNetwork,
    DuplexMode,
    FullDuplex,
    HalfDuplex,
    InvalidGainError,
    LevelVector,
    ShapeError,
    node_downlink_receive,
    relay_uplink_receive,
    shifted_contribution,
)
from .gaussian import (
    AchievabilityReport,
    AllocationInvalidError,
    DownlinkAllocation,
    GapReport,
    GaussNetwork,
    InfeasibleRatesError,
    LowPowerError,
    NormalizedProblem,
    SweepConfig,
    UplinkAllocation,
    awgn_capacity,
    restricted_bound_gaps,
    classify_case,
    downlink_allocate,
    downlink_rate_check,
    gauss_cutset,
    gauss_restricted_cutset,
    lattice_rate_cap,
    monte_carlo_gap,
    reduce_orderings,
    uplink_allocate,
    uplink_rate_check,
    verify_constant_gap,
)
from .scheduler import (
    InductionInvariantError,
    LevelAssignment,
    NotInRegionError,
    Schedule,
    ScheduleInvalidError,
    SimulationResult,
    chunk_schedule,
    divide_and_conquer,
    expand_time,
    random_messages,
    reduce_pair_bidirectional,
    reduce_pair_oneway,
    schedule_fractional,
    schedule_half_duplex,
    simulate_schedule,
    validate_schedule,
)

__all__ = [name for name in dir() if not name.startswith("_")]

"""Invariant tori of the forced switched oscillator x'' + sign(x) = p(t)."""

from ._nstori import (
    Branch,
    CertificationReport,
    Containment,
    ConfigError,
    DegenerateCrossing,
    DegenerateStart,
    NonZeroAverage,
    NstoriError,
    PeriodicForcing,
    State,
    Trajectory,
    TorusSpec,
    boundary_y,
    build_mesh,
    certify,
    chart_x,
    closure_check,
    contains,
    evolve,
    find_min_certified_n,
    flow_minus,
    flow_plus,
    linf_certificate,
    next_crossing,
    quad_primitives,
    rk_evolve,
    scan_conditions,
    time_T_map,
    verify_invariance,
)

__all__ = [name for name in dir() if not name.startswith("_")]

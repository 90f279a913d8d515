"""Thread pools and their execution."""

from .pool import Engine, Event, IllegalStep, Pool, Step, TypedModeError, audit_resources, canonical_key, enabled_steps
from .run import (
    DEFAULT_EXPLORE_BUDGET,
    DEFAULT_MAX_STEPS,
    AuditFailure,
    ExploreResult,
    Outcome,
    PoolTypeError,
    channel_events,
    explore,
    run,
    trace_record,
)

__all__ = [
    "AuditFailure",
    "DEFAULT_EXPLORE_BUDGET",
    "DEFAULT_MAX_STEPS",
    "Engine",
    "Event",
    "ExploreResult",
    "IllegalStep",
    "Outcome",
    "Pool",
    "PoolTypeError",
    "Step",
    "TypedModeError",
    "audit_resources",
    "canonical_key",
    "channel_events",
    "enabled_steps",
    "explore",
    "run",
    "trace_record",
]

"""Simulator and analysis toolkit for a topic-based recommend-and-endorse model of link formation."""

__version__ = "0.1.0"

from .analysis import (
    DegreeHistogram,
    PowerLawFit,
    efficiency,
    fit_both,
    fit_power_law,
    improvement_captured,
    indegree_histogram,
    max_total_utility,
)
from .engine import (
    IterationRecord,
    Trajectory,
    WwwState,
    endorse,
    initial_scores,
    recommend,
    run,
    simulate,
    step,
)
from .experiments import (
    PRESETS,
    SweepConfig,
    SweepResult,
    preset,
    run_one,
    run_sweep,
    trend_tests,
)
from .model import (
    InitDist,
    ModelParams,
    TopicWorld,
    build_world,
    generate_world,
    rng_streams,
    utility_of,
    validate_params,
)


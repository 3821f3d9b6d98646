"""Seedable simulator of mutual-assistance communities on a toroidal grid.

Cells on an n x n torus are clients asking for help, providers offering it,
or neutral bystanders. Providers offer to the neediest free neighbor,
clients accept the fastest offering provider, confirmed pairs work the
request off step by step, and an optional second contact ring widens the
reach. Static runs measure how much of a fixed population gets served;
dynamic runs mutate random cells each step and measure the steady state.
"""

from .config import ExperimentSpec, parse_config, to_config_text
from .driver import (
    DynamicResult,
    Mode,
    MutationConfig,
    RunConfig,
    StaticResult,
    StepReport,
    derive_run_seed,
    make_rng,
    mutate,
    quiescent,
    run_dynamic,
    run_static,
    step,
)
from .errors import ConfigError, ConsistencyError
from .experiments import (
    ResultRow,
    emit_csv,
    figure_preset,
    run_experiment,
    samples_csv,
    snapshot_csv,
)
from .grid import (
    Cell,
    Community,
    Coord,
    InitRates,
    ReusePolicy,
    Ring,
    Role,
    UniformIntValues,
    init_grid,
    neighbors,
)
from .matching import (
    MatchPolicy,
    Offer,
    match_round,
    select_client_for_provider,
    select_provider_for_client,
)
from .metrics import MetricsSample, MetricSummary, aggregate, measure
from .service import ServicePair, finish_service, service_tick

__version__ = "0.1.0"

__all__ = [
    "Cell",
    "Community",
    "ConfigError",
    "ConsistencyError",
    "Coord",
    "DynamicResult",
    "ExperimentSpec",
    "InitRates",
    "MatchPolicy",
    "MetricSummary",
    "MetricsSample",
    "Mode",
    "MutationConfig",
    "Offer",
    "ResultRow",
    "ReusePolicy",
    "Ring",
    "Role",
    "RunConfig",
    "ServicePair",
    "StaticResult",
    "StepReport",
    "UniformIntValues",
    "aggregate",
    "derive_run_seed",
    "emit_csv",
    "figure_preset",
    "finish_service",
    "init_grid",
    "make_rng",
    "match_round",
    "measure",
    "mutate",
    "neighbors",
    "parse_config",
    "quiescent",
    "run_dynamic",
    "run_experiment",
    "run_static",
    "samples_csv",
    "select_client_for_provider",
    "select_provider_for_client",
    "service_tick",
    "snapshot_csv",
    "step",
    "to_config_text",
]

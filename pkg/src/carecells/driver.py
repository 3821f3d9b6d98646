"""Step loop, static and dynamic run regimes, and the mutation process.

Every step executes, in this fixed order:

  (a) mutation (dynamic mode only),
  (b) one matching round,
  (c) a service tick on every active pair,
  (d) completion for every pair whose request reached zero.

Mutation runs first so a freshly created client can be matched within the
same step, and a pair confirmed in (b) receives its first tick in (c), so a
one-tick service finishes in the step that formed it.

Randomness comes from one Philox counter-based generator per run. Replicate
and sweep-point streams derive from a master seed with
``numpy.random.SeedSequence(master_seed, spawn_key=(point_index,
replicate_index))``; the first uint64 of its generated state is the run seed
fed to the Philox key. Identical seeds therefore reproduce identical runs.
"""

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .errors import ConfigError
from .grid import (
    Community,
    Coord,
    InitRates,
    ReusePolicy,
    Role,
    UniformIntValues,
    init_grid,
)
from .matching import MatchPolicy, match_round, would_match
from .metrics import MetricsSample, measure
from .service import ServicePair, finish_service, service_tick


class Mode(Enum):
    STATIC = "static"
    DYNAMIC = "dynamic"


@dataclass(frozen=True)
class MutationConfig:
    """Per-step role churn. Exactly one of ``count`` / ``fraction`` is set.

    Each step, that many free cells (round(fraction * n^2) for the fraction
    rule) are drawn uniformly without replacement and re-rolled: the target
    role comes from (p_client, p_provider, p_neutral), and re-drawing the
    current role still counts as a mutation. New clients and providers get
    fresh values; the assignment always resets req/pro.
    """

    count: int | None = None
    fraction: float | None = None
    p_client: float = 0.25
    p_provider: float = 0.25
    p_neutral: float = 0.50

    def validate(self) -> None:
        if (self.count is None) == (self.fraction is None):
            raise ConfigError("mutation needs exactly one of count or fraction")
        if self.count is not None and self.count < 0:
            raise ConfigError("mutation count must be >= 0")
        if self.fraction is not None and not 0.0 <= self.fraction <= 1.0:
            raise ConfigError("mutation fraction must be in [0, 1]")
        probs = (self.p_client, self.p_provider, self.p_neutral)
        if any(p < 0 for p in probs):
            raise ConfigError("mutation probabilities must be >= 0")
        if abs(sum(probs) - 1.0) > 1e-9:
            raise ConfigError(
                f"mutation probabilities sum to {sum(probs):.6f}, expected 1"
            )

    def cells_per_step(self, n_cells: int) -> int:
        if self.count is not None:
            return self.count
        return round(self.fraction * n_cells)


@dataclass(frozen=True)
class RunConfig:
    """Everything one run needs; a fixed config and seed pin the run exactly."""

    n: int = 30
    rates: InitRates = field(default_factory=lambda: InitRates(0.3, 0.3))
    values: UniformIntValues = field(default_factory=UniformIntValues)
    match: MatchPolicy = field(default_factory=MatchPolicy)
    reuse: ReusePolicy = ReusePolicy.REUSABLE
    mode: Mode = Mode.STATIC
    mutation: MutationConfig | None = None
    warmup_steps: int = 5000
    sample_interval: int = 50
    sample_count: int = 100
    max_steps: int = 100_000
    seed: int = 0

    def validate(self) -> None:
        if self.n < 2:
            raise ConfigError(f"grid size must be >= 2, got {self.n}")
        self.rates.validate()
        self.values.validate()
        self.match.validate()
        if self.mutation is not None:
            self.mutation.validate()
        if self.max_steps < 1:
            raise ConfigError("max_steps must be positive")
        if self.mode is Mode.DYNAMIC:
            for name in ("warmup_steps", "sample_interval", "sample_count"):
                if getattr(self, name) < 1:
                    raise ConfigError(f"{name} must be positive in dynamic mode")

    def effective_mutation(self) -> MutationConfig:
        # Dynamic runs default to one mutated cell per step.
        return self.mutation if self.mutation is not None else MutationConfig(count=1)


@dataclass(frozen=True)
class StepReport:
    """What one step did."""

    pairs_formed: list[ServicePair]
    services_finished: list[ServicePair]
    cells_mutated: list[tuple[Coord, Role, Role]]


@dataclass(frozen=True)
class StaticResult:
    immediate_satisfaction: float
    eventual_satisfaction: float
    steps_to_quiescence: int
    quiescent: bool


@dataclass(frozen=True)
class DynamicResult:
    mean_req_rate_all: float
    mean_req_rate_waiting: float
    samples: list[MetricsSample]


def make_rng(seed: int) -> np.random.Generator:
    """The package-wide random stream: Philox keyed by a 64-bit seed."""
    return np.random.Generator(np.random.Philox(key=seed))


def derive_run_seed(master_seed: int, point_index: int, replicate_index: int) -> int:
    """Documented splitting rule for sweep points and replicates."""
    seq = np.random.SeedSequence(
        master_seed, spawn_key=(point_index, replicate_index)
    )
    return int(seq.generate_state(1, np.uint64)[0])


def mutate(
    community: Community, mc: MutationConfig, rng: np.random.Generator
) -> list[tuple[Coord, Role, Role]]:
    """Re-roll the role of randomly chosen free cells.

    Cells in service are never touched, so active pairs cannot be orphaned.
    If fewer free cells exist than the configured amount, all free cells
    mutate. Draw order: the cell choice first, then per cell (in drawn
    order) one uniform for the role and, for clients/providers, one value.
    """
    free = np.flatnonzero(~community.busy)
    m = min(mc.cells_per_step(community.n * community.n), free.size)
    if m == 0:
        return []
    chosen = rng.choice(free, size=m, replace=False)
    events = []
    for i in chosen:
        old = Role(int(community.role[i]))
        u = rng.random()
        if u < mc.p_client:
            new = Role.CLIENT
            community.req_tenths[i] = int(community.values.sample(rng)) * 10
            community.pro[i] = 0
        elif u < mc.p_client + mc.p_provider:
            new = Role.PROVIDER
            community.req_tenths[i] = 0
            community.pro[i] = int(community.values.sample(rng))
        else:
            new = Role.NEUTRAL
            community.req_tenths[i] = 0
            community.pro[i] = 0
        community.role[i] = new
        events.append((community.coord(i), old, new))
    return events


def step(
    community: Community, config: RunConfig, rng: np.random.Generator
) -> StepReport:
    """Advance the community by one step in the fixed (a)-(d) order."""
    mutated = []
    if config.mode is Mode.DYNAMIC:
        mutated = mutate(community, config.effective_mutation(), rng)
    formed = match_round(community, config.match)
    finished = []
    for pair in list(community.pairs):
        if service_tick(pair, community) == 0.0:
            finished.append(pair)
    for pair in finished:
        finish_service(pair, community, config.reuse)
    return StepReport(
        pairs_formed=formed, services_finished=finished, cells_mutated=mutated
    )


def quiescent(community: Community, policy: MatchPolicy) -> bool:
    """True iff nothing is in service and a matching round would be empty."""
    if community.pairs:
        return False
    return not would_match(community, policy)


def run_static(config: RunConfig) -> StaticResult:
    """Serve a fixed population until no further help can flow.

    Tracks the cells that start as clients. Immediate satisfaction is the
    share of them matched in the first step's round; eventual satisfaction
    is the share whose service completed by quiescence (both 1.0 when no
    cell starts as a client). Hitting max_steps reports non-quiescence.
    """
    config.validate()
    if config.mode is not Mode.STATIC:
        raise ConfigError("run_static requires mode=static")
    rng = make_rng(config.seed)
    com = init_grid(config.n, config.rates, config.values, rng)
    initial_clients = int((com.role == Role.CLIENT).sum())

    first = step(com, config, rng)
    served = {p.client for p in first.services_finished}
    steps_done = 1
    while steps_done < config.max_steps and not quiescent(com, config.match):
        report = step(com, config, rng)
        served.update(p.client for p in report.services_finished)
        steps_done += 1

    if initial_clients == 0:
        immediate = eventual = 1.0
    else:
        immediate = len(first.pairs_formed) / initial_clients
        eventual = len(served) / initial_clients
    return StaticResult(
        immediate_satisfaction=immediate,
        eventual_satisfaction=eventual,
        steps_to_quiescence=steps_done,
        quiescent=quiescent(com, config.match),
    )


def run_dynamic(config: RunConfig) -> DynamicResult:
    """Let the community churn to a steady state, then sample it.

    Runs ``warmup_steps`` unobserved, then records one sample after each of
    ``sample_count`` blocks of ``sample_interval`` steps, and reports the
    sample means of both request-rate conventions.
    """
    config.validate()
    if config.mode is not Mode.DYNAMIC:
        raise ConfigError("run_dynamic requires mode=dynamic")
    rng = make_rng(config.seed)
    com = init_grid(config.n, config.rates, config.values, rng)
    t = 0
    for _ in range(config.warmup_steps):
        step(com, config, rng)
        t += 1
    samples = []
    for _ in range(config.sample_count):
        for _ in range(config.sample_interval):
            step(com, config, rng)
            t += 1
        samples.append(measure(com, t))
    return DynamicResult(
        mean_req_rate_all=float(np.mean([s.req_rate_all for s in samples])),
        mean_req_rate_waiting=float(np.mean([s.req_rate_waiting for s in samples])),
        samples=samples,
    )

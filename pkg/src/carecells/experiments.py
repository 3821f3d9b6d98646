"""Sweep execution, result tables and the bundled experiment presets.

A sweep executes the Cartesian product of its axes (declaration order, last
axis varying fastest) times ``replicates``, each run seeded by the
documented (master seed, point index, replicate index) rule. Grid points
whose initial role shares would exceed 100% of the grid are skipped, since
no community can be initialized there; point indices still count them, so
adding or removing axis values never reshuffles other points' seeds.

Result rows become RFC-4180-style CSV: fixed column set per experiment,
fractions with 6 decimal digits, one newline per line, byte-identical for a
fixed spec and master seed.
"""

import itertools
import os
from dataclasses import dataclass, replace

from .config import ExperimentSpec, apply_param, parse_config, rebalance_provider_prob
from .driver import Mode, RunConfig, derive_run_seed, run_dynamic, run_static
from .errors import ConfigError, ConsistencyError
from .grid import Community, Role
from .metrics import MetricsSample

STATIC_METRICS = (
    "immediate_satisfaction",
    "eventual_satisfaction",
    "steps_to_quiescence",
    "quiescent",
)
DYNAMIC_METRICS = ("mean_req_rate_all", "mean_req_rate_waiting", "mean_satisfaction")

PARALLELISM_ENV = "SIM_JOBS"


@dataclass(frozen=True)
class ResultRow:
    """One CSV record: swept values, replicate index, seed, run metrics."""

    point: tuple[tuple[str, object], ...]
    replicate: int
    seed: int
    metrics: tuple[tuple[str, object], ...]


def point_config(spec: ExperimentSpec, values: dict) -> RunConfig | None:
    """The run config at one sweep point; None if the point is infeasible."""
    cfg = spec.base
    for name, value in values.items():
        cfg = apply_param(cfg, name, value)
    if spec.balance_provider_prob and cfg.mutation is not None:
        cfg = rebalance_provider_prob(cfg)
    if cfg.rates.client_rate + cfg.rates.provider_rate > 1.0 + 1e-12:
        return None
    try:
        cfg.validate()
    except ConfigError as exc:
        raise ConfigError(f"sweep point {values}: {exc}") from None
    return cfg


def _execute(cfg: RunConfig) -> tuple[tuple[str, object], ...]:
    if cfg.mode is Mode.STATIC:
        res = run_static(cfg)
        return (
            ("immediate_satisfaction", res.immediate_satisfaction),
            ("eventual_satisfaction", res.eventual_satisfaction),
            ("steps_to_quiescence", res.steps_to_quiescence),
            ("quiescent", res.quiescent),
        )
    res = run_dynamic(cfg)
    return (
        ("mean_req_rate_all", res.mean_req_rate_all),
        ("mean_req_rate_waiting", res.mean_req_rate_waiting),
        ("mean_satisfaction", 1.0 - res.mean_req_rate_all),
    )


def _point_label(name: str, value) -> object:
    if name == "mutation":
        kind, amount = value
        return f"{kind}:{amount}"
    return value


def run_experiment(spec: ExperimentSpec, jobs: int | None = None) -> list[ResultRow]:
    """Execute every feasible sweep point times ``spec.replicates``.

    ``jobs`` (default from the SIM_JOBS environment variable, else 1) runs
    the independent runs in a process pool; row order is by (point,
    replicate) either way.
    """
    spec.validate()
    axis_names = [name for name, _ in spec.sweeps]
    axis_values = [values for _, values in spec.sweeps]
    tasks: list[tuple[tuple[tuple[str, object], ...], int, RunConfig]] = []
    for point_index, combo in enumerate(itertools.product(*axis_values)):
        values = dict(zip(axis_names, combo))
        cfg = point_config(spec, values)
        if cfg is None:
            continue
        point = tuple(
            (name, _point_label(name, value)) for name, value in values.items()
        )
        for rep in range(spec.replicates):
            seed = derive_run_seed(spec.master_seed, point_index, rep)
            tasks.append((point, rep, replace(cfg, seed=seed)))

    if jobs is None:
        jobs = int(os.environ.get(PARALLELISM_ENV, "1"))
    if jobs > 1 and len(tasks) > 1:
        import multiprocessing

        with multiprocessing.Pool(jobs) as pool:
            results = pool.map(_execute, [cfg for _, _, cfg in tasks])
    else:
        results = [_execute(cfg) for _, _, cfg in tasks]

    return [
        ResultRow(point=point, replicate=rep, seed=cfg.seed, metrics=metrics)
        for (point, rep, cfg), metrics in zip(tasks, results)
    ]


def _format_value(value) -> str:
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, float):
        return f"{value:.6f}"
    return str(value)


def emit_csv(rows: list[ResultRow], columns: list[str] | None = None) -> str:
    """Render result rows as CSV text with a fixed column set.

    ``columns`` is only needed for an empty row list, where it supplies the
    header; otherwise the column set derives from the rows, which must all
    share it.
    """
    if not rows:
        if columns is None:
            raise ConsistencyError("emit_csv needs columns when rows are empty")
        return ",".join(columns) + "\n"
    first = [n for n, _ in rows[0].point] + ["replicate", "seed"] + [
        n for n, _ in rows[0].metrics
    ]
    if columns is not None and list(columns) != first:
        raise ConsistencyError(f"rows do not match columns {columns}")
    lines = [",".join(first)]
    for row in rows:
        names = [n for n, _ in row.point] + ["replicate", "seed"] + [
            n for n, _ in row.metrics
        ]
        if names != first:
            raise ConsistencyError(f"ragged result row {names} vs {first}")
        cells = (
            [_format_value(v) for _, v in row.point]
            + [str(row.replicate), str(row.seed)]
            + [_format_value(v) for _, v in row.metrics]
        )
        lines.append(",".join(cells))
    return "\n".join(lines) + "\n"


def samples_csv(samples: list[MetricsSample]) -> str:
    """Per-sample series of one dynamic run as CSV."""
    header = (
        "step,n_client,n_provider,n_neutral,n_in_service,"
        "req_rate_all,req_rate_waiting,satisfaction"
    )
    lines = [header]
    for s in samples:
        lines.append(
            f"{s.step},{s.n_client},{s.n_provider},{s.n_neutral},"
            f"{s.n_in_service},{s.req_rate_all:.6f},{s.req_rate_waiting:.6f},"
            f"{s.satisfaction:.6f}"
        )
    return "\n".join(lines) + "\n"


def snapshot_csv(community: Community) -> str:
    """Debug dump of a grid, one row-major line per cell."""
    lines = ["row,col,role,req_value,pro_value,work_status,partner_row,partner_col"]
    for coord in community.coords():
        cell = community.cell(coord)
        pr, pc = cell.partner if cell.partner is not None else (-1, -1)
        lines.append(
            f"{coord[0]},{coord[1]},{Role(cell.role).name.lower()},"
            f"{cell.req_value:.1f},{cell.pro_value:.0f},"
            f"{1 if cell.work_status else 0},{pr},{pc}"
        )
    return "\n".join(lines) + "\n"


# Bundled experiment presets, expressed in the config format so each one is
# guaranteed to pass parse_config validation.
#
# fig4: static sweep with one-shot providers; how much help arrives in the
#       very first round across initial client/provider shares.
# fig5: the same sweep with reusable providers; how much help arrives at all.
#       Provider shares above 0.40 are included because that is where
#       eventual satisfaction saturates.
# fig6: dynamic steady state vs initial client share; one mutated cell per
#       step, target roles 25/25/50.
# fig7: dynamic steady state vs p_client at one mutated cell per step, two
#       grid sizes; p_provider balances against fixed p_neutral = 0.5.
# fig8: fig7 with mutation scaled to 1% of the grid per step.
# fig9: fig8 with the second-close contact ring enabled, four grid sizes.
PRESETS: dict[str, str] = {
    "fig4": """\
mode = static
n = 30
reuse = oneshot
distant_help = true
replicates = 10
sweep.client_rate = 0.05,0.15,0.30,0.45,0.60
sweep.provider_rate = 0.10,0.20,0.30,0.40
""",
    "fig5": """\
mode = static
n = 30
reuse = reusable
distant_help = true
replicates = 10
sweep.client_rate = 0.05,0.15,0.30,0.45,0.60
sweep.provider_rate = 0.10,0.20,0.30,0.40,0.45,0.50,0.60
""",
    "fig6": """\
mode = dynamic
n = 30
provider_rate = 0.30
mutation = count:1
p_client = 0.25
p_provider = 0.25
p_neutral = 0.50
replicates = 10
sweep.client_rate = 0.05,0.15,0.30,0.45,0.60
""",
    "fig7": """\
mode = dynamic
mutation = count:1
p_neutral = 0.50
p_provider = balance
replicates = 10
sweep.n = 10,30
sweep.p_client = 0.05,0.10,0.15,0.20,0.25,0.30,0.35,0.40,0.45
""",
    "fig8": """\
mode = dynamic
mutation = fraction:0.01
p_neutral = 0.50
p_provider = balance
replicates = 10
sweep.n = 10,30
sweep.p_client = 0.05,0.10,0.15,0.20,0.25,0.30,0.35,0.40,0.45
""",
    "fig9": """\
mode = dynamic
mutation = fraction:0.01
distant_help = true
p_neutral = 0.50
p_provider = balance
replicates = 10
sweep.n = 10,20,30,40
sweep.p_client = 0.05,0.10,0.15,0.20,0.25,0.30,0.35,0.40,0.45
""",
}


def figure_preset(name: str) -> ExperimentSpec:
    """The bundled experiment spec with the given name (fig4 .. fig9)."""
    try:
        text = PRESETS[name]
    except KeyError:
        valid = ", ".join(sorted(PRESETS))
        raise ConfigError(f"unknown preset '{name}'; valid names: {valid}") from None
    return parse_config(text)

"""Satisfaction and request-rate measurements.

Two request-rate conventions exist and result tables carry both:
``req_rate_all`` counts every client cell, while ``req_rate_waiting`` only
counts clients not currently being served. Both use the whole grid (n^2) as
denominator; dynamic-mode satisfaction is 1 - req_rate_all. Static-mode
satisfaction instead divides by the initial client count and lives in the
driver's StaticResult.
"""

from dataclasses import dataclass

import numpy as np

from .grid import Community, Role


@dataclass(frozen=True)
class MetricsSample:
    """Counts and rates observed at one instant."""

    step: int
    n_client: int
    n_provider: int
    n_neutral: int
    n_in_service: int
    req_rate_all: float
    req_rate_waiting: float
    satisfaction: float


FRACTION_METRICS = ("req_rate_all", "req_rate_waiting", "satisfaction")


@dataclass(frozen=True)
class MetricSummary:
    mean: float
    min: float
    max: float
    std: float


def measure(community: Community, step: int) -> MetricsSample:
    """Pure snapshot of the community at the given step index."""
    n2 = community.n * community.n
    n_client, n_provider, n_neutral = community.role_counts()
    waiting = int(((community.role == Role.CLIENT) & ~community.busy).sum())
    req_all = n_client / n2
    return MetricsSample(
        step=step,
        n_client=n_client,
        n_provider=n_provider,
        n_neutral=n_neutral,
        n_in_service=int(community.busy.sum()),
        req_rate_all=req_all,
        req_rate_waiting=waiting / n2,
        satisfaction=1.0 - req_all,
    )


def aggregate(samples: list[MetricsSample]) -> dict[str, MetricSummary]:
    """Mean, min, max and population standard deviation per fraction metric."""
    if not samples:
        raise ValueError("aggregate needs at least one sample")
    out = {}
    for name in FRACTION_METRICS:
        values = np.array([getattr(s, name) for s in samples], dtype=float)
        out[name] = MetricSummary(
            mean=float(values.mean()),
            min=float(values.min()),
            max=float(values.max()),
            std=float(values.std()),
        )
    return out

"""Active service bookkeeping: per-step progress and completion.

A confirmed client-provider pair works off the client's request at
``pro_value / 10`` work units per step, so a service lasts exactly
``ceil(req_value / (pro_value / 10))`` ticks. Completion clears both
endpoints; what happens to the provider depends on the reuse policy.
"""

from dataclasses import dataclass

import numpy as np

from .errors import ConsistencyError
from .grid import Community, Coord, ReusePolicy, Ring, Role

_CLIENT = int(Role.CLIENT)
_PROVIDER = int(Role.PROVIDER)


@dataclass(frozen=True)
class ServicePair:
    """An active service between a client and a provider."""

    client: Coord
    provider: Coord
    ring: Ring


def _checked_indices(pair: ServicePair, community: Community) -> tuple[int, int]:
    ci = community.flat(pair.client)
    pi = community.flat(pair.provider)
    if (
        community.role[ci] != _CLIENT
        or community.role[pi] != _PROVIDER
        or not community.busy[ci]
        or not community.busy[pi]
        or community.partner[ci] != pi
        or community.partner[pi] != ci
    ):
        raise ConsistencyError(f"pair {pair} is not an active service")
    return ci, pi


def service_tick(pair: ServicePair, community: Community) -> float:
    """Advance the pair's service by one step; returns the new req_value.

    The client's remaining work drops by one tenth of the provider's
    pro_value, clamped at zero.
    """
    ci, pi = _checked_indices(pair, community)
    if community.req_tenths[ci] <= 0:
        raise ConsistencyError(f"tick on already-finished pair {pair}")
    community.req_tenths[ci] = max(0, community.req_tenths[ci] - community.pro[pi])
    return float(community.req_tenths[ci]) / 10.0


def finish_service(
    pair: ServicePair, community: Community, reuse: ReusePolicy
) -> None:
    """Tear down a completed service.

    Both endpoints become free and unlinked. The served client turns
    neutral. The provider turns neutral under ONE_SHOT, or stays a provider
    with its pro_value untouched under REUSABLE.
    """
    ci, pi = _checked_indices(pair, community)
    if community.req_tenths[ci] != 0:
        raise ConsistencyError(
            f"finish_service on pair {pair} with work remaining"
        )
    community.pairs.remove(pair)
    community.busy[ci] = community.busy[pi] = False
    community.partner[ci] = community.partner[pi] = -1
    community.role[ci] = Role.NEUTRAL
    if reuse is ReusePolicy.ONE_SHOT:
        community.role[pi] = Role.NEUTRAL
        community.pro[pi] = 0

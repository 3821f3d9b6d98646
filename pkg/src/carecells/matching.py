"""Help-matching protocol: providers detect and offer, clients accept,
providers confirm.

One round runs up to two synchronous phases. The adjacent phase matches over
ring 1; if distant help is enabled, the same three steps repeat once over
ring 2 among cells still free. Each phase is evaluated against a snapshot of
the state at phase start, so the outcome does not depend on cell iteration
order:

1. every free provider emits at most one offer, to its free-client neighbor
   with the highest req_value;
2. every free client picks, among offers addressed to it, the provider with
   the highest pro_value;
3. chosen pairs are confirmed: both endpoints become busy and mutually
   linked. Unchosen offers dissolve and carry no state into later rounds.

Ties always break by the fixed neighbor order E, S, W, N (EE, SS, WW, NN),
so a round is a deterministic function of the community state and consumes
no randomness.
"""

from dataclasses import dataclass

import numpy as np

from .grid import Community, Coord, Ring, Role, neighbors
from .service import ServicePair


@dataclass(frozen=True)
class Offer:
    """A provider's proposal to serve one specific client this round."""

    provider: Coord
    client: Coord
    ring: Ring


@dataclass(frozen=True)
class MatchPolicy:
    """Matching variants left open by the protocol.

    tie_break has a single implemented rule, "ring-order": positional
    preference in the fixed E,S,W,N scan. It is named so result tables
    record which rule produced them.
    """

    distant_help: bool = False
    tie_break: str = "ring-order"

    def validate(self) -> None:
        if self.tie_break != "ring-order":
            from .errors import ConfigError

            raise ConfigError(f"unknown tie_break rule {self.tie_break!r}")


def select_client_for_provider(
    provider: Coord, community: Community, ring: Ring
) -> Coord | None:
    """The neighbor this provider would offer to: a free client with maximal
    req_value, first in E,S,W,N order on ties; None if no eligible client."""
    i = community.flat(provider)
    if community.role[i] != Role.PROVIDER or community.busy[i]:
        raise ValueError("select_client_for_provider needs a free provider cell")
    best: Coord | None = None
    best_req = -1
    for nb in neighbors(provider, ring, community.n):
        j = community.flat(nb)
        if (
            community.role[j] == Role.CLIENT
            and not community.busy[j]
            and community.req_tenths[j] > best_req
        ):
            best, best_req = nb, int(community.req_tenths[j])
    return best


def select_provider_for_client(
    client: Coord, offers: list[Offer], community: Community
) -> Offer | None:
    """The offer this client accepts: maximal provider pro_value among offers
    addressed to it, ties broken by the client's own E,S,W,N neighbor order."""
    i = community.flat(client)
    if community.role[i] != Role.CLIENT or community.busy[i]:
        raise ValueError("select_provider_for_client needs a free client cell")
    addressed = {o.provider: o for o in offers if o.client == client}
    if not addressed:
        return None
    best: Offer | None = None
    best_pro = -1
    for ring in (Ring.ADJACENT, Ring.SECOND_CLOSE):
        for nb in neighbors(client, ring, community.n):
            o = addressed.get(nb)
            if o is not None and o.ring == ring:
                pro = int(community.pro[community.flat(nb)])
                if pro > best_pro:
                    best, best_pro = o, pro
    return best


def _plan_phase(com: Community, ring: Ring) -> tuple[np.ndarray, np.ndarray]:
    """Compute the (clients, providers) that would pair up in one phase,
    without touching state. Flat indices, aligned element-wise."""
    empty = np.empty(0, dtype=np.int64)
    free = ~com.busy
    table = com.nbr1 if ring == Ring.ADJACENT else com.nbr2

    prov = np.flatnonzero(free & (com.role == Role.PROVIDER))
    if prov.size == 0:
        return empty, empty
    nb = table[prov]
    eligible = (com.role[nb] == Role.CLIENT) & free[nb]
    req = np.where(eligible, com.req_tenths[nb], -1)
    pick = np.argmax(req, axis=1)  # first max: E,S,W,N tie-break
    rows = np.arange(prov.size)
    offering = req[rows, pick] >= 0
    # offer_to[p] = client index provider p offers to, -1 if none
    offer_to = np.full(com.n * com.n, -1, dtype=np.int64)
    offer_to[prov[offering]] = nb[rows[offering], pick[offering]]

    cli = np.flatnonzero(free & (com.role == Role.CLIENT))
    if cli.size == 0 or not offering.any():
        return empty, empty
    cnb = table[cli]
    addressed = offer_to[cnb] == cli[:, None]
    pro = np.where(addressed, com.pro[cnb], -1)
    pick = np.argmax(pro, axis=1)  # first max: client's E,S,W,N tie-break
    rows = np.arange(cli.size)
    accepting = pro[rows, pick] >= 0
    return cli[accepting], cnb[rows[accepting], pick[accepting]]


def _confirm(com: Community, clients, providers, ring: Ring) -> list[ServicePair]:
    formed = []
    for ci, pi in zip(clients, providers):
        pair = ServicePair(
            client=com.coord(ci), provider=com.coord(pi), ring=ring
        )
        com.busy[ci] = com.busy[pi] = True
        com.partner[ci] = pi
        com.partner[pi] = ci
        com.pairs.append(pair)
        formed.append(pair)
    return formed


def match_round(community: Community, policy: MatchPolicy) -> list[ServicePair]:
    """Run one matching round and confirm the resulting pairs.

    The adjacent phase always runs; the second-close phase runs afterwards,
    within the same round, when ``policy.distant_help`` is set. Returns the
    pairs formed, adjacent ones first.
    """
    policy.validate()
    clients, providers = _plan_phase(community, Ring.ADJACENT)
    formed = _confirm(community, clients, providers, Ring.ADJACENT)
    if policy.distant_help:
        clients, providers = _plan_phase(community, Ring.SECOND_CLOSE)
        formed += _confirm(community, clients, providers, Ring.SECOND_CLOSE)
    return formed


def would_match(community: Community, policy: MatchPolicy) -> bool:
    """True iff a match_round on the current state would form any pair."""
    clients, _ = _plan_phase(community, Ring.ADJACENT)
    if clients.size > 0:
        return True
    if policy.distant_help:
        # Empty adjacent phase leaves the state untouched, so the distant
        # phase would see exactly the current state.
        clients, _ = _plan_phase(community, Ring.SECOND_CLOSE)
        return clients.size > 0
    return False

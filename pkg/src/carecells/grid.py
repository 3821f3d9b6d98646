"""Community grid: cell state, toroidal neighborhoods, initialization.

A community is an n x n toroidal grid of cells. Every cell is one of three
roles. Clients carry ``req_value``, the amount of work their current request
still needs. Providers carry ``pro_value``, their service speed in work units
per ten steps. ``work_status`` marks a cell as engaged in an active service,
in which case ``partner`` points at the counterpart cell.

Work amounts are stored internally in integer tenths of a work unit. One
service tick consumes ``pro_value / 10`` work units, i.e. exactly
``pro_value`` tenths, so service durations are exact for the integer-valued
distributions this simulator draws from (float accumulation of ``x - p/10``
overshoots the zero crossing for many integer pairs).

Coordinates are (row, col), 0-based. Every deterministic scan is row-major.
"""

from dataclasses import dataclass
from enum import Enum, IntEnum

import numpy as np

from .errors import ConfigError, ConsistencyError


class Role(IntEnum):
    NEUTRAL = 0
    CLIENT = 1
    PROVIDER = 2


class Ring(IntEnum):
    """Contact ring: the 4 cardinal cells at distance 1 or at distance 2."""

    ADJACENT = 1
    SECOND_CLOSE = 2


Coord = tuple[int, int]

# Cardinal offsets in fixed scan order E, S, W, N. Ring 2 doubles them
# (EE, SS, WW, NN). This order is the tie-breaking order everywhere.
_OFFSETS = ((0, 1), (1, 0), (0, -1), (-1, 0))


def neighbors(coord: Coord, ring: Ring, n: int) -> list[Coord]:
    """Return the 4 ring neighbors of ``coord`` in order E, S, W, N.

    Wraps toroidally. On very small grids the returned coordinates may
    repeat (n=2 ring 1, n<=4 ring 2); the sequence always has 4 entries.
    """
    r, c = coord
    if not (0 <= r < n and 0 <= c < n):
        raise ValueError(f"coordinate {coord} outside {n}x{n} grid")
    d = int(ring)
    return [((r + dr * d) % n, (c + dc * d) % n) for dr, dc in _OFFSETS]


@dataclass(frozen=True)
class Cell:
    """Read-only view of one grid cell."""

    role: Role
    req_value: float
    pro_value: float
    work_status: bool
    partner: Coord | None


@dataclass(frozen=True)
class InitRates:
    """Initial role shares; the remainder of the grid is neutral."""

    client_rate: float
    provider_rate: float

    def validate(self) -> None:
        if self.client_rate < 0 or self.provider_rate < 0:
            raise ConfigError("init rates must be non-negative")
        if self.client_rate + self.provider_rate > 1.0 + 1e-12:
            raise ConfigError(
                f"client_rate + provider_rate = "
                f"{self.client_rate + self.provider_rate:.4f} exceeds 1"
            )


@dataclass(frozen=True)
class UniformIntValues:
    """Value distribution for req_value / pro_value: uniform integers lo..hi."""

    lo: int = 1
    hi: int = 10

    def validate(self) -> None:
        if self.lo < 1:
            raise ConfigError("value distribution lower bound must be >= 1")
        if self.hi < self.lo:
            raise ConfigError("value distribution upper bound below lower bound")

    def sample(self, rng: np.random.Generator, size=None):
        return rng.integers(self.lo, self.hi + 1, size=size, dtype=np.int64)


class ReusePolicy(Enum):
    """Whether a provider may serve again after finishing a service."""

    ONE_SHOT = "oneshot"
    REUSABLE = "reusable"


class Community:
    """The n x n grid plus the set of active service pairs.

    State lives in flat numpy arrays indexed row-major; ``pairs`` is the
    list of active services (see service.ServicePair). A community is
    single-writer: all mutation happens inside one simulation step loop.
    """

    def __init__(self, n: int):
        if n < 2:
            raise ConfigError(f"grid size must be >= 2, got {n}")
        self.n = n
        n2 = n * n
        self.role = np.zeros(n2, dtype=np.int8)
        self.req_tenths = np.zeros(n2, dtype=np.int64)
        self.pro = np.zeros(n2, dtype=np.int64)
        self.busy = np.zeros(n2, dtype=bool)
        self.partner = np.full(n2, -1, dtype=np.int64)
        self.pairs: list = []
        # Distribution new values are drawn from (mutation re-rolls).
        self.values = UniformIntValues()
        # Neighbor tables, one row per cell, columns in E,S,W,N order.
        self.nbr1 = self._neighbor_table(Ring.ADJACENT)
        self.nbr2 = self._neighbor_table(Ring.SECOND_CLOSE)

    def _neighbor_table(self, ring: Ring) -> np.ndarray:
        n = self.n
        table = np.empty((n * n, 4), dtype=np.int64)
        for r in range(n):
            for c in range(n):
                table[r * n + c] = [
                    nr * n + nc for nr, nc in neighbors((r, c), ring, n)
                ]
        return table

    # -- coordinate helpers ------------------------------------------------

    def flat(self, coord: Coord) -> int:
        r, c = coord
        if not (0 <= r < self.n and 0 <= c < self.n):
            raise ValueError(f"coordinate {coord} outside {self.n}x{self.n} grid")
        return r * self.n + c

    def coord(self, i: int) -> Coord:
        return (int(i) // self.n, int(i) % self.n)

    def coords(self):
        """All coordinates in row-major order."""
        return ((r, c) for r in range(self.n) for c in range(self.n))

    # -- cell access -------------------------------------------------------

    def cell(self, coord: Coord) -> Cell:
        i = self.flat(coord)
        p = int(self.partner[i])
        return Cell(
            role=Role(int(self.role[i])),
            req_value=float(self.req_tenths[i]) / 10.0,
            pro_value=float(self.pro[i]),
            work_status=bool(self.busy[i]),
            partner=self.coord(p) if p >= 0 else None,
        )

    def place_client(self, coord: Coord, req_value: float) -> None:
        """Make the cell a free client with the given remaining work."""
        if req_value <= 0:
            raise ConfigError("a client needs req_value > 0")
        i = self.flat(coord)
        self._require_free(i)
        self.role[i] = Role.CLIENT
        self.req_tenths[i] = round(req_value * 10)
        self.pro[i] = 0

    def place_provider(self, coord: Coord, pro_value: float) -> None:
        """Make the cell a free provider with the given service speed."""
        if pro_value <= 0:
            raise ConfigError("a provider needs pro_value > 0")
        i = self.flat(coord)
        self._require_free(i)
        self.role[i] = Role.PROVIDER
        self.req_tenths[i] = 0
        self.pro[i] = round(pro_value)

    def place_neutral(self, coord: Coord) -> None:
        i = self.flat(coord)
        self._require_free(i)
        self.role[i] = Role.NEUTRAL
        self.req_tenths[i] = 0
        self.pro[i] = 0

    def _require_free(self, i: int) -> None:
        if self.busy[i]:
            raise ConsistencyError(
                f"cannot reassign cell {self.coord(i)} while it is in service"
            )

    # -- aggregate views ---------------------------------------------------

    def role_counts(self) -> tuple[int, int, int]:
        """(n_client, n_provider, n_neutral)."""
        counts = np.bincount(self.role, minlength=3)
        return int(counts[Role.CLIENT]), int(counts[Role.PROVIDER]), int(counts[Role.NEUTRAL])

    def digest(self) -> str:
        """Hex digest of the full state; equal digests mean byte-identical."""
        import hashlib

        h = hashlib.sha256()
        h.update(str(self.n).encode())
        for arr in (self.role, self.req_tenths, self.pro, self.busy, self.partner):
            h.update(arr.tobytes())
        for p in self.pairs:
            h.update(repr((p.client, p.provider, int(p.ring))).encode())
        return h.hexdigest()

    def check_invariants(self) -> None:
        """Raise ConsistencyError if any structural invariant is violated."""
        role, busy, partner = self.role, self.busy, self.partner
        if np.any((role != Role.CLIENT) & (self.req_tenths != 0)):
            raise ConsistencyError("non-client cell with req_value != 0")
        if np.any((role == Role.CLIENT) & (self.req_tenths <= 0)):
            raise ConsistencyError("client cell with req_value <= 0")
        if np.any((role != Role.PROVIDER) & (self.pro != 0)):
            raise ConsistencyError("non-provider cell with pro_value != 0")
        if np.any((role == Role.PROVIDER) & (self.pro <= 0)):
            raise ConsistencyError("provider cell with pro_value <= 0")
        if np.any(busy != (partner >= 0)):
            raise ConsistencyError("work_status does not match partner link")
        if np.any(busy & (role == Role.NEUTRAL)):
            raise ConsistencyError("neutral cell marked in service")
        linked = np.flatnonzero(partner >= 0)
        if np.any(partner[partner[linked]] != linked):
            raise ConsistencyError("partner links are not symmetric")
        paired = set()
        for p in self.pairs:
            ci, pi = self.flat(p.client), self.flat(p.provider)
            if ci in paired or pi in paired:
                raise ConsistencyError("cell participates in more than one pair")
            paired.update((ci, pi))
            if partner[ci] != pi or partner[pi] != ci:
                raise ConsistencyError("pair endpoints not mutually linked")
            if role[ci] != Role.CLIENT or role[pi] != Role.PROVIDER:
                raise ConsistencyError("pair endpoints have wrong roles")
            table = self.nbr1 if p.ring == Ring.ADJACENT else self.nbr2
            if ci not in table[pi]:
                raise ConsistencyError("pair endpoints outside each other's contact ring")
        if len(paired) != int(busy.sum()):
            raise ConsistencyError("busy cells do not match pair membership")


def init_grid(
    n: int,
    rates: InitRates,
    value_dist: UniformIntValues,
    rng: np.random.Generator,
) -> Community:
    """Build a fresh community with independently assigned roles.

    Each cell is Client with probability ``client_rate``, Provider with
    ``provider_rate``, else Neutral. Clients draw req_value and providers
    draw pro_value from ``value_dist``. A fixed seed yields a byte-identical
    grid: the draw order is one uniform vector for roles (row-major), then
    one value vector for clients, then one for providers.
    """
    rates.validate()
    value_dist.validate()
    com = Community(n)
    com.values = value_dist
    u = rng.random(n * n)
    client = u < rates.client_rate
    provider = (~client) & (u < rates.client_rate + rates.provider_rate)
    com.role[client] = Role.CLIENT
    com.role[provider] = Role.PROVIDER
    com.req_tenths[client] = value_dist.sample(rng, int(client.sum())) * 10
    com.pro[provider] = value_dist.sample(rng, int(provider.sum()))
    return com

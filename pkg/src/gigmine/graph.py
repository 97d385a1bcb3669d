"""Immutable bipartite artist-venue graph.

Nodes on one side are artists, on the other venues; an edge exists when at
least one event links the pair. Each edge records the number of events behind
it and the calendar year of the earliest one. Neighbor sets, 2-hop neighbor
sets (the union of the neighbors of each neighbor, which lands back on the
node's own side) and distinct-neighbor degrees are the primitives every
downstream task builds on.

The graph is immutable after construction and safe for concurrent reads.
Artist and venue id sets must be disjoint so that set formulas over the mixed
node universe are well defined; construction rejects overlapping ids.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping

import numpy as np
import scipy.sparse as sp

from gigmine.errors import GigmineError, UnknownNodeError

ArtistId = str
VenueId = str


@dataclass(frozen=True)
class EdgeInfo:
    """Per-edge payload: event multiplicity, first event year, generic weight."""

    count: int
    first_year: int
    weight: float = 1.0


class BipartiteGraph:
    """Bipartite graph over disjoint artist and venue node sets.

    Parameters
    ----------
    artists, venues : iterables of node ids
        May include isolated nodes (nodes with no edges).
    edges : mapping (artist_id, venue_id) -> EdgeInfo
        Every endpoint must appear in the corresponding node set.
    """

    def __init__(
        self,
        artists: Iterable[ArtistId],
        venues: Iterable[VenueId],
        edges: Mapping[tuple[ArtistId, VenueId], EdgeInfo],
    ):
        self._artists = frozenset(artists)
        self._venues = frozenset(venues)
        overlap = self._artists & self._venues
        if overlap:
            raise GigmineError(
                f"artist and venue id sets overlap: {sorted(map(str, overlap))[:5]}"
            )
        self._edges = dict(edges)
        adj_a: dict[ArtistId, set[VenueId]] = {a: set() for a in self._artists}
        adj_v: dict[VenueId, set[ArtistId]] = {v: set() for v in self._venues}
        ev_count: dict = {n: 0 for n in self._artists | self._venues}
        for (a, v), info in self._edges.items():
            if a not in self._artists:
                raise GigmineError(f"edge ({a!r}, {v!r}): artist endpoint not in node set")
            if v not in self._venues:
                raise GigmineError(f"edge ({a!r}, {v!r}): venue endpoint not in node set")
            if info.count < 1:
                raise GigmineError(f"edge ({a!r}, {v!r}): count must be >= 1, got {info.count}")
            adj_a[a].add(v)
            adj_v[v].add(a)
            ev_count[a] += info.count
            ev_count[v] += info.count
        self._adj = {n: frozenset(s) for n, s in adj_a.items()}
        self._adj.update({n: frozenset(s) for n, s in adj_v.items()})
        self._event_count = ev_count
        self._two_hop_cache: dict = {}
        # deterministic dense orders for matrix-backed consumers
        self._artist_order = tuple(sorted(self._artists, key=str))
        self._venue_order = tuple(sorted(self._venues, key=str))
        self._artist_index = {a: i for i, a in enumerate(self._artist_order)}
        self._venue_index = {v: j for j, v in enumerate(self._venue_order)}

    # -- node and edge views ------------------------------------------------

    @property
    def artists(self) -> frozenset:
        return self._artists

    @property
    def venues(self) -> frozenset:
        return self._venues

    @property
    def edges(self) -> Mapping[tuple[ArtistId, VenueId], EdgeInfo]:
        return dict(self._edges)

    @property
    def artist_order(self) -> tuple:
        return self._artist_order

    @property
    def venue_order(self) -> tuple:
        return self._venue_order

    @property
    def n_edges(self) -> int:
        return len(self._edges)

    @property
    def total_events(self) -> int:
        return sum(info.count for info in self._edges.values())

    def has_node(self, node) -> bool:
        return node in self._adj

    def has_edge(self, artist, venue) -> bool:
        return (artist, venue) in self._edges

    def is_artist(self, node) -> bool:
        return node in self._artists

    def __eq__(self, other) -> bool:
        if not isinstance(other, BipartiteGraph):
            return NotImplemented
        return (
            self._artists == other._artists
            and self._venues == other._venues
            and self._edges == other._edges
        )

    def __repr__(self) -> str:
        return (
            f"BipartiteGraph({len(self._artists)} artists, "
            f"{len(self._venues)} venues, {len(self._edges)} edges)"
        )

    # -- neighborhood queries -----------------------------------------------

    def neighbors(self, node) -> frozenset:
        """Opposite-side nodes sharing an edge with ``node``."""
        try:
            return self._adj[node]
        except KeyError:
            raise UnknownNodeError(node) from None

    def two_hop_neighbors(self, node) -> frozenset:
        """Union of the neighbors of each neighbor of ``node``.

        Same side as ``node``; contains ``node`` itself whenever it has at
        least one neighbor. Memoized, which is what makes pairwise heuristic
        scoring over many candidate pairs affordable.
        """
        cached = self._two_hop_cache.get(node)
        if cached is not None:
            return cached
        hood = self.neighbors(node)
        out: set = set()
        for nbr in hood:
            out |= self._adj[nbr]
        result = frozenset(out)
        self._two_hop_cache[node] = result
        return result

    def degree(self, node) -> int:
        """Number of distinct opposite-side neighbors (not summed event counts)."""
        return len(self.neighbors(node))

    def event_count(self, node) -> int:
        """Total events touching ``node``, i.e. incident edge multiplicities summed."""
        if node not in self._adj:
            raise UnknownNodeError(node)
        return self._event_count[node]

    # -- matrix view ----------------------------------------------------------

    def biadjacency(self, values: str = "binary") -> sp.csr_matrix:
        """Sparse artist x venue matrix in (artist_order, venue_order) layout.

        ``values`` selects the entries: "binary" (0/1 incidence), "count"
        (event multiplicities) or "weight" (the EdgeInfo.weight field).
        """
        if values not in ("binary", "count", "weight"):
            raise ValueError(f"values must be binary|count|weight, got {values!r}")
        rows, cols, data = [], [], []
        for (a, v), info in self._edges.items():
            rows.append(self._artist_index[a])
            cols.append(self._venue_index[v])
            if values == "binary":
                data.append(1.0)
            elif values == "count":
                data.append(float(info.count))
            else:
                data.append(float(info.weight))
        shape = (len(self._artist_order), len(self._venue_order))
        return sp.csr_matrix(
            (np.asarray(data), (np.asarray(rows, dtype=np.int64), np.asarray(cols, dtype=np.int64))),
            shape=shape,
        )


def _event_fields(event, position: int):
    if isinstance(event, tuple):
        if len(event) != 3:
            raise GigmineError(f"event #{position}: expected (artist, venue, year) triple")
        return event[0], event[1], event[2], f"#{position}"
    name = getattr(event, "event_id", None) or f"#{position}"
    return event.artist_id, event.venue_id, event.date.year, name


def build_graph(events) -> BipartiteGraph:
    """Build the bipartite graph from an event sequence.

    Accepts Event records (``artist_id``/``venue_id``/``date`` attributes) or
    bare ``(artist, venue, year)`` triples. An edge (a, v) exists iff at least
    one event links a and v; its count is the number of such events and its
    first_year their minimum year. Events with a missing artist or venue id
    are rejected with an error naming the record.
    """
    counts: dict[tuple, int] = {}
    first_year: dict[tuple, int] = {}
    for pos, event in enumerate(events):
        a, v, year, name = _event_fields(event, pos)
        if a is None or a == "":
            raise GigmineError(f"event {name}: missing artist id")
        if v is None or v == "":
            raise GigmineError(f"event {name}: missing venue id")
        key = (a, v)
        counts[key] = counts.get(key, 0) + 1
        y = int(year)
        if key not in first_year or y < first_year[key]:
            first_year[key] = y
    edges = {
        key: EdgeInfo(count=counts[key], first_year=first_year[key]) for key in counts
    }
    artists = {a for a, _ in edges}
    venues = {v for _, v in edges}
    return BipartiteGraph(artists, venues, edges)

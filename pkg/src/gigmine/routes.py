"""Frequent touring routes mined from artists' city sequences.

Each artist's events, ordered by date (ties by event id), yield a sequence of
cities with consecutive repeats collapsed; contiguous n-grams of those
sequences are counted. A route and its reverse are merged under the
lexicographically smaller orientation, since tours run both ways.

A city is the (city, state, country) triple, so namesakes in different
regions stay distinct.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

City = tuple

N_VALUES = (4, 5)


@dataclass(frozen=True)
class CitySequence:
    artist_id: str
    cities: tuple


@dataclass(frozen=True)
class RouteCount:
    """A canonical route with its merged count.

    ``route`` is the lexicographically smaller of the two orientations;
    ``bidirectional`` records whether both orientations were observed.
    A palindromic route reads the same both ways, so it is counted once
    and never marked bidirectional.
    """

    route: tuple
    count: int
    bidirectional: bool


def _city_key(event) -> City:
    return (event.city, event.state or "", event.country)


def collapse_consecutive(cities: Sequence[City]) -> tuple:
    """Drop each city that merely repeats its predecessor. Idempotent."""
    out = []
    for c in cities:
        if not out or out[-1] != c:
            out.append(c)
    return tuple(out)


def city_sequences(corpus) -> list[CitySequence]:
    """Chronological per-artist city sequences, consecutive repeats collapsed.

    Events on the same date are ordered by event id so that the sequence is
    deterministic.
    """
    out = []
    for artist in sorted(corpus.artist_events, key=str):
        events = sorted(corpus.artist_events[artist], key=lambda e: (e.date, e.event_id))
        out.append(
            CitySequence(
                artist_id=artist,
                cities=collapse_consecutive([_city_key(e) for e in events]),
            )
        )
    return out


def _ngrams(cities: Sequence, n: int):
    for i in range(len(cities) - n + 1):
        yield tuple(cities[i : i + n])


def mine_routes(
    sequences: Iterable[CitySequence],
    n_values: Sequence[int] = N_VALUES,
    top_k: Optional[int] = None,
) -> dict[int, list[RouteCount]]:
    """Count contiguous city n-grams and merge opposite orientations.

    Returns, per n, RouteCounts ranked by merged count descending (ties by
    route for determinism), cut to ``top_k`` when given. The merged count is
    the sum of the forward and reverse raw counts.
    """
    sequences = list(sequences)
    result: dict[int, list[RouteCount]] = {}
    for n in n_values:
        raw: Counter = Counter()
        for seq in sequences:
            raw.update(_ngrams(seq.cities, n))
        merged: dict[tuple, RouteCount] = {}
        for gram, cnt in raw.items():
            rev = gram[::-1]
            if gram == rev:
                merged[gram] = RouteCount(route=gram, count=cnt, bidirectional=False)
                continue
            canon = min(gram, rev)
            if canon in merged:
                continue
            rev_cnt = raw.get(canon[::-1], 0)
            merged[canon] = RouteCount(
                route=canon,
                count=raw.get(canon, 0) + rev_cnt,
                bidirectional=raw.get(canon, 0) > 0 and rev_cnt > 0,
            )
        ranked = sorted(merged.values(), key=lambda rc: (-rc.count, rc.route))
        result[n] = ranked[:top_k] if top_k is not None else ranked
    return result

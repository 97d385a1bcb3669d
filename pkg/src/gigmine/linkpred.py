"""Artist-venue link prediction: splits, five predictors, AUC evaluation.

Two experimental configurations share one training graph. The forecasting
configuration trains on events up to a cutoff year (recursively 5-core
filtered) and tests on pairs that first appear in later years. The prediction
configuration hides a random fraction of that same training graph's edges and
recovers them, averaged over several seeded splits.

Predictors: common neighbors, Jaccard coefficient and preferential attachment
(set arithmetic over 1- and 2-hop neighborhoods), truncated-SVD matrix
reconstruction, and cosine similarity of random-walk embeddings. Links are
binarized throughout; candidate scores are compared by rank-based ROC AUC
against seeded uniform samples of non-edges.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, NamedTuple, Optional, Sequence

import numpy as np

from gigmine.embeddings import sample_walks, score_embedding, train_embeddings
from gigmine.errors import GigmineError
from gigmine.graph import BipartiteGraph, build_graph
from gigmine.ingest import recursive_core_filter
from gigmine.metrics import roc_auc
from gigmine.success import SVDReducer

SVD_RANK = 25
NEG_MULTIPLE = 10
NEG_FLOOR = 100_000
HEURISTICS = ("common_neighbors", "jaccard", "preferential_attachment")
ALL_PREDICTORS = HEURISTICS + ("svd", "embedding")


@dataclass(frozen=True)
class SplitSpec:
    """Parameters of a temporal or random train/test split."""

    kind: str = "temporal"
    train_end_year: int = 2015
    test_years: frozenset = frozenset({2016, 2017})
    hidden_fraction: float = 0.20
    seed: int = 0

    def __post_init__(self):
        if self.kind not in ("temporal", "random"):
            raise GigmineError(f"split kind must be temporal or random, got {self.kind!r}")
        if not 0.0 < self.hidden_fraction < 1.0:
            raise GigmineError(
                f"hidden_fraction must lie in (0, 1), got {self.hidden_fraction}"
            )
        object.__setattr__(self, "test_years", frozenset(self.test_years))
        if self.kind == "temporal":
            if not self.test_years:
                raise GigmineError("temporal split needs at least one test year")
            if self.train_end_year >= min(self.test_years):
                raise GigmineError(
                    f"train_end_year {self.train_end_year} must precede "
                    f"test years {sorted(self.test_years)}"
                )


class TemporalSplit(NamedTuple):
    train_graph: BipartiteGraph
    test_pairs: frozenset
    stats: dict


class RandomSplit(NamedTuple):
    train_graph: BipartiteGraph
    hidden_pairs: frozenset


def make_temporal_split(corpus, spec: SplitSpec, core_k: int = 5) -> TemporalSplit:
    """History graph up to the cutoff year versus pairs first seen later.

    The training graph is built from events dated <= train_end_year and
    recursively core-filtered. Test pairs come from events in test_years,
    deduplicated, restricted to nodes that survived the filter, minus pairs
    already present in training. Raises when either side ends up empty.
    """
    if spec.kind != "temporal":
        raise GigmineError(f"expected a temporal SplitSpec, got kind={spec.kind!r}")
    train_events = [ev for ev in corpus.events if ev.date.year <= spec.train_end_year]
    if not train_events:
        raise GigmineError(f"no events in or before {spec.train_end_year}")
    graph = recursive_core_filter(build_graph(train_events), k=core_k)
    if graph.n_edges == 0:
        raise GigmineError(f"training graph is empty after the {core_k}-core filter")

    test_events = [ev for ev in corpus.events if ev.date.year in spec.test_years]
    raw_pairs = {(ev.artist_id, ev.venue_id) for ev in test_events}
    surviving = {
        p for p in raw_pairs if graph.has_node(p[0]) and graph.has_node(p[1])
    }
    new_pairs = frozenset(p for p in surviving if not graph.has_edge(*p))
    if not new_pairs:
        raise GigmineError(
            f"no new (artist, venue) pairs found in test years {sorted(spec.test_years)}"
        )
    stats = {
        "train_end_year": spec.train_end_year,
        "test_years": sorted(spec.test_years),
        "core_k": core_k,
        "train_artists": len(graph.artists),
        "train_venues": len(graph.venues),
        "train_events": graph.total_events,
        "train_edges": graph.n_edges,
        "test_events": len(test_events),
        "test_unique_pairs": len(raw_pairs),
        "test_excluded_unseen_node": len(raw_pairs) - len(surviving),
        "test_excluded_known_edge": len(surviving) - len(new_pairs),
        "test_positives": len(new_pairs),
    }
    return TemporalSplit(graph, new_pairs, stats)


def make_random_split(graph: BipartiteGraph, spec: SplitSpec) -> RandomSplit:
    """Hide a uniformly random fraction of edges; nodes stay in place.

    Exactly round(|E| * hidden_fraction) edges are hidden. Train edges and
    hidden edges partition the original edge set, and the same seed always
    yields the same split.
    """
    if spec.kind != "random":
        raise GigmineError(f"expected a random SplitSpec, got kind={spec.kind!r}")
    edges = graph.edges
    pairs = sorted(edges, key=str)
    n_hidden = int(round(spec.hidden_fraction * len(pairs)))
    rng = np.random.default_rng(spec.seed)
    hidden_idx = rng.choice(len(pairs), size=n_hidden, replace=False)
    hidden = frozenset(pairs[i] for i in hidden_idx)
    train_edges = {p: info for p, info in edges.items() if p not in hidden}
    return RandomSplit(
        BipartiteGraph(graph.artists, graph.venues, train_edges), hidden
    )


# -- predictors ---------------------------------------------------------------


def score_common_neighbors(g: BipartiteGraph, a, v) -> int:
    """|(N2(a) ∩ N(v)) ∪ (N2(v) ∩ N(a))| with N2 the 2-hop neighborhood.

    The two intersections live on opposite sides of the graph, so the union
    is disjoint and the formula is symmetric in its arguments.
    """
    return len(g.two_hop_neighbors(a) & g.neighbors(v)) + len(
        g.two_hop_neighbors(v) & g.neighbors(a)
    )


def score_jaccard(g: BipartiteGraph, a, v) -> float:
    """Common-neighbor count over the size of the 4-way neighborhood union."""
    denom = len(g.two_hop_neighbors(a) | g.neighbors(v)) + len(
        g.two_hop_neighbors(v) | g.neighbors(a)
    )
    if denom == 0:
        return 0.0
    return score_common_neighbors(g, a, v) / denom


def score_preferential_attachment(g: BipartiteGraph, a, v) -> int:
    """Product of the two distinct-neighbor degrees."""
    return g.degree(a) * g.degree(v)


_PAIR_PREDICTORS = {
    "common_neighbors": score_common_neighbors,
    "jaccard": score_jaccard,
    "preferential_attachment": score_preferential_attachment,
}


@dataclass
class LinkScoreTable:
    """Finite scores for candidate pairs under one named predictor."""

    predictor: str
    scores: dict = field(default_factory=dict)

    def __post_init__(self):
        for pair, s in self.scores.items():
            if not np.isfinite(s):
                raise GigmineError(f"{self.predictor}: non-finite score for {pair}")

    def __getitem__(self, pair):
        return self.scores[pair]

    def __len__(self):
        return len(self.scores)


def score_svd(
    g: BipartiteGraph,
    pairs: Iterable[tuple],
    k: int = SVD_RANK,
    seed: int = 0,
) -> LinkScoreTable:
    """Rank-k reconstruction of the binary biadjacency matrix as link scores.

    score(a, v) is the (a, v) entry of U_k S_k V_k^T. Raises when k exceeds
    the matrix dimensions or a pair references an unknown node.
    """
    X = g.biadjacency(values="binary")
    reducer = SVDReducer(k, seed=seed).fit(X)
    left = reducer.transform(X)  # rows: U_k S_k in artist_order
    a_index = {a: i for i, a in enumerate(g.artist_order)}
    v_index = {v: j for j, v in enumerate(g.venue_order)}
    scores = {}
    for a, v in pairs:
        if a not in a_index or v not in v_index:
            raise GigmineError(f"cannot SVD-score pair with unknown node: ({a!r}, {v!r})")
        scores[(a, v)] = float(left[a_index[a]] @ reducer.components_[v_index[v]])
    return LinkScoreTable("svd", scores)


def build_score_tables(
    g: BipartiteGraph,
    pairs: Sequence[tuple],
    predictors: Sequence[str] = ALL_PREDICTORS,
    svd_k: int = SVD_RANK,
    seed: int = 0,
    walks_per_node: int = 40,
    walk_length: int = 10,
    embed_dim: int = 128,
    embed_window: int = 5,
    embed_epochs: int = 5,
) -> dict[str, LinkScoreTable]:
    """Score the same candidate pairs under each requested predictor.

    Model-based predictors (svd, embedding) are fitted once on ``g`` and
    reused across pairs. Candidate pairs must not be training edges.
    """
    for p in pairs:
        if g.has_edge(*p):
            raise GigmineError(f"candidate pair {p} is already a training edge")
    tables = {}
    for name in predictors:
        if name in _PAIR_PREDICTORS:
            fn = _PAIR_PREDICTORS[name]
            tables[name] = LinkScoreTable(
                name, {p: float(fn(g, *p)) for p in pairs}
            )
        elif name == "svd":
            tables[name] = score_svd(g, pairs, k=svd_k, seed=seed)
        elif name == "embedding":
            walks = sample_walks(
                g, walks_per_node=walks_per_node, length=walk_length, seed=seed
            )
            emb = train_embeddings(
                walks,
                dim=embed_dim,
                window=embed_window,
                epochs=embed_epochs,
                seed=seed,
            )
            tables[name] = LinkScoreTable(
                name, {p: score_embedding(emb, *p) for p in pairs}
            )
        else:
            raise GigmineError(f"unknown predictor: {name!r}")
    return tables


def evaluate_linkpred(
    table: LinkScoreTable, positives: Iterable[tuple], negatives: Iterable[tuple]
) -> float:
    """Rank-based ROC AUC of the table's scores on the labeled pairs."""
    positives, negatives = set(positives), set(negatives)
    overlap = positives & negatives
    if overlap:
        raise GigmineError(f"positives and negatives overlap: {sorted(overlap)[:3]}")
    if not positives or not negatives:
        raise GigmineError("need at least one positive and one negative pair")
    missing = [p for p in list(positives) + list(negatives) if p not in table.scores]
    if missing:
        raise GigmineError(
            f"{table.predictor}: {len(missing)} pairs unscored, e.g. {missing[0]}"
        )
    pairs = sorted(positives, key=str) + sorted(negatives, key=str)
    scores = [table.scores[p] for p in pairs]
    labels = [True] * len(positives) + [False] * len(negatives)
    return roc_auc(scores, labels)


def sample_negative_pairs(
    g: BipartiteGraph,
    n: int,
    exclude: Iterable[tuple] = (),
    seed: int = 0,
    exhaustive: bool = False,
) -> list[tuple]:
    """Uniform (artist, venue) pairs that are neither edges nor excluded.

    Draws up to ``n`` distinct non-edges with a seeded generator; asks for
    more than exist and you get them all. ``exhaustive=True`` skips sampling
    and enumerates every candidate, which only makes sense at desk scale.
    """
    banned = set(g.edges) | set(exclude)
    n_a, n_v = len(g.artist_order), len(g.venue_order)
    available = n_a * n_v - sum(
        1 for (a, v) in banned if g.has_node(a) and g.has_node(v)
    )
    if available <= 0:
        raise GigmineError("graph has no candidate non-edges")
    if exhaustive or n >= available:
        return [
            (a, v)
            for a in g.artist_order
            for v in g.venue_order
            if (a, v) not in banned
        ]
    rng = np.random.default_rng(seed)
    if n > available // 2:
        # rejection sampling stalls when most candidates are wanted
        all_pairs = [
            (a, v)
            for a in g.artist_order
            for v in g.venue_order
            if (a, v) not in banned
        ]
        idx = rng.choice(len(all_pairs), size=n, replace=False)
        return [all_pairs[i] for i in idx]
    chosen: dict[tuple, None] = {}
    while len(chosen) < n:
        k = (n - len(chosen)) * 2 + 16
        ai = rng.integers(n_a, size=k)
        vi = rng.integers(n_v, size=k)
        for i, j in zip(ai, vi):
            pair = (g.artist_order[i], g.venue_order[j])
            if pair in banned or pair in chosen:
                continue
            chosen[pair] = None
            if len(chosen) == n:
                break
    return list(chosen)


def run_task2(
    corpus,
    predictors: Sequence[str] = ALL_PREDICTORS,
    split: Optional[SplitSpec] = None,
    hidden_fraction: float = 0.20,
    n_random_splits: int = 3,
    core_k: int = 5,
    svd_k: int = SVD_RANK,
    neg_multiple: int = NEG_MULTIPLE,
    neg_floor: int = NEG_FLOOR,
    exhaustive_negatives: bool = False,
    seed: int = 0,
    **embed_params,
) -> dict:
    """Both link-prediction configurations on one corpus.

    Forecasting: temporal split, AUC per predictor. Prediction: the same
    training graph with a random fraction of edges hidden, averaged over
    ``n_random_splits`` seeded repeats. Negative pairs are sampled per
    evaluation as max(neg_multiple * positives, neg_floor) non-edges.
    """
    split = split or SplitSpec(kind="temporal", seed=seed)
    temporal = make_temporal_split(corpus, split, core_k=core_k)
    g = temporal.train_graph
    positives = temporal.test_pairs

    def n_negatives(n_pos: int) -> int:
        return max(neg_multiple * n_pos, neg_floor)

    negatives = sample_negative_pairs(
        g,
        n_negatives(len(positives)),
        exclude=positives,
        seed=seed,
        exhaustive=exhaustive_negatives,
    )
    candidates = sorted(positives, key=str) + list(negatives)
    tables = build_score_tables(
        g, candidates, predictors, svd_k=svd_k, seed=seed, **embed_params
    )
    forecasting = {
        name: evaluate_linkpred(tables[name], positives, negatives)
        for name in predictors
    }

    prediction_runs: dict[str, list[float]] = {name: [] for name in predictors}
    full_edges = set(g.edges)
    for s in range(n_random_splits):
        rspec = SplitSpec(
            kind="random", hidden_fraction=hidden_fraction, seed=seed + s
        )
        train_g, hidden = make_random_split(g, rspec)
        negs = sample_negative_pairs(
            train_g,
            n_negatives(len(hidden)),
            exclude=full_edges,
            seed=seed + s,
            exhaustive=exhaustive_negatives,
        )
        cands = sorted(hidden, key=str) + list(negs)
        split_tables = build_score_tables(
            train_g, cands, predictors, svd_k=svd_k, seed=seed + s, **embed_params
        )
        for name in predictors:
            prediction_runs[name].append(
                evaluate_linkpred(split_tables[name], hidden, negs)
            )

    return {
        "task": "linkpred",
        "split": temporal.stats,
        "negative_sampling": {
            "multiple": neg_multiple,
            "floor": neg_floor,
            "exhaustive": exhaustive_negatives,
            "forecasting_negatives": len(negatives),
        },
        "random_splits": n_random_splits,
        "hidden_fraction": hidden_fraction,
        "svd_k": svd_k,
        "seed": seed,
        "forecasting": forecasting,
        "prediction": {
            name: {
                "mean": float(np.mean(runs)),
                "per_split": runs,
            }
            for name, runs in prediction_runs.items()
        },
    }

"""Brute-force reference implementations used to check the real code.

Everything here is written from first principles against the definitions,
favoring obviousness over speed: direct set arithmetic, O(P*N) pair counting,
dense linear solves. Unit and acceptance tests compare the package against
these, so nothing in this file may import the functions it is checking.
"""

from __future__ import annotations

import numpy as np

from gigmine.graph import BipartiteGraph, EdgeInfo


# -- random graphs -------------------------------------------------------------


def random_bipartite(rng, n_a: int, n_v: int, density: float) -> BipartiteGraph:
    """Seeded random bipartite graph with roughly the given edge density."""
    artists = [f"a{i}" for i in range(n_a)]
    venues = [f"v{j}" for j in range(n_v)]
    edges = {}
    for i in range(n_a):
        for j in range(n_v):
            if rng.random() < density:
                edges[(artists[i], venues[j])] = EdgeInfo(
                    count=int(rng.integers(1, 6)),
                    first_year=int(rng.integers(2008, 2018)),
                )
    return BipartiteGraph(artists, venues, edges)


# -- neighborhood / heuristic oracles -------------------------------------------


def neighbors_of(edge_pairs, node) -> set:
    out = set()
    for a, v in edge_pairs:
        if a == node:
            out.add(v)
        elif v == node:
            out.add(a)
    return out


def two_hop_of(edge_pairs, node) -> set:
    out = set()
    for nbr in neighbors_of(edge_pairs, node):
        out |= neighbors_of(edge_pairs, nbr)
    return out


def cn_oracle(edge_pairs, u, v) -> int:
    left = two_hop_of(edge_pairs, u) & neighbors_of(edge_pairs, v)
    right = two_hop_of(edge_pairs, v) & neighbors_of(edge_pairs, u)
    return len(left | right)


def jaccard_oracle(edge_pairs, u, v) -> float:
    union = (
        two_hop_of(edge_pairs, u)
        | neighbors_of(edge_pairs, v)
        | two_hop_of(edge_pairs, v)
        | neighbors_of(edge_pairs, u)
    )
    if not union:
        return 0.0
    return cn_oracle(edge_pairs, u, v) / len(union)


def pa_oracle(edge_pairs, u, v) -> int:
    return len(neighbors_of(edge_pairs, u)) * len(neighbors_of(edge_pairs, v))


# -- metric oracles --------------------------------------------------------------


def pairwise_auc(scores, labels) -> float:
    """AUC as the literal probability a positive outranks a negative."""
    scores = np.asarray(scores, dtype=float)
    labels = np.asarray(labels, dtype=bool)
    pos = scores[labels]
    neg = scores[~labels]
    wins = 0.0
    for p in pos:
        for n in neg:
            if p > n:
                wins += 1.0
            elif p == n:
                wins += 0.5
    return wins / (len(pos) * len(neg))


def confusion_prf(scores, labels, threshold=0.5):
    """Precision/recall/F1 by explicit confusion-matrix counting."""
    tp = fp = fn = 0
    for s, y in zip(scores, labels):
        pred = s >= threshold
        if pred and y:
            tp += 1
        elif pred and not y:
            fp += 1
        elif not pred and y:
            fn += 1
    p = tp / (tp + fp) if tp + fp else 0.0
    r = tp / (tp + fn) if tp + fn else 0.0
    f1 = 2 * p * r / (p + r) if p + r else 0.0
    return p, r, f1


# -- birank oracle -----------------------------------------------------------------


def dense_birank_oracle(g: BipartiteGraph, weights, u0, p0, alpha, beta):
    """Fixed point by dense linear solve, no iteration.

    Substituting one update into the other gives
    (I - alpha*beta*S*S^T) u = alpha*(1-beta)*S*p0 + (1-alpha)*u0,
    which is uniquely solvable because ||S||_2 <= 1 and alpha*beta < 1.
    """
    na, nv = len(g.artist_order), len(g.venue_order)
    W = np.zeros((na, nv))
    ai = {a: i for i, a in enumerate(g.artist_order)}
    vj = {v: j for j, v in enumerate(g.venue_order)}
    for (a, v), w in weights.items():
        W[ai[a], vj[v]] = w
    du = W.sum(axis=1)
    dp = W.sum(axis=0)
    su = np.where(du > 0, du, 1.0) ** -0.5 * (du > 0)
    sp = np.where(dp > 0, dp, 1.0) ** -0.5 * (dp > 0)
    S = np.diag(su) @ W @ np.diag(sp)
    u0 = np.asarray(u0, dtype=float)
    p0 = np.asarray(p0, dtype=float)
    A = np.eye(na) - alpha * beta * (S @ S.T)
    u = np.linalg.solve(A, alpha * (1 - beta) * (S @ p0) + (1 - alpha) * u0)
    p = beta * (S.T @ u) + (1 - beta) * p0
    return u, p


# -- power-law tail fit --------------------------------------------------------------


def mle_tail_exponent(counts, k_min) -> float:
    """Continuous-approximation maximum-likelihood exponent for discrete data."""
    k = np.asarray([c for c in counts if c >= k_min], dtype=float)
    return 1.0 + len(k) / np.sum(np.log(k / (k_min - 0.5)))


# -- route counting -------------------------------------------------------------------


def raw_ngram_counts(sequences, n) -> dict:
    """Plain directional n-gram counts, no merging."""
    out: dict = {}
    for seq in sequences:
        for i in range(len(seq) - n + 1):
            gram = tuple(seq[i : i + n])
            out[gram] = out.get(gram, 0) + 1
    return out

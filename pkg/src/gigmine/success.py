"""Forecasting artist success from venue-affiliation features.

The feature matrix has one row per artist and one column per venue; entries
count the artist's concerts at that venue (binary and log variants are
available). For successful artists the forecasting variant truncates history
to events dated strictly before the change point, so the model only ever sees
what preceded success.

Three models are evaluated: an activity baseline (row sum scaled by the
maximum row sum), L2-regularized logistic regression on the raw matrix, and
the same classifier on a truncated-SVD reduction. Hyperparameters are tuned
by stratified cross-validation on F1.
"""

from __future__ import annotations

import datetime as dt
from dataclasses import dataclass, field
from typing import Mapping, Optional, Sequence

import numpy as np
import scipy.optimize
import scipy.sparse as sp
import scipy.sparse.linalg
import scipy.special

from gigmine.errors import GigmineError
from gigmine.metrics import precision_recall_f1, roc_auc

C_GRID = (0.01, 0.1, 1.0, 10.0, 100.0)
K_GRID = (250, 500, 750, 1000)


def truncate_events(corpus, labels: Mapping) -> list:
    """Censor successful artists' histories at their change point.

    Keeps every event of a never-successful artist and only events dated
    strictly before the change point for successful ones.
    """
    out = []
    for ev in corpus.events:
        lab = labels.get(ev.artist_id)
        cp = lab.change_point if lab is not None else None
        if cp is None or ev.date < cp:
            out.append(ev)
    return out


def build_features(
    events: Sequence,
    artist_order: Sequence[str],
    venue_order: Sequence[str],
    mode: str = "count",
) -> sp.csr_matrix:
    """Artist-by-venue affiliation matrix in the given row/column order.

    mode "count" stores event counts, "binary" presence flags, and "log"
    log(1 + count). Events touching an artist or venue absent from the
    given orders are ignored, which is what history truncation relies on.
    """
    if mode not in ("count", "binary", "log"):
        raise GigmineError(f"unknown affiliation mode: {mode!r}")
    a_index = {a: i for i, a in enumerate(artist_order)}
    v_index = {v: j for j, v in enumerate(venue_order)}
    rows, cols = [], []
    for ev in events:
        i = a_index.get(ev.artist_id)
        j = v_index.get(ev.venue_id)
        if i is None or j is None:
            continue
        rows.append(i)
        cols.append(j)
    data = np.ones(len(rows))
    mat = sp.csr_matrix(
        (data, (rows, cols)), shape=(len(artist_order), len(venue_order))
    )
    mat.sum_duplicates()
    if mode == "binary":
        mat.data[:] = 1.0
    elif mode == "log":
        mat.data = np.log1p(mat.data)
    return mat


def baseline_scores(X) -> np.ndarray:
    """Total activity scaled into [0, 1] by the busiest row."""
    totals = np.asarray(X.sum(axis=1)).ravel()
    top = totals.max() if totals.size else 0.0
    if top <= 0:
        return np.zeros_like(totals, dtype=float)
    return totals / top


class SVDReducer:
    """Rank-k truncated SVD fitted on one matrix, applied to others.

    ``fit`` factors the training matrix; ``transform`` projects any matrix
    with the same columns onto the fitted right singular vectors, so the
    training rows map to their left-singular coordinates scaled by the
    singular values and held-out rows never influence the basis.
    """

    def __init__(self, k: int, seed: int = 0):
        if k < 1:
            raise GigmineError(f"rank must be positive, got {k}")
        self.k = k
        self.seed = seed
        self.components_: Optional[np.ndarray] = None  # (n_cols, k)
        self.singular_values_: Optional[np.ndarray] = None

    def fit(self, X) -> "SVDReducer":
        n, m = X.shape
        if self.k > min(n, m):
            raise GigmineError(
                f"rank {self.k} exceeds matrix dimensions {X.shape}"
            )
        if self.k < min(n, m):
            rng = np.random.default_rng(self.seed)
            v0 = rng.standard_normal(min(n, m))
            u, s, vt = sp.linalg.svds(
                sp.csr_matrix(X, dtype=float), k=self.k, v0=v0
            )
            order = np.argsort(s)[::-1]
            s, vt = s[order], vt[order]
        else:
            # the iterative solver needs k < min(n, m); full rank goes dense
            dense = X.toarray() if sp.issparse(X) else np.asarray(X, dtype=float)
            u, s, vt = np.linalg.svd(dense, full_matrices=False)
            s, vt = s[: self.k], vt[: self.k]
        # fix the sign ambiguity so repeated fits agree bit for bit
        flip = np.sign(vt[np.arange(vt.shape[0]), np.argmax(np.abs(vt), axis=1)])
        flip[flip == 0] = 1.0
        self.components_ = (vt * flip[:, None]).T
        self.singular_values_ = s
        return self

    def transform(self, X) -> np.ndarray:
        if self.components_ is None:
            raise GigmineError("reducer is not fitted")
        return np.asarray(X @ self.components_)


def svd_reduce(X, k: int, seed: int = 0) -> np.ndarray:
    """Rank-k coordinates of X's own rows (fit and transform in one step)."""
    return SVDReducer(k, seed=seed).fit(X).transform(X)


@dataclass
class LogregModel:
    weights: np.ndarray
    intercept: float
    C: float
    loss_history: list = field(default_factory=list)
    converged: bool = False
    n_iter: int = 0


def logreg_loss_grad(params: np.ndarray, X, y: np.ndarray, C: float):
    """Mean negative log-likelihood plus ||w||^2 / (2C); intercept unpenalized.

    Averaging the data term keeps the objective invariant under duplicating
    every row, so C means the same thing at any corpus size.
    """
    w, b = params[:-1], params[-1]
    n = X.shape[0]
    margins = np.asarray(X @ w).ravel() + b
    z = np.where(y, 1.0, -1.0)
    loss = np.logaddexp(0.0, -z * margins).mean() + (w @ w) / (2.0 * C)
    p = scipy.special.expit(margins)
    resid = (p - y) / n
    grad_w = np.asarray(X.T @ resid).ravel() + w / C
    grad_b = resid.sum()
    return loss, np.concatenate([grad_w, [grad_b]])


def train_logreg(
    X,
    y,
    C: float = 1.0,
    max_iter: int = 1000,
    grad_tol: float = 1e-6,
) -> LogregModel:
    """Fit L2-regularized logistic regression with a quasi-Newton solver.

    The loss history holds the objective at each accepted iterate (starting
    point included), so it is non-increasing; ``converged`` reports whether
    the gradient dropped below tolerance within the iteration budget.
    """
    if C <= 0:
        raise GigmineError(f"regularization strength C must be positive, got {C}")
    y = np.asarray(y, dtype=float).ravel()
    if X.shape[0] != y.size:
        raise GigmineError(f"X has {X.shape[0]} rows but y has {y.size} labels")
    x0 = np.zeros(X.shape[1] + 1)
    history = [logreg_loss_grad(x0, X, y, C)[0]]

    def record(params):
        history.append(logreg_loss_grad(params, X, y, C)[0])

    result = scipy.optimize.minimize(
        logreg_loss_grad,
        x0,
        args=(X, y, C),
        jac=True,
        method="L-BFGS-B",
        callback=record,
        options={"maxiter": max_iter, "gtol": grad_tol, "ftol": 0.0},
    )
    return LogregModel(
        weights=result.x[:-1],
        intercept=float(result.x[-1]),
        C=C,
        loss_history=history,
        converged=bool(result.success),
        n_iter=int(result.nit),
    )


def predict_proba(model: LogregModel, X) -> np.ndarray:
    margins = np.asarray(X @ model.weights).ravel() + model.intercept
    return scipy.special.expit(margins)


def stratified_split(y: np.ndarray, test_fraction: float, seed: int):
    """Index arrays (train, test) with the class ratio preserved per side."""
    y = np.asarray(y, dtype=bool)
    rng = np.random.default_rng(seed)
    train, test = [], []
    for cls in (False, True):
        idx = np.flatnonzero(y == cls)
        idx = idx[rng.permutation(idx.size)]
        n_test = int(round(test_fraction * idx.size))
        test.append(idx[:n_test])
        train.append(idx[n_test:])
    return np.sort(np.concatenate(train)), np.sort(np.concatenate(test))


def stratified_folds(y: np.ndarray, n_folds: int, seed: int):
    """Deal each class round-robin into ``n_folds`` disjoint index arrays."""
    y = np.asarray(y, dtype=bool)
    rng = np.random.default_rng(seed)
    folds: list[list[int]] = [[] for _ in range(n_folds)]
    for cls in (False, True):
        idx = np.flatnonzero(y == cls)
        idx = idx[rng.permutation(idx.size)]
        for pos, i in enumerate(idx):
            folds[pos % n_folds].append(int(i))
    return [np.sort(np.asarray(f, dtype=int)) for f in folds]


def _metric_block(scores, y_true, threshold):
    p, r, f1 = precision_recall_f1(scores, y_true, threshold=threshold)
    return {"precision": p, "recall": r, "f1": f1, "auc": roc_auc(scores, y_true)}


def _mean_blocks(blocks):
    keys = ("precision", "recall", "f1", "auc")
    return {k: float(np.mean([b[k] for b in blocks])) for k in keys}


def _tune_C(X, y, c_grid, folds, threshold):
    best_c, best_f1 = None, -1.0
    for C in c_grid:
        f1s = []
        for i, test_idx in enumerate(folds):
            train_idx = np.sort(np.concatenate([f for j, f in enumerate(folds) if j != i]))
            model = train_logreg(X[train_idx], y[train_idx], C=C)
            scores = predict_proba(model, X[test_idx])
            _, _, f1 = precision_recall_f1(scores, y[test_idx], threshold=threshold)
            f1s.append(f1)
        mean_f1 = float(np.mean(f1s))
        if mean_f1 > best_f1:
            best_c, best_f1 = C, mean_f1
    return best_c, best_f1


def _tune_C_k(X, y, c_grid, k_grid, folds, threshold, seed):
    """Joint (C, k) grid search sharing one SVD per fold.

    The rank-k basis for a smaller k is a prefix of the larger one from the
    same fit, so each fold is factored once at the largest feasible rank.
    """
    k_grid = sorted(k_grid)
    per_fold = []
    for i, test_idx in enumerate(folds):
        train_idx = np.sort(np.concatenate([f for j, f in enumerate(folds) if j != i]))
        cap = min(len(train_idx), X.shape[1])
        ks = [k for k in k_grid if k <= cap]
        if not ks:
            ks = [cap]
        reducer = SVDReducer(max(ks), seed=seed).fit(X[train_idx])
        per_fold.append((train_idx, test_idx, reducer, ks))
    feasible = sorted(set.intersection(*(set(f[3]) for f in per_fold)))
    best, best_f1 = None, -1.0
    for k in feasible:
        fold_feats = []
        for train_idx, test_idx, reducer, _ in per_fold:
            Vk = reducer.components_[:, :k]
            fold_feats.append((np.asarray(X[train_idx] @ Vk), np.asarray(X[test_idx] @ Vk)))
        for C in c_grid:
            f1s = []
            for (ftr, fte), (train_idx, test_idx, _, _) in zip(fold_feats, per_fold):
                model = train_logreg(ftr, y[train_idx], C=C)
                scores = predict_proba(model, fte)
                _, _, f1 = precision_recall_f1(scores, y[test_idx], threshold=threshold)
                f1s.append(f1)
            mean_f1 = float(np.mean(f1s))
            if mean_f1 > best_f1:
                best, best_f1 = (C, k), mean_f1
    return best, best_f1


def run_task1(
    corpus,
    labels: Mapping,
    mode: str = "count",
    n_splits: int = 3,
    test_fraction: float = 0.2,
    cv_folds: int = 3,
    threshold: float = 0.5,
    c_grid: Sequence[float] = C_GRID,
    k_grid: Sequence[int] = K_GRID,
    seed: int = 0,
) -> dict:
    """Full forecasting evaluation: baseline, logreg, and logreg on SVD features.

    Censors successful artists' events at the change point, builds the
    affiliation matrix, then averages test metrics over ``n_splits`` seeded
    stratified 80/20 splits. C (and the SVD rank) are re-tuned inside each
    split by stratified cross-validation on F1.
    """
    artist_order = sorted(corpus.artist_events, key=str)
    events = truncate_events(corpus, labels)
    venue_order = sorted({ev.venue_id for ev in events}, key=str)
    if not venue_order:
        raise GigmineError("no events remain after change-point truncation")
    X = build_features(events, artist_order, venue_order, mode=mode)
    y = np.array([labels[a].successful for a in artist_order], dtype=bool)
    if not y.any() or y.all():
        raise GigmineError("forecasting needs both successful and unsuccessful artists")

    per_model: dict[str, list] = {"baseline": [], "logreg": [], "logreg_svd": []}
    chosen = []
    for s in range(n_splits):
        split_seed = seed + s
        train_idx, test_idx = stratified_split(y, test_fraction, split_seed)
        folds = stratified_folds(y[train_idx], cv_folds, split_seed)

        base = baseline_scores(X[test_idx])
        per_model["baseline"].append(_metric_block(base, y[test_idx], threshold))

        best_c, _ = _tune_C(X[train_idx], y[train_idx], c_grid, folds, threshold)
        model = train_logreg(X[train_idx], y[train_idx], C=best_c)
        per_model["logreg"].append(
            _metric_block(predict_proba(model, X[test_idx]), y[test_idx], threshold)
        )

        (svd_c, svd_k), _ = _tune_C_k(
            X[train_idx], y[train_idx], c_grid, k_grid, folds, threshold, split_seed
        )
        cap = min(len(train_idx), X.shape[1])
        k_fit = min(svd_k, cap)
        reducer = SVDReducer(k_fit, seed=split_seed).fit(X[train_idx])
        model = train_logreg(reducer.transform(X[train_idx]), y[train_idx], C=svd_c)
        per_model["logreg_svd"].append(
            _metric_block(
                predict_proba(model, reducer.transform(X[test_idx])), y[test_idx], threshold
            )
        )
        chosen.append({"split_seed": split_seed, "C": best_c, "svd_C": svd_c, "svd_k": k_fit})

    return {
        "task": "forecasting",
        "n_artists": len(artist_order),
        "n_venues": len(venue_order),
        "n_positives": int(y.sum()),
        "mode": mode,
        "splits": n_splits,
        "seed": seed,
        "selected": chosen,
        "models": {
            name: {"mean": _mean_blocks(blocks), "per_split": blocks}
            for name, blocks in per_model.items()
        },
    }

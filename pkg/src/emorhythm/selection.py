"""Information-gain-ratio feature ranking with MDL discretization.

Numeric attributes are discretized with the Fayyad-Irani recursive MDL
criterion (equal-frequency binning is available as a fallback), scored with
the base-2 gain ratio, and ranked by the mean score over stratified
cross-validation folds. A forward sweep over the ranked list finds the
feature count with the best cross-validated accuracy.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .corpus import LabeledDataset
from .evaluation import cross_validate, stratified_folds


class TooFewInstances(ValueError):
    """A class has fewer instances than requested folds."""


def _entropy(counts: np.ndarray) -> float:
    """Base-2 entropy of a count vector."""
    counts = np.asarray(counts, dtype=np.float64)
    total = counts.sum()
    if total <= 0:
        return 0.0
    p = counts[counts > 0] / total
    return float(-np.sum(p * np.log2(p)))


def _row_entropies(count_rows: np.ndarray) -> np.ndarray:
    """Base-2 entropy of every row of a count matrix."""
    totals = count_rows.sum(axis=1, keepdims=True)
    with np.errstate(divide="ignore", invalid="ignore"):
        p = np.where(totals > 0, count_rows / np.maximum(totals, 1), 0.0)
        logs = np.where(p > 0, np.log2(np.where(p > 0, p, 1.0)), 0.0)
    return -np.sum(p * logs, axis=1)


def mdl_discretize(values, labels) -> np.ndarray:
    """Fayyad-Irani MDL cut points (sorted, possibly empty).

    Splits are placed at midpoints between adjacent distinct values and
    accepted only when the information gain beats the MDL coding cost;
    accepted halves are split recursively.
    """
    v = np.asarray(values, dtype=np.float64)
    _, y = np.unique(np.asarray(labels), return_inverse=True)
    if len(v) != len(y):
        raise ValueError("values and labels must have the same length")
    n_classes = int(y.max()) + 1 if len(y) else 0
    order = np.argsort(v, kind="mergesort")
    vs, ys = v[order], y[order]
    onehot = np.zeros((len(vs), n_classes))
    if len(vs):
        onehot[np.arange(len(vs)), ys] = 1.0

    cuts: list[float] = []

    def split(lo: int, hi: int) -> None:
        n = hi - lo
        if n < 2:
            return
        seg_v = vs[lo:hi]
        cum = np.cumsum(onehot[lo:hi], axis=0)
        total = cum[-1]
        h_all = _entropy(total)
        if h_all == 0.0:
            return
        boundaries = np.flatnonzero(seg_v[1:] != seg_v[:-1]) + 1
        if len(boundaries) == 0:
            return
        left = cum[boundaries - 1]
        right = total - left
        n_left = boundaries.astype(np.float64)
        n_right = n - n_left
        h_left = _row_entropies(left)
        h_right = _row_entropies(right)
        gains = h_all - (n_left / n) * h_left - (n_right / n) * h_right
        best = int(np.argmax(gains))
        gain = float(gains[best])
        p = int(boundaries[best])

        k = int(np.count_nonzero(total))
        k1 = int(np.count_nonzero(left[best]))
        k2 = int(np.count_nonzero(right[best]))
        delta = np.log2(3.0**k - 2.0) - (k * h_all - k1 * h_left[best] - k2 * h_right[best])
        threshold = (np.log2(n - 1.0) + delta) / n
        if gain <= threshold:
            return
        cuts.append(float((seg_v[p - 1] + seg_v[p]) / 2.0))
        split(lo, lo + p)
        split(lo + p, hi)

    split(0, len(vs))
    return np.asarray(sorted(cuts))


def equal_frequency_cuts(values, n_bins: int = 10) -> np.ndarray:
    """Quantile cut points, deduplicated."""
    v = np.asarray(values, dtype=np.float64)
    if len(v) == 0 or n_bins < 2:
        return np.empty(0)
    qs = np.quantile(v, np.arange(1, n_bins) / n_bins)
    return np.unique(qs)


def apply_cuts(values, cuts) -> np.ndarray:
    """Bin index per value: bin b holds cuts[b-1] <= value < cuts[b]."""
    return np.digitize(np.asarray(values, dtype=np.float64), np.asarray(cuts))


def gain_ratio(binned, labels) -> float:
    """Information gain over split entropy, base 2, clipped to [0, 1].

    Returns 0 when the attribute has a single bin (zero split information).
    """
    b = np.asarray(binned)
    _, y = np.unique(np.asarray(labels), return_inverse=True)
    _, b_idx = np.unique(b, return_inverse=True)
    n = len(y)
    if n == 0:
        return 0.0
    n_bins = int(b_idx.max()) + 1
    n_classes = int(y.max()) + 1
    table = np.zeros((n_bins, n_classes))
    np.add.at(table, (b_idx, y), 1.0)
    bin_counts = table.sum(axis=1)
    h_bins = _entropy(bin_counts)
    if h_bins == 0.0:
        return 0.0
    h_class = _entropy(table.sum(axis=0))
    h_cond = float(np.sum(bin_counts / n * _row_entropies(table)))
    return float(np.clip((h_class - h_cond) / h_bins, 0.0, 1.0))


def igr_score(values, labels, method: str = "mdl", n_bins: int = 10) -> float:
    """Gain ratio of one numeric attribute after discretization."""
    if method == "mdl":
        cuts = mdl_discretize(values, labels)
    elif method == "eqfreq":
        cuts = equal_frequency_cuts(values, n_bins)
    else:
        raise ValueError(f"unknown discretization method {method!r}")
    return gain_ratio(apply_cuts(values, cuts), labels)


def score_features(X: np.ndarray, labels, method: str = "mdl", n_bins: int = 10) -> np.ndarray:
    """Per-column gain ratio of a feature matrix."""
    X = np.asarray(X, dtype=np.float64)
    return np.asarray([igr_score(X[:, j], labels, method, n_bins) for j in range(X.shape[1])])


@dataclass(frozen=True)
class RankedFeatures:
    """Feature order (best first), mean scores in schema order, per-fold orders."""

    order: np.ndarray
    scores: np.ndarray
    fold_orders: tuple[tuple[int, ...], ...]


def _descending_order(scores: np.ndarray) -> np.ndarray:
    # ties broken by schema index
    return np.lexsort((np.arange(len(scores)), -scores))


def rank_cv(
    dataset: LabeledDataset,
    folds: int = 10,
    seed: int = 0,
    method: str = "mdl",
    n_bins: int = 10,
) -> RankedFeatures:
    """Rank features by mean gain ratio over the training side of each fold.

    Raises:
        TooFewInstances: some class has fewer instances than folds.
    """
    labels = dataset.labels
    for cls in sorted(set(labels)):
        count = labels.count(cls)
        if count < folds:
            raise TooFewInstances(f"class {cls!r} has {count} instances, need >= {folds}")
    fold_sets = stratified_folds(labels, folds, seed)
    all_idx = np.arange(len(dataset))
    per_fold_scores = []
    fold_orders = []
    for test_idx in fold_sets:
        train_idx = np.setdiff1d(all_idx, test_idx)
        scores = score_features(
            dataset.X[train_idx], [labels[i] for i in train_idx], method, n_bins
        )
        per_fold_scores.append(scores)
        fold_orders.append(tuple(int(i) for i in _descending_order(scores)))
    mean_scores = np.mean(per_fold_scores, axis=0)
    return RankedFeatures(_descending_order(mean_scores), mean_scores, tuple(fold_orders))


@dataclass(frozen=True)
class SweepCurve:
    """Accuracy at each tried feature count; best_k is the smallest optimum."""

    points: tuple[tuple[int, float], ...]
    best_k: int


def sweep(
    dataset: LabeledDataset,
    ranking: RankedFeatures,
    ks,
    clf_cfg,
    folds: int = 10,
    seed: int = 0,
    repeats: int = 1,
    jobs: int = 1,
) -> SweepCurve:
    """Cross-validated accuracy of the top-k features for each k in ks."""
    d = len(ranking.order)
    ks = sorted({int(k) for k in ks})
    if not ks or ks[0] < 1 or ks[-1] > d:
        raise ValueError(f"feature counts must lie in [1, {d}]")
    points = []
    for k in ks:
        result = cross_validate(
            dataset, clf_cfg, repeats=repeats, folds=folds, seed=seed,
            feature_idx=ranking.order[:k], jobs=jobs,
        )
        points.append((k, result.accuracy))
    best_k = max(points, key=lambda p: (p[1], -p[0]))[0]
    return SweepCurve(tuple(points), best_k)

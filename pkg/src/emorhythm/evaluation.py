"""Stratified repeated cross-validation, confusion matrices, tasks and ablations.

The protocol is speaker dependent: folds stratify by class only, so a speaker
may appear on both sides of a split. Feature selection can run globally
("fixed": one ranking reused by every fold) or inside each training partition
("per-fold": unbiased but slower).
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .corpus import LabeledDataset
from .mlp import MlpConfig, predict_mlp_many, train_mlp
from .svm import SvmConfig, predict_svm_many, train_svm


class UnknownClass(KeyError):
    """Task refers to a label missing from the dataset."""


class EmptyClass(KeyError):
    """Recall requested for a class with no instances."""


class EmptySubset(ValueError):
    """Feature subset resolved to zero columns."""


HIGH_AROUSAL = ("happiness", "anger", "fear")
LOW_AROUSAL = ("boredom", "sadness", "disgust", "neutral")

ABLATION_SETS = {
    "MFCC only": ("mfcc_voiced", "mfcc_unvoiced"),
    "Loudness + Rhythm": ("loudness_voiced", "loudness_unvoiced", "rhythm_temporal"),
    "Loudness": ("loudness_voiced", "loudness_unvoiced"),
    "Except MFCC": ("loudness_voiced", "loudness_unvoiced", "pitch", "energy",
                    "rhythm_temporal"),
    "Rhythm only": ("rhythm_temporal",),
    "MFCC + Rhythm": ("mfcc_voiced", "mfcc_unvoiced", "rhythm_temporal"),
    "MFCC unvoiced": ("mfcc_unvoiced",),
    "MFCC voiced": ("mfcc_voiced",),
}


@dataclass
class ConfusionMatrix:
    """Rows are true classes, columns predicted."""

    classes: tuple[str, ...]
    counts: np.ndarray

    @classmethod
    def empty(cls, classes) -> "ConfusionMatrix":
        k = len(classes)
        return cls(tuple(classes), np.zeros((k, k), dtype=np.int64))

    def record(self, true_label: str, predicted: str) -> None:
        i = self.classes.index(true_label)
        j = self.classes.index(predicted)
        self.counts[i, j] += 1

    def merge(self, other: "ConfusionMatrix") -> None:
        if other.classes != self.classes:
            raise UnknownClass("confusion matrices disagree on class order")
        self.counts += other.counts

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    @property
    def accuracy(self) -> float:
        total = self.total
        return float(np.trace(self.counts) / total) if total else 0.0


def per_class_recall(cm: ConfusionMatrix) -> dict[str, float]:
    """Diagonal over row sum per class; classes with no instances are absent."""
    out = {}
    for i, cls in enumerate(cm.classes):
        row = cm.counts[i].sum()
        if row > 0:
            out[cls] = float(cm.counts[i, i] / row)
    return out


def stratified_folds(labels, k: int = 10, seed: int = 0) -> list[np.ndarray]:
    """k disjoint index sets with per-class counts differing by at most one.

    Instances of each class are shuffled and dealt to consecutive folds
    through a running cursor, which also keeps overall fold sizes balanced.
    """
    labels = list(labels)
    rng = np.random.default_rng(seed)
    folds: list[list[int]] = [[] for _ in range(k)]
    cursor = 0
    for cls in sorted(set(labels)):
        idx = np.flatnonzero(np.asarray(labels, dtype=object) == cls)
        rng.shuffle(idx)
        for i in idx:
            folds[cursor % k].append(int(i))
            cursor += 1
    return [np.asarray(sorted(f), dtype=int) for f in folds]


def make_task(dataset: LabeledDataset, kind: str, pair=None) -> LabeledDataset:
    """Derive a task dataset: 'seven' (as is), 'pair' (two classes), 'arousal'.

    Raises:
        UnknownClass: requested pair labels missing, or arousal relabeling hits
            a label outside the seven-class inventory.
    """
    if kind == "seven":
        return dataset
    if kind == "pair":
        a, b = pair
        present = set(dataset.labels)
        if a not in present or b not in present:
            raise UnknownClass(f"pair ({a}, {b}) not present in dataset")
        keep = [i for i, lab in enumerate(dataset.labels) if lab in (a, b)]
        return dataset.subset(keep)
    if kind == "arousal":
        mapping = {c: "high" for c in HIGH_AROUSAL}
        mapping.update({c: "low" for c in LOW_AROUSAL})
        try:
            relabeled = [mapping[lab] for lab in dataset.labels]
        except KeyError as err:
            raise UnknownClass(f"label {err} has no arousal cluster") from None
        out = dataset.subset(range(len(dataset)))
        out.labels = relabeled
        return out
    raise ValueError(f"unknown task kind {kind!r}")


def binary_pair_tasks(classes) -> list[tuple[str, str]]:
    """All unordered class pairs in class order."""
    return list(combinations(sorted(classes), 2))


@dataclass
class CvResult:
    confusion: ConfusionMatrix
    accuracy: float
    std: float
    repeat_accuracies: tuple[float, ...]


def _fit(clf_cfg, X, y, seed, classes):
    if isinstance(clf_cfg, SvmConfig):
        return train_svm(X, y, clf_cfg, seed=seed, classes=classes)
    if isinstance(clf_cfg, MlpConfig):
        return train_mlp(X, y, clf_cfg, seed=seed)
    raise TypeError(f"unsupported classifier config {type(clf_cfg).__name__}")


def _predict(model, X):
    if isinstance(model.config, SvmConfig):
        return predict_svm_many(model, X)
    return predict_mlp_many(model, X)


def _select_train_features(dataset, train_idx, select_k, selection_folds, seed, method):
    from . import selection  # local import; selection builds on this module

    ranking = selection.rank_cv(
        dataset.subset(train_idx), folds=selection_folds, seed=seed, method=method
    )
    return ranking.order[:select_k]


def _run_repeat(args) -> tuple[ConfusionMatrix, float]:
    (dataset, clf_cfg, folds, repeat_seed, base_seed, feature_idx, selection_mode,
     select_k, selection_folds, selection_method) = args
    classes = dataset.classes
    cm = ConfusionMatrix.empty(classes)
    fold_sets = stratified_folds(dataset.labels, folds, repeat_seed)
    X = dataset.X if feature_idx is None else dataset.X[:, feature_idx]
    y = dataset.labels
    for f, test_idx in enumerate(fold_sets):
        if len(test_idx) == 0:
            continue
        train_idx = np.setdiff1d(np.arange(len(dataset)), test_idx)
        X_train, X_test = X[train_idx], X[test_idx]
        if selection_mode == "per-fold":
            cols = _select_train_features(
                dataset, train_idx, select_k, selection_folds, repeat_seed, selection_method
            )
            X_train, X_test = X_train[:, cols], X_test[:, cols]
        trainer_seed = repeat_seed * 100 + f
        model = _fit(clf_cfg, X_train, [y[i] for i in train_idx], trainer_seed, classes)
        predictions = _predict(model, X_test)
        for i, pred in zip(test_idx, predictions):
            cm.record(y[i], pred)
    accuracy = cm.accuracy
    return cm, accuracy


def cross_validate(
    dataset: LabeledDataset,
    clf_cfg,
    repeats: int = 10,
    folds: int = 10,
    seed: int = 0,
    feature_idx=None,
    selection_mode: str = "none",
    select_k: int | None = None,
    ranking=None,
    selection_folds: int = 10,
    selection_method: str = "mdl",
    jobs: int = 1,
) -> CvResult:
    """Repeated stratified k-fold cross-validation.

    ``selection_mode``: 'none' uses ``feature_idx`` (or all columns); 'fixed'
    takes the top ``select_k`` of a precomputed ``ranking`` for every fold;
    'per-fold' recomputes the ranking on each training partition.
    """
    if feature_idx is not None:
        feature_idx = np.asarray(feature_idx, dtype=int)
        if feature_idx.size == 0:
            raise EmptySubset("empty feature subset")
    if selection_mode == "fixed":
        if ranking is None or select_k is None:
            raise ValueError("fixed selection needs ranking and select_k")
        feature_idx = np.asarray(ranking.order[:select_k], dtype=int)
    elif selection_mode == "per-fold":
        if select_k is None:
            raise ValueError("per-fold selection needs select_k")
        if feature_idx is not None:
            raise ValueError("per-fold selection cannot combine with feature_idx")
    elif selection_mode != "none":
        raise ValueError(f"unknown selection_mode {selection_mode!r}")

    tasks = [
        (dataset, clf_cfg, folds, seed + r, seed, feature_idx,
         selection_mode if selection_mode == "per-fold" else "none",
         select_k, selection_folds, selection_method)
        for r in range(repeats)
    ]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            outcomes = list(pool.map(_run_repeat, tasks))
    else:
        outcomes = [_run_repeat(t) for t in tasks]

    total = ConfusionMatrix.empty(dataset.classes)
    accs = []
    for cm, acc in outcomes:
        total.merge(cm)
        accs.append(acc)
    accs_arr = np.asarray(accs)
    return CvResult(total, float(np.mean(accs_arr)), float(np.std(accs_arr)), tuple(accs))


def family_feature_indices(schema, families) -> np.ndarray:
    """Sorted schema indices of the union of the named feature families.

    Raises:
        EmptySubset: no indices resolved.
    """
    idx: set[int] = set()
    for family in families:
        if family not in schema.family_indices:
            raise EmptySubset(f"unknown feature family {family!r}")
        idx.update(schema.family_indices[family])
    if not idx:
        raise EmptySubset(f"feature families {families!r} resolved to nothing")
    return np.asarray(sorted(idx), dtype=int)


def ablate(
    dataset: LabeledDataset,
    clf_cfg,
    sets=None,
    repeats: int = 10,
    folds: int = 10,
    seed: int = 0,
    jobs: int = 1,
) -> dict[str, CvResult]:
    """Cross-validated accuracy per named feature-family set."""
    sets = sets or ABLATION_SETS
    results = {}
    for name, families in sets.items():
        idx = family_feature_indices(dataset.schema, families)
        results[name] = cross_validate(
            dataset, clf_cfg, repeats=repeats, folds=folds, seed=seed,
            feature_idx=idx, jobs=jobs,
        )
    return results

"""Support vector machine trained with Platt's sequential minimal optimization.

Binary machines are trained on every unordered class pair (one-vs-one) and
combined by majority vote. Features are min-max normalized to [0, 1] with
bounds taken from the training data; prediction clamps into those bounds.
The kernel is a plain polynomial (x . z)^degree, so degree 1 is linear.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations

import numpy as np


class DegenerateClass(ValueError):
    """A class pair with no training instances on one side."""


class DimensionMismatch(ValueError):
    """Input vector width differs from the training schema."""


@dataclass(frozen=True)
class SvmConfig:
    C: float = 1.0
    kernel_degree: int = 1
    tolerance: float = 1e-3
    max_passes: int = 10

    def __post_init__(self):
        if self.C <= 0:
            raise ValueError("C must be positive")
        if self.kernel_degree < 1:
            raise ValueError("kernel_degree must be >= 1")


def poly_kernel(a: np.ndarray, b: np.ndarray, degree: int) -> np.ndarray:
    """(a . b)^degree between the rows of a and b."""
    return (a @ b.T) ** degree


class _Smo:
    """Binary SMO solver on a precomputed kernel matrix, labels in {-1, +1}.

    Follows Platt's two-loop working-set heuristic. The stop rule counts
    consecutive examine-all passes that change nothing and quits after
    ``max_passes`` of them.
    """

    _EPS = 1e-12

    def __init__(self, kernel, y, C, tol, max_passes, rng, track_objective=False):
        self.K = kernel
        self.y = y.astype(np.float64)
        self.C = float(C)
        self.tol = float(tol)
        self.max_passes = int(max_passes)
        self.rng = rng
        n = len(y)
        self.alpha = np.zeros(n)
        self.b = 0.0
        self.u = np.full(n, -self.b)  # current outputs sum_j y_j a_j K_ij - b
        self.objective_history: list[float] = [] if track_objective else None

    def objective(self) -> float:
        ay = self.alpha * self.y
        return float(np.sum(self.alpha) - 0.5 * ay @ self.K @ ay)

    def _take_step(self, i1: int, i2: int) -> bool:
        if i1 == i2:
            return False
        a1, a2 = self.alpha[i1], self.alpha[i2]
        y1, y2 = self.y[i1], self.y[i2]
        e1 = self.u[i1] - y1
        e2 = self.u[i2] - y2
        s = y1 * y2
        if s > 0:
            lo, hi = max(0.0, a1 + a2 - self.C), min(self.C, a1 + a2)
        else:
            lo, hi = max(0.0, a2 - a1), min(self.C, self.C + a2 - a1)
        if lo >= hi:
            return False
        k11, k12, k22 = self.K[i1, i1], self.K[i1, i2], self.K[i2, i2]
        eta = k11 + k22 - 2.0 * k12
        if eta > 0:
            a2_new = np.clip(a2 + y2 * (e1 - e2) / eta, lo, hi)
        else:
            # kernel not strictly PD on this pair: compare objective endpoints
            f1 = y1 * (e1 + self.b) - a1 * k11 - s * a2 * k12
            f2 = y2 * (e2 + self.b) - s * a1 * k12 - a2 * k22
            l1 = a1 + s * (a2 - lo)
            h1 = a1 + s * (a2 - hi)
            psi_lo = (l1 * f1 + lo * f2 + 0.5 * l1**2 * k11 + 0.5 * lo**2 * k22
                      + s * lo * l1 * k12)
            psi_hi = (h1 * f1 + hi * f2 + 0.5 * h1**2 * k11 + 0.5 * hi**2 * k22
                      + s * hi * h1 * k12)
            if psi_lo < psi_hi - self._EPS:
                a2_new = lo
            elif psi_lo > psi_hi + self._EPS:
                a2_new = hi
            else:
                a2_new = a2
        if abs(a2_new - a2) < self._EPS * (a2_new + a2 + self._EPS):
            return False
        a1_new = float(np.clip(a1 + s * (a2 - a2_new), 0.0, self.C))

        d1 = y1 * (a1_new - a1)
        d2 = y2 * (a2_new - a2)
        b1 = e1 + d1 * k11 + d2 * k12 + self.b
        b2 = e2 + d1 * k12 + d2 * k22 + self.b
        if 0.0 < a1_new < self.C:
            b_new = b1
        elif 0.0 < a2_new < self.C:
            b_new = b2
        else:
            b_new = (b1 + b2) / 2.0

        self.u += d1 * self.K[i1] + d2 * self.K[i2] - (b_new - self.b)
        self.alpha[i1], self.alpha[i2] = a1_new, a2_new
        self.b = b_new
        if self.objective_history is not None:
            self.objective_history.append(self.objective())
        return True

    def _examine(self, i2: int) -> int:
        y2 = self.y[i2]
        a2 = self.alpha[i2]
        e2 = self.u[i2] - y2
        r2 = e2 * y2
        if not ((r2 < -self.tol and a2 < self.C) or (r2 > self.tol and a2 > 0)):
            return 0
        non_bound = np.flatnonzero((self.alpha > 0) & (self.alpha < self.C))
        if len(non_bound) > 1:
            errors = self.u[non_bound] - self.y[non_bound]
            i1 = int(non_bound[np.argmax(np.abs(errors - e2))])
            if self._take_step(i1, i2):
                return 1
        if len(non_bound):
            start = int(self.rng.integers(len(non_bound)))
            for i1 in np.roll(non_bound, -start):
                if self._take_step(int(i1), i2):
                    return 1
        start = int(self.rng.integers(len(self.y)))
        for i1 in np.roll(np.arange(len(self.y)), -start):
            if self._take_step(int(i1), i2):
                return 1
        return 0

    def train(self) -> None:
        quiet_full_passes = 0
        examine_all = True
        while quiet_full_passes < self.max_passes:
            changed = 0
            if examine_all:
                for i in range(len(self.y)):
                    changed += self._examine(i)
                quiet_full_passes = quiet_full_passes + 1 if changed == 0 else 0
                examine_all = changed > 0
            else:
                for i in np.flatnonzero((self.alpha > 0) & (self.alpha < self.C)):
                    changed += self._examine(int(i))
                if changed == 0:
                    examine_all = True


@dataclass
class _BinaryMachine:
    positive: str
    negative: str
    support_vectors: np.ndarray
    dual_coef: np.ndarray  # alpha_i * y_i on the support set
    bias: float

    def decision(self, x_norm: np.ndarray, degree: int) -> np.ndarray:
        if len(self.dual_coef) == 0:
            return np.full(np.atleast_2d(x_norm).shape[0], -self.bias)
        k = poly_kernel(np.atleast_2d(x_norm), self.support_vectors, degree)
        return k @ self.dual_coef - self.bias


@dataclass
class SvmModel:
    classes: list[str]
    feature_min: np.ndarray
    feature_max: np.ndarray
    machines: list[_BinaryMachine]
    config: SvmConfig
    feature_idx: np.ndarray | None = None
    objective_histories: dict[tuple[str, str], list[float]] = field(default_factory=dict)

    def normalize(self, X: np.ndarray) -> np.ndarray:
        span = self.feature_max - self.feature_min
        span = np.where(span > 0, span, 1.0)
        return np.clip((X - self.feature_min) / span, 0.0, 1.0)


def train_svm(
    X: np.ndarray,
    labels,
    cfg: SvmConfig | None = None,
    seed: int = 0,
    classes=None,
    track_objective: bool = False,
) -> SvmModel:
    """Train a one-vs-one SMO SVM.

    ``classes`` may list the full label inventory of the task; by default it
    is inferred from the training labels.

    Raises:
        DegenerateClass: fewer than two classes, or an empty pair side.
    """
    cfg = cfg or SvmConfig()
    X = np.asarray(X, dtype=np.float64)
    labels = list(labels)
    classes = sorted(classes) if classes is not None else sorted(set(labels))
    if len(classes) < 2:
        raise DegenerateClass("need at least two classes")
    feature_min = X.min(axis=0)
    feature_max = X.max(axis=0)
    model = SvmModel(classes, feature_min, feature_max, [], cfg)
    Xn = model.normalize(X)
    y_arr = np.asarray(labels)

    machines = []
    for pair_index, (ci, cj) in enumerate(combinations(classes, 2)):
        mask = (y_arr == ci) | (y_arr == cj)
        if not np.any(y_arr == ci) or not np.any(y_arr == cj):
            raise DegenerateClass(f"pair ({ci}, {cj}) has an empty side")
        Xp = Xn[mask]
        yp = np.where(y_arr[mask] == ci, 1.0, -1.0)
        kernel = poly_kernel(Xp, Xp, cfg.kernel_degree)
        rng = np.random.default_rng(seed * 1009 + pair_index)
        smo = _Smo(kernel, yp, cfg.C, cfg.tolerance, cfg.max_passes, rng,
                   track_objective=track_objective)
        smo.train()
        sv = smo.alpha > 1e-12
        machines.append(
            _BinaryMachine(ci, cj, Xp[sv], (smo.alpha * yp)[sv], smo.b)
        )
        if track_objective:
            model.objective_histories[(ci, cj)] = smo.objective_history
    model.machines = machines
    return model


def predict_svm_many(model: SvmModel, X: np.ndarray) -> list[str]:
    """Majority vote over all pairwise machines; ties go to class order."""
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    if model.feature_idx is not None:
        if X.shape[1] <= int(np.max(model.feature_idx)):
            raise DimensionMismatch(
                f"input width {X.shape[1]} too small for stored feature subset"
            )
        X = X[:, model.feature_idx]
    if X.shape[1] != len(model.feature_min):
        raise DimensionMismatch(
            f"expected {len(model.feature_min)} features, got {X.shape[1]}"
        )
    Xn = model.normalize(X)
    class_pos = {c: i for i, c in enumerate(model.classes)}
    votes = np.zeros((X.shape[0], len(model.classes)), dtype=int)
    for machine in model.machines:
        score = machine.decision(Xn, model.config.kernel_degree)
        wins = np.where(score > 0, class_pos[machine.positive], class_pos[machine.negative])
        for row, cls in enumerate(wins):
            votes[row, cls] += 1
    return [model.classes[int(np.argmax(row))] for row in votes]


def predict_svm(model: SvmModel, x: np.ndarray) -> str:
    """Predicted label for a single vector."""
    return predict_svm_many(model, np.asarray(x)[None, :])[0]

"""Rhythm metrics over segment interval durations, plus temporal duration ratios.

VarcoV and nPVI come from the durational-variability literature (Dellwo's
variation coefficient; Grabe & Low's normalized pairwise variability index)
applied per segment class. Degenerate inputs (no intervals, zero denominators)
map to 0 so feature vectors stay finite.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .segmentation import SegmentClass, Segmentation


class ZeroDuration(ValueError):
    """Utterance with zero total duration."""


@dataclass(frozen=True)
class IntervalDurations:
    """Durations (seconds) of the maximal intervals of each class, in order."""

    voiced: tuple[float, ...]
    unvoiced: tuple[float, ...]
    pause: tuple[float, ...]
    total: float


RHYTHM_NAMES = (
    "rhythm_mean_voiced",
    "rhythm_std_voiced",
    "rhythm_mean_unvoiced",
    "rhythm_std_unvoiced",
    "rhythm_mean_pause",
    "rhythm_std_pause",
    "rhythm_varco_voiced",
    "rhythm_varco_unvoiced",
    "rhythm_varco_pause",
    "rhythm_npvi_voiced",
    "rhythm_npvi_unvoiced",
    "rhythm_npvi_pause",
    "rhythm_rate_voiced",
)

TEMPORAL_NAMES = (
    "temporal_pause_to_speech",
    "temporal_voiced_to_unvoiced",
    "temporal_unvoiced_to_speech",
    "temporal_voiced_to_speech",
    "temporal_voiced_to_pause",
    "temporal_unvoiced_to_pause",
)


def interval_durations(seg: Segmentation) -> IntervalDurations:
    """Per-class interval durations of a segmentation."""
    buckets: dict[SegmentClass, list[float]] = {c: [] for c in SegmentClass}
    for start, end, seg_class in seg.intervals:
        buckets[seg_class].append(end - start)
    return IntervalDurations(
        voiced=tuple(buckets[SegmentClass.VOICED]),
        unvoiced=tuple(buckets[SegmentClass.UNVOICED]),
        pause=tuple(buckets[SegmentClass.PAUSE]),
        total=seg.total_duration,
    )


def varco(durations) -> float:
    """Coefficient of variation of the durations, in percent.

    Population standard deviation; 0 for fewer than two intervals or a zero
    mean. Scale invariant.
    """
    d = np.asarray(durations, dtype=np.float64)
    if len(d) < 2:
        return 0.0
    mean = float(np.mean(d))
    if mean == 0.0:
        return 0.0
    return float(np.std(d) * 100.0 / mean)


def npvi(durations) -> float:
    """Normalized pairwise variability index of consecutive durations.

    100/(m-1) * sum |d_k - d_{k+1}| / ((d_k + d_{k+1}) / 2); 0 for fewer than
    two intervals. Scale invariant, bounded by 200.
    """
    d = np.asarray(durations, dtype=np.float64)
    m = len(d)
    if m < 2:
        return 0.0
    pair_means = (d[:-1] + d[1:]) / 2.0
    return float(100.0 * np.sum(np.abs(np.diff(d)) / pair_means) / (m - 1))


def rhythm_block(iv: IntervalDurations) -> dict[str, float]:
    """The 13 rhythm features keyed by their schema names.

    Raises:
        ZeroDuration: the utterance has no extent at all.
    """
    if iv.total <= 0.0:
        raise ZeroDuration("total duration must be positive")

    def mean_std(durs):
        if len(durs) == 0:
            return 0.0, 0.0
        arr = np.asarray(durs, dtype=np.float64)
        return float(np.mean(arr)), float(np.std(arr))

    values: dict[str, float] = {}
    for name, durs in (("voiced", iv.voiced), ("unvoiced", iv.unvoiced), ("pause", iv.pause)):
        mean, std = mean_std(durs)
        values[f"rhythm_mean_{name}"] = mean
        values[f"rhythm_std_{name}"] = std
        values[f"rhythm_varco_{name}"] = varco(durs)
        values[f"rhythm_npvi_{name}"] = npvi(durs)
    values["rhythm_rate_voiced"] = len(iv.voiced) / iv.total
    return values


def temporal_ratios(iv: IntervalDurations) -> tuple[dict[str, float], set[str]]:
    """The six duration ratios plus the set of names zeroed by a 0 denominator."""
    v = float(sum(iv.voiced))
    u = float(sum(iv.unvoiced))
    p = float(sum(iv.pause))
    flagged: set[str] = set()

    def ratio(name: str, num: float, den: float) -> float:
        if den == 0.0:
            flagged.add(name)
            return 0.0
        return num / den

    values = {
        "temporal_pause_to_speech": ratio("temporal_pause_to_speech", p, v + u),
        "temporal_voiced_to_unvoiced": ratio("temporal_voiced_to_unvoiced", v, u),
        "temporal_unvoiced_to_speech": ratio("temporal_unvoiced_to_speech", u, u + v),
        "temporal_voiced_to_speech": ratio("temporal_voiced_to_speech", v, u + v),
        "temporal_voiced_to_pause": ratio("temporal_voiced_to_pause", v, p),
        "temporal_unvoiced_to_pause": ratio("temporal_unvoiced_to_pause", u, p),
    }
    return values, flagged

"""Voiced / unvoiced / pause segmentation.

The pipeline is an energy-threshold activity detector in the Rabiner-Sambur
style, a run-length smoother, ZCR-driven endpoint extension, and a per-frame
three-way classification (periodicity high and ZCR low -> voiced; ZCR high ->
unvoiced; everything else -> pause). Thresholds are relative to the energy
range of the utterance, which is adequate for studio-clean recordings.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .dsp import FrameSequence, autocorr_peaks, frame_energies, frame_signal, frame_zcrs

# below this absolute energy a frame is never considered active, even when the
# utterance-relative thresholds degenerate (constant-energy input)
ENERGY_FLOOR = 1e-8


class SegmentClass(enum.Enum):
    VOICED = "voiced"
    UNVOICED = "unvoiced"
    PAUSE = "pause"


@dataclass(frozen=True)
class VadConfig:
    """Thresholds for activity detection and frame classification.

    Energy thresholds are fractions of the per-utterance energy range;
    ``zcr_threshold`` is in crossings per sample pair and ``voicing_threshold``
    is a normalized autocorrelation. The defaults are deliberately permissive
    about voicing so weak voiced segments are not lost.
    """

    energy_low_frac: float = 0.03
    energy_high_frac: float = 0.10
    zcr_threshold: float = 0.25
    voicing_threshold: float = 0.30
    min_run_frames: int = 2
    f0_min: float = 50.0
    f0_max: float = 400.0
    max_extension_frames: int = 25

    def __post_init__(self):
        if not (0.0 < self.energy_low_frac < self.energy_high_frac < 1.0):
            raise ValueError("need 0 < energy_low_frac < energy_high_frac < 1")
        if not (0.0 <= self.zcr_threshold <= 1.0):
            raise ValueError("zcr_threshold must lie in [0, 1]")
        if not (-1.0 <= self.voicing_threshold <= 1.0):
            raise ValueError("voicing_threshold must lie in [-1, 1]")
        if self.min_run_frames < 1:
            raise ValueError("min_run_frames must be >= 1")
        if not (0.0 < self.f0_min < self.f0_max):
            raise ValueError("need 0 < f0_min < f0_max")


@dataclass(frozen=True)
class Segmentation:
    """Maximal same-class intervals covering [0, total_duration] exactly.

    ``frame_labels`` carries the per-frame decision the intervals were merged
    from; interval boundaries sit on hop multiples so that class durations sum
    to the clip duration.
    """

    intervals: tuple[tuple[float, float, SegmentClass], ...]
    total_duration: float
    frame_labels: tuple[SegmentClass, ...]

    def frames_of(self, seg_class: SegmentClass) -> np.ndarray:
        """Indices of frames labeled ``seg_class``."""
        return np.flatnonzero([lab is seg_class for lab in self.frame_labels])


def _runs(mask: np.ndarray) -> list[tuple[int, int, bool]]:
    """Maximal constant runs of a boolean array as (start, end, value)."""
    runs = []
    start = 0
    for i in range(1, len(mask) + 1):
        if i == len(mask) or mask[i] != mask[start]:
            runs.append((start, i, bool(mask[start])))
            start = i
    return runs


def detect_activity(frames: FrameSequence, cfg: VadConfig) -> np.ndarray:
    """Boolean per-frame activity from hysteresis energy thresholds.

    Frames at or above the high threshold seed active regions, which then
    absorb every contiguous frame at or above the low threshold.
    """
    energy = frame_energies(frames)
    e_min, e_max = float(np.min(energy)), float(np.max(energy))
    if e_max - e_min < 1e-12:
        return energy > ENERGY_FLOOR
    t_low = e_min + cfg.energy_low_frac * (e_max - e_min)
    t_high = e_min + cfg.energy_high_frac * (e_max - e_min)
    seeds = energy >= t_high
    candidates = energy >= t_low
    active = np.zeros(len(energy), dtype=bool)
    for start, end, value in _runs(candidates):
        if value and np.any(seeds[start:end]):
            active[start:end] = True
    return active


def smooth_activity(flags: np.ndarray, min_run_frames: int) -> np.ndarray:
    """Fill short inactive gaps, then drop short active runs. Idempotent."""
    flags = np.asarray(flags, dtype=bool).copy()
    if len(flags) == 0:
        return flags
    runs = _runs(flags)
    for i, (start, end, value) in enumerate(runs):
        internal = 0 < i < len(runs) - 1
        if not value and internal and end - start < min_run_frames:
            flags[start:end] = True
    for start, end, value in _runs(flags):
        if value and end - start < min_run_frames:
            flags[start:end] = False
    return flags


def extend_endpoints_zcr(
    flags: np.ndarray, zcr_contour: np.ndarray, cfg: VadConfig
) -> np.ndarray:
    """Grow active runs outward through high-ZCR frames (weak fricatives).

    Growth at each side is capped at ``cfg.max_extension_frames`` frames and
    never crosses the signal edges.
    """
    flags = np.asarray(flags, dtype=bool)
    zcr = np.asarray(zcr_contour, dtype=np.float64)
    if len(flags) != len(zcr):
        raise ValueError("flags and zcr contour must have the same length")
    out = flags.copy()
    for start, end, value in _runs(flags):
        if not value:
            continue
        j = start - 1
        budget = cfg.max_extension_frames
        while j >= 0 and budget > 0 and not flags[j] and zcr[j] >= cfg.zcr_threshold:
            out[j] = True
            j -= 1
            budget -= 1
        j = end
        budget = cfg.max_extension_frames
        while j < len(flags) and budget > 0 and not flags[j] and zcr[j] >= cfg.zcr_threshold:
            out[j] = True
            j += 1
            budget -= 1
    return out


def _voicing_lag_window(frames: FrameSequence, cfg: VadConfig) -> tuple[int, int] | None:
    lag_min = max(1, int(frames.sample_rate // cfg.f0_max))
    lag_max = min(frames.frame_len - 1, int(np.ceil(frames.sample_rate / cfg.f0_min)))
    if lag_min > lag_max:
        return None
    return lag_min, lag_max


def label_frames(
    frames: FrameSequence, flags: np.ndarray, cfg: VadConfig
) -> list[SegmentClass]:
    """Raw per-frame classification before any label smoothing."""
    zcr = frame_zcrs(frames)
    window = _voicing_lag_window(frames, cfg)
    if window is None:
        voicing = np.zeros(frames.n_frames)
    else:
        voicing, _ = autocorr_peaks(frames.frames, *window)
    labels = []
    for i in range(frames.n_frames):
        if not flags[i]:
            labels.append(SegmentClass.PAUSE)
        elif voicing[i] >= cfg.voicing_threshold and zcr[i] < cfg.zcr_threshold:
            labels.append(SegmentClass.VOICED)
        elif zcr[i] >= cfg.zcr_threshold:
            labels.append(SegmentClass.UNVOICED)
        else:
            labels.append(SegmentClass.PAUSE)
    return labels


def _median_filter_labels(labels: list[SegmentClass]) -> list[SegmentClass]:
    """Width-3 categorical median: a frame flanked by agreeing neighbours
    takes their label; ties keep the center."""
    out = list(labels)
    for i in range(1, len(labels) - 1):
        if labels[i - 1] is labels[i + 1]:
            out[i] = labels[i - 1]
    return out


def classify_segments(
    frames: FrameSequence, flags: np.ndarray, cfg: VadConfig
) -> Segmentation:
    """Turn activity flags into a full three-way segmentation.

    Each frame owns the hop-length slot starting at its own start sample (the
    final frame owns the remainder of the clip), so interval durations sum
    exactly to the clip duration.
    """
    labels = _median_filter_labels(label_frames(frames, flags, cfg))
    rate = frames.sample_rate
    n = frames.n_samples
    intervals: list[tuple[float, float, SegmentClass]] = []
    run_start = 0
    for i in range(1, frames.n_frames + 1):
        if i == frames.n_frames or labels[i] is not labels[run_start]:
            start_t = run_start * frames.hop / rate
            end_t = (i * frames.hop / rate) if i < frames.n_frames else n / rate
            intervals.append((start_t, end_t, labels[run_start]))
            run_start = i
    return Segmentation(tuple(intervals), n / rate, tuple(labels))


def segment_frames(frames: FrameSequence, cfg: VadConfig | None = None) -> Segmentation:
    """Full segmentation pipeline on an existing frame sequence."""
    cfg = cfg or VadConfig()
    flags = detect_activity(frames, cfg)
    flags = smooth_activity(flags, cfg.min_run_frames)
    flags = extend_endpoints_zcr(flags, frame_zcrs(frames), cfg)
    return classify_segments(frames, flags, cfg)


def segment_clip(clip, cfg: VadConfig | None = None, frame_ms: float = 30.0) -> Segmentation:
    """Frame ``clip`` and segment it into voiced / unvoiced / pause intervals."""
    return segment_frames(frame_signal(clip, frame_ms=frame_ms), cfg)

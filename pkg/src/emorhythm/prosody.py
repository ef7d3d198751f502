"""Prosodic contours: cepstral pitch on voiced frames, short-time energy per class.

Pitch is read off the real cepstrum: a periodic frame shows a peak at the
quefrency of its fundamental period, so the detected pitch is
sample_rate / argmax over the lag window implied by [f0_min, f0_max]. Frames
whose peak is weak relative to the zero-quefrency bin yield no pitch and are
skipped rather than interpolated.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dsp import Contour, FrameSequence, frame_energies, real_cepstra
from .segmentation import SegmentClass, Segmentation
from .spectral import BadRange


@dataclass(frozen=True)
class PitchConfig:
    """Search window and prominence floor for cepstral pitch detection.

    ``cepstral_peak_min`` is relative to the magnitude of the zero-quefrency
    bin; raising it trades recall for precision on noisy frames.
    """

    f0_min: float = 50.0
    f0_max: float = 400.0
    cepstral_peak_min: float = 0.08

    def __post_init__(self):
        if not (0.0 < self.f0_min < self.f0_max):
            raise ValueError("need 0 < f0_min < f0_max")
        if self.cepstral_peak_min < 0.0:
            raise ValueError("cepstral_peak_min must be >= 0")


def _quefrency_window(nfft: int, sample_rate: int, cfg: PitchConfig) -> tuple[int, int]:
    if cfg.f0_max > sample_rate / 4.0:
        raise BadRange(f"f0_max {cfg.f0_max} above sample_rate/4 = {sample_rate / 4.0}")
    q_lo = int(np.ceil(sample_rate / cfg.f0_max))
    q_hi = min(int(np.floor(sample_rate / cfg.f0_min)), nfft // 2)
    if q_lo > q_hi:
        raise BadRange(
            f"empty quefrency window [{q_lo}, {q_hi}] at {sample_rate} Hz"
        )
    return q_lo, q_hi


def _pitch_from_cepstrum(cep: np.ndarray, sample_rate: int, cfg: PitchConfig) -> float | None:
    q_lo, q_hi = _quefrency_window(len(cep), sample_rate, cfg)
    window = cep[q_lo : q_hi + 1]
    q = q_lo + int(np.argmax(window))
    floor = cfg.cepstral_peak_min * abs(cep[0])
    if cep[q] < floor:
        return None
    # rahmonic guard: a comb-like spectrum also peaks at multiples of the true
    # period (exactly on-bin when the true period is fractional), so prefer a
    # sub-multiple quefrency whenever its peak is nearly as prominent
    changed = True
    while changed:
        changed = False
        for m in (2, 3, 4):
            sub = int(round(q / m))
            if sub < q_lo:
                continue
            lo, hi = max(q_lo, sub - 2), min(q_hi, sub + 2)
            cand = lo + int(np.argmax(cep[lo : hi + 1]))
            if cep[cand] >= 0.7 * cep[q]:
                q = cand
                changed = True
                break
    return sample_rate / q


def cepstral_pitch(frame: np.ndarray, sample_rate: int, cfg: PitchConfig | None = None) -> float | None:
    """Pitch of one frame in Hz, or None when no prominent cepstral peak exists.

    Raises:
        BadRange: the f0 window maps to an empty quefrency range at this rate.
    """
    cfg = cfg or PitchConfig()
    cep = real_cepstra(np.asarray(frame, dtype=np.float64)[None, :])[0]
    return _pitch_from_cepstrum(cep, sample_rate, cfg)


def pitch_contour(
    frames: FrameSequence, seg: Segmentation, cfg: PitchConfig | None = None
) -> Contour:
    """Detected pitch over the voiced frames, skipping undetected ones."""
    cfg = cfg or PitchConfig()
    voiced_idx = seg.frames_of(SegmentClass.VOICED)
    if len(voiced_idx) == 0:
        return Contour(np.empty(0), np.empty(0))
    ceps = real_cepstra(frames.frames[voiced_idx])
    times = frames.frame_times[voiced_idx]
    values, kept_times = [], []
    for cep, t in zip(ceps, times):
        f0 = _pitch_from_cepstrum(cep, frames.sample_rate, cfg)
        if f0 is not None:
            values.append(f0)
            kept_times.append(t)
    return Contour(np.asarray(values), np.asarray(kept_times))


def energy_contour(
    frames: FrameSequence, seg: Segmentation, seg_class: SegmentClass
) -> Contour:
    """Short-time energy over the frames of one segment class, in frame order."""
    idx = seg.frames_of(seg_class)
    energies = frame_energies(frames)
    return Contour(energies[idx], frames.frame_times[idx])

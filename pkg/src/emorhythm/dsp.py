"""Framing, windowing and per-frame signal primitives.

Everything downstream (segmentation, spectral and prosodic features) is built
on the frame matrix produced here: 30 ms rectangular frames with 50 % overlap,
a ragged tail padded with zeros so that frame arithmetic stays aligned with
the signal duration.

DFT convention: unnormalized forward transform, 1/N inverse (numpy default).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

LOG_FLOOR = 1e-10


class ClipTooShort(ValueError):
    """Signal shorter than a single analysis frame."""


class FrameTooShort(ValueError):
    """Frame too short for the requested statistic."""


class BadLagRange(ValueError):
    """Autocorrelation lag window is empty or out of bounds."""


def next_pow2(n: int) -> int:
    """Smallest power of two >= n (n >= 1)."""
    return 1 << max(0, int(n - 1).bit_length())


@dataclass(frozen=True)
class FrameSequence:
    """Frame matrix plus the geometry needed to map frames back to time.

    ``n_samples`` is the original signal length; the last frame may extend
    past it and is zero padded.
    """

    frames: np.ndarray  # (n_frames, frame_len)
    frame_len: int
    hop: int
    sample_rate: int
    n_samples: int

    @property
    def n_frames(self) -> int:
        return self.frames.shape[0]

    @property
    def frame_times(self) -> np.ndarray:
        """Frame-center times in seconds."""
        starts = np.arange(self.n_frames) * self.hop
        return (starts + self.frame_len / 2.0) / self.sample_rate

    @property
    def duration(self) -> float:
        return self.n_samples / self.sample_rate


@dataclass(frozen=True)
class Contour:
    """A per-frame feature track: one value per contributing frame."""

    values: np.ndarray
    frame_times: np.ndarray

    def __len__(self) -> int:
        return len(self.values)


def frame_signal(clip, frame_ms: float = 30.0, overlap: float = 0.5) -> FrameSequence:
    """Slice ``clip`` into overlapping rectangular frames.

    The frame starting at ``i * hop`` exists for every i such that the frame
    count equals ceil((n - frame_len) / hop) + 1; the tail frame is padded
    with zeros.

    Raises:
        ClipTooShort: clip holds fewer samples than one frame.
    """
    samples = np.asarray(clip.samples, dtype=np.float64)
    rate = int(clip.sample_rate)
    frame_len = int(round(frame_ms * rate / 1000.0))
    hop = max(1, int(round(frame_len * (1.0 - overlap))))
    n = len(samples)
    if n < frame_len:
        raise ClipTooShort(
            f"need at least {frame_len} samples ({frame_ms} ms at {rate} Hz), got {n}"
        )
    n_frames = int(np.ceil((n - frame_len) / hop)) + 1
    frames = np.zeros((n_frames, frame_len), dtype=np.float64)
    for i in range(n_frames):
        start = i * hop
        chunk = samples[start : start + frame_len]
        frames[i, : len(chunk)] = chunk
    return FrameSequence(frames, frame_len, hop, rate, n)


def short_time_energy(frame: np.ndarray) -> float:
    """Mean squared amplitude of a frame, (1/N) * sum(x^2)."""
    frame = np.asarray(frame, dtype=np.float64)
    if frame.size == 0:
        raise FrameTooShort("empty frame")
    return float(np.mean(frame * frame))


def frame_energies(frames: FrameSequence) -> np.ndarray:
    """Short-time energy of every frame."""
    return np.mean(frames.frames**2, axis=1)


def zero_crossing_rate(frame: np.ndarray) -> float:
    """Fraction of adjacent sample pairs whose signs differ, in [0, 1].

    A zero sample counts as positive so the rate is deterministic on
    digital silence.
    """
    frame = np.asarray(frame, dtype=np.float64)
    if frame.size < 2:
        raise FrameTooShort("zero-crossing rate needs at least 2 samples")
    signs = frame >= 0.0
    return float(np.count_nonzero(signs[1:] != signs[:-1]) / (frame.size - 1))


def frame_zcrs(frames: FrameSequence) -> np.ndarray:
    """Zero-crossing rate of every frame."""
    signs = frames.frames >= 0.0
    flips = np.count_nonzero(signs[:, 1:] != signs[:, :-1], axis=1)
    return flips / (frames.frame_len - 1)


def power_spectrum(frame: np.ndarray, window: str = "rectangular") -> np.ndarray:
    """|DFT|^2 for bins 0..nfft/2 with nfft the next power of two >= len(frame)."""
    return power_spectra(np.asarray(frame, dtype=np.float64)[None, :], window)[0]


def power_spectra(frames: np.ndarray, window: str = "rectangular") -> np.ndarray:
    """Batched :func:`power_spectrum` over the rows of a frame matrix."""
    frames = np.atleast_2d(np.asarray(frames, dtype=np.float64))
    if frames.shape[1] == 0:
        raise FrameTooShort("empty frame")
    nfft = next_pow2(frames.shape[1])
    if window == "hamming":
        frames = frames * np.hamming(frames.shape[1])
    elif window != "rectangular":
        raise ValueError(f"unknown window {window!r}")
    spectra = np.fft.rfft(frames, n=nfft, axis=1)
    return (spectra.real**2 + spectra.imag**2).astype(np.float64)


def autocorr_peak(frame: np.ndarray, lag_min: int, lag_max: int) -> tuple[float, int]:
    """Strongest normalized autocorrelation over a lag window.

    Each lag is normalized by the energies of the two overlapping segments
    (Cauchy-Schwarz), so values always lie in [-1, 1] and a periodic frame
    scores ~1 at every period multiple; near-ties resolve to the smallest
    lag. Returns (0.0, lag_min) for an all-zero frame.

    Raises:
        BadLagRange: empty or out-of-bounds lag window.
    """
    frame = np.asarray(frame, dtype=np.float64)
    values, lags = autocorr_peaks(frame[None, :], lag_min, lag_max)
    return float(values[0]), int(lags[0])


def autocorr_peaks(
    frames: np.ndarray, lag_min: int, lag_max: int
) -> tuple[np.ndarray, np.ndarray]:
    """Batched :func:`autocorr_peak` over the rows of a frame matrix."""
    frames = np.atleast_2d(np.asarray(frames, dtype=np.float64))
    n = frames.shape[1]
    if not (1 <= lag_min <= lag_max < n):
        raise BadLagRange(f"need 1 <= lag_min <= lag_max < {n}, got [{lag_min}, {lag_max}]")
    nfft = next_pow2(2 * n)
    spectra = np.fft.rfft(frames, n=nfft, axis=1)
    raw = np.fft.irfft(spectra.real**2 + spectra.imag**2, n=nfft, axis=1)[:, : lag_max + 1]
    # segment energies for the overlap at each lag
    csum = np.cumsum(frames**2, axis=1)
    total = csum[:, -1:]
    lags = np.arange(lag_max + 1)
    head = csum[:, n - 1 - lags]          # energy of x[0 : n-tau]
    tail = np.empty_like(head)            # energy of x[tau : n]
    tail[:, 0] = total[:, 0]
    tail[:, 1:] = total - csum[:, : lag_max]
    denom = np.sqrt(head * tail)
    with np.errstate(invalid="ignore", divide="ignore"):
        values = np.where(denom > 0.0, raw / np.maximum(denom, 1e-300), 0.0)
    values = np.clip(values, -1.0, 1.0)
    window = values[:, lag_min : lag_max + 1]
    vmax = window.max(axis=1)
    # smallest lag among near-ties, so period multiples pick the fundamental
    best = np.argmax(window >= (vmax[:, None] - 1e-12), axis=1)
    peak_lags = best + lag_min
    peak_vals = window[np.arange(window.shape[0]), best]
    return peak_vals, peak_lags


def real_cepstrum(frame: np.ndarray) -> np.ndarray:
    """Inverse DFT of the log power spectrum, length nfft.

    A floor of ``LOG_FLOOR`` keeps the log bounded on zero bins; a pure gain
    change therefore lands entirely in the zero-quefrency bin.
    """
    return real_cepstra(np.asarray(frame, dtype=np.float64)[None, :])[0]


def real_cepstra(frames: np.ndarray) -> np.ndarray:
    """Batched :func:`real_cepstrum` over the rows of a frame matrix."""
    spectra = power_spectra(frames, window="rectangular")
    nfft = 2 * (spectra.shape[1] - 1)
    return np.fft.irfft(np.log(spectra + LOG_FLOOR), n=nfft, axis=1)

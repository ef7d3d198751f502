"""Spectral features: bark-band loudness and mel-frequency cepstral coefficients.

Loudness follows Zwicker's model: the power spectrum is pooled through a bank
of bark-spaced filters, each band energy is compressed with the 0.23 specific
loudness exponent, and the bands are summed. The bark mapping uses the asinh
form 6*ln(f/600 + sqrt((f/600)^2 + 1)).

MFCCs are the usual chain: pre-emphasis, Hamming window, power spectrum,
triangular mel filter bank, log, orthonormal DCT-II; c0 is dropped and c1..c17
kept, so the coefficients are invariant to a pure gain change.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.fft import dct

from .dsp import LOG_FLOOR, FrameSequence, next_pow2, power_spectra

LOUDNESS_EXPONENT = 0.23


class NegativeFrequency(ValueError):
    """Frequency arguments must be >= 0."""


class BadRange(ValueError):
    """Invalid frequency range for a filter bank or search window."""


def bark_scale(freq_hz):
    """Map Hz to bark: 6 * asinh(f / 600). Monotone, 0 at DC."""
    f = np.asarray(freq_hz, dtype=np.float64)
    if np.any(f < 0):
        raise NegativeFrequency(f"negative frequency {freq_hz}")
    out = 6.0 * np.arcsinh(f / 600.0)
    return float(out) if np.isscalar(freq_hz) else out


def bark_to_hz(bark):
    """Inverse of :func:`bark_scale`: f = 600 * sinh(omega / 6)."""
    omega = np.asarray(bark, dtype=np.float64)
    out = 600.0 * np.sinh(omega / 6.0)
    return float(out) if np.isscalar(bark) else out


@dataclass(frozen=True)
class BarkFilterBank:
    """Bark-spaced filters with a flat 1-bark top and exponential skirts."""

    centers_bark: np.ndarray
    centers_hz: np.ndarray
    lower_slope: float = 1.0
    upper_slope: float = 2.5

    @property
    def size(self) -> int:
        return len(self.centers_bark)


def build_bark_bank(
    fmin_hz: float,
    fmax_hz: float,
    spacing_bark: float = 1.0,
    lower_slope: float = 1.0,
    upper_slope: float = 2.5,
) -> BarkFilterBank:
    """Filters centered at spacing, 2*spacing, ... bark within [fmin, fmax].

    Raises:
        BadRange: fmin/fmax out of order, or no center fits below fmax.
    """
    if not (0.0 <= fmin_hz < fmax_hz):
        raise BadRange(f"need 0 <= fmin < fmax, got [{fmin_hz}, {fmax_hz}]")
    top = bark_scale(fmax_hz)
    count = int(np.floor(top / spacing_bark))
    centers = spacing_bark * np.arange(1, count + 1, dtype=np.float64)
    centers_hz = bark_to_hz(centers)
    keep = centers_hz >= fmin_hz
    centers, centers_hz = centers[keep], centers_hz[keep]
    if len(centers) == 0:
        raise BadRange(f"no filter center fits in [{fmin_hz}, {fmax_hz}] Hz")
    return BarkFilterBank(centers, centers_hz, lower_slope, upper_slope)


def bark_filter_weight(omega, center_bark: float, lower_slope: float = 1.0,
                       upper_slope: float = 2.5):
    """Filter response at bark frequency ``omega`` for a filter at ``center_bark``.

    Flat (1.0) within half a bark of the center, 10^(a_low*(d+0.5)) below,
    10^(-a_up*(d-0.5)) above, and 0 beyond 4 bark from the center.
    """
    om = np.asarray(omega, dtype=np.float64)
    d = om - center_bark
    with np.errstate(over="ignore"):
        w = np.where(
            d <= -0.5,
            10.0 ** (lower_slope * (d + 0.5)),
            np.where(d >= 0.5, 10.0 ** (-upper_slope * (d - 0.5)), 1.0),
        )
    w = np.where(np.abs(d) > 4.0, 0.0, w)
    return float(w) if np.isscalar(omega) else w


def bank_weights(bank: BarkFilterBank, freqs_hz: np.ndarray) -> np.ndarray:
    """(n_filters, n_bins) response matrix of the bank at the given bin frequencies."""
    omegas = bark_scale(np.asarray(freqs_hz, dtype=np.float64))
    return np.stack(
        [
            bark_filter_weight(omegas, c, bank.lower_slope, bank.upper_slope)
            for c in bank.centers_bark
        ]
    )


def spectrum_bin_freqs(n_bins: int, sample_rate: int) -> np.ndarray:
    """Bin center frequencies for a one-sided power spectrum of n_bins bins."""
    nfft = 2 * (n_bins - 1)
    return np.arange(n_bins) * sample_rate / nfft


def total_loudness(spectrum: np.ndarray, bank: BarkFilterBank, sample_rate: int) -> float:
    """Zwicker-style total loudness of one power spectrum frame.

    Band energies are pooled with the bank weights and compressed with the
    0.23 exponent before summing, so loudness grows with amplitude alpha as
    alpha^0.46.
    """
    spectrum = np.asarray(spectrum, dtype=np.float64)
    weights = bank_weights(bank, spectrum_bin_freqs(len(spectrum), sample_rate))
    return float(loudness_from_band_energies(weights @ spectrum))


def loudness_from_band_energies(band_energies: np.ndarray) -> np.ndarray:
    """Sum of per-band specific loudness E_k^0.23 along the last axis."""
    return np.sum(np.maximum(band_energies, 0.0) ** LOUDNESS_EXPONENT, axis=-1)


def loudness_contour_values(
    frames: FrameSequence, bank: BarkFilterBank, window: str = "hamming"
) -> np.ndarray:
    """Total loudness of every frame."""
    spectra = power_spectra(frames.frames, window=window)
    weights = bank_weights(bank, spectrum_bin_freqs(spectra.shape[1], frames.sample_rate))
    return loudness_from_band_energies(spectra @ weights.T)


# ---------------------------------------------------------------------------
# MFCC


@dataclass(frozen=True)
class MfccConfig:
    """MFCC extraction parameters; ``fmax_hz = 0`` means the Nyquist rate."""

    n_coeffs: int = 17
    n_mel_filters: int = 26
    pre_emphasis: float = 0.97
    window: str = "hamming"
    fmin_hz: float = 0.0
    fmax_hz: float = 0.0

    def __post_init__(self):
        if self.n_coeffs > self.n_mel_filters:
            raise ValueError("n_coeffs must not exceed n_mel_filters")
        if not (0.0 <= self.pre_emphasis < 1.0):
            raise ValueError("pre_emphasis must lie in [0, 1)")


def hz_to_mel(freq_hz):
    return 2595.0 * np.log10(1.0 + np.asarray(freq_hz, dtype=np.float64) / 700.0)


def mel_to_hz(mel):
    return 700.0 * (10.0 ** (np.asarray(mel, dtype=np.float64) / 2595.0) - 1.0)


def mel_filterbank(
    n_filters: int, nfft: int, sample_rate: int, fmin_hz: float = 0.0,
    fmax_hz: float | None = None,
) -> np.ndarray:
    """(n_filters, nfft//2 + 1) triangular filters equally spaced in mel."""
    if fmax_hz is None or fmax_hz <= 0:
        fmax_hz = sample_rate / 2.0
    if not (0.0 <= fmin_hz < fmax_hz <= sample_rate / 2.0):
        raise BadRange(f"need 0 <= fmin < fmax <= Nyquist, got [{fmin_hz}, {fmax_hz}]")
    edges_hz = mel_to_hz(np.linspace(hz_to_mel(fmin_hz), hz_to_mel(fmax_hz), n_filters + 2))
    bin_freqs = np.arange(nfft // 2 + 1) * sample_rate / nfft
    bank = np.zeros((n_filters, len(bin_freqs)))
    for m in range(n_filters):
        lo, mid, hi = edges_hz[m], edges_hz[m + 1], edges_hz[m + 2]
        rising = (bin_freqs - lo) / max(mid - lo, 1e-12)
        falling = (hi - bin_freqs) / max(hi - mid, 1e-12)
        bank[m] = np.maximum(0.0, np.minimum(rising, falling))
    return bank


def mfcc_frames(frames: FrameSequence, cfg: MfccConfig | None = None) -> np.ndarray:
    """(n_frames, n_coeffs) MFCC matrix, coefficients c1..c_n (c0 dropped)."""
    cfg = cfg or MfccConfig()
    x = frames.frames
    emphasized = np.empty_like(x)
    emphasized[:, 0] = x[:, 0]
    emphasized[:, 1:] = x[:, 1:] - cfg.pre_emphasis * x[:, :-1]
    spectra = power_spectra(emphasized, window=cfg.window)
    nfft = next_pow2(frames.frame_len)
    bank = mel_filterbank(
        cfg.n_mel_filters, nfft, frames.sample_rate, cfg.fmin_hz, cfg.fmax_hz or None
    )
    log_mel = np.log(spectra @ bank.T + LOG_FLOOR)
    coeffs = dct(log_mel, type=2, norm="ortho", axis=1)
    return coeffs[:, 1 : cfg.n_coeffs + 1]


def mfcc_frame(frame: np.ndarray, sample_rate: int, cfg: MfccConfig | None = None) -> np.ndarray:
    """MFCC vector of a single frame."""
    frame = np.asarray(frame, dtype=np.float64)
    seq = FrameSequence(frame[None, :], len(frame), max(1, len(frame) // 2),
                        sample_rate, len(frame))
    return mfcc_frames(seq, cfg)[0]

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import RATE, clip_of, pulse_train, silence, tone
from emorhythm.dsp import (
    BadLagRange,
    ClipTooShort,
    FrameTooShort,
    autocorr_peak,
    frame_signal,
    next_pow2,
    power_spectrum,
    real_cepstrum,
    short_time_energy,
    zero_crossing_rate,
)


class TestFraming:
    def test_frame_count_and_geometry(self):
        seq = frame_signal(clip_of(np.ones(4800)))
        assert seq.frame_len == 480
        assert seq.hop == 240
        assert seq.n_frames == 19  # ceil((4800-480)/240) + 1

    def test_single_frame_clip(self):
        seq = frame_signal(clip_of(np.ones(480)))
        assert seq.n_frames == 1

    def test_too_short(self):
        with pytest.raises(ClipTooShort):
            frame_signal(clip_of(np.ones(100)))

    def test_tail_zero_padded(self):
        seq = frame_signal(clip_of(np.ones(4801)))
        assert seq.n_frames == 20
        last = seq.frames[-1]
        n_real = 4801 - 19 * 240
        assert np.all(last[:n_real] == 1.0)
        assert np.all(last[n_real:] == 0.0)

    @given(n=st.integers(min_value=480, max_value=6000))
    @settings(max_examples=40, deadline=None)
    def test_fifty_percent_overlap_coverage(self, n):
        # every sample in [hop, (F-1)*hop) is covered by exactly two frames
        seq = frame_signal(clip_of(np.arange(n, dtype=float)))
        coverage = np.zeros(seq.n_frames * seq.hop + seq.frame_len)
        for i in range(seq.n_frames):
            coverage[i * seq.hop : i * seq.hop + seq.frame_len] += 1
        interior = coverage[seq.hop : (seq.n_frames - 1) * seq.hop]
        assert np.all(interior == 2)
        assert np.all(coverage[: seq.hop] == 1)


class TestEnergy:
    def test_zeros(self):
        assert short_time_energy(np.zeros(480)) == 0.0

    def test_constant(self):
        assert short_time_energy(np.full(480, 0.5)) == pytest.approx(0.25)

    def test_unit_sine_whole_periods(self):
        # mean of sin^2 over whole periods is 1/2
        frame = tone(0.03, f0=200.0, amp=1.0)
        assert short_time_energy(frame) == pytest.approx(0.5, abs=1e-6)

    def test_empty_rejected(self):
        with pytest.raises(FrameTooShort):
            short_time_energy(np.array([]))


class TestZcr:
    def test_alternating_is_maximal(self):
        frame = np.array([1.0, -1.0] * 240)
        assert zero_crossing_rate(frame) == 1.0

    def test_all_positive(self):
        assert zero_crossing_rate(np.ones(480)) == 0.0

    def test_zero_counts_as_positive(self):
        assert zero_crossing_rate(np.array([0.0, 1.0])) == 0.0
        assert zero_crossing_rate(np.array([0.0, -1.0])) == 1.0

    def test_sine_matches_brute_force(self):
        frame = tone(0.03, f0=100.0, amp=1.0)
        # independent oracle: explicit loop over sign changes
        crossings = 0
        for a, b in zip(frame[:-1], frame[1:]):
            crossings += (a >= 0) != (b >= 0)
        expected = crossings / (len(frame) - 1)
        assert zero_crossing_rate(frame) == pytest.approx(expected)
        assert 0.009 <= expected <= 0.016  # ~2 crossings x 3 periods / 479

    def test_too_short(self):
        with pytest.raises(FrameTooShort):
            zero_crossing_rate(np.array([1.0]))

    @given(st.lists(st.floats(-1, 1, allow_nan=False), min_size=2, max_size=100))
    @settings(max_examples=100)
    def test_range(self, values):
        assert 0.0 <= zero_crossing_rate(np.array(values)) <= 1.0


class TestPowerSpectrum:
    def test_zero_frame(self):
        assert np.all(power_spectrum(np.zeros(480)) == 0.0)

    def test_dc_energy_in_bin_zero(self):
        # power-of-two length so the DFT sees pure DC with no padding taper
        spec = power_spectrum(np.ones(512), window="rectangular")
        assert np.argmax(spec) == 0
        assert spec[1:].max() < spec[0] * 1e-12 + 1e-12

    def test_tone_peak_bin(self):
        spec = power_spectrum(tone(0.03, f0=1000.0), window="rectangular")
        assert len(spec) == 257  # nfft 512
        assert np.argmax(spec) == 32  # 1000 * 512 / 16000

    def test_parseval_rectangular(self):
        rng = np.random.default_rng(7)
        frame = rng.standard_normal(480)
        spec = power_spectrum(frame, window="rectangular")
        nfft = 2 * (len(spec) - 1)
        full = spec[0] + spec[-1] + 2.0 * np.sum(spec[1:-1])
        assert full / nfft == pytest.approx(np.sum(frame**2), rel=1e-6)

    def test_unknown_window(self):
        with pytest.raises(ValueError):
            power_spectrum(np.ones(16), window="hann")

    def test_next_pow2(self):
        assert [next_pow2(n) for n in (1, 2, 3, 480, 512, 513)] == [1, 2, 4, 512, 512, 1024]


class TestAutocorr:
    def test_zero_frame_fallback(self):
        assert autocorr_peak(np.zeros(480), 40, 320) == (0.0, 40)

    def test_periodic_peak_at_period(self):
        value, lag = autocorr_peak(tone(0.03, f0=200.0), 40, 320)
        assert value > 0.9
        assert abs(lag - 80) <= 1

    def test_seeded_noise_below_half(self):
        frame = np.random.default_rng(0).standard_normal(480)
        value, _ = autocorr_peak(frame, 40, 320)
        assert value < 0.5

    def test_bad_lag_range(self):
        with pytest.raises(BadLagRange):
            autocorr_peak(np.ones(100), 50, 120)
        with pytest.raises(BadLagRange):
            autocorr_peak(np.ones(100), 0, 50)
        with pytest.raises(BadLagRange):
            autocorr_peak(np.ones(100), 60, 50)

    def test_normalized_range_over_seeds(self):
        for seed in range(1000):
            frame = np.random.default_rng(seed).standard_normal(64)
            value, lag = autocorr_peak(frame, 1, 50)
            assert -1.0 <= value <= 1.0
            assert 1 <= lag <= 50


class TestCepstrum:
    def test_zero_frame_flat(self):
        cep = real_cepstrum(np.zeros(480))
        assert len(cep) == 512
        assert np.all(cep[1:] == pytest.approx(0.0, abs=1e-12))
        assert cep[0] == pytest.approx(np.log(1e-10))

    def test_pulse_train_peak_at_period(self):
        cep = real_cepstrum(pulse_train(0.03, f0=200.0))
        q = 20 + np.argmax(cep[20:257])
        assert abs(q - 80) <= 1

    def test_scaling_moves_only_quefrency_zero(self):
        frame = np.random.default_rng(3).standard_normal(480)
        c1 = real_cepstrum(frame)
        c2 = real_cepstrum(2.0 * frame)
        assert np.max(np.abs(c1[1:] - c2[1:])) < 1e-8
        assert c2[0] - c1[0] == pytest.approx(np.log(4.0), rel=1e-6)

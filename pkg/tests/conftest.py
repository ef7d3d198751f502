"""Shared synthetic fixtures: signals, WAV writing, toy datasets."""

from __future__ import annotations

import wave
from pathlib import Path

import numpy as np
import pytest

from emorhythm.corpus import AudioClip, LabeledDataset
from emorhythm.features import FeatureSchema

RATE = 16000


def write_wav(path, samples, rate=RATE, channels=1):
    """Write float samples in [-1, 1] as a 16-bit PCM WAV."""
    ints = np.clip(np.round(np.asarray(samples) * 32768.0), -32768, 32767).astype("<i2")
    with wave.open(str(path), "wb") as w:
        w.setnchannels(channels)
        w.setsampwidth(2)
        w.setframerate(rate)
        w.writeframes(ints.tobytes())


def tone(duration, f0=200.0, amp=0.8, rate=RATE):
    t = np.arange(int(duration * rate)) / rate
    return amp * np.sin(2 * np.pi * f0 * t)


def sawtooth(duration, f0=150.0, amp=0.6, rate=RATE):
    t = np.arange(int(duration * rate)) / rate
    return amp * (2.0 * ((t * f0) % 1.0) - 1.0)


def pulse_train(duration, f0=200.0, rate=RATE, width_frac=0.2):
    period = rate / f0
    t = np.arange(int(duration * rate))
    phase = (t % period) / period
    return np.where(phase < width_frac, 1.0 - phase / width_frac, 0.0)


def white_noise(duration, amp=0.3, seed=0, rate=RATE):
    rng = np.random.default_rng(seed)
    return amp * rng.standard_normal(int(duration * rate))


def silence(duration, rate=RATE):
    return np.zeros(int(duration * rate))


def clip_of(samples, rate=RATE, source_id="synth"):
    return AudioClip(np.asarray(samples, dtype=np.float64), rate, source_id)


def toy_dataset(X, labels, speakers=None):
    """LabeledDataset over an ad-hoc schema f0..fN for classifier tests."""
    X = np.asarray(X, dtype=np.float64)
    names = tuple(f"f{i}" for i in range(X.shape[1]))
    schema = FeatureSchema(names, {})
    n = X.shape[0]
    return LabeledDataset(
        schema, X, list(labels),
        list(speakers) if speakers is not None else [0] * n,
        [f"row{i}" for i in range(n)],
    )


EMOTION_PROFILES = {
    # emotion code -> (voiced f0, noise amplitude): distinct enough to classify
    "W": (320.0, 0.34),
    "L": (110.0, 0.16),
    "E": (150.0, 0.22),
    "A": (280.0, 0.30),
    "F": (260.0, 0.26),
    "T": (95.0, 0.12),
    "N": (170.0, 0.20),
}
SPEAKERS = ("03", "08", "09", "10", "11", "12", "13", "14", "15", "16")


def synth_utterance(seed, f0, noise_amp, rate=RATE):
    """Sawtooth 'vowel' + noise burst between silences, jittered per seed."""
    rng = np.random.default_rng(seed)
    jitter = 1.0 + 0.05 * rng.standard_normal()
    parts = [
        silence(0.12, rate),
        sawtooth(0.35 * jitter, f0 * (1.0 + 0.03 * rng.standard_normal()), rate=rate),
        silence(0.08, rate),
        noise_amp * np.random.default_rng(seed + 1).standard_normal(int(0.22 * rate)),
        silence(0.1, rate),
    ]
    return np.concatenate(parts)


def make_synth_corpus(directory: Path, per_class: int = 12, rate=RATE) -> int:
    """EMO-DB-style synthetic corpus; returns the number of files written."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    i = 0
    for code, (f0, noise_amp) in EMOTION_PROFILES.items():
        for k in range(per_class):
            name = f"{SPEAKERS[k % len(SPEAKERS)]}a{k % 10:02d}{code}{chr(97 + (i % 4))}.wav"
            write_wav(directory / name, synth_utterance(i, f0 + 4.0 * (k % 3), noise_amp, rate), rate)
            i += 1
    return i


@pytest.fixture(scope="session")
def synth_corpus_dir(tmp_path_factory) -> Path:
    path = tmp_path_factory.mktemp("synth_corpus")
    make_synth_corpus(path, per_class=12)
    return path


@pytest.fixture(scope="session")
def small_corpus_dir(tmp_path_factory) -> Path:
    path = tmp_path_factory.mktemp("small_corpus")
    make_synth_corpus(path, per_class=2)
    return path

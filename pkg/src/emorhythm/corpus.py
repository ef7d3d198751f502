"""Corpus ingestion: WAV decoding, EMO-DB filename metadata, feature matrix IO.

The WAV reader handles exactly what the Berlin emotion corpus ships: RIFF
PCM, 16 bit. Stereo input is downmixed by channel mean as a safety net.
Feature matrices round-trip through CSV with the full schema header so runs
stay diffable and reloadable.
"""

from __future__ import annotations

import csv
import enum
import logging
import re
import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .features import FeatureSchema, build_schema

logger = logging.getLogger(__name__)


class MalformedWav(ValueError):
    """File is not a structurally valid RIFF/WAVE stream."""


class UnsupportedEncoding(ValueError):
    """WAV encoding other than 16-bit integer PCM."""


class UnrecognizedName(ValueError):
    """Filename does not follow the EMO-DB naming convention."""


class UnknownEmotionCode(ValueError):
    """Emotion letter outside the seven-class code table."""


class EmptyCorpus(ValueError):
    """Corpus directory yielded no loadable utterances."""


class SchemaMismatch(ValueError):
    """Feature matrix header or row shape disagrees with the built-in schema."""


class EmotionLabel(enum.Enum):
    ANGER = "anger"
    BOREDOM = "boredom"
    DISGUST = "disgust"
    FEAR = "fear"
    HAPPINESS = "happiness"
    SADNESS = "sadness"
    NEUTRAL = "neutral"


# EMO-DB letter codes (from the German emotion words)
EMOTION_CODES = {
    "W": EmotionLabel.ANGER,
    "L": EmotionLabel.BOREDOM,
    "E": EmotionLabel.DISGUST,
    "A": EmotionLabel.FEAR,
    "F": EmotionLabel.HAPPINESS,
    "T": EmotionLabel.SADNESS,
    "N": EmotionLabel.NEUTRAL,
}
CODE_FOR_EMOTION = {label: code for code, label in EMOTION_CODES.items()}

EMODB_SPEAKERS = (3, 8, 9, 10, 11, 12, 13, 14, 15, 16)

_FILENAME_RE = re.compile(r"^(\d{2})([a-z]\d{2})([A-Z])([a-z])\.wav$", re.IGNORECASE)


@dataclass(frozen=True)
class AudioClip:
    """Mono PCM audio normalized to [-1, 1]."""

    samples: np.ndarray
    sample_rate: int
    source_id: str

    @property
    def duration(self) -> float:
        return len(self.samples) / self.sample_rate


@dataclass(frozen=True)
class UtteranceMeta:
    speaker_id: int
    text_id: str
    emotion: EmotionLabel
    variant: str


def load_wav(path) -> AudioClip:
    """Decode a 16-bit PCM RIFF/WAVE file, downmixing stereo by channel mean.

    Samples are scaled to [-1, 1] by dividing by 32768.

    Raises:
        MalformedWav: broken header, truncated chunks, or an empty stream.
        UnsupportedEncoding: compressed audio or bit depth other than 16.
    """
    path = Path(path)
    data = path.read_bytes()
    if len(data) < 12 or data[:4] != b"RIFF" or data[8:12] != b"WAVE":
        raise MalformedWav(f"{path.name}: not a RIFF/WAVE file")

    fmt = None
    pcm = None
    pos = 12
    while pos + 8 <= len(data):
        chunk_id = data[pos : pos + 4]
        (size,) = struct.unpack_from("<I", data, pos + 4)
        body = data[pos + 8 : pos + 8 + size]
        if len(body) < size:
            raise MalformedWav(f"{path.name}: truncated {chunk_id!r} chunk")
        if chunk_id == b"fmt ":
            if size < 16:
                raise MalformedWav(f"{path.name}: fmt chunk too small")
            fmt = struct.unpack_from("<HHIIHH", body, 0)
        elif chunk_id == b"data":
            pcm = body
        pos += 8 + size + (size % 2)  # chunks are word aligned

    if fmt is None or pcm is None:
        raise MalformedWav(f"{path.name}: missing fmt or data chunk")
    audio_format, channels, rate, _byte_rate, _block_align, bits = fmt
    if audio_format != 1:
        raise UnsupportedEncoding(f"{path.name}: format tag {audio_format}, need PCM (1)")
    if bits != 16:
        raise UnsupportedEncoding(f"{path.name}: {bits}-bit samples, need 16")
    if channels < 1 or rate <= 0:
        raise MalformedWav(f"{path.name}: implausible fmt fields")

    usable = len(pcm) - len(pcm) % (2 * channels)
    raw = np.frombuffer(pcm[:usable], dtype="<i2")
    if raw.size == 0:
        raise MalformedWav(f"{path.name}: contains no samples")
    if channels > 1:
        raw = raw.reshape(-1, channels).mean(axis=1)
    samples = np.asarray(raw, dtype=np.float64) / 32768.0
    return AudioClip(samples, int(rate), path.stem)


def parse_emodb_filename(name: str) -> UtteranceMeta:
    """Split an EMO-DB filename like ``03a01Wa.wav`` into its metadata fields.

    Raises:
        UnrecognizedName: pattern mismatch.
        UnknownEmotionCode: emotion letter outside W/L/E/A/F/T/N.
    """
    match = _FILENAME_RE.match(Path(name).name)
    if match is None:
        raise UnrecognizedName(f"{name!r} does not match <speaker><text><emotion><variant>.wav")
    speaker, text_id, code, variant = match.groups()
    emotion = EMOTION_CODES.get(code.upper())
    if emotion is None:
        raise UnknownEmotionCode(f"{name!r}: emotion letter {code!r} not in code table")
    return UtteranceMeta(int(speaker), text_id, emotion, variant)


def load_corpus(directory) -> list[tuple[AudioClip, UtteranceMeta]]:
    """Load every parseable WAV in a directory, sorted by filename.

    Files with unrecognized names or broken audio are skipped with a warning.

    Raises:
        EmptyCorpus: nothing loadable found.
    """
    directory = Path(directory)
    wavs = sorted(p for p in directory.iterdir() if p.suffix.lower() == ".wav")
    entries: list[tuple[AudioClip, UtteranceMeta]] = []
    skipped = 0
    for path in wavs:
        try:
            meta = parse_emodb_filename(path.name)
            clip = load_wav(path)
        except (UnrecognizedName, UnknownEmotionCode, MalformedWav, UnsupportedEncoding) as err:
            logger.warning("skipping %s: %s", path.name, err)
            skipped += 1
            continue
        entries.append((clip, meta))
    if not entries:
        raise EmptyCorpus(f"no loadable utterances in {directory}")
    logger.info("loaded %d utterances from %s (%d skipped)", len(entries), directory, skipped)
    return entries


META_COLUMNS = ("label", "speaker", "source_id")


@dataclass
class LabeledDataset:
    """Feature matrix with labels, speakers and source ids, row aligned."""

    schema: FeatureSchema
    X: np.ndarray
    labels: list[str]
    speakers: list[int]
    source_ids: list[str]
    provenance: str = ""

    def __len__(self) -> int:
        return self.X.shape[0]

    @property
    def classes(self) -> list[str]:
        return sorted(set(self.labels))

    def validate(self) -> None:
        n = len(self)
        if self.X.ndim != 2 or self.X.shape[1] != len(self.schema):
            raise SchemaMismatch(
                f"matrix width {self.X.shape} does not match schema ({len(self.schema)})"
            )
        if not (len(self.labels) == len(self.speakers) == len(self.source_ids) == n):
            raise SchemaMismatch("row metadata lengths disagree with the matrix")
        if not np.all(np.isfinite(self.X)):
            raise SchemaMismatch("feature matrix contains non-finite values")
        if len(set(self.source_ids)) != n:
            raise SchemaMismatch("duplicate source_id rows")

    def subset(self, row_idx) -> "LabeledDataset":
        """Row subset preserving schema and provenance."""
        idx = np.asarray(row_idx, dtype=int)
        return LabeledDataset(
            schema=self.schema,
            X=self.X[idx],
            labels=[self.labels[i] for i in idx],
            speakers=[self.speakers[i] for i in idx],
            source_ids=[self.source_ids[i] for i in idx],
            provenance=self.provenance,
        )


def save_feature_matrix(dataset: LabeledDataset, path) -> None:
    """Write the dataset as CSV: 487 schema columns then label/speaker/source_id."""
    dataset.validate()
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(list(dataset.schema.names) + list(META_COLUMNS))
        for row, label, speaker, source in zip(
            dataset.X, dataset.labels, dataset.speakers, dataset.source_ids
        ):
            writer.writerow([str(float(v)) for v in row] + [label, str(speaker), source])


def load_feature_matrix(path) -> LabeledDataset:
    """Inverse of :func:`save_feature_matrix`.

    Raises:
        SchemaMismatch: header differs from the built-in schema (order matters).
    """
    schema = build_schema()
    expected_header = list(schema.names) + list(META_COLUMNS)
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != expected_header:
            raise SchemaMismatch(f"{path}: header does not match the built-in schema")
        rows, labels, speakers, sources = [], [], [], []
        for line in reader:
            if len(line) != len(expected_header):
                raise SchemaMismatch(f"{path}: row with {len(line)} fields")
            try:
                rows.append([float(v) for v in line[: len(schema)]])
                speakers.append(int(line[len(schema) + 1]))
            except ValueError as err:
                raise SchemaMismatch(f"{path}: unparseable row ({err})") from None
            labels.append(line[len(schema)])
            sources.append(line[len(schema) + 2])
    X = np.asarray(rows, dtype=np.float64).reshape(len(rows), len(schema))
    dataset = LabeledDataset(schema, X, labels, speakers, sources, provenance=str(path))
    dataset.validate()
    return dataset

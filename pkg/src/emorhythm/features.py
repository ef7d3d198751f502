"""The fixed 487-feature schema, contour statistics and vector assembly.

Feature names follow ``<family>_<stat>_<deriv>_<index>_<segment>`` with the
index and segment parts dropped where they do not apply. Contour families
(MFCC, loudness, pitch, energy) contribute the four statistics mean / std /
min / max of the raw contour and of its first and second derivatives; the
rhythm and temporal block contributes 19 scalars. Family sizes:

    mfcc voiced 204, mfcc unvoiced 204, loudness voiced 12,
    loudness unvoiced 12, pitch 12, energy 24, rhythm+temporal 19 -> 487
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Mapping

import numpy as np

from .rhythm import RHYTHM_NAMES, TEMPORAL_NAMES

N_FEATURES = 487
N_MFCC_COEFFS = 17
STAT_NAMES = ("mean", "std", "min", "max")
DERIV_TAGS = ("org", "d1", "d2")

EXPECTED_FAMILY_SIZES = {
    "mfcc_voiced": 204,
    "mfcc_unvoiced": 204,
    "loudness_voiced": 12,
    "loudness_unvoiced": 12,
    "pitch": 12,
    "energy": 24,
    "rhythm_temporal": 19,
}


class SchemaViolation(RuntimeError):
    """Internal inconsistency between computed features and the schema."""


def _contour_names(family: str, segment: str, index: int | None = None) -> list[str]:
    mid = f"_{index}" if index is not None else ""
    return [
        f"{family}_{stat}_{deriv}{mid}_{segment}"
        for deriv in DERIV_TAGS
        for stat in STAT_NAMES
    ]


@dataclass(frozen=True)
class FeatureSchema:
    """Ordered, named feature positions; order is part of the contract."""

    names: tuple[str, ...]
    family_indices: dict[str, tuple[int, ...]] = field(compare=False)

    def __len__(self) -> int:
        return len(self.names)

    def index(self, name: str) -> int:
        return self.names.index(name)


def family_of(name: str) -> str:
    """Feature family a schema name belongs to."""
    head = name.split("_", 1)[0]
    if head in ("rhythm", "temporal"):
        return "rhythm_temporal"
    if head in ("mfcc", "loudness"):
        return f"{head}_{name.rsplit('_', 1)[1]}"
    if head in ("pitch", "energy"):
        return head
    raise KeyError(f"unknown feature family for {name!r}")


@lru_cache(maxsize=1)
def build_schema() -> FeatureSchema:
    """The canonical 487-name schema; family sizes are asserted at build time."""
    names: list[str] = []
    for segment in ("voiced", "unvoiced"):
        for coeff in range(1, N_MFCC_COEFFS + 1):
            names.extend(_contour_names("mfcc", segment, coeff))
    for segment in ("voiced", "unvoiced"):
        names.extend(_contour_names("loudness", segment))
    names.extend(_contour_names("pitch", "voiced"))
    for segment in ("voiced", "unvoiced"):
        names.extend(_contour_names("energy", segment))
    names.extend(RHYTHM_NAMES)
    names.extend(TEMPORAL_NAMES)

    families: dict[str, list[int]] = {key: [] for key in EXPECTED_FAMILY_SIZES}
    for i, name in enumerate(names):
        families[family_of(name)].append(i)
    sizes = {key: len(ix) for key, ix in families.items()}
    if len(names) != N_FEATURES or len(set(names)) != N_FEATURES:
        raise SchemaViolation(f"schema must hold {N_FEATURES} unique names, got {len(names)}")
    if sizes != EXPECTED_FAMILY_SIZES:
        raise SchemaViolation(f"family sizes {sizes} != {EXPECTED_FAMILY_SIZES}")
    return FeatureSchema(tuple(names), {k: tuple(v) for k, v in families.items()})


@dataclass(frozen=True)
class FeatureVector:
    """Values parallel to the schema plus the names imputed to 0."""

    values: np.ndarray
    degenerate_flags: frozenset[str] = frozenset()


def contour_stats(values: np.ndarray) -> tuple[float, float, float, float]:
    """(mean, population std, min, max); an empty contour yields all zeros."""
    v = np.asarray(values, dtype=np.float64)
    if v.size == 0:
        return 0.0, 0.0, 0.0, 0.0
    return float(np.mean(v)), float(np.std(v)), float(np.min(v)), float(np.max(v))


def derivative(values: np.ndarray, order: int = 1) -> np.ndarray:
    """Central-difference derivative with replicated endpoints.

    Contours shorter than 3 points have no usable slope estimate and map to
    zeros of the same length. ``order=2`` applies the operator twice.
    """
    if order not in (1, 2):
        raise ValueError("order must be 1 or 2")
    v = np.asarray(values, dtype=np.float64)
    for _ in range(order):
        if len(v) < 3:
            v = np.zeros_like(v)
            continue
        padded = np.concatenate([v[:1], v, v[-1:]])
        v = (padded[2:] - padded[:-2]) / 2.0
    return v


def _contour_block(values: np.ndarray) -> tuple[list[float], bool]:
    """The 12 stats (org/d1/d2 x mean/std/min/max) of one contour."""
    v = np.asarray(values, dtype=np.float64)
    empty = v.size == 0
    block: list[float] = []
    track = v
    for _ in DERIV_TAGS:
        block.extend(contour_stats(track))
        track = derivative(track)
    return block, empty


def assemble(
    mfcc_voiced: np.ndarray,
    mfcc_unvoiced: np.ndarray,
    loudness_voiced: np.ndarray,
    loudness_unvoiced: np.ndarray,
    pitch_voiced: np.ndarray,
    energy_voiced: np.ndarray,
    energy_unvoiced: np.ndarray,
    rhythm_values: Mapping[str, float],
    temporal_values: Mapping[str, float],
    temporal_flagged: Iterable[str] = (),
) -> FeatureVector:
    """Place all per-utterance measurements into the fixed 487-slot vector.

    MFCC arguments are (n_frames, 17) matrices (one column per coefficient
    contour); the remaining contours are 1-D. Empty contours are imputed to 0
    and their feature names recorded in ``degenerate_flags``.

    Raises:
        SchemaViolation: inputs do not line up with the schema.
    """
    schema = build_schema()
    values: list[float] = []
    flagged: set[str] = set(temporal_flagged)

    for segment, mat in (("voiced", mfcc_voiced), ("unvoiced", mfcc_unvoiced)):
        mat = np.asarray(mat, dtype=np.float64)
        if mat.size == 0:
            mat = mat.reshape(0, N_MFCC_COEFFS)
        if mat.ndim != 2 or mat.shape[1] != N_MFCC_COEFFS:
            raise SchemaViolation(
                f"mfcc_{segment} must have {N_MFCC_COEFFS} columns, got {mat.shape}"
            )
        for coeff in range(N_MFCC_COEFFS):
            block, empty = _contour_block(mat[:, coeff])
            values.extend(block)
            if empty:
                flagged.update(_contour_names("mfcc", segment, coeff + 1))

    for family, segment, contour in (
        ("loudness", "voiced", loudness_voiced),
        ("loudness", "unvoiced", loudness_unvoiced),
        ("pitch", "voiced", pitch_voiced),
        ("energy", "voiced", energy_voiced),
        ("energy", "unvoiced", energy_unvoiced),
    ):
        block, empty = _contour_block(np.asarray(contour, dtype=np.float64))
        values.extend(block)
        if empty:
            flagged.update(_contour_names(family, segment))

    try:
        values.extend(float(rhythm_values[name]) for name in RHYTHM_NAMES)
        values.extend(float(temporal_values[name]) for name in TEMPORAL_NAMES)
    except KeyError as missing:
        raise SchemaViolation(f"missing rhythm/temporal value {missing}") from None

    out = np.asarray(values, dtype=np.float64)
    if len(out) != len(schema):
        raise SchemaViolation(f"assembled {len(out)} values for a {len(schema)}-slot schema")
    if not np.all(np.isfinite(out)):
        bad = [schema.names[i] for i in np.flatnonzero(~np.isfinite(out))]
        raise SchemaViolation(f"non-finite feature values at {bad[:5]}")
    return FeatureVector(out, frozenset(flagged))

"""Per-utterance feature extraction: segmentation in, 487-slot vector out."""

from __future__ import annotations

import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import dsp, features, prosody, rhythm, segmentation, spectral
from .corpus import AudioClip, LabeledDataset, UtteranceMeta

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class BarkConfig:
    """Bark bank geometry for the loudness contour; ``fmax_hz = 0`` = Nyquist."""

    fmin_hz: float = 0.0
    fmax_hz: float = 0.0
    spacing_bark: float = 1.0
    lower_slope: float = 1.0
    upper_slope: float = 2.5


@dataclass(frozen=True)
class ExtractorConfig:
    """Everything extraction depends on, bundled so runs are reproducible."""

    frame_ms: float = 30.0
    overlap: float = 0.5
    vad: segmentation.VadConfig = segmentation.VadConfig()
    mfcc: spectral.MfccConfig = spectral.MfccConfig()
    pitch: prosody.PitchConfig = prosody.PitchConfig()
    bark: BarkConfig = BarkConfig()


@lru_cache(maxsize=8)
def _bark_bank(cfg: BarkConfig, sample_rate: int) -> spectral.BarkFilterBank:
    fmax = cfg.fmax_hz if cfg.fmax_hz > 0 else sample_rate / 2.0
    return spectral.build_bark_bank(
        cfg.fmin_hz, fmax, cfg.spacing_bark, cfg.lower_slope, cfg.upper_slope
    )


def extract_features(clip: AudioClip, cfg: ExtractorConfig | None = None) -> features.FeatureVector:
    """Run the full per-utterance pipeline and assemble the feature vector."""
    cfg = cfg or ExtractorConfig()
    frames = dsp.frame_signal(clip, frame_ms=cfg.frame_ms, overlap=cfg.overlap)
    seg = segmentation.segment_frames(frames, cfg.vad)

    mfcc_all = spectral.mfcc_frames(frames, cfg.mfcc)
    loud_all = spectral.loudness_contour_values(
        frames, _bark_bank(cfg.bark, frames.sample_rate), window=cfg.mfcc.window
    )
    energy_all = dsp.frame_energies(frames)

    voiced = seg.frames_of(segmentation.SegmentClass.VOICED)
    unvoiced = seg.frames_of(segmentation.SegmentClass.UNVOICED)
    pitch = prosody.pitch_contour(frames, seg, cfg.pitch)

    iv = rhythm.interval_durations(seg)
    rhythm_values = rhythm.rhythm_block(iv)
    temporal_values, flagged = rhythm.temporal_ratios(iv)

    return features.assemble(
        mfcc_voiced=mfcc_all[voiced],
        mfcc_unvoiced=mfcc_all[unvoiced],
        loudness_voiced=loud_all[voiced],
        loudness_unvoiced=loud_all[unvoiced],
        pitch_voiced=pitch.values,
        energy_voiced=energy_all[voiced],
        energy_unvoiced=energy_all[unvoiced],
        rhythm_values=rhythm_values,
        temporal_values=temporal_values,
        temporal_flagged=flagged,
    )


def _extract_row(args: tuple[AudioClip, UtteranceMeta, ExtractorConfig]):
    clip, meta, cfg = args
    return extract_features(clip, cfg), meta, clip.source_id


def extract_dataset(
    entries,
    cfg: ExtractorConfig | None = None,
    jobs: int = 1,
    provenance: str = "",
) -> LabeledDataset:
    """Extract every (clip, meta) pair into a labeled feature matrix.

    Per-utterance failures are logged and skipped; raises ValueError when
    nothing could be extracted.
    """
    cfg = cfg or ExtractorConfig()
    tasks = [(clip, meta, cfg) for clip, meta in entries]
    results = []
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            futures = list(pool.map(_try_extract_row, tasks, chunksize=4))
        results = futures
    else:
        results = [_try_extract_row(t) for t in tasks]

    rows, labels, speakers, sources = [], [], [], []
    skipped = 0
    for item in results:
        if item is None:
            skipped += 1
            continue
        vec, meta, source_id = item
        rows.append(vec.values)
        labels.append(meta.emotion.value)
        speakers.append(meta.speaker_id)
        sources.append(source_id)
    if not rows:
        raise ValueError("feature extraction failed for every utterance")
    if skipped:
        logger.warning("feature extraction skipped %d utterances", skipped)
    dataset = LabeledDataset(
        schema=features.build_schema(),
        X=np.vstack(rows),
        labels=labels,
        speakers=speakers,
        source_ids=sources,
        provenance=provenance,
    )
    dataset.validate()
    return dataset


def _try_extract_row(args):
    clip, meta, _cfg = args
    try:
        return _extract_row(args)
    except Exception as err:  # per-utterance isolation: log, skip, continue
        logger.warning("extraction failed for %s: %s", clip.source_id, err)
        return None

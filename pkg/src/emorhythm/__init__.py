"""Speech emotion recognition from rhythm, temporal, loudness and spectral features.

Pipeline: voiced/unvoiced/pause segmentation -> 487-feature extraction ->
information-gain-ratio selection -> SMO-SVM or MLP classification under
repeated stratified cross-validation.
"""

from .corpus import AudioClip, EmotionLabel, LabeledDataset, UtteranceMeta, load_corpus, load_wav
from .features import FeatureSchema, FeatureVector, build_schema
from .pipeline import ExtractorConfig, extract_dataset, extract_features
from .segmentation import SegmentClass, Segmentation, VadConfig, segment_clip

__version__ = "0.1.0"

__all__ = [
    "AudioClip",
    "EmotionLabel",
    "ExtractorConfig",
    "FeatureSchema",
    "FeatureVector",
    "LabeledDataset",
    "SegmentClass",
    "Segmentation",
    "UtteranceMeta",
    "VadConfig",
    "build_schema",
    "extract_dataset",
    "extract_features",
    "load_corpus",
    "load_wav",
    "segment_clip",
    "__version__",
]

"""Flat key-value pipeline configuration.

Config files are plain ``section.field=value`` lines (``#`` comments allowed);
command-line flags override file values. Every under-specified analysis
parameter lives here with an explicit default, and ``dump`` emits the fully
resolved set so any run can be audited and reproduced byte for byte.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field, fields

from .mlp import MlpConfig
from .pipeline import BarkConfig, ExtractorConfig
from .prosody import PitchConfig
from .segmentation import VadConfig
from .spectral import MfccConfig
from .svm import SvmConfig


class UnknownConfigKey(ValueError):
    """Config file or flag refers to a key that does not exist."""


@dataclass(frozen=True)
class SelectionConfig:
    """How feature selection enters evaluation.

    ``mode``: 'outer' recomputes the ranking inside each training fold
    (unbiased), 'paper-faithful' ranks once globally and reuses the top-k
    list, 'none' disables selection.
    """

    mode: str = "outer"
    folds: int = 10
    k: int = 305
    sweep_step: int = 5
    method: str = "mdl"
    bins: int = 10

    def __post_init__(self):
        if self.mode not in ("outer", "paper-faithful", "none"):
            raise ValueError("selection.mode must be outer|paper-faithful|none")


@dataclass(frozen=True)
class EvaluationConfig:
    repeats: int = 10
    folds: int = 10
    seed: int = 0


@dataclass
class PipelineConfig:
    corpus_dir: str = ""
    output_dir: str = "out"
    jobs: int = 1
    classifier: str = "svm"
    frame_ms: float = 30.0
    overlap: float = 0.5
    vad: VadConfig = field(default_factory=VadConfig)
    mfcc: MfccConfig = field(default_factory=MfccConfig)
    pitch: PitchConfig = field(default_factory=PitchConfig)
    bark: BarkConfig = field(default_factory=BarkConfig)
    svm: SvmConfig = field(default_factory=SvmConfig)
    mlp: MlpConfig = field(default_factory=MlpConfig)
    selection: SelectionConfig = field(default_factory=SelectionConfig)
    evaluation: EvaluationConfig = field(default_factory=EvaluationConfig)

    def extractor(self) -> ExtractorConfig:
        return ExtractorConfig(
            frame_ms=self.frame_ms, overlap=self.overlap, vad=self.vad,
            mfcc=self.mfcc, pitch=self.pitch, bark=self.bark,
        )

    def clf_config(self):
        if self.classifier == "svm":
            return self.svm
        if self.classifier == "mlp":
            return self.mlp
        raise ValueError(f"classifier must be svm or mlp, not {self.classifier!r}")


_TOP_LEVEL = ("corpus_dir", "output_dir", "jobs", "classifier", "frame_ms", "overlap")
_SECTIONS = {
    "vad": VadConfig,
    "mfcc": MfccConfig,
    "pitch": PitchConfig,
    "bark": BarkConfig,
    "svm": SvmConfig,
    "mlp": MlpConfig,
    "selection": SelectionConfig,
    "evaluation": EvaluationConfig,
}

_HELP = {
    "corpus_dir": "directory of WAV files named in the EMO-DB convention",
    "output_dir": "directory where reports and matrices are written",
    "jobs": "worker processes for extraction and CV repeats (1 = serial)",
    "classifier": "classifier used by evaluation commands: svm or mlp",
    "frame_ms": "analysis frame length in milliseconds",
    "overlap": "frame overlap fraction",
    "vad.energy_low_frac": "activity growth threshold, fraction of energy range",
    "vad.energy_high_frac": "activity seed threshold, fraction of energy range",
    "vad.zcr_threshold": "zero-crossing rate separating unvoiced from voiced",
    "vad.voicing_threshold": "normalized autocorrelation floor for voiced frames",
    "vad.min_run_frames": "shortest surviving active run / filled gap, frames",
    "vad.f0_min": "lowest fundamental considered by the voicing check, Hz",
    "vad.f0_max": "highest fundamental considered by the voicing check, Hz",
    "vad.max_extension_frames": "cap on ZCR endpoint extension per side, frames",
    "mfcc.n_coeffs": "number of cepstral coefficients kept (c1..cN)",
    "mfcc.n_mel_filters": "triangular mel filters in the bank",
    "mfcc.pre_emphasis": "pre-emphasis coefficient",
    "mfcc.window": "analysis window: hamming or rectangular",
    "mfcc.fmin_hz": "mel bank lower edge, Hz",
    "mfcc.fmax_hz": "mel bank upper edge, Hz (0 = Nyquist)",
    "pitch.f0_min": "pitch search floor, Hz",
    "pitch.f0_max": "pitch search ceiling, Hz",
    "pitch.cepstral_peak_min": "peak prominence floor relative to quefrency 0",
    "bark.fmin_hz": "bark bank lower edge, Hz",
    "bark.fmax_hz": "bark bank upper edge, Hz (0 = Nyquist)",
    "bark.spacing_bark": "filter center spacing in bark",
    "bark.lower_slope": "low-side filter skirt exponent, per bark",
    "bark.upper_slope": "high-side filter skirt exponent, per bark",
    "svm.C": "soft-margin cost",
    "svm.kernel_degree": "polynomial kernel degree (1 = linear)",
    "svm.tolerance": "KKT violation tolerance",
    "svm.max_passes": "consecutive unchanged full passes before SMO stops",
    "mlp.hidden_units": "hidden layer width",
    "mlp.learning_rate": "SGD learning rate",
    "mlp.momentum": "momentum coefficient",
    "mlp.epochs": "training epochs",
    "mlp.seed": "weight init / shuffle seed used outside cross-validation",
    "selection.mode": "outer | paper-faithful | none",
    "selection.folds": "folds used by the ranking cross-validation",
    "selection.k": "number of top-ranked features kept",
    "selection.sweep_step": "feature-count step of the sweep command",
    "selection.method": "discretization: mdl or eqfreq",
    "selection.bins": "bin count for eqfreq discretization",
    "evaluation.repeats": "cross-validation repetitions",
    "evaluation.folds": "cross-validation folds",
    "evaluation.seed": "master seed; repeat r uses seed + r",
}


def config_entries() -> list[tuple[str, type, object]]:
    """(key, type, default) for every configurable field, in declaration order."""
    entries = []
    defaults = PipelineConfig()
    for name in _TOP_LEVEL:
        value = getattr(defaults, name)
        entries.append((name, type(value), value))
    for section, cls in _SECTIONS.items():
        for f in fields(cls):
            value = getattr(getattr(defaults, section), f.name)
            entries.append((f"{section}.{f.name}", type(value), value))
    return entries


def help_for(key: str) -> str:
    return _HELP.get(key, "")


def _build(values: dict[str, object]) -> PipelineConfig:
    top = {name: values[name] for name in _TOP_LEVEL}
    sections = {}
    for section, cls in _SECTIONS.items():
        kwargs = {
            f.name: values[f"{section}.{f.name}"] for f in fields(cls)
        }
        sections[section] = cls(**kwargs)
    return PipelineConfig(**top, **sections)


def resolve_config(config_file=None, overrides=None) -> PipelineConfig:
    """Defaults, then config-file lines, then explicit overrides.

    ``overrides`` maps dotted keys to raw string values.

    Raises:
        UnknownConfigKey: a key that is not part of the registry.
    """
    entries = {key: (typ, default) for key, typ, default in config_entries()}
    values = {key: default for key, (_, default) in entries.items()}

    def apply(key: str, raw: str, origin: str) -> None:
        if key not in entries:
            raise UnknownConfigKey(f"{origin}: unknown config key {key!r}")
        typ = entries[key][0]
        try:
            if typ is bool:
                values[key] = raw.strip().lower() in ("1", "true", "yes")
            else:
                values[key] = typ(raw.strip())
        except ValueError:
            raise UnknownConfigKey(f"{origin}: cannot parse {key}={raw!r} as {typ.__name__}")

    if config_file:
        with open(config_file) as fh:
            for lineno, line in enumerate(fh, 1):
                line = line.strip()
                if not line or line.startswith("#"):
                    continue
                if "=" not in line:
                    raise UnknownConfigKey(f"{config_file}:{lineno}: expected key=value")
                key, _, raw = line.partition("=")
                apply(key.strip(), raw, f"{config_file}:{lineno}")
    for key, raw in (overrides or {}).items():
        apply(key, raw, "command line")
    return _build(values)


def dump_config(cfg: PipelineConfig) -> str:
    """Fully resolved ``key=value`` lines, sorted by key."""
    values = {}
    for name in _TOP_LEVEL:
        values[name] = getattr(cfg, name)
    for section, cls in _SECTIONS.items():
        obj = getattr(cfg, section)
        for f in fields(cls):
            values[f"{section}.{f.name}"] = getattr(obj, f.name)
    lines = []
    for key in sorted(values):
        v = values[key]
        lines.append(f"{key}={str(float(v)) if isinstance(v, float) else v}")
    return "\n".join(lines) + "\n"


def config_hash(cfg: PipelineConfig) -> str:
    """Short digest identifying a resolved configuration."""
    return hashlib.sha256(dump_config(cfg).encode()).hexdigest()[:12]

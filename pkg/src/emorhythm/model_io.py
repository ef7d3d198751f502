"""Versioned plain-text persistence for trained classifiers.

The format is line oriented: a magic header with a version and model kind,
the shared normalization state, then kind-specific weight blocks with floats
written in shortest round-trip decimal form. Loading refuses any version it
does not know.
"""

from __future__ import annotations

import numpy as np

from .mlp import MlpConfig, MlpModel
from .svm import SvmConfig, SvmModel, _BinaryMachine

MAGIC = "emorhythm-model"
VERSION = 1


class UnknownModelVersion(ValueError):
    """Model file written by an incompatible format version."""


def _fmt_floats(arr) -> str:
    return " ".join(str(float(v)) for v in np.asarray(arr, dtype=np.float64).ravel())


def _parse_floats(line: str) -> np.ndarray:
    return np.asarray([float(tok) for tok in line.split()], dtype=np.float64)


def _write_common(fh, kind, classes, feature_min, feature_max, feature_idx):
    fh.write(f"{MAGIC} {VERSION} {kind}\n")
    fh.write("classes " + " ".join(classes) + "\n")
    if feature_idx is None:
        fh.write("feature_idx -\n")
    else:
        fh.write("feature_idx " + " ".join(str(int(i)) for i in feature_idx) + "\n")
    fh.write("feature_min " + _fmt_floats(feature_min) + "\n")
    fh.write("feature_max " + _fmt_floats(feature_max) + "\n")


def save_model(model, path) -> None:
    """Serialize an SvmModel or MlpModel to versioned text."""
    with open(path, "w") as fh:
        if isinstance(model, SvmModel):
            _write_common(fh, "svm", model.classes, model.feature_min,
                          model.feature_max, model.feature_idx)
            cfg = model.config
            fh.write(
                f"config C={cfg.C!r} kernel_degree={cfg.kernel_degree} "
                f"tolerance={cfg.tolerance!r} max_passes={cfg.max_passes}\n"
            )
            fh.write(f"machines {len(model.machines)}\n")
            for m in model.machines:
                fh.write(f"machine {m.positive} {m.negative} {len(m.dual_coef)} "
                         f"{float(m.bias)!r}\n")
                fh.write("dual " + _fmt_floats(m.dual_coef) + "\n")
                for row in m.support_vectors:
                    fh.write("sv " + _fmt_floats(row) + "\n")
        elif isinstance(model, MlpModel):
            _write_common(fh, "mlp", model.classes, model.feature_min,
                          model.feature_max, model.feature_idx)
            cfg = model.config
            fh.write(
                f"config hidden_units={cfg.hidden_units} learning_rate={cfg.learning_rate!r} "
                f"momentum={cfg.momentum!r} epochs={cfg.epochs} seed={cfg.seed}\n"
            )
            for name, mat in (("w_in", model.w_in), ("w_out", model.w_out)):
                fh.write(f"{name} {mat.shape[0]} {mat.shape[1]}\n")
                for row in mat:
                    fh.write(_fmt_floats(row) + "\n")
            fh.write("b_in " + _fmt_floats(model.b_in) + "\n")
            fh.write("b_out " + _fmt_floats(model.b_out) + "\n")
        else:
            raise TypeError(f"cannot persist {type(model).__name__}")


def _read_common(lines):
    head = lines[0].split()
    if len(head) != 3 or head[0] != MAGIC:
        raise UnknownModelVersion("not an emorhythm model file")
    if head[1] != str(VERSION):
        raise UnknownModelVersion(f"unsupported model version {head[1]}")
    kind = head[2]
    classes = lines[1].split()[1:]
    idx_tokens = lines[2].split()[1:]
    feature_idx = None if idx_tokens == ["-"] else np.asarray(idx_tokens, dtype=int)
    feature_min = _parse_floats(lines[3].partition(" ")[2])
    feature_max = _parse_floats(lines[4].partition(" ")[2])
    return kind, classes, feature_idx, feature_min, feature_max


def _config_dict(line: str) -> dict[str, str]:
    return dict(tok.split("=", 1) for tok in line.split()[1:])


def load_model(path):
    """Inverse of :func:`save_model`.

    Raises:
        UnknownModelVersion: wrong magic or format version.
    """
    with open(path) as fh:
        lines = [ln.rstrip("\n") for ln in fh]
    kind, classes, feature_idx, fmin, fmax = _read_common(lines)
    if kind == "svm":
        raw = _config_dict(lines[5])
        cfg = SvmConfig(
            C=float(raw["C"]), kernel_degree=int(raw["kernel_degree"]),
            tolerance=float(raw["tolerance"]), max_passes=int(raw["max_passes"]),
        )
        n_machines = int(lines[6].split()[1])
        machines = []
        pos = 7
        for _ in range(n_machines):
            _, positive, negative, n_sv, bias = lines[pos].split()
            n_sv = int(n_sv)
            dual = _parse_floats(lines[pos + 1].partition(" ")[2])
            svs = np.asarray(
                [_parse_floats(lines[pos + 2 + i].partition(" ")[2]) for i in range(n_sv)]
            ).reshape(n_sv, len(fmin))
            machines.append(_BinaryMachine(positive, negative, svs, dual, float(bias)))
            pos += 2 + n_sv
        return SvmModel(classes, fmin, fmax, machines, cfg, feature_idx)
    if kind == "mlp":
        raw = _config_dict(lines[5])
        cfg = MlpConfig(
            hidden_units=int(raw["hidden_units"]), learning_rate=float(raw["learning_rate"]),
            momentum=float(raw["momentum"]), epochs=int(raw["epochs"]), seed=int(raw["seed"]),
        )
        pos = 6
        mats = {}
        for name in ("w_in", "w_out"):
            _, rows, cols = lines[pos].split()
            rows, cols = int(rows), int(cols)
            mats[name] = np.asarray(
                [_parse_floats(lines[pos + 1 + i]) for i in range(rows)]
            ).reshape(rows, cols)
            pos += 1 + rows
        b_in = _parse_floats(lines[pos].partition(" ")[2])
        b_out = _parse_floats(lines[pos + 1].partition(" ")[2])
        return MlpModel(classes, mats["w_in"], b_in, mats["w_out"], b_out,
                        fmin, fmax, cfg, feature_idx)
    raise UnknownModelVersion(f"unknown model kind {kind!r}")

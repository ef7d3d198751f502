"""Command-line front end for the full pipeline.

Subcommands: segment, extract, rank, sweep, train, evaluate, pairwise,
arousal, ablate, schema, config-dump. Every configuration field is exposed
both as a ``key=value`` config-file line and as a ``--key value`` flag (flags
win). Reports carry the task name, config hash and seed but no timestamps,
so identical runs produce byte-identical files.

Exit codes: 0 success, 1 evaluation failure, 2 usage or IO error.
"""

from __future__ import annotations

import argparse
import csv
import logging
import sys
import time
from pathlib import Path

import numpy as np

from . import corpus, evaluation, model_io, pipeline, selection
from .config import (
    PipelineConfig,
    UnknownConfigKey,
    config_entries,
    config_hash,
    dump_config,
    help_for,
    resolve_config,
)
from .features import build_schema
from .mlp import NonFiniteLoss, train_mlp
from .segmentation import segment_clip
from .svm import DegenerateClass, DimensionMismatch, train_svm

logger = logging.getLogger(__name__)

_USAGE_ERRORS = (
    OSError,
    UnknownConfigKey,
    corpus.EmptyCorpus,
    corpus.MalformedWav,
    corpus.UnsupportedEncoding,
    corpus.UnrecognizedName,
    corpus.UnknownEmotionCode,
    corpus.SchemaMismatch,
    model_io.UnknownModelVersion,
)


def _mangle(key: str) -> str:
    return key.replace(".", "__").replace("-", "_")


def _common_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="FILE", help="config file of key=value lines")
    for key, typ, default in config_entries():
        common.add_argument(
            f"--{key}", dest=_mangle(key), metavar=typ.__name__.upper(), default=None,
            help=f"{help_for(key)} (default: {default})",
        )
    return common


def build_parser() -> argparse.ArgumentParser:
    common = _common_parser()
    parser = argparse.ArgumentParser(prog="emorhythm", description=__doc__.split("\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("segment", parents=[common],
                       help="print voiced/unvoiced/pause intervals of one WAV")
    p.add_argument("wav", help="input WAV file")
    p.set_defaults(func=cmd_segment)

    p = sub.add_parser("extract", parents=[common],
                       help="extract the feature matrix for a corpus directory")
    p.set_defaults(func=cmd_extract)

    for name, func, help_text in (
        ("rank", cmd_rank, "rank features by cross-validated gain ratio"),
        ("sweep", cmd_sweep, "accuracy versus number of top-ranked features"),
        ("train", cmd_train, "train the configured classifier on the full matrix"),
        ("evaluate", cmd_evaluate, "7-class repeated stratified cross-validation"),
        ("pairwise", cmd_pairwise, "all binary class-pair tasks"),
        ("arousal", cmd_arousal, "high/low arousal task per feature set"),
        ("ablate", cmd_ablate, "accuracy per named feature-family set"),
    ):
        p = sub.add_parser(name, parents=[common], help=help_text)
        p.add_argument("--features", metavar="CSV",
                       help="feature matrix (default: <output_dir>/features.csv)")
        p.set_defaults(func=func)

    p = sub.add_parser("schema", parents=[common], help="print the 487 feature names")
    p.set_defaults(func=cmd_schema)

    p = sub.add_parser("config-dump", parents=[common],
                       help="print the fully resolved configuration")
    p.set_defaults(func=cmd_config_dump)
    return parser


def _resolve(args) -> PipelineConfig:
    overrides = {}
    for key, _typ, _default in config_entries():
        raw = getattr(args, _mangle(key), None)
        if raw is not None:
            overrides[key] = raw
    return resolve_config(args.config, overrides)


def _features_path(cfg: PipelineConfig, args) -> Path:
    if getattr(args, "features", None):
        return Path(args.features)
    return Path(cfg.output_dir) / "features.csv"


def _out_dir(cfg: PipelineConfig) -> Path:
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _header_lines(task: str, cfg: PipelineConfig) -> list[str]:
    return [f"# task={task}", f"# config={config_hash(cfg)}",
            f"# seed={cfg.evaluation.seed}"]


def _write_csv(path: Path, task: str, cfg: PipelineConfig, columns, rows) -> None:
    with open(path, "w", newline="") as fh:
        for line in _header_lines(task, cfg):
            fh.write(line + "\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(columns)
        writer.writerows(rows)


def _format_table(headers, rows) -> list[str]:
    cells = [list(map(str, headers))] + [list(map(str, r)) for r in rows]
    widths = [max(len(row[i]) for row in cells) for i in range(len(headers))]
    lines = []
    for r, row in enumerate(cells):
        lines.append("  ".join(cell.rjust(w) for cell, w in zip(row, widths)))
        if r == 0:
            lines.append("  ".join("-" * w for w in widths))
    return lines


def _write_text_report(path: Path, task: str, cfg: PipelineConfig, body: list[str]) -> None:
    with open(path, "w") as fh:
        fh.write("\n".join(_header_lines(task, cfg) + body) + "\n")


def _confusion_rows(cm: evaluation.ConfusionMatrix):
    for i, true in enumerate(cm.classes):
        for j, pred in enumerate(cm.classes):
            yield (true, pred, int(cm.counts[i, j]))


def _confusion_table(cm: evaluation.ConfusionMatrix) -> list[str]:
    headers = ["true\\pred"] + list(cm.classes)
    rows = [[cls] + [int(v) for v in cm.counts[i]] for i, cls in enumerate(cm.classes)]
    return _format_table(headers, rows)


def _selection_kwargs(cfg: PipelineConfig, task_ds) -> dict:
    mode = cfg.selection.mode
    if mode == "none":
        return {}
    k = min(cfg.selection.k, len(task_ds.schema))
    if mode == "paper-faithful":
        ranking = selection.rank_cv(
            task_ds, folds=cfg.selection.folds, seed=cfg.evaluation.seed,
            method=cfg.selection.method, n_bins=cfg.selection.bins,
        )
        return {"selection_mode": "fixed", "ranking": ranking, "select_k": k}
    return {
        "selection_mode": "per-fold", "select_k": k,
        "selection_folds": cfg.selection.folds,
        "selection_method": cfg.selection.method,
    }


def _cross_validate(cfg: PipelineConfig, task_ds, feature_idx=None, use_selection=True):
    kwargs = _selection_kwargs(cfg, task_ds) if use_selection else {}
    return evaluation.cross_validate(
        task_ds, cfg.clf_config(), repeats=cfg.evaluation.repeats,
        folds=cfg.evaluation.folds, seed=cfg.evaluation.seed,
        feature_idx=feature_idx, jobs=cfg.jobs, **kwargs,
    )


# --------------------------------------------------------------------------
# commands


def cmd_segment(cfg: PipelineConfig, args) -> int:
    clip = corpus.load_wav(args.wav)
    seg = segment_clip(clip, cfg.vad, frame_ms=cfg.frame_ms)
    for start, end, seg_class in seg.intervals:
        print(f"{start:.6f}\t{end:.6f}\t{seg_class.value}")
    return 0


def cmd_extract(cfg: PipelineConfig, args) -> int:
    if not cfg.corpus_dir:
        print("extract needs corpus_dir (config key or --corpus_dir)", file=sys.stderr)
        return 2
    started = time.monotonic()
    entries = corpus.load_corpus(cfg.corpus_dir)
    try:
        dataset = pipeline.extract_dataset(
            entries, cfg.extractor(), jobs=cfg.jobs,
            provenance=f"config:{config_hash(cfg)}",
        )
    except ValueError as err:
        print(f"extraction produced no rows: {err}", file=sys.stderr)
        return 1
    out = _out_dir(cfg) / "features.csv"
    corpus.save_feature_matrix(dataset, out)
    elapsed = time.monotonic() - started
    print(f"extracted {len(dataset)} utterances in {elapsed:.1f} s -> {out}")
    return 0


def cmd_rank(cfg: PipelineConfig, args) -> int:
    dataset = corpus.load_feature_matrix(_features_path(cfg, args))
    ranking = selection.rank_cv(
        dataset, folds=cfg.selection.folds, seed=cfg.evaluation.seed,
        method=cfg.selection.method, n_bins=cfg.selection.bins,
    )
    rows = [
        (pos + 1, dataset.schema.names[feat], str(float(ranking.scores[feat])))
        for pos, feat in enumerate(ranking.order)
    ]
    out = _out_dir(cfg) / "rank.csv"
    _write_csv(out, "rank", cfg, ("rank", "feature_name", "score"), rows)
    print(f"ranked {len(rows)} features -> {out}")
    return 0


def cmd_sweep(cfg: PipelineConfig, args) -> int:
    dataset = corpus.load_feature_matrix(_features_path(cfg, args))
    ranking = selection.rank_cv(
        dataset, folds=cfg.selection.folds, seed=cfg.evaluation.seed,
        method=cfg.selection.method, n_bins=cfg.selection.bins,
    )
    d = len(dataset.schema)
    step = max(1, cfg.selection.sweep_step)
    ks = sorted(set(range(step, d + 1, step)) | {d})
    curve = selection.sweep(
        dataset, ranking, ks, cfg.clf_config(), folds=cfg.evaluation.folds,
        seed=cfg.evaluation.seed, jobs=cfg.jobs,
    )
    rows = [(k, str(float(acc))) for k, acc in curve.points]
    out = _out_dir(cfg) / "sweep.csv"
    _write_csv(out, f"sweep best_k={curve.best_k}", cfg, ("k", "accuracy"), rows)
    print(f"swept {len(ks)} feature counts, best_k={curve.best_k} -> {out}")
    return 0


def cmd_train(cfg: PipelineConfig, args) -> int:
    dataset = corpus.load_feature_matrix(_features_path(cfg, args))
    feature_idx = None
    if cfg.selection.mode != "none":
        ranking = selection.rank_cv(
            dataset, folds=cfg.selection.folds, seed=cfg.evaluation.seed,
            method=cfg.selection.method, n_bins=cfg.selection.bins,
        )
        feature_idx = ranking.order[: min(cfg.selection.k, len(dataset.schema))]
    X = dataset.X if feature_idx is None else dataset.X[:, feature_idx]
    if cfg.classifier == "svm":
        model = train_svm(X, dataset.labels, cfg.svm, seed=cfg.evaluation.seed)
    else:
        model = train_mlp(X, dataset.labels, cfg.mlp, seed=cfg.evaluation.seed)
    model.feature_idx = None if feature_idx is None else np.asarray(feature_idx)
    out = _out_dir(cfg) / f"model_{cfg.classifier}.txt"
    model_io.save_model(model, out)
    print(f"trained {cfg.classifier} on {len(dataset)} rows -> {out}")
    return 0


def cmd_evaluate(cfg: PipelineConfig, args) -> int:
    dataset = corpus.load_feature_matrix(_features_path(cfg, args))
    result = _cross_validate(cfg, dataset)
    out_dir = _out_dir(cfg)
    task = f"evaluate-{cfg.classifier}"
    _write_csv(out_dir / "evaluate_confusion.csv", task, cfg,
               ("true_label", "predicted_label", "count"), _confusion_rows(result.confusion))
    _write_csv(out_dir / "evaluate_summary.csv", task, cfg,
               ("task", "accuracy", "std"),
               [(task, str(float(result.accuracy)), str(float(result.std)))])
    recalls = evaluation.per_class_recall(result.confusion)
    body = ["", f"accuracy {result.accuracy:.4f} (std {result.std:.4f} over "
            f"{cfg.evaluation.repeats} repeats)", ""]
    body += _confusion_table(result.confusion)
    body += ["", "per-class recall:"]
    body += [f"  {cls:<12} {recalls[cls]:.4f}" for cls in result.confusion.classes
             if cls in recalls]
    _write_text_report(out_dir / "evaluate_report.txt", task, cfg, body)
    print(f"{task}: accuracy {result.accuracy:.4f} -> {out_dir}/evaluate_report.txt")
    return 0


def cmd_pairwise(cfg: PipelineConfig, args) -> int:
    dataset = corpus.load_feature_matrix(_features_path(cfg, args))
    rows = []
    for a, b in evaluation.binary_pair_tasks(dataset.classes):
        task_ds = evaluation.make_task(dataset, "pair", (a, b))
        result = _cross_validate(cfg, task_ds)
        rows.append((f"{a} vs {b}", str(float(result.accuracy)), str(float(result.std))))
        print(f"{a} vs {b}: {result.accuracy:.4f}")
    out = _out_dir(cfg) / "pairwise.csv"
    _write_csv(out, "pairwise", cfg, ("task", "accuracy", "std"), rows)
    print(f"evaluated {len(rows)} pairs -> {out}")
    return 0


def cmd_arousal(cfg: PipelineConfig, args) -> int:
    dataset = corpus.load_feature_matrix(_features_path(cfg, args))
    task_ds = evaluation.make_task(dataset, "arousal")
    schema = dataset.schema
    feature_sets = [
        ("Rhythm only", evaluation.family_feature_indices(schema, ("rhythm_temporal",))),
        ("MFCC only", evaluation.family_feature_indices(schema, ("mfcc_voiced", "mfcc_unvoiced"))),
        ("MFCC + Rhythm", evaluation.family_feature_indices(
            schema, ("mfcc_voiced", "mfcc_unvoiced", "rhythm_temporal"))),
    ]
    rows = []
    for name, idx in feature_sets:
        result = _cross_validate(cfg, task_ds, feature_idx=idx, use_selection=False)
        rows.append((name, str(float(result.accuracy)), str(float(result.std))))
        print(f"arousal / {name}: {result.accuracy:.4f}")
    overall = _cross_validate(cfg, task_ds)
    overall_name = ("Selected top-" + str(min(cfg.selection.k, len(schema)))
                    if cfg.selection.mode != "none" else "All features")
    rows.append((overall_name, str(float(overall.accuracy)), str(float(overall.std))))
    print(f"arousal / {overall_name}: {overall.accuracy:.4f}")
    out = _out_dir(cfg) / "arousal.csv"
    _write_csv(out, "arousal", cfg, ("task", "accuracy", "std"), rows)
    print(f"evaluated arousal task -> {out}")
    return 0


def cmd_ablate(cfg: PipelineConfig, args) -> int:
    dataset = corpus.load_feature_matrix(_features_path(cfg, args))
    results = evaluation.ablate(
        dataset, cfg.clf_config(), repeats=cfg.evaluation.repeats,
        folds=cfg.evaluation.folds, seed=cfg.evaluation.seed, jobs=cfg.jobs,
    )
    rows = []
    for name, result in results.items():
        rows.append((name, str(float(result.accuracy)), str(float(result.std))))
        print(f"ablate / {name}: {result.accuracy:.4f}")
    out = _out_dir(cfg) / "ablate.csv"
    _write_csv(out, "ablate", cfg, ("task", "accuracy", "std"), rows)
    print(f"evaluated {len(rows)} feature sets -> {out}")
    return 0


def cmd_schema(cfg: PipelineConfig, args) -> int:
    for name in build_schema().names:
        print(name)
    return 0


def cmd_config_dump(cfg: PipelineConfig, args) -> int:
    sys.stdout.write(dump_config(cfg))
    return 0


def main(argv=None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(message)s")
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = _resolve(args)
        return args.func(cfg, args)
    except _USAGE_ERRORS as err:
        print(f"error: {err}", file=sys.stderr)
        return 2
    except (ValueError, KeyError, RuntimeError, DegenerateClass, DimensionMismatch,
            NonFiniteLoss) as err:
        print(f"error: {err}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

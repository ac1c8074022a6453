"""Command-line entry point: ``eegpref {synth,features,evaluate,report}``.

Outputs (under ``--out``, default ``out/``)::

    data/<subject>.eegr, data/labels.csv, data/manifest.json   synth
    features.csv, features.meta.json, rejection_report.json    features
    report.txt, report.json                                    evaluate
"""

from __future__ import annotations

import argparse
import hashlib
import json
import logging
import sys
from pathlib import Path
from typing import List, Optional

from . import __version__
from .config import ExperimentConfig
from .core import load_dataset, write_labels, write_recording
from .errors import ConfigurationError, EEGPrefError, StageError
from .evaluation import render_table, run_grid, shuffled_labels
from .features import FeatureMatrix
from .pipeline import extract_features
from .synthgen import generate

log = logging.getLogger("eegpref")


def _write_json(path: Path, payload: dict) -> None:
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def cmd_synth(cfg: ExperimentConfig) -> Path:
    synth = cfg.synth_config()
    out = cfg.data_dir
    out.mkdir(parents=True, exist_ok=True)
    log.info("generating %d subjects x %d trials (beta_effect=%s, seed=%d)",
             synth.n_subjects, synth.n_trials, synth.beta_effect, synth.seed)
    ds = generate(synth)
    files = {}
    for rec in ds.recordings:
        path = out / f"{rec.subject_id}.eegr"
        write_recording(rec, path)
        files[path.name] = _sha256(path)
    labels_path = out / "labels.csv"
    write_labels(ds.labels, labels_path)
    files[labels_path.name] = _sha256(labels_path)
    _write_json(out / "manifest.json", {
        "config_digest": cfg.synth_digest,
        "synth": synth.to_dict(),
        "planted_artifacts": [{"subject_id": s, "trial_index": t} for s, t in ds.artifacts],
        "files": files,
    })
    return out


def _feature_paths(cfg: ExperimentConfig):
    out = cfg.out_dir
    return out / "features.csv", out / "features.meta.json", out / "rejection_report.json"


def cmd_features(cfg: ExperimentConfig) -> FeatureMatrix:
    labels_path = cfg.labels_path
    if not labels_path.exists():
        raise StageError("load", FileNotFoundError(f"labels file not found: {labels_path}"))
    try:
        recordings, labels = load_dataset(cfg.data_dir, labels_path)
    except (OSError, EEGPrefError) as exc:
        raise StageError("load", exc) from exc
    r = cfg.raw
    matrix, report = extract_features(
        recordings, labels, cfg.preprocess_config(), r["labels"]["scheme"], r["labels"]["threshold"],
        r["features"]["channel_policy"], r["features"]["power_mode"],
    )
    csv_path, meta_path, report_path = _feature_paths(cfg)
    csv_path.parent.mkdir(parents=True, exist_ok=True)
    matrix.to_csv(csv_path)
    _write_json(meta_path, {
        "config_digest": cfg.features_digest,
        "rows": [{"subject_id": s, "trial_index": t} for s, t in matrix.keys],
        "columns": list(matrix.names) + ["label"],
    })
    report.write(report_path, {"config_digest": cfg.features_digest})
    log.info("features: %d rows x %d columns; %d epochs rejected",
             matrix.n_rows, len(matrix.names), len(report.rejected_epochs))
    return matrix


def _load_or_build_features(cfg: ExperimentConfig) -> FeatureMatrix:
    csv_path, meta_path, _ = _feature_paths(cfg)
    if csv_path.exists() and meta_path.exists():
        meta = json.loads(meta_path.read_text())
        if meta.get("config_digest") == cfg.features_digest:
            return FeatureMatrix.from_csv(csv_path, cfg.raw["labels"]["scheme"])
        log.info("features.csv is stale for this config; rebuilding")
    if not cfg.labels_path.exists() and cfg.raw["data"]["dir"] is None:
        cmd_synth(cfg)
    return cmd_features(cfg)


def cmd_evaluate(cfg: ExperimentConfig, shuffle: bool = False) -> Path:
    matrix = _load_or_build_features(cfg)
    ev = cfg.raw["evaluation"]
    shuffle = shuffle or ev["shuffle_labels"]
    if shuffle:
        matrix = matrix.with_labels(shuffled_labels(matrix.y, cfg.seed))
    report = run_grid(
        matrix, cfg.classifier_grid(), cfg.selector_grid(), cfg.seed, ev["folds"], ev["test_fraction"],
        threads=cfg.threads, config_digest=cfg.digest,
        meta={"n_rows": matrix.n_rows, "features": list(matrix.names), "shuffled_labels": shuffle},
    )
    text_path, _ = report.write(cfg.out_dir)
    return text_path


def cmd_report(cfg: ExperimentConfig) -> str:
    path = cfg.out_dir / "report.json"
    if not path.exists():
        raise StageError("report", FileNotFoundError(f"report not found: {path} (run 'evaluate' first)"))
    return render_table(json.loads(path.read_text()))


def _add_globals(p: argparse.ArgumentParser, suppress: bool) -> None:
    d = argparse.SUPPRESS if suppress else None
    p.add_argument("--config", metavar="PATH", default=d, help="JSON experiment config")
    p.add_argument("--seed", type=int, metavar="N", default=d, help="override the config seed")
    p.add_argument("--out", metavar="DIR", default=d, help="output directory")
    p.add_argument("--threads", type=int, metavar="N", default=d, help="parallel grid cells")
    p.add_argument("-v", "--verbose", action="store_true", default=d if suppress else False)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="eegpref", description="EEG preference classification pipeline")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    _add_globals(parser, suppress=False)
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in [
        ("synth", "write a synthetic dataset (EEGR files + labels CSV)"),
        ("features", "preprocess the dataset and write the feature CSV"),
        ("evaluate", "run the selector x classifier grid and write the report"),
        ("report", "print the table from an existing report.json"),
    ]:
        sp = sub.add_parser(name, help=help_text)
        _add_globals(sp, suppress=True)
        if name == "evaluate":
            sp.add_argument("--shuffle-labels", action="store_true",
                            help="permute labels (seeded) to measure chance performance")
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = ExperimentConfig.load(args.config, seed=args.seed, out_dir=args.out, threads=args.threads)
        if args.command == "synth":
            print(cmd_synth(cfg))
        elif args.command == "features":
            cmd_features(cfg)
            print(_feature_paths(cfg)[0])
        elif args.command == "evaluate":
            print(cmd_evaluate(cfg, getattr(args, "shuffle_labels", False)).read_text(), end="")
        else:
            print(cmd_report(cfg), end="")
    except ConfigurationError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (EEGPrefError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())

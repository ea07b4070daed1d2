"""Command-line front door.

Four subcommands mirror the library's stages:

  dump-tree FILE        print the container's box tree with offsets
  extract FILE          print one canonical metadata string per line
  ingest                parse a manifest of videos into a JSONL corpus
  run-scenario          split, fit, classify, and write metrics + plot

Exit status: 0 success, 2 bad input data (unreadable file, malformed
manifest, class too small...), 1 internal error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import bmff
from .scenarios import (
    DataError,
    ScenarioConfig,
    SCENARIOS,
    extract_strings,
    filter_records,
    ingest,
    load_manifest,
    read_corpus,
    run_blind_device,
    run_leave_one_model_out,
    run_scenario,
    write_corpus,
)

log = logging.getLogger(__name__)


def _cmd_dump_tree(args) -> int:
    data = Path(args.file).read_bytes()
    report = bmff.parse_tree(data)
    def walk(node, depth):
        pad = "  " * depth
        size = node.header.size
        extra = f" payload={len(node.payload)}B" if node.payload is not None else ""
        print(f"{pad}{node.name}  offset={node.offset} size={size}{extra}")
        for child in node.children:
            walk(child, depth + 1)
    for root in report.tree:
        walk(root, 0)
    for offset, message in report.warnings:
        print(f"warning @ {offset}: {message}", file=sys.stderr)
    return 0


def _cmd_extract(args) -> int:
    data = Path(args.file).read_bytes()
    for ms in extract_strings(data):
        print(ms.text)
    return 0


def _cmd_ingest(args) -> int:
    manifest = load_manifest(args.manifest)
    records, skipped = ingest(manifest, args.root)
    write_corpus(records, args.out)
    print(f"ingested {len(records)} files into {args.out}")
    if skipped:
        print(f"skipped {len(skipped)} unreadable files:", file=sys.stderr)
        for path, reason in skipped:
            print(f"  {path}: {reason}", file=sys.stderr)
    return 0


def _read_config_file(path) -> dict[str, str]:
    """KEY=VALUE lines; blank lines and # comments ignored."""
    values: dict[str, str] = {}
    for line_no, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise DataError(f"{path}:{line_no}: expected KEY=VALUE, got {line!r}")
        key, _, value = line.partition("=")
        values[key.strip()] = value.strip()
    return values


_CONFIG_KEYS = {
    "scenario": str,
    "alpha": int,
    "beta": int,
    "lambda": int,
    "seed": int,
    "classifier": str,
    "split": str,
    "small_clusters": str,
    "holdout": str,
    "repeats": int,
}


def _build_config(args) -> tuple[ScenarioConfig, str | None, int]:
    """Merge config file values with flags; flags win."""
    file_values: dict[str, object] = {}
    if args.config:
        raw = _read_config_file(args.config)
        for key, value in raw.items():
            if key not in _CONFIG_KEYS:
                raise DataError(f"unknown config key {key!r}")
            try:
                file_values[key] = _CONFIG_KEYS[key](value)
            except ValueError as exc:
                raise DataError(f"config key {key}: {exc}") from exc

    def pick(flag_value, key, default):
        if flag_value is not None:
            return flag_value
        return file_values.get(key, default)

    scenario = pick(args.scenario, "scenario", None)
    if scenario is None:
        raise DataError("no scenario given (flag --scenario or config file)")
    try:
        config = ScenarioConfig(
            scenario=scenario,
            alpha=pick(args.alpha, "alpha", 300),
            beta=pick(args.beta, "beta", 4),
            lambda_=pick(getattr(args, "lambda"), "lambda", 5),
            seed=pick(args.seed, "seed", 0),
            classifier=pick(args.classifier, "classifier", None),
            split=pick(args.split, "split", None),
            small_clusters=pick(args.small_clusters, "small_clusters", "keep"),
        )
    except ValueError as exc:
        raise DataError(str(exc)) from exc
    holdout = pick(args.holdout, "holdout", None)
    repeats = pick(args.repeats, "repeats", 1)
    if repeats < 1:
        raise DataError("repeats must be >= 1")
    return config, holdout, repeats


def _load_records(args):
    if args.corpus:
        records = read_corpus(args.corpus)
    else:
        if not (args.manifest and args.root):
            raise DataError("give either --corpus or both --manifest and --root")
        records, _ = ingest(load_manifest(args.manifest), args.root)
    filters = {}
    for item in args.filter or ():
        if "=" not in item:
            raise DataError(f"--filter expects col=value, got {item!r}")
        col, _, value = item.partition("=")
        filters[col] = value
    if filters:
        records = filter_records(records, filters)
    return records


def _print_scenario_report(report) -> None:
    kind = report.model.kind
    print(f"scenario: {report.scenario}   classifier: {kind}   seed: {report.config.seed}")
    print(f"features: {report.model.pipeline.vocabulary.dim} total, "
          f"{len(report.model.pipeline.mask.retained)} kept")
    print(f"{'class':<24}{'train':>6}{'val':>6}{'F1':>8}")
    for cls in report.classes:
        f1 = report.metrics.per_class_f1[cls]
        c = report.counts[cls]
        print(f"{str(cls):<24}{c['train']:>6}{c['val']:>6}{f1:>8.3f}")
    print(f"balanced accuracy: {report.metrics.balanced_accuracy:.3f}")
    if report.metrics.tpr is not None:
        print(f"TPR: {report.metrics.tpr:.3f}   TNR: {report.metrics.tnr:.3f}")


def _write_outputs(out_dir, metrics_json: str, svg: str | None, model_doc: dict | None) -> None:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "metrics.json").write_text(metrics_json, encoding="utf-8")
    if svg is not None:
        (out / "plot.svg").write_text(svg, encoding="utf-8")
    if model_doc is not None:
        (out / "model.json").write_text(
            json.dumps(model_doc, sort_keys=True, indent=2) + "\n", encoding="utf-8"
        )


def _cmd_run_scenario(args) -> int:
    config, holdout, repeats = _build_config(args)
    records = _load_records(args)

    if config.scenario == "blind-device":
        if not holdout:
            raise DataError("blind-device needs --holdout MODEL_ID")
        report = run_blind_device(config, records, holdout)
        print(f"blind device {holdout}: {report.n_holdout} videos, "
              f"{report.fraction_in_true_region:.3f} land in the true brand region")
        if args.out_dir:
            _write_outputs(args.out_dir, report.metrics_json(), report.svg,
                           report.model.to_json_dict())
        return 0

    if config.effective_split() == "leave-one-model-out":
        report = run_leave_one_model_out(config, records)
        for fold in report.folds:
            if "skipped" in fold:
                print(f"fold {fold['model_id']}: skipped ({fold['skipped']})")
            else:
                print(f"fold {fold['model_id']}: balanced accuracy "
                      f"{fold['balanced_accuracy']:.3f} over {fold['n_validation']} videos")
        print(f"mean balanced accuracy: {report.mean_balanced_accuracy:.3f}")
        if args.out_dir:
            _write_outputs(args.out_dir, report.metrics_json(), None, None)
        return 0

    if repeats == 1:
        report = run_scenario(config, records)
        _print_scenario_report(report)
        if args.out_dir:
            _write_outputs(args.out_dir, report.metrics_json(), report.svg,
                           report.model.to_json_dict())
        return 0

    runs = []
    for offset in range(repeats):
        run_config = ScenarioConfig(
            scenario=config.scenario,
            alpha=config.alpha,
            beta=config.beta,
            lambda_=config.lambda_,
            seed=config.seed + offset,
            classifier=config.classifier,
            split=config.split,
            small_clusters=config.small_clusters,
            continuous=config.continuous,
        )
        runs.append(run_scenario(run_config, records))
    for report in runs:
        print(f"seed {report.config.seed}: balanced accuracy "
              f"{report.metrics.balanced_accuracy:.3f}")
    mean_ba = sum(r.metrics.balanced_accuracy for r in runs) / len(runs)
    print(f"mean balanced accuracy over {repeats} seeds: {mean_ba:.3f}")
    if args.out_dir:
        doc = {
            "scenario": config.scenario,
            "config": config.to_json_dict(),
            "repeats": repeats,
            "runs": [r.to_json_dict() for r in runs],
            "mean_balanced_accuracy": mean_ba,
        }
        _write_outputs(args.out_dir, json.dumps(doc, sort_keys=True, indent=2) + "\n",
                       runs[0].svg, runs[0].model.to_json_dict())
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="vidmeta",
        description="Classify video provenance from MP4/MOV container metadata.",
    )
    parser.add_argument("-v", "--verbose", action="store_true",
                        help="log parser warnings and pipeline notes")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("dump-tree", help="print a file's box tree")
    p.add_argument("file")
    p.set_defaults(func=_cmd_dump_tree)

    p = sub.add_parser("extract", help="print a file's canonical metadata strings")
    p.add_argument("file")
    p.set_defaults(func=_cmd_extract)

    p = sub.add_parser("ingest", help="parse manifest videos into a JSONL corpus")
    p.add_argument("--manifest", required=True, help="CSV with a path column")
    p.add_argument("--root", required=True, help="directory the paths are relative to")
    p.add_argument("--out", required=True, help="JSONL corpus to write")
    p.set_defaults(func=_cmd_ingest)

    p = sub.add_parser("run-scenario", help="train and score one scenario")
    src = p.add_argument_group("input (corpus or manifest)")
    src.add_argument("--corpus", help="JSONL corpus from `vidmeta ingest`")
    src.add_argument("--manifest", help="CSV manifest (with --root)")
    src.add_argument("--root", help="directory the manifest paths are relative to")
    p.add_argument("--scenario", choices=SCENARIOS)
    p.add_argument("--alpha", type=int, help="feature-cluster count (default 300)")
    p.add_argument("--beta", type=int, help="largest cluster kept whole (default 4)")
    p.add_argument("--lambda", type=int, dest="lambda",
                   help="neighbors in the plane vote (default 5)")
    p.add_argument("--seed", type=int, help="RNG seed (default 0)")
    p.add_argument("--classifier", choices=("lda-knn", "tree"),
                   help="override the automatic classifier choice")
    p.add_argument("--split", choices=("stratified-half", "leave-one-model-out"),
                   help="override the automatic split choice")
    p.add_argument("--small-clusters", dest="small_clusters", choices=("keep", "drop"),
                   help="keep or drop clusters at or under beta (default keep)")
    p.add_argument("--holdout", help="model_id to hold out (blind-device)")
    p.add_argument("--repeats", type=int,
                   help="average over this many consecutive seeds")
    p.add_argument("--config", help="KEY=VALUE file; flags override it")
    p.add_argument("--filter", action="append", metavar="COL=VALUE",
                   help="keep only records whose label column matches (repeatable)")
    p.add_argument("--out-dir", help="write metrics.json / plot.svg / model.json here")
    p.set_defaults(func=_cmd_run_scenario)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return args.func(args)
    except (DataError, bmff.ParseError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception:  # pragma: no cover - defensive
        log.exception("internal error")
        return 1


if __name__ == "__main__":
    sys.exit(main())

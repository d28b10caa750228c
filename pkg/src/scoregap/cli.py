"""Command-line front end.

Subcommands:
  analyze    run the experiment pipeline from a config file
  check      run every guarantee checker on a model file
  synthetic  write the two-axis disparity construction as a model file
  alignment  estimate subspace overlap for a model or config

Exit codes: 0 success, 2 config/usage error, 3 ingest error, 4 numerical
degeneracy (no rule can help anyone), 5 partial failure (some groupings
failed but the run completed).
"""

from __future__ import annotations

import argparse
import json
import sys
from typing import Optional

from .errors import (
    ConfigError,
    DegenerateObjectiveError,
    EpsilonOutOfRangeError,
    IngestError,
    ScoregapError,
    ZeroProjectedRuleError,
)
from .conditions import condition_report, disparity_example
from .config import DEFAULT_ALIGNMENT_SAMPLES, load_config
from .experiment import classify_failures, render_csv, render_json, run_analysis
from .ingest import load_csv, split_masks
from .linalg import alignment, subspace_projection
from .modelio import load_model, model_to_dict, save_model

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_INGEST = 3
EXIT_DEGENERATE = 4
EXIT_PARTIAL = 5

DEGENERATE_CLI_ERRORS = (DegenerateObjectiveError, ZeroProjectedRuleError)


def _emit(text: str, out: Optional[str]) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        with open(out, "w", encoding="utf-8") as handle:
            handle.write(text)


def _fail(code: int, exc: Exception) -> int:
    print(f"error: {exc}", file=sys.stderr)
    return code


def _json_text(doc: dict) -> str:
    return json.dumps(doc, sort_keys=True, indent=2, allow_nan=False) + "\n"


def cmd_analyze(args: argparse.Namespace) -> int:
    try:
        config = load_config(args.config)
        config = config.override(
            out=args.out,
            format=args.format,
            seed=args.seed,
            rank=args.rank,
            wstar=args.wstar,
            standardize=args.standardize,
        )
    except ConfigError as exc:
        return _fail(EXIT_CONFIG, exc)
    try:
        result = run_analysis(config)
    except ConfigError as exc:
        return _fail(EXIT_CONFIG, exc)
    except IngestError as exc:
        return _fail(EXIT_INGEST, exc)

    if config.format == "json":
        _emit(render_json(result), config.out)
    else:
        _emit(render_csv(result), config.out)
        if config.out is not None:
            _emit(render_json(result), config.out + ".json")

    status = classify_failures(result)
    if status is None:
        return EXIT_OK
    for entry in result["groupings"]:
        if "error" in entry:
            err = entry["error"]
            print(f"grouping {entry['name']}: {err['type']}: {err['message']}", file=sys.stderr)
    return EXIT_DEGENERATE if status == "degenerate" else EXIT_PARTIAL


def cmd_check(args: argparse.Namespace) -> int:
    try:
        model = load_model(args.model)
    except ConfigError as exc:
        return _fail(EXIT_CONFIG, exc)
    try:
        report = condition_report(model)
    except DEGENERATE_CLI_ERRORS as exc:
        return _fail(EXIT_DEGENERATE, exc)
    doc = {"schema_version": 1, "model": args.model}
    doc.update(report.to_dict())
    _emit(_json_text(doc), args.out)
    return EXIT_OK


def cmd_synthetic(args: argparse.Namespace) -> int:
    try:
        model = disparity_example(args.epsilon)
    except EpsilonOutOfRangeError as exc:
        return _fail(EXIT_CONFIG, exc)
    if args.out is None:
        sys.stdout.write(_json_text(model_to_dict(model)))
    else:
        save_model(args.out, model)
    return EXIT_OK


def _alignment_entries(args: argparse.Namespace):
    """Return (entries, samples, seed) with defaults fully resolved."""
    samples = args.samples if args.samples is not None else DEFAULT_ALIGNMENT_SAMPLES
    seed = args.seed if args.seed is not None else 0
    if args.model is not None:
        model = load_model(args.model)
        value = alignment(model.group1.projection, model.group2.projection, samples, seed)
        return {"model": value}, samples, seed

    config = load_config(args.config)
    config = config.override(seed=args.seed, rank=args.rank)
    if args.samples is None:
        samples = config.alignment_samples
    seed = config.seed
    entries = {}
    if config.dataset is not None:
        ds = load_csv(config.dataset, config.encoding)
        features = ds.feature_matrix(tuple(config.drop_columns))
        for spec in config.groupings:
            mask1, mask2 = split_masks(ds, spec)
            p1 = subspace_projection(features[mask1], config.rank)
            p2 = subspace_projection(features[mask2], config.rank)
            entries[spec.name] = alignment(p1, p2, samples, seed)
    else:
        for model_entry in config.models:
            if model_entry.epsilon is not None:
                model = disparity_example(model_entry.epsilon)
            else:
                model = load_model(model_entry.path)
            entries[model_entry.name] = alignment(
                model.group1.projection, model.group2.projection, samples, seed
            )
    return entries, samples, seed


def cmd_alignment(args: argparse.Namespace) -> int:
    try:
        entries, samples, seed = _alignment_entries(args)
    except ConfigError as exc:
        return _fail(EXIT_CONFIG, exc)
    except IngestError as exc:
        return _fail(EXIT_INGEST, exc)
    doc = {
        "schema_version": 1,
        "n_samples": samples,
        "seed": seed,
        "entries": entries,
    }
    _emit(_json_text(doc), args.out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="scoregap",
        description="Improvement metrics and guarantee checks for strategic scoring",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    analyze = sub.add_parser("analyze", help="run the experiment pipeline from a config")
    analyze.add_argument("--config", required=True, help="YAML experiment config")
    analyze.add_argument("--out", help="output path (default: stdout)")
    analyze.add_argument("--format", choices=("json", "csv"),
                         help="csv writes the flat table; with --out the JSON "
                              "document is also written to OUT.json")
    analyze.add_argument("--seed", type=int, help="alignment sampling seed")
    analyze.add_argument("--rank", type=int, help="projection rank per subgroup")
    analyze.add_argument("--wstar", help="ones | fit:COLUMN | vector:FILE")
    analyze.add_argument("--standardize", action="store_const", const=True, default=None,
                         help="standardize feature columns before projecting")
    analyze.set_defaults(func=cmd_analyze)

    check = sub.add_parser("check", help="run guarantee checkers on a model file")
    check.add_argument("model", help="model file (JSON)")
    check.add_argument("--out", help="output path (default: stdout)")
    check.set_defaults(func=cmd_check)

    synthetic = sub.add_parser("synthetic", help="write the disparity-example model")
    synthetic.add_argument("epsilon", type=float, help="strictly between 0 and 1")
    synthetic.add_argument("--out", help="model file path (default: stdout)")
    synthetic.set_defaults(func=cmd_synthetic)

    align = sub.add_parser("alignment", help="subspace overlap of the two groups")
    source = align.add_mutually_exclusive_group(required=True)
    source.add_argument("--model", help="model file (JSON)")
    source.add_argument("--config", help="YAML experiment config")
    align.add_argument("--samples", type=int, help="Monte-Carlo sample count")
    align.add_argument("--seed", type=int, help="sampling seed")
    align.add_argument("--rank", type=int, help="projection rank (config mode)")
    align.add_argument("--out", help="output path (default: stdout)")
    align.set_defaults(func=cmd_alignment)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ScoregapError as exc:
        # anything not mapped above is a malformed-input problem
        return _fail(EXIT_CONFIG, exc)


if __name__ == "__main__":
    sys.exit(main())

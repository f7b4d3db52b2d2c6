"""Command line interface: run one variant, run the ablation ladder, verify.

Exit codes: 0 success, 1 usage error, 2 data error, 3 config error,
4 verification failure. Reports are JSON; passing --zero-timings writes all
timing fields as zero so identical runs produce byte-identical files.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
import time
from typing import Sequence

from .classifiers import KnnParams, SvmParams
from .errors import (
    ConfigError,
    DimensionViolation,
    DomainError,
    InsufficientData,
    ParseError,
    RankDeficient,
    SchemaMismatch,
)
from .pipeline import VARIANT_FLAGS, AccuracyTrace, run_stream, variant_config
from .streams import CsvSchema, DatasetBundle, StreamSpec, gen_rotating_drift, gen_waveform, load_csv
from .verify import run_all

# Short spellings accepted on the command line for the longer ladder names.
VARIANT_ALIASES = {
    "fb": "gfk_fb",
    "gmean": "gfk_gmean",
    "gmean_fb": "gfk_gmean_fb",
}


class UsageError(Exception):
    """Raised instead of argparse's default SystemExit(2)."""


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):  # noqa: A003 — argparse hook
        raise UsageError(message)


def _add_data_args(p: argparse.ArgumentParser) -> None:
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--csv", metavar="PATH", help="CSV with feature columns plus a trailing integer label")
    src.add_argument(
        "--gen",
        choices=("waveform21", "waveform40", "rotating"),
        help="generate a synthetic dataset instead of reading a file",
    )
    p.add_argument("--source-frac", type=float, default=0.2, help="leading fraction of CSV rows used as source")
    p.add_argument("--skip-header", action="store_true", help="skip one CSV header row")
    p.add_argument("--batch", type=int, default=50, help="mini-batch size")
    p.add_argument("--batch-count", type=int, default=60, help="number of generated batches")
    p.add_argument("--source-size", type=int, default=500, help="number of generated source rows")
    p.add_argument("--seed", type=int, default=0, help="generator seed")
    p.add_argument("--rotation", type=float, default=math.pi / 3, help="total drift rotation in radians (rotating)")
    p.add_argument("--classes", type=int, default=2, help="class count (rotating)")
    p.add_argument("--dim", type=int, default=10, help="ambient dimension (rotating)")


def _add_pipeline_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--k", type=int, default=3, help="subspace dimension (must satisfy k < d/2)")
    p.add_argument("--classifier", choices=("knn", "svm"), default="knn")
    p.add_argument("--knn-neighbors", type=int, default=1)
    p.add_argument("--svm-lambda", type=float, default=1e-4)
    p.add_argument("--svm-epochs", type=int, default=100)
    p.add_argument("--svm-seed", type=int, default=0)
    p.add_argument("--diagnostics", action="store_true", help="record angle telemetry per batch")
    p.add_argument("--out", required=True, metavar="PATH", help="where to write the JSON report")
    p.add_argument("--zero-timings", action="store_true", help="write timing fields as 0.0 for reproducible bytes")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="driftalign", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run one adaptation variant over a stream")
    _add_data_args(run)
    _add_pipeline_args(run)
    run.add_argument(
        "--variant",
        required=True,
        choices=tuple(VARIANT_FLAGS) + tuple(VARIANT_ALIASES),
        help="ablation variant to run",
    )
    run.set_defaults(func=cmd_run)

    ablate = sub.add_parser("ablate", help="run the full ablation ladder over one stream")
    _add_data_args(ablate)
    _add_pipeline_args(ablate)
    ablate.set_defaults(func=cmd_ablate)

    verify = sub.add_parser("verify", help="run the seeded self-verification suites")
    verify.add_argument("--seed", type=int, default=0)
    verify.add_argument("--instances", type=int, default=None, help="override instances per property")
    verify.add_argument(
        "--inject-fault",
        choices=("gfk-cross-sign",),
        default=None,
        help="deliberately break one computation to prove the suite can fail",
    )
    verify.set_defaults(func=cmd_verify)
    return parser


def _load_bundle(args: argparse.Namespace) -> DatasetBundle:
    if args.csv is not None:
        schema = CsvSchema(
            source_fraction=args.source_frac,
            batch_size=args.batch,
            has_header=args.skip_header,
        )
        return load_csv(args.csv, schema)
    spec = StreamSpec(
        batch_size=args.batch,
        batch_count=args.batch_count,
        seed=args.seed,
        source_size=args.source_size,
    )
    if args.gen == "waveform21":
        return gen_waveform(spec, "w21")
    if args.gen == "waveform40":
        return gen_waveform(spec, "w40")
    return gen_rotating_drift(spec, classes=args.classes, d=args.dim, total_rotation=args.rotation)


def _config_payload(args: argparse.Namespace, command: str) -> dict:
    if args.csv is not None:
        data = {
            "csv": args.csv,
            "source_fraction": args.source_frac,
            "skip_header": args.skip_header,
        }
    else:
        data = {
            "generator": args.gen,
            "batch_count": args.batch_count,
            "source_size": args.source_size,
            "seed": args.seed,
        }
        if args.gen == "rotating":
            data["rotation"] = args.rotation
            data["classes"] = args.classes
            data["dim"] = args.dim
    payload = {
        "command": command,
        "data": data,
        "batch_size": args.batch,
        "k": args.k,
        "classifier": args.classifier,
        "knn_neighbors": args.knn_neighbors,
        "svm": {
            "regularization": args.svm_lambda,
            "epochs": args.svm_epochs,
            "seed": args.svm_seed,
        },
        "diagnostics": args.diagnostics,
        "zero_timings": args.zero_timings,
    }
    if command == "run":
        payload["variant"] = _canonical_variant(args.variant)
    return payload


def _canonical_variant(name: str) -> str:
    return VARIANT_ALIASES.get(name, name)


def _variant_payload(
    name: str,
    classifier: str,
    trace: AccuracyTrace,
    seconds_total: float,
    zero_timings: bool,
) -> dict:
    return {
        "name": name,
        "classifier": classifier,
        "per_batch": list(trace.per_batch),
        "running": list(trace.running),
        "final": trace.final,
        "seconds_total": 0.0 if zero_timings else seconds_total,
        "seconds_per_step": {
            step: (0.0 if zero_timings else seconds)
            for step, seconds in sorted(trace.step_seconds.items())
        },
    }


def _run_variants(args: argparse.Namespace, command: str, names: Sequence[str]) -> int:
    bundle = _load_bundle(args)
    variants = []
    for name in names:
        config = variant_config(
            name,
            sub_dim=args.k,
            classifier=args.classifier,
            knn_params=KnnParams(n_neighbors=args.knn_neighbors),
            svm_params=SvmParams(regularization=args.svm_lambda, epochs=args.svm_epochs, seed=args.svm_seed),
            diagnostics=args.diagnostics,
        )
        t0 = time.perf_counter()
        trace = run_stream(bundle.source, bundle.stream, config)
        seconds_total = time.perf_counter() - t0
        variants.append(_variant_payload(name, args.classifier, trace, seconds_total, args.zero_timings))
    payload = {"config": _config_payload(args, command), "variants": variants}
    with open(args.out, "w") as fh:
        json.dump(payload, fh, indent=2)
        fh.write("\n")
    for entry in variants:
        final = "n/a" if entry["final"] is None else f"{entry['final']:.4f}"
        print(f"{entry['name']:<14} {entry['classifier']:<4} final accuracy {final}")
    return 0


def cmd_run(args: argparse.Namespace) -> int:
    return _run_variants(args, "run", [_canonical_variant(args.variant)])


def cmd_ablate(args: argparse.Namespace) -> int:
    return _run_variants(args, "ablate", list(VARIANT_FLAGS))


def cmd_verify(args: argparse.Namespace) -> int:
    checks = run_all(seed=args.seed, instances=args.instances, inject_fault=args.inject_fault)
    width = max(len(c.name) for c in checks)
    for c in checks:
        status = "PASS" if c.passed else "FAIL"
        print(f"{status}  {c.name:<{width}}  {c.detail}")
    failures = [c for c in checks if not c.passed]
    if failures:
        names = ", ".join(c.name for c in failures)
        print(f"{len(failures)} of {len(checks)} properties failed: {names}", file=sys.stderr)
        return 4
    print(f"all {len(checks)} properties passed")
    return 0


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    try:
        return args.func(args)
    except (ParseError, SchemaMismatch, InsufficientData, RankDeficient, FileNotFoundError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 2
    except (ConfigError, DimensionViolation, DomainError, ValueError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 3


def console_main() -> None:
    sys.exit(main())


if __name__ == "__main__":
    console_main()

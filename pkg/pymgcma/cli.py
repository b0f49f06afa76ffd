"""
Command-line interface.

Reports go to stdout; diagnostics go to stderr and the run log.
Exit codes: 0 success, 1 runtime failure, 2 usage error.
"""

import argparse
import json
import logging
import sys
from pathlib import Path

from .core.exceptions import ConfigError, ExitCode, MGCMAError, to_exit_code
from .data.manifest import load_manifest
from .data.synthetic import generate_synthetic
from .enumerations import EmbeddingTap
from .logger import LOGGING_LEVEL, attach_stderr_handler, get_logger
from .training.config import RunConfig, load_run_config
from .training.experiments import (
    cross_validate,
    export_embeddings,
    gradient_check_report,
    metrics_frame,
    parse_variants,
    run_ablations,
)
from .training.trainer import evaluate, train

logger = get_logger(__name__)


# region Helpers
def _run_config(args) -> RunConfig:
    preset = "full" if getattr(args, "paper_scale", False) else "desk"
    config = load_run_config(getattr(args, "config", None), preset)
    return config.with_overrides(
        data_dir=getattr(args, "data", None),
        out_dir=getattr(args, "out", None),
        seed=getattr(args, "seed", None),
        max_epochs=getattr(args, "epochs", None),
    )


def _require(value, flag: str):
    if value is None:
        error_string = f"{flag} is required (as a flag or a config key)."
        logger.error(error_string)
        raise ConfigError(error_string)
    return value


def _load_validated(data_dir):
    manifest = load_manifest(data_dir)
    manifest.validate()
    return manifest


def _write_report(report, path) -> None:
    if path is not None:
        Path(path).write_text(json.dumps(report.to_dict(), indent=2), encoding="utf-8")
        logger.info(f"Wrote metrics report to {path}.")


# endregion


# region Commands
def cmd_gen_data(args) -> int:
    manifest = generate_synthetic(
        out_dir=args.out,
        n_pairs=args.pairs,
        n_classes=args.classes,
        dim=args.dim,
        len_speech=args.len_speech,
        len_text=args.len_text,
        separation=args.separation,
        seed=args.seed,
        session_shift=args.session_shift,
    )
    summary = {
        "out": str(args.out),
        "pairs": len(manifest),
        "dim": manifest.dim,
        "sessions": {
            str(session): sum(1 for r in manifest.records if r.session == session)
            for session in manifest.sessions
        },
    }
    print(json.dumps(summary))
    return ExitCode.Succeed


def cmd_train(args) -> int:
    config = _run_config(args)
    manifest = _load_validated(_require(config.data_dir, "--data"))
    out_dir = _require(config.out_dir, "--out")
    result = train(manifest, config.train, out_dir=out_dir)
    print(result.history[-1].to_json())
    return ExitCode.Succeed


def cmd_eval(args) -> int:
    manifest = _load_validated(args.data)
    report = evaluate(args.model, manifest, session=args.session, batch_size=args.batch_size)
    metrics_frame(report).to_csv(sys.stdout, index=False)
    _write_report(report, args.report)
    return ExitCode.Succeed


def cmd_cross_validate(args) -> int:
    config = _run_config(args)
    manifest = _load_validated(_require(config.data_dir, "--data"))
    threads = args.threads if args.threads is not None else config.worker_count
    report = cross_validate(manifest, config.train, threads=threads)
    metrics_frame(report).to_csv(sys.stdout, index=False)
    _write_report(report, args.report)
    return ExitCode.Succeed


def cmd_ablate(args) -> int:
    variants = parse_variants(args.variants)
    config = _run_config(args)
    manifest = _load_validated(_require(config.data_dir, "--data"))
    threads = args.threads if args.threads is not None else config.worker_count
    table = run_ablations(manifest, config.train, variants, threads=threads)
    if args.table is not None:
        table.to_csv(args.table)
        logger.info(f"Wrote ablation table to {args.table}.")
    table.to_csv(sys.stdout)
    return ExitCode.Succeed


def cmd_grad_check(args) -> int:
    errors = gradient_check_report(seed=args.seed, max_checks_per_param=args.checks)
    print("component,max_relative_error")
    for component, error in errors.items():
        print(f"{component},{error:.6e}")
    failed = [component for component, error in errors.items() if error > args.tolerance]
    if failed:
        logger.error(f"Gradient check failed for {failed} at tolerance {args.tolerance}.")
        return ExitCode.RuntimeFailure
    return ExitCode.Succeed


def cmd_export_embeddings(args) -> int:
    manifest = _load_validated(args.data)
    frame = export_embeddings(args.model, manifest, args.tap, out=args.out)
    print(json.dumps({"out": str(args.out), "rows": len(frame), "tap": args.tap}))
    return ExitCode.Succeed


# endregion


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mgcma", description="Speech-text emotion recognition with cross-modal alignment."
    )
    commands = parser.add_subparsers(dest="command", required=True)

    gen = commands.add_parser("gen-data", help="Write a synthetic feature dataset.")
    gen.add_argument("--out", required=True, help="Output directory")
    gen.add_argument("--pairs", type=int, default=200)
    gen.add_argument("--classes", type=int, default=4)
    gen.add_argument("--dim", type=int, default=32)
    gen.add_argument("--len-speech", type=int, default=8)
    gen.add_argument("--len-text", type=int, default=6)
    gen.add_argument("--separation", type=float, default=4.0)
    gen.add_argument("--session-shift", type=float, default=0.0)
    gen.add_argument("--seed", type=int, default=0)
    gen.set_defaults(handler=cmd_gen_data)

    def add_run_options(sub, with_out: bool):
        sub.add_argument("--config", help="Run config JSON file")
        sub.add_argument("--data", help="Dataset directory (overrides data_dir)")
        if with_out:
            sub.add_argument("--out", help="Output directory (overrides out_dir)")
        sub.add_argument("--seed", type=int, help="Overrides seed")
        sub.add_argument("--epochs", type=int, help="Overrides max_epochs")
        sub.add_argument("--paper-scale", action="store_true", help="Start from the full-scale preset")

    train_parser = commands.add_parser("train", help="Train and write a checkpoint and log.")
    add_run_options(train_parser, with_out=True)
    train_parser.set_defaults(handler=cmd_train)

    eval_parser = commands.add_parser("eval", help="Evaluate a checkpoint.")
    eval_parser.add_argument("--model", required=True, help="Checkpoint file")
    eval_parser.add_argument("--data", required=True, help="Dataset directory")
    eval_parser.add_argument("--session", type=int, choices=range(1, 6), help="Only this session")
    eval_parser.add_argument("--batch-size", type=int, default=16)
    eval_parser.add_argument("--report", help="Also write the full report as JSON")
    eval_parser.set_defaults(handler=cmd_eval)

    cv = commands.add_parser("cross-validate", help="Leave-one-session-out evaluation.")
    add_run_options(cv, with_out=False)
    cv.add_argument("--threads", type=int, help="Parallel folds (default MGCMA_THREADS or 1)")
    cv.add_argument("--report", help="Also write the full report as JSON")
    cv.set_defaults(handler=cmd_cross_validate)

    ablate = commands.add_parser("ablate", help="Run ablation and stage-order systems.")
    add_run_options(ablate, with_out=False)
    ablate.add_argument("--variants", default="S0,S1,S2,S3,S4,S5,S6,S7,S8,S9")
    ablate.add_argument("--threads", type=int, help="Parallel folds (default MGCMA_THREADS or 1)")
    ablate.add_argument("--table", help="Also write the table to this CSV file")
    ablate.set_defaults(handler=cmd_ablate)

    check = commands.add_parser("grad-check", help="Finite-difference gradient check.")
    check.add_argument("--seed", type=int, default=0)
    check.add_argument("--tolerance", type=float, default=1e-4)
    check.add_argument(
        "--checks", type=int, default=None, help="Elements sampled per parameter (default: every element)"
    )
    check.set_defaults(handler=cmd_grad_check)

    export = commands.add_parser("export-embeddings", help="Write per-utterance vectors as CSV.")
    export.add_argument("--model", required=True, help="Checkpoint file")
    export.add_argument("--data", required=True, help="Dataset directory")
    export.add_argument("--tap", required=True, choices=[tap.value for tap in EmbeddingTap])
    export.add_argument("--out", required=True, help="Output CSV file")
    export.set_defaults(handler=cmd_export_embeddings)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    handler = attach_stderr_handler(LOGGING_LEVEL)
    try:
        return int(args.handler(args))
    except MGCMAError as e:
        logger.error(f"{args.command} failed: {e}")
        return int(to_exit_code(e))
    except OSError as e:
        logger.error(f"{args.command} failed with an I/O error: {e}")
        return int(ExitCode.RuntimeFailure)
    finally:
        logging.getLogger().removeHandler(handler)


if __name__ == "__main__":
    sys.exit(main())

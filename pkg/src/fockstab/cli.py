"""Command-line entry point: ``fockstab run | compare | validate``."""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

from .config import LAWS, PRESETS, ExperimentConfig, load_config_file, validate_config
from .engine import run_ensemble
from .errors import ConfigError, FockStabError
from .output import summary_document, write_json, write_records, write_records_csv

log = logging.getLogger("fockstab")

EXIT_OK, EXIT_CONFIG, EXIT_RUNTIME, EXIT_IO = 0, 1, 2, 3
OUTPUT_ENV = "FOCKSTAB_OUTPUT_DIR"

# config field -> flag type; flags are --field-name
CONFIG_FLAGS = {
    "n_bar": int,
    "system_dim": int,
    "filter_dim": int,
    "theta": float,
    "phi": float,
    "alpha_bar": float,
    "delta": float,
    "fd_step": float,
    "law": str,
    "horizon": int,
    "trajectories": int,
    "master_seed": int,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fockstab", description="Fock-state feedback stabilization experiments")
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="JSON or YAML file with config fields")
    common.add_argument("--preset", choices=PRESETS, help="named (theta, phi) measurement preset")
    for name, typ in CONFIG_FLAGS.items():
        kwargs = {"choices": LAWS} if name == "law" else {}
        common.add_argument("--" + name.replace("_", "-"), dest=name, type=typ, default=None, **kwargs)
    common.add_argument("--output-dir", type=Path, default=None,
                        help=f"output directory (default: ${OUTPUT_ENV} or ./results)")
    common.add_argument("--workers", type=int, default=1)
    common.add_argument("-v", "--verbose", action="store_true")

    run = sub.add_parser("run", parents=[common], help="run one ensemble and write records + summary")
    run.add_argument("--csv", action="store_true", help="also write records.csv")
    sub.add_parser("compare", parents=[common], help="run both feedback laws with the same seed")
    sub.add_parser("validate", parents=[common], help="validate and print the resolved config")
    return parser


def resolve_config(args: argparse.Namespace) -> ExperimentConfig:
    raw = load_config_file(args.config) if args.config else {}
    flags = {name: getattr(args, name) for name in CONFIG_FLAGS if getattr(args, name) is not None}
    if args.preset is not None:
        raw.pop("theta", None)
        raw.pop("phi", None)
        raw["preset"] = args.preset
    if "theta" in flags or "phi" in flags:
        raw.pop("preset", None)
    raw.update(flags)
    return validate_config(raw)


def output_dir(args: argparse.Namespace) -> Path:
    path = args.output_dir or Path(os.environ.get(OUTPUT_ENV, "results"))
    path.mkdir(parents=True, exist_ok=True)
    return path


def cmd_run(config: ExperimentConfig, out: Path, workers: int = 1, csv: bool = False) -> int:
    summary = run_ensemble(config, workers=workers)
    write_records(out / "records.jsonl", summary.trajectories)
    if csv:
        write_records_csv(out / "records.csv", summary.trajectories)
    write_json(out / "summary.json", summary_document(summary))
    print(
        f"{config.law}: mean final fidelity {summary.mean_final_fidelity:.4f}, "
        f"escape fraction {summary.escape_fraction:.3f}, divergences {summary.divergence_count}"
    )
    return EXIT_OK


def cmd_compare(config: ExperimentConfig, out: Path, workers: int = 1) -> int:
    summaries = {law: run_ensemble(config, workers=workers, law=law) for law in LAWS}
    rows = []
    for law, s in summaries.items():
        for k, (f_true, f_filter) in enumerate(zip(s.mean_fidelity_per_step, s.mean_filter_fidelity_per_step)):
            rows.append({"law": law, "step": k, "mean_fidelity_true": f_true, "mean_fidelity_filter": f_filter})
    doc = {
        "config": config.to_dict(),
        "laws": {
            law: {
                "mean_final_fidelity": s.mean_final_fidelity,
                "escape_fraction": s.escape_fraction,
                "divergence_count": s.divergence_count,
                "final_fidelity_histogram": s.final_fidelity_histogram,
            }
            for law, s in summaries.items()
        },
        "table": rows,
    }
    write_json(out / "compare.json", doc)
    with open(out / "compare.csv", "w", encoding="utf-8", newline="\n") as fh:
        fh.write("law,step,mean_fidelity_true,mean_fidelity_filter\n")
        for r in rows:
            vals = ("" if r[k] is None else repr(r[k]) for k in ("mean_fidelity_true", "mean_fidelity_filter"))
            fh.write(",".join([r["law"], str(r["step"]), *vals]) + "\n")

    a, b = (summaries[law] for law in LAWS)
    cell = lambda x: f"{'-':>12}" if x is None else f"{x:>12.4f}"
    print(f"{'step':>6}  {LAWS[0]:>12}  {LAWS[1]:>12}")
    for k, (x, y) in enumerate(zip(a.mean_fidelity_per_step, b.mean_fidelity_per_step)):
        print(f"{k:>6}  {cell(x)}  {cell(y)}")
    for law, s in summaries.items():
        print(f"{law}: escape fraction {s.escape_fraction:.3f}")
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        config = resolve_config(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"cannot read config: {exc}", file=sys.stderr)
        return EXIT_IO
    except (ValueError, TypeError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    if args.command == "validate":
        print(json.dumps(config.to_dict(), indent=2))
        return EXIT_OK

    try:
        out = output_dir(args)
        log.info("writing to %s", out)
        if args.command == "run":
            return cmd_run(config, out, args.workers, args.csv)
        return cmd_compare(config, out, args.workers)
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (FockStabError, ArithmeticError, ValueError) as exc:
        print(f"runtime error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())

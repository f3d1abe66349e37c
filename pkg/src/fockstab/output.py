"""File formats: JSON-lines step records, a JSON summary, optional CSV."""

from __future__ import annotations

import csv
import json
from pathlib import Path
from typing import Iterable, Iterator

from .engine import EnsembleSummary, TrajectoryRecord

RECORD_SCHEMA = "fockstab-steps/1"
SUMMARY_SCHEMA = "fockstab-summary/1"
RECORD_FIELDS = ("traj", "step", "outcome", "alpha", "fidelity_true", "fidelity_filter", "lyapunov_filter")


def step_rows(trajs: Iterable[TrajectoryRecord]) -> Iterator[dict]:
    for t in trajs:
        for r in t.steps:
            yield {
                "traj": t.traj_index,
                "step": r.step,
                "outcome": None if r.outcome is None else r.outcome.value,
                "alpha": r.alpha,
                "fidelity_true": r.fidelity_true,
                "fidelity_filter": r.fidelity_filter,
                "lyapunov_filter": r.lyapunov_filter,
            }


def write_records(path: Path, trajs: Iterable[TrajectoryRecord]) -> int:
    count = 0
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for row in step_rows(trajs):
            fh.write(json.dumps(row) + "\n")
            count += 1
    return count


def write_records_csv(path: Path, trajs: Iterable[TrajectoryRecord]) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=RECORD_FIELDS, lineterminator="\n")
        writer.writeheader()
        for row in step_rows(trajs):
            writer.writerow({k: "" if v is None else v for k, v in row.items()})


def summary_document(summary: EnsembleSummary) -> dict:
    return {
        "schema": SUMMARY_SCHEMA,
        "record_schema": RECORD_SCHEMA,
        "law": summary.law,
        "config": summary.config.to_dict(),
        "record_count": sum(len(t.steps) for t in summary.trajectories),
        "mean_final_fidelity": summary.mean_final_fidelity,
        "escape_fraction": summary.escape_fraction,
        "divergence_count": summary.divergence_count,
        "final_fidelity_histogram": summary.final_fidelity_histogram,
        "mean_fidelity_per_step": summary.mean_fidelity_per_step,
        "mean_filter_fidelity_per_step": summary.mean_filter_fidelity_per_step,
        "trajectories": [
            {
                "traj": t.traj_index,
                "steps": len(t.steps),
                "status": t.terminal_status,
                "diagnostic": t.diagnostic,
            }
            for t in summary.trajectories
        ],
    }


def write_json(path: Path, doc: dict) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(doc, fh, indent=2)
        fh.write("\n")


def read_records(path: Path) -> list[dict]:
    with open(path, encoding="utf-8") as fh:
        return [json.loads(line) for line in fh if line.strip()]

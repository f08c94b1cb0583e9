"""Plot-ready CSV emission from completed run directories.

All writers are deterministic over their inputs; re-running a report is
byte-stable.
"""

from __future__ import annotations

import hashlib
import json
from pathlib import Path
from typing import Sequence

from .errors import RubricLearnError


class ReportError(RubricLearnError):
    pass


def hash_file(path: str | Path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()[:16]


def _load_run(run_dir: Path) -> dict:
    meta_path = run_dir / "run.json"
    results_path = run_dir / "results.json"
    if not meta_path.exists():
        raise ReportError(f"{run_dir} has no run.json")
    if not results_path.exists():
        raise ReportError(f"{run_dir} has no results.json (run incomplete?)")
    meta = json.loads(meta_path.read_text(encoding="utf-8"))
    results = json.loads(results_path.read_text(encoding="utf-8"))
    return {"dir": run_dir, "meta": meta, "results": results}


def write_report(run_dirs: Sequence[str | Path], out_dir: str | Path) -> list[Path]:
    """Emit ablation, curve, and (when present) agreement/revision CSVs.

    All runs must come from the same corpus; rows are one mode each.
    """
    runs = [_load_run(Path(d)) for d in run_dirs]
    if not runs:
        raise ReportError("no run directories given")

    hashes = {run["meta"].get("corpus_hash") for run in runs}
    if len(hashes) != 1:
        raise ReportError(f"heterogeneous corpora across run dirs (hashes: {sorted(hashes)})")
    tasks = {run["meta"].get("task", "task") for run in runs}
    task = sorted(tasks)[0]

    modes = [run["results"].get("mode", run["meta"].get("config", {}).get("mode")) for run in runs]
    if len(set(modes)) != len(modes):
        raise ReportError(f"duplicate modes across run dirs: {modes}")

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written: list[Path] = []

    ordered = sorted(zip(modes, runs), key=lambda pair: pair[0])

    ablation_lines = [f"mode,{task}"]
    for mode, run in ordered:
        test = run["results"].get("test") or {}
        ablation_lines.append(f"{mode},{test.get('rendered', 'n/a')}")
    ablation = out / "ablation.csv"
    ablation.write_text("\n".join(ablation_lines) + "\n", encoding="utf-8")
    written.append(ablation)

    curve_lines = ["mode,round,split,mean,missing_count"]
    for mode, run in ordered:
        for round_result in run["results"].get("rounds", []):
            for split_name, mean_key, missing_key in (
                ("train", "train_mean", "train_missing"),
                ("validation", "validation_mean", "validation_missing"),
            ):
                mean = round_result.get(mean_key)
                mean_text = "" if mean is None else f"{mean:.4f}"
                curve_lines.append(
                    f"{mode},{round_result['round']},{split_name},{mean_text},"
                    f"{round_result.get(missing_key, 0)}"
                )
    curves = out / "curves.csv"
    curves.write_text("\n".join(curve_lines) + "\n", encoding="utf-8")
    written.append(curves)

    for name in ("agreement.csv", "revision.csv"):
        merged: list[str] = []
        header = None
        for mode, run in ordered:
            source = run["dir"] / "report" / name
            if not source.exists():
                continue
            lines = source.read_text(encoding="utf-8").splitlines()
            if not lines:
                continue
            if header is None:
                header = lines[0]
                merged.append(header)
            merged.extend(lines[1:])
        if merged:
            target = out / name
            target.write_text("\n".join(merged) + "\n", encoding="utf-8")
            written.append(target)
    return written


def write_agreement_csv(path: str | Path, task: str, rows: Sequence[dict]) -> None:
    """Rows: {rubric_kind, repeat, recall, precision, h_mean}."""
    lines = ["task,rubric_kind,repeat,recall,precision,h_mean"]
    for row in rows:
        lines.append(
            f"{task},{row['rubric_kind']},{row['repeat']},{row['recall']},"
            f"{row['precision']},{row['h_mean']:.4f}"
        )
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def write_revision_csv(path: str | Path, task: str, rows: Sequence[dict]) -> None:
    """Rows: {condition, repeat, delta}."""
    lines = ["task,condition,repeat,delta"]
    for row in rows:
        lines.append(f"{task},{row['condition']},{row['repeat']},{row['delta']:.4f}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")

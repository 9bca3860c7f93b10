"""Artifact emission: full-precision CSVs, JSON summaries, and the run manifest.

All writers are byte-deterministic for a fixed input: floats are rendered with
17 significant digits (lossless for IEEE doubles), newlines are "\n", and JSON
keys keep insertion order.
"""

from __future__ import annotations

import csv
import hashlib
import json
from pathlib import Path

import numpy as np

from . import __version__
from .results import EventRecord, Sample, SimResult, compute_summary

__all__ = [
    "fmt",
    "write_trajectory_csv",
    "write_events_csv",
    "write_json",
    "read_trajectory_csv",
    "read_events_csv",
    "write_manifest",
    "sha256_file",
]


def fmt(value: float) -> str:
    return f"{value:.17g}"


def trajectory_header(n: int) -> list[str]:
    cols = ["t"]
    cols += [f"x{i}" for i in range(1, n + 1)]
    cols += ["y", "ybar", "u"]
    cols += [f"xi{i}" for i in range(1, n + 1)]
    cols += [f"zeta{i}" for i in range(1, n + 1)]
    cols += ["theta_hat"]
    cols += [f"alpha_f{i}" for i in range(2, n + 1)]
    cols += ["eps_norm", "V", "ybar_ctrl"]
    return cols


def write_trajectory_csv(path: Path, result: SimResult, n: int) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(trajectory_header(n))
        for s in result.samples:
            row = [fmt(s.t)]
            row += [fmt(v) for v in s.x]
            row += [fmt(s.y), fmt(s.ybar), fmt(s.u)]
            row += [fmt(v) for v in s.xi]
            row += [fmt(v) for v in s.zeta]
            row += [fmt(s.theta_hat)]
            row += [fmt(v) for v in s.alpha_f]
            row += [fmt(s.eps_norm), fmt(s.V), fmt(s.ybar_ctrl)]
            writer.writerow(row)


def write_events_csv(path: Path, events: list[EventRecord]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["t", "detector", "condition", "value"])
        for e in events:
            writer.writerow([fmt(e.t), e.detector, e.condition, fmt(e.value)])


def read_trajectory_csv(path: Path) -> list[Sample]:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        n = sum(1 for c in header if c.startswith("x") and c[1:].isdigit())
        idx = {name: i for i, name in enumerate(header)}
        samples = []
        for row in reader:
            def get(name: str, row=row) -> float:
                return float(row[idx[name]])
            samples.append(
                Sample(
                    t=get("t"),
                    x=np.array([get(f"x{i}") for i in range(1, n + 1)]),
                    y=get("y"),
                    ybar=get("ybar"),
                    u=get("u"),
                    xi=np.array([get(f"xi{i}") for i in range(1, n + 1)]),
                    zeta=np.array([get(f"zeta{i}") for i in range(1, n + 1)]),
                    theta_hat=get("theta_hat"),
                    alpha_f=np.array([get(f"alpha_f{i}") for i in range(2, n + 1)]),
                    eps_norm=get("eps_norm"),
                    V=get("V"),
                    ybar_ctrl=get("ybar_ctrl"),
                )
            )
    return samples


def read_events_csv(path: Path) -> list[EventRecord]:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        next(reader)
        return [
            EventRecord(t=float(t), detector=det, condition=cond, value=float(val))
            for t, det, cond, val in reader
        ]


def load_result_csvs(trajectory_path: Path, events_path: Path) -> SimResult:
    """Reconstruct a SimResult (with recomputed summary) from emitted CSVs."""
    samples = read_trajectory_csv(trajectory_path)
    events = read_events_csv(events_path)
    result = SimResult(samples=samples, events=events)
    result.summary = compute_summary(samples, events)
    return result


def write_json(path: Path, payload: dict) -> None:
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2)
        fh.write("\n")


def sha256_file(path: Path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(65536), b""):
            digest.update(chunk)
    return digest.hexdigest()


def write_manifest(
    out_dir: Path, config_path: str, command: str, argv: list[str], outputs: list[Path]
) -> Path:
    """Write manifest.json listing every artifact with its content hash."""
    manifest = {
        "tool": "etcsim",
        "tool_version": __version__,
        "command": command,
        "argv": argv,
        "config_path": config_path,
        "config_sha256": sha256_file(Path(config_path)),
        "outputs": {p.name: sha256_file(p) for p in sorted(outputs)},
    }
    path = out_dir / "manifest.json"
    write_json(path, manifest)
    return path

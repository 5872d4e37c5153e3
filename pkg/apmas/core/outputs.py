"""
Output files of a run: trajectory CSV, certificate report JSON and a text summary.

Every file is written to a uniquely named temporary file in the target directory
and moved into place with os.replace, so readers never see a partial file.
Floats in the CSV carry 17 significant digits; JSON keys are sorted. Re-running
the same scenario therefore reproduces the files byte for byte.
"""

from __future__ import annotations

import json
import os
import uuid
from pathlib import Path
from typing import Callable, TextIO

import numpy as np

from apmas.core.analysis import CertificateReport, delta_inf_norms, lyapunov_samples
from apmas.core.input_layout import DerivedLayout
from apmas.core.protocol_dynamics import Trajectory

FLOAT_FORMAT = "%.17g"


def atomic_write(path: Path, write: Callable[[TextIO], None]) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    temp_path = path.with_name(f".{path.name}.{uuid.uuid4().hex}.tmp")
    try:
        with open(temp_path, "w", encoding="utf-8", newline="\n") as handle:
            write(handle)
        os.replace(temp_path, path)
    finally:
        if temp_path.exists():
            temp_path.unlink()


def atomic_write_text(path: Path, text: str) -> None:
    atomic_write(path, lambda handle: handle.write(text))


def trajectory_header(n: int) -> list[str]:
    return (["t"] + [f"x_{i}" for i in range(1, n + 1)] + [f"xi_{i}" for i in range(1, n + 1)]
            + ["norm_delta_inf", "V", "sum_xi"])


def trajectory_table(traj: Trajectory, derived: DerivedLayout, Ldag: np.ndarray) -> np.ndarray:
    """Rows t, x_1..x_n, xi_1..xi_n, |delta|_inf, V, sum(xi); 1 + 2n + 3 columns."""
    return np.column_stack([
        traj.times,
        traj.x,
        traj.xi,
        delta_inf_norms(traj, derived.epsilon),
        lyapunov_samples(traj, derived, Ldag),
        traj.xi.sum(axis=1),
    ])


def write_trajectory_csv(path: Path, traj: Trajectory, derived: DerivedLayout, Ldag: np.ndarray) -> None:
    table = trajectory_table(traj, derived, Ldag)
    header = ",".join(trajectory_header(traj.n))
    atomic_write(path, lambda handle: np.savetxt(handle, table, fmt=FLOAT_FORMAT, delimiter=",",
                                                 header=header, comments=""))


def dumps_report(name: str, report: CertificateReport) -> str:
    return json.dumps({"scenario": name, **report.to_dict()}, indent=2, sort_keys=True) + "\n"


def format_summary(name: str, report: CertificateReport) -> list[str]:
    settling = "-" if report.settling_time is None else f"{report.settling_time:.6g}"
    return [
        f"scenario          {name}",
        f"epsilon           {report.epsilon!r}",
        f"settled           {str(report.settled).lower()} (tol {report.tol_settle:g})",
        f"settling time     {settling}",
        f"lambda2           {report.lambda2:.12g}",
        f"lambda_min(F)     {report.lambda_min_F:.12g}",
        f"|delta(T)|_inf    {report.final_delta_inf:.6e}" if report.final_delta_inf is not None else
        "|delta(T)|_inf    -",
        f"V monotone        {str(report.V_monotone).lower()}",
    ]


def write_run_outputs(out_dir: Path, name: str, traj: Trajectory, derived: DerivedLayout, Ldag: np.ndarray,
                      report: CertificateReport) -> dict[str, Path]:
    """Write ``<name>.csv``, ``<name>.report.json`` and ``<name>.summary.txt`` into ``out_dir``."""
    out_dir = Path(out_dir)
    paths = {
        "trajectory": out_dir / f"{name}.csv",
        "report": out_dir / f"{name}.report.json",
        "summary": out_dir / f"{name}.summary.txt",
    }
    write_trajectory_csv(paths["trajectory"], traj, derived, Ldag)
    atomic_write_text(paths["report"], dumps_report(name, report))
    atomic_write_text(paths["summary"], "\n".join(format_summary(name, report)) + "\n")
    return paths

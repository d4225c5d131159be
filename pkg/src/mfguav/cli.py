"""Command-line driver: run a scenario to CSV/summary files, plot a
trajectory CSV, and compare energy summaries across runs.

Subcommands:
    run --config <path> --out <dir> [--seed <u64>]
    plot --traj <csv> --out <dir>
    compare --ref <dir> <dirs...>
"""

from __future__ import annotations

import argparse
import csv
import os
import sys
from pathlib import Path

import numpy as np

from . import engine, metrics
from .config import parse_config, serialize_scenario
from .errors import ConfigError

CSV_HEADER = "step,t,uav,x,y,vx,vy,ax,ay,loss,reg_active"

TRAJECTORY_FILE = "trajectory.csv"
SUMMARY_FILE = "summary.txt"
CONFIG_FILE = "scenario.txt"


def _fmt(x: float) -> str:
    return repr(float(x))


def write_trajectory(log: engine.RunLog, path: Path):
    with open(path, "w") as fh:
        fh.write(CSV_HEADER + "\n")
        for row in log.rows:
            fh.write(
                f"{row.step},{_fmt(row.t)},{row.uav},{_fmt(row.x)},{_fmt(row.y)},"
                f"{_fmt(row.vx)},{_fmt(row.vy)},{_fmt(row.ax)},{_fmt(row.ay)},"
                f"{_fmt(row.loss)},{int(row.reg_active)}\n"
            )


def write_summary(log: engine.RunLog, path: Path):
    summary = metrics.energy_summary(log)
    lines = [
        f"termination = {log.termination}",
        f"steps = {log.steps_run}",
        f"n_uavs = {log.n_uavs}",
        f"collisions = {len(log.collisions)}",
        f"frozen_uavs = {len(log.frozen)}",
        f"energy_communication = {summary.communication}",
        f"energy_computation = {summary.computation}",
        f"energy_motion = {_fmt(summary.motion)}",
    ]
    path.write_text("\n".join(lines) + "\n")


def read_summary(run_dir: Path) -> dict:
    path = run_dir / SUMMARY_FILE
    if not path.exists():
        raise FileNotFoundError(f"no summary at {path}")
    out = {}
    for line in path.read_text().splitlines():
        key, value = (part.strip() for part in line.split("=", 1))
        out[key] = value
    return out


def cmd_run(config_path: str, out_dir: str, seed: int | None = None) -> dict:
    sc = parse_config(config_path)
    if seed is not None:
        sc.seed = seed
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    log = engine.run(sc)
    traj = out / TRAJECTORY_FILE
    summ = out / SUMMARY_FILE
    write_trajectory(log, traj)
    write_summary(log, summ)
    (out / CONFIG_FILE).write_text(serialize_scenario(sc))
    return {"trajectory": traj, "summary": summ}


def read_trajectory(path: str):
    rows = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or ",".join(header) != CSV_HEADER:
            raise ValueError(f"{path}: line 1: bad or missing CSV header")
        for lineno, rec in enumerate(reader, start=2):
            if len(rec) != 11:
                raise ValueError(f"{path}: line {lineno}: expected 11 columns")
            try:
                rows.append(
                    (
                        int(rec[0]), float(rec[1]), int(rec[2]),
                        *(float(v) for v in rec[3:10]), int(rec[10]),
                    )
                )
            except ValueError:
                raise ValueError(f"{path}: line {lineno}: unparseable value")
    return rows


def cmd_plot(traj_path: str, out_dir: str) -> dict:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    rows = read_trajectory(traj_path)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)

    by_uav: dict[int, list] = {}
    for rec in rows:
        by_uav.setdefault(rec[2], []).append(rec)

    fig, ax = plt.subplots(figsize=(7, 6))
    for uav, recs in sorted(by_uav.items()):
        recs.sort(key=lambda r: r[0])
        xs = [r[3] for r in recs]
        ys = [r[4] for r in recs]
        ax.plot(xs, ys, lw=0.7, alpha=0.7)
    if by_uav:
        starts = np.array([recs[0][3:5] for recs in by_uav.values()])
        ax.scatter(starts[:, 0], starts[:, 1], marker="s", s=12, c="tab:blue",
                   label="source")
    ax.scatter([0.0], [0.0], marker="*", s=120, c="tab:red", label="destination")
    ax.set_xlabel("x (m)")
    ax.set_ylabel("y (m)")
    ax.legend(loc="best")
    traj_file = out / "trajectories.svg"
    fig.savefig(traj_file)
    plt.close(fig)

    steps = sorted({r[0] for r in rows})
    per_step = {s: 0 for s in steps}
    for rec in rows:
        per_step[rec[0]] += rec[10]
    series = np.cumsum([per_step[s] for s in steps])
    fig, ax = plt.subplots(figsize=(7, 4))
    ax.step(steps, series, where="post")
    ax.set_xlabel("step")
    ax.set_ylabel("accumulated regularizer activations")
    reg_file = out / "regularizer.svg"
    fig.savefig(reg_file)
    plt.close(fig)
    return {"trajectories": traj_file, "regularizer": reg_file}


def cmd_compare(run_dirs: list[str], reference_dir: str) -> str:
    ref = read_summary(Path(reference_dir))
    lines = [f"reference = {reference_dir}"]
    header = f"{'run':<30} {'communication':>15} {'computation':>13} {'motion':>12}"
    lines.append(header)
    for run_dir in run_dirs:
        summ = read_summary(Path(run_dir))
        cells = []
        for key in ("energy_communication", "energy_computation", "energy_motion"):
            ref_val = float(ref[key])
            if ref_val == 0:
                cells.append("n/a")
            else:
                cells.append(f"{float(summ[key]) / ref_val:.6g}")
        lines.append(f"{run_dir:<30} {cells[0]:>15} {cells[1]:>13} {cells[2]:>12}")
    return "\n".join(lines)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mfguav")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run a scenario")
    p_run.add_argument("--config", required=True)
    p_run.add_argument("--out", required=True)
    p_run.add_argument("--seed", type=int, default=None)

    p_plot = sub.add_parser("plot", help="plot a trajectory CSV")
    p_plot.add_argument("--traj", required=True)
    p_plot.add_argument("--out", required=True)

    p_cmp = sub.add_parser("compare", help="compare run energy summaries")
    p_cmp.add_argument("--ref", required=True)
    p_cmp.add_argument("dirs", nargs="+")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "run":
            artifacts = cmd_run(args.config, args.out, args.seed)
            print(f"trajectory: {artifacts['trajectory']}")
            print(f"summary: {artifacts['summary']}")
        elif args.command == "plot":
            files = cmd_plot(args.traj, args.out)
            for name, path in files.items():
                print(f"{name}: {path}")
        elif args.command == "compare":
            print(cmd_compare(args.dirs, args.ref))
    except (ConfigError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())

#!/usr/bin/env python3
"""Observed refinement order of the boundary trace from three simulate runs.

Each run directory must hold the trace.csv written by `pat-lab simulate` on
grids with N, 2N and 4N cells per axis and common record times. Coarse
boundary node b coincides with fine node 2b.

    convergence_order.py RUN_N RUN_2N RUN_4N
    convergence_order.py --cli build/tools/pat-lab --configs a.ini b.ini c.ini
"""

import argparse
import math
import subprocess
import sys
import tempfile
from pathlib import Path

import numpy as np


def load_trace(run_dir: Path):
    rows = np.loadtxt(run_dir / "trace.csv", delimiter=",", skiprows=1, comments="#", ndmin=2)
    times = np.unique(rows[:, 0])
    n_nodes = int(rows[:, 1].max()) + 1
    if rows.shape[0] != times.size * n_nodes:
        raise ValueError(f"{run_dir}: trace.csv is not a full time x node table")
    values = rows[:, 3].reshape(times.size, n_nodes)
    return times, values


def h0_gap(coarse, fine):
    t_c, v_c = coarse
    t_f, v_f = fine
    if t_c.size != t_f.size or not np.allclose(t_c, t_f, rtol=0, atol=1e-12):
        raise ValueError("record times differ between grids; adjust record_stride")
    if v_f.shape[1] != 2 * v_c.shape[1]:
        raise ValueError("fine grid must have twice the boundary nodes of the coarse one")
    diff = v_c - v_f[:, ::2]
    dt = t_c[1] - t_c[0] if t_c.size > 1 else 1.0
    ds = 4.0 / v_c.shape[1]
    return math.sqrt(float(np.sum(diff * diff)) * dt * ds)


def run_simulations(cli: str, configs, workdir: Path):
    dirs = []
    for i, cfg in enumerate(configs):
        out = workdir / f"run{i}"
        subprocess.run([cli, "simulate", "--config", str(cfg), "--out", str(out)], check=True,
                       stdout=subprocess.DEVNULL)
        dirs.append(out)
    return dirs


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("runs", nargs="*", type=Path, help="three simulate run directories, coarse to fine")
    ap.add_argument("--cli", help="pat-lab executable; runs the --configs first")
    ap.add_argument("--configs", nargs=3, type=Path)
    ap.add_argument("--expect", type=float, help="expected order; exit 1 when outside tolerance")
    ap.add_argument("--tolerance", type=float, default=0.3)
    args = ap.parse_args(argv)

    with tempfile.TemporaryDirectory(prefix="pat-lab-order-") as tmp:
        if args.cli:
            if not args.configs:
                ap.error("--cli needs --configs")
            runs = run_simulations(args.cli, args.configs, Path(tmp))
        else:
            runs = args.runs
        if len(runs) != 3:
            ap.error("need exactly three runs")
        traces = [load_trace(r) for r in runs]

    e1 = h0_gap(traces[0], traces[1])
    e2 = h0_gap(traces[1], traces[2])
    order = math.log2(e1 / e2)
    print(f"gap coarse/mid {e1:.6e}")
    print(f"gap mid/fine   {e2:.6e}")
    print(f"observed order {order:.4f}")
    if args.expect is not None and abs(order - args.expect) > args.tolerance:
        print(f"order outside {args.expect} +- {args.tolerance}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())

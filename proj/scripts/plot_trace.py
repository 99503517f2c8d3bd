#!/usr/bin/env python3
"""Plot an mcbf run directory: agent paths, Laplacian/H eigenvalues, and control norms.

usage: plot_trace.py OUT_DIR [--save FILE]
"""
import argparse
import csv
import math
import os

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402


def read_csv(path):
    with open(path, newline="") as f:
        rows = list(csv.DictReader(f))
    cols = {k: [float(r[k]) if r[k] else math.nan for r in rows] for k in rows[0]
            if k != "status"}
    return cols


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("out_dir")
    ap.add_argument("--save", default=None, help="image path (default OUT_DIR/trace.png)")
    args = ap.parse_args()

    tr = read_csv(os.path.join(args.out_dir, "trace.csv"))
    ev = read_csv(os.path.join(args.out_dir, "eigenvalues.csv"))
    t = tr["t"]
    agents = sorted({int(k[2:]) for k in tr if k.startswith("x_") and k[2:].isdigit()})

    fig, (ax_xy, ax_eig, ax_u) = plt.subplots(1, 3, figsize=(15, 4.5))
    for i in agents:
        ax_xy.plot(tr[f"x_{i}"], tr[f"y_{i}"], label=f"agent {i}")
        ax_xy.plot(tr[f"x_{i}"][0], tr[f"y_{i}"][0], "ko", ms=3)
    ax_xy.set_aspect("equal")
    ax_xy.set_title("paths")
    ax_xy.legend(fontsize=7)

    for k in ev:
        if k.startswith("lambda_"):
            ax_eig.plot(ev["t"], ev[k], label=k)
    ax_eig.set_title("eigenvalues")
    ax_eig.set_xlabel("t [s]")
    ax_eig.legend(fontsize=7)

    for i in agents:
        ux, uy = tr[f"u_x_{i}"], tr[f"u_y_{i}"]
        ax_u.plot(t, [math.hypot(a, b) for a, b in zip(ux, uy)], label=f"|u_{i}|")
    ax_u.set_title("filtered control")
    ax_u.set_xlabel("t [s]")
    ax_u.legend(fontsize=7)

    fig.tight_layout()
    out = args.save or os.path.join(args.out_dir, "trace.png")
    fig.savefig(out, dpi=120)
    print(out)


if __name__ == "__main__":
    main()

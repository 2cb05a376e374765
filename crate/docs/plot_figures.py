"""Plot the CSV series written by `setreach emit-figure-data --out DIR`.

    python docs/plot_figures.py DIR

Needs pandas and matplotlib. Writes PNG files next to the data.
"""
import sys
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import pandas as pd


def profiles(d):
    fig, axes = plt.subplots(1, 2, figsize=(10, 4), sharey=True)
    for ax, name in zip(axes, ["uniform", "adaptive"]):
        s = pd.read_csv(d / f"sigma_{name}.csv")
        ax.step(s.t, s.sigma_e, where="post", label="error share")
        ax.step(s.t, s.sigma_c, where="post", label="cost share")
        ax.set_title(name)
        ax.set_xlabel("t")
    axes[0].legend()
    fig.savefig(d / "profiles.png", dpi=150)


def estimator(d):
    s = pd.read_csv(d / "delta_cost.csv").dropna(subset=["delta_c"])
    fig, ax = plt.subplots(figsize=(5, 4))
    ax.semilogx(s.eps, s.delta_c, "o-")
    ax.invert_xaxis()
    ax.set_xlabel("tolerance")
    ax.set_ylabel("relative cost estimate error")
    fig.savefig(d / "delta_cost.png", dpi=150)


def steps(d):
    s = pd.read_csv(d / "steps_adaptive.csv")
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.step(s.t, s.rho, where="post", label="rho")
    ax.step(s.t, s.h.shift(-1), where="post", label="h")
    ax.set_yscale("log")
    ax.set_xlabel("t")
    ax.legend()
    fig.savefig(d / "steps.png", dpi=150)


def snapshots(d):
    files = sorted((d / "snapshots").glob("set_*.txt"))
    if not files:
        return
    fig, ax = plt.subplots(figsize=(6, 4))
    for f in files:
        header = f.open().readline().split()
        rho, dim = float(header[2]), int(header[4])
        pts = pd.read_csv(f, comment="#", sep=r"\s+", header=None).to_numpy() * rho
        if dim == 1:
            ax.plot([int(f.stem[4:])] * len(pts), pts[:, 0], ",k")
        else:
            ax.plot(pts[:, 0], pts[:, 1], ",", alpha=0.5)
    fig.savefig(d / "snapshots.png", dpi=150)


if __name__ == "__main__":
    out = Path(sys.argv[1] if len(sys.argv) > 1 else "out")
    for plot in (profiles, estimator, steps, snapshots):
        plot(out)

"""Figure rendering for sweep tables and trace-run results.

Opt-in from the CLI via --plot-dir: the CSV tables stay the primary output
and stay byte-identical whether or not figures are rendered. Uses the Agg
backend and writes PNGs with fixed metadata so repeated runs produce the
same files.
"""

from __future__ import annotations

import math
from pathlib import Path
from typing import Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)

__all__ = ["plot_sweep", "plot_results"]

_PNG_META = {"Software": "chronos"}


def _save(fig, out_dir: Path, name: str) -> Path:
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / name
    fig.savefig(path, dpi=120, metadata=_PNG_META)
    plt.close(fig)
    return path


def _finite_series(rows, strategy: str, ycol: str):
    xs, ys = [], []
    for row in rows:
        if row["strategy"] != strategy:
            continue
        y = float(row[ycol])
        if math.isfinite(y):
            xs.append(float(row["value"]))
            ys.append(y)
    return xs, ys


def plot_sweep(rows: Sequence[dict], sweep_var: str, out_dir) -> list[Path]:
    """One figure per metric, one line per strategy, x = the swept variable."""
    out_dir = Path(out_dir)
    strategies = sorted({row["strategy"] for row in rows})
    written = []
    metrics = [("pocd", "probability of completion before deadline"),
               ("cost", "expected machine time (VM-seconds)"),
               ("utility", "net utility"),
               ("r_opt", "optimal extra attempts r")]
    for ycol, label in metrics:
        fig, ax = plt.subplots(figsize=(6.0, 4.0))
        drew = False
        for strategy in strategies:
            xs, ys = _finite_series(rows, strategy, ycol)
            if xs:
                ax.plot(xs, ys, marker="o", markersize=3, label=strategy)
                drew = True
        if not drew:
            plt.close(fig)
            continue
        ax.set_xlabel(sweep_var)
        ax.set_ylabel(label)
        if sweep_var == "theta":
            ax.set_xscale("log")
        ax.legend()
        fig.tight_layout()
        written.append(_save(fig, out_dir, f"sweep_{ycol}.png"))
    return written


def plot_results(rows: Sequence[dict], out_dir) -> list[Path]:
    """Histogram of chosen r and the PoCD/cost trade-off cloud."""
    out_dir = Path(out_dir)
    strategies = sorted({row["strategy"] for row in rows})
    written = []

    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    r_by_strategy = [[int(row["r_opt"]) for row in rows
                      if row["strategy"] == s] for s in strategies]
    r_max = max((max(r) for r in r_by_strategy if r), default=0)
    bins = [i - 0.5 for i in range(r_max + 2)]
    ax.hist(r_by_strategy, bins=bins, label=strategies)
    ax.set_xlabel("optimal extra attempts r")
    ax.set_ylabel("jobs")
    ax.legend()
    fig.tight_layout()
    written.append(_save(fig, out_dir, "results_ropt_hist.png"))

    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    drew = False
    for s in strategies:
        xs = [float(row["cost_analytic"]) for row in rows
              if row["strategy"] == s]
        ys = [float(row["pocd_analytic"]) for row in rows
              if row["strategy"] == s]
        pts = [(x, y) for x, y in zip(xs, ys)
               if math.isfinite(x) and math.isfinite(y)]
        if pts:
            ax.scatter([p[0] for p in pts], [p[1] for p in pts],
                       s=12, alpha=0.6, label=s)
            drew = True
    if drew:
        ax.set_xlabel("expected cost ($)")
        ax.set_ylabel("probability of completion before deadline")
        ax.legend()
        fig.tight_layout()
        written.append(_save(fig, out_dir, "results_pocd_cost.png"))
    else:
        plt.close(fig)
    return written

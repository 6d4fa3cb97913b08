"""Render schedules, reports and price paths to image files.

Everything here draws with the Agg backend and writes straight to disk —
nothing ever opens a window, so these are safe in batch runs and on headless
machines. Each function returns the path it wrote.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be pinned first)

from .core import AllocationVector, PricePath
from .evaluation import BacktestReport

__all__ = ["save_schedule_figure", "save_cost_figure", "save_price_figure"]


def save_schedule_figure(schedules: dict[str, AllocationVector], dest,
                         title: str | None = None) -> Path:
    """Step plot of shares bought per decision point, one line per schedule."""
    dest = Path(dest)
    fig, ax = plt.subplots(figsize=(8, 4.5))
    for name, alloc in schedules.items():
        ax.step(range(len(alloc)), alloc.purchases, where="mid", label=name)
    ax.set_xlabel("decision point k")
    ax.set_ylabel("shares bought")
    if title:
        ax.set_title(title)
    if schedules:
        ax.legend()
    ax.grid(True, alpha=0.3)
    fig.savefig(dest, bbox_inches="tight")
    plt.close(fig)
    return dest


def save_cost_figure(report: BacktestReport, dest) -> Path:
    """Horizontal bars of total cost per strategy, annotated with ratios."""
    dest = Path(dest)
    names = [name for name, _ in report.rows]
    costs = [cost for _, cost in report.rows]
    ratios = [ratio for _, ratio in report.ratios]
    fig, ax = plt.subplots(figsize=(8, 0.8 + 0.6 * len(names)))
    bars = ax.barh(names, costs)
    for bar, ratio in zip(bars, ratios):
        ax.annotate(f"{ratio:.5f}", xy=(bar.get_width(), bar.get_y() + bar.get_height() / 2),
                    xytext=(4, 0), textcoords="offset points", va="center", fontsize=9)
    ax.set_xlabel("total cost")
    ax.set_title(f"cost vs baseline ({report.baseline})")
    ax.invert_yaxis()
    fig.tight_layout()
    fig.savefig(dest)
    plt.close(fig)
    return dest


def save_price_figure(path: PricePath, dest,
                      purchases: AllocationVector | None = None) -> Path:
    """Line plot of the price series, optionally marking purchase points.

    Marker area scales with the number of shares bought at that point, so a
    front-loaded schedule is visible at a glance.
    """
    dest = Path(dest)
    prices = path.as_array()
    fig, ax = plt.subplots(figsize=(9, 4.5))
    ax.plot(range(len(prices)), prices, lw=1.2, label="open")
    if purchases is not None:
        ks = [i for i, u in enumerate(purchases) if u > 0]
        total = purchases.total or 1
        sizes = [20 + 300 * purchases[i] / total for i in ks]
        ax.scatter(ks, prices[ks], s=sizes, color="tab:red", zorder=3,
                   label="purchases (size ∝ shares)")
        ax.legend()
    if path.labels:
        ticks = list(range(0, len(prices), max(1, len(prices) // 8)))
        ax.set_xticks(ticks)
        ax.set_xticklabels([path.labels[t] for t in ticks], rotation=30, ha="right")
    ax.set_ylabel("price")
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(dest)
    plt.close(fig)
    return dest

"""Figure rendering for experiment outputs.

Every experiment command writes its numbers as CSV and, unless plotting
is disabled, a PNG next to it with the same stem. Figures are plain
matplotlib line, bar or timeline charts; the CSV stays the primary,
byte-stable artifact.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .cards import N_SEATS
from .experiments import Series
from .table import SessionLog

_RC = {
    "figure.figsize": (8.0, 4.5),
    "axes.grid": True,
    "grid.alpha": 0.3,
    "legend.framealpha": 0.9,
    "savefig.dpi": 140,
}


def figure_path(csv_path: Path) -> Path:
    return csv_path.with_suffix(".png")


def _finish(fig, ax, path: Path, title: str, xlabel: str, ylabel: str) -> None:
    ax.set_title(title)
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    fig.tight_layout()
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path)
    plt.close(fig)


def plot_series(series: list[Series], path: Path, title: str,
                xlabel: str, ylabel: str) -> None:
    with plt.rc_context(_RC):
        fig, ax = plt.subplots()
        for s in series:
            ax.plot(s.xs, s.ys, label=s.label, linewidth=1.2)
        if len(series) > 1:
            ax.legend()
        _finish(fig, ax, path, title, xlabel, ylabel)


def plot_bars(labels: list[str], values: list[float], path: Path, title: str,
              ylabel: str) -> None:
    with plt.rc_context(_RC):
        fig, ax = plt.subplots()
        ax.bar(range(len(labels)), values)
        ax.set_xticks(range(len(labels)), labels)
        ax.axhline(0.0, color="black", linewidth=0.8)
        _finish(fig, ax, path, title, "agent", ylabel)


def plot_decision_timeline(log: SessionLog, path: Path, title: str,
                           equilibrium: int | None = None,
                           events: list | None = None) -> None:
    """Stage-1 decisions per repeat: a filled marker is a knock, an open
    marker a fold; vertical lines mark equilibrium onset and bluff switches."""
    with plt.rc_context(_RC):
        fig, ax = plt.subplots()
        for seat in range(N_SEATS):
            xs_knock, xs_fold = [], []
            for i, rec in enumerate(log.records):
                if rec.stage1_by_seat()[seat].kind == "K":
                    xs_knock.append(i)
                else:
                    xs_fold.append(i)
            ax.scatter(xs_knock, [seat] * len(xs_knock), s=12, marker="s",
                       color=f"C{seat}", label=f"{log.agent_ids[seat]} knock")
            ax.scatter(xs_fold, [seat] * len(xs_fold), s=12, marker="s",
                       facecolors="none", edgecolors=f"C{seat}", linewidths=0.7)
        if equilibrium is not None:
            ax.axvline(equilibrium, color="black", linestyle="--", linewidth=1.0,
                       label="equilibrium")
        for event in events or []:
            ax.axvline(event.switch_index, color="red", linestyle=":", linewidth=1.0)
            ax.axvline(event.reentry_index, color="green", linestyle=":", linewidth=1.0)
        ax.set_yticks(range(N_SEATS), [log.agent_ids[s] for s in range(N_SEATS)])
        ax.legend(loc="upper right", fontsize=8)
        _finish(fig, ax, path, title, "repeat", "seat")


def plot_cumulative(log: SessionLog, path: Path, title: str,
                    equilibrium: int | None = None) -> None:
    with plt.rc_context(_RC):
        fig, ax = plt.subplots()
        totals = log.cumulative_chips()
        xs = list(range(len(totals)))
        for seat in range(N_SEATS):
            ax.plot(xs, [t[seat] for t in totals], label=log.agent_ids[seat],
                    linewidth=1.2)
        if equilibrium is not None:
            ax.axvline(equilibrium, color="black", linestyle="--", linewidth=1.0,
                       label="equilibrium")
        ax.legend()
        _finish(fig, ax, path, title, "hand", "cumulative chips")

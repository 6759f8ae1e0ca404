"""Matplotlib figures for tournament trajectories and control sweeps."""
from __future__ import annotations

from pathlib import Path
from typing import Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402


def plot_trajectory(labels: Sequence[str], snapshots: Sequence[Sequence[int]], path: str | Path,
                    title: str = "Population share") -> Path:
    """Share of each species per generation, with a dotted line at each elimination."""
    total = sum(snapshots[0]) if snapshots else 1
    gens = list(range(len(snapshots)))
    fig, ax = plt.subplots(figsize=(8, 4.5))
    for i, lab in enumerate(labels):
        shares = [100.0 * s[i] / total for s in snapshots]
        line, = ax.plot(gens, shares, label=lab, linewidth=1.4)
        gone = next((g for g, s in enumerate(snapshots) if s[i] == 0), None)
        if gone is not None and gone > 0:
            ax.axvline(gone, color=line.get_color(), linestyle=":", linewidth=1.0)
    ax.set_xlabel("generation")
    ax.set_ylabel("population share (%)")
    ax.set_ylim(0, 100)
    ax.set_xlim(0, max(1, len(snapshots) - 1))
    ax.set_title(title)
    ax.legend(fontsize=8, loc="upper left")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return Path(path)


def plot_vs_controls(series: Sequence[dict], path: str | Path) -> Path:
    """Grouped win-rate bars per agent and control, plus mean move time per agent.

    ``series`` holds summary dicts as written by the arena (``agent_a``,
    ``agent_b``, ``win_rate_a``, ``mean_move_time_a``).
    """
    agents = list(dict.fromkeys(s["agent_a"] for s in series))
    controls = list(dict.fromkeys(s["agent_b"] for s in series))
    lookup = {(s["agent_a"], s["agent_b"]): s for s in series}
    fig, (ax, ax_t) = plt.subplots(1, 2, figsize=(11, 4.5), gridspec_kw={"width_ratios": [3, 2]})
    width = 0.8 / max(1, len(controls))
    for j, ctl in enumerate(controls):
        xs = [i + j * width for i in range(len(agents))]
        ys = [(lookup.get((a, ctl)) or {}).get("win_rate_a") or 0.0 for a in agents]
        ax.bar(xs, ys, width, label=ctl)
    ax.set_xticks([i + width * (len(controls) - 1) / 2 for i in range(len(agents))])
    ax.set_xticklabels(agents, rotation=30, ha="right", fontsize=8)
    ax.set_ylabel("win rate (%)")
    ax.set_ylim(0, 100)
    ax.legend(fontsize=8)
    times = []
    for a in agents:
        vals = [s["mean_move_time_a"] for s in series
                if s["agent_a"] == a and s.get("mean_move_time_a") is not None]
        times.append(sum(vals) / len(vals) if vals else 0.0)
    ax_t.bar(range(len(agents)), times, color="grey")
    ax_t.set_xticks(range(len(agents)))
    ax_t.set_xticklabels(agents, rotation=30, ha="right", fontsize=8)
    ax_t.set_ylabel("mean move time (s)")
    if any(t > 0 for t in times):
        ax_t.set_yscale("log")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return Path(path)

"""Figures for a simulation run, rendered off-screen to PNG files."""

from __future__ import annotations

import os
from collections import defaultdict
from typing import Dict, List

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

STYLE = {
    "figure.figsize": (6.4, 3.6),
    "figure.dpi": 100,
    "font.size": 9,
    "axes.spines.top": False,
    "axes.spines.right": False,
    "axes.grid": True,
    "grid.alpha": 0.3,
    "lines.linewidth": 1.2,
}

# keep PNG bytes stable across runs
_META = {"Software": None}


def _save(fig, path: str) -> str:
    fig.tight_layout()
    fig.savefig(path, metadata=_META)
    plt.close(fig)
    return path


def _series(metrics: List[dict], name: str) -> List[dict]:
    return [rec for rec in metrics if rec.get("metric") == name]


def plot_finalized(metrics: List[dict], path: str) -> str:
    per_proc: Dict[int, List] = defaultdict(list)
    for rec in _series(metrics, "finalized_prefix"):
        per_proc[rec["process"]].append((rec["t"], rec["value"]))
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots()
        for proc in sorted(per_proc):
            ts, ns = zip(*per_proc[proc])
            ax.step(ts, ns, where="post", label=f"p{proc}")
        ax.set_xlabel("virtual time")
        ax.set_ylabel("finalized prefix length")
        if per_proc:
            ax.legend(ncol=4, fontsize=7, frameon=False)
        return _save(fig, path)


def plot_round_weights(metrics: List[dict], path: str) -> str:
    recs = _series(metrics, "round_last_weight")
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots()
        if recs:
            rounds = [r["round"] for r in recs]
            ax.bar(rounds, [r["value"] for r in recs], color="tab:blue", alpha=0.7, label="last-vertex weight")
            ax.plot(rounds, [r["lo"] for r in recs], "k--", label="3D")
            ax.plot(rounds, [r["hi"] for r in recs], "k:", label="6D")
            ax.legend(frameon=False, fontsize=7)
        ax.set_xlabel("round")
        ax.set_ylabel("weight (units)")
        return _save(fig, path)


def plot_candidates(metrics: List[dict], path: str) -> str:
    recs = _series(metrics, "candidates")
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots()
        if recs:
            ax.scatter([r["t"] for r in recs], [r["round"] for r in recs], c=[r["value"] for r in recs], s=6, cmap="viridis")
        ax.set_xlabel("virtual time")
        ax.set_ylabel("round of candidate-set update")
        return _save(fig, path)


def render_all(metrics: List[dict], out_dir: str) -> List[str]:
    os.makedirs(out_dir, exist_ok=True)
    return [
        plot_finalized(metrics, os.path.join(out_dir, "finalized.png")),
        plot_round_weights(metrics, os.path.join(out_dir, "round_weights.png")),
        plot_candidates(metrics, os.path.join(out_dir, "candidates.png")),
    ]

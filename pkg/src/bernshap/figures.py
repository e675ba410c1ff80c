"""Figure rendering for the report commands.

Every figure-producing command accepts ``--plot-dir``; the renderers here
write PNGs next to whatever delimited output the command printed.  The Agg
backend is forced so rendering works headless.
"""

from __future__ import annotations

import os

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .report import Report


def _ensure_dir(plot_dir: str) -> None:
    os.makedirs(plot_dir, exist_ok=True)


def render_comparison(report: Report, plot_dir: str, filename: str = "compare.png") -> str:
    """Grouped per-player bars, one group per method (exact first)."""
    _ensure_dir(plot_dir)
    methods = list(dict.fromkeys(row.method for row in report.rows))
    players = list(dict.fromkeys(row.player for row in report.rows))
    by_key = {(row.player, row.method): row for row in report.rows}
    x = np.arange(len(players))
    width = 0.8 / max(len(methods), 1)
    fig, ax = plt.subplots(figsize=(max(6.0, 1.2 * len(players)), 4.0))
    for k, method in enumerate(methods):
        vals = [by_key[(p, method)].value if (p, method) in by_key else np.nan for p in players]
        errs = [
            by_key[(p, method)].stderr if (p, method) in by_key else None for p in players
        ]
        yerr = [e if e is not None else 0.0 for e in errs]
        ax.bar(
            x + (k - (len(methods) - 1) / 2) * width,
            vals,
            width,
            yerr=yerr if any(e for e in yerr) else None,
            capsize=2,
            label=method,
        )
    ax.set_xticks(x, players)
    ax.set_ylabel("shapley value")
    ax.set_title(report.title or "shapley value comparison")
    ax.axhline(0.0, color="black", linewidth=0.6)
    ax.legend(fontsize=8)
    fig.tight_layout()
    path = os.path.join(plot_dir, filename)
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def render_risk(report: Report, plot_dir: str, filename: str = "risk_report.png") -> str:
    """Ranked horizontal risk bars (highest impact on top)."""
    _ensure_dir(plot_dir)
    rows = sorted(report.rows, key=lambda r: r.value)
    fig, ax = plt.subplots(figsize=(6.0, max(3.0, 0.5 * len(rows) + 1)))
    labels = [r.player for r in rows]
    values = [100.0 * r.value for r in rows]
    ax.barh(labels, values, color="#c44e52")
    for y, v in enumerate(values):
        ax.text(v, y, f" {v:.2f}%", va="center", fontsize=8)
    ax.set_xlabel("systemic risk impact (%)")
    ax.set_title(report.title or "risk report")
    fig.tight_layout()
    path = os.path.join(plot_dir, filename)
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def render_convergence(
    rows: list[dict], plot_dir: str, filename: str = "mc_convergence.png"
) -> str:
    """Log-log max-abs-error against sample count, one line per seed."""
    _ensure_dir(plot_dir)
    seeds = sorted({r["seed"] for r in rows})
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    for seed in seeds:
        pts = sorted((r["samples"], r["max_abs_error"]) for r in rows if r["seed"] == seed)
        ax.loglog([p[0] for p in pts], [p[1] for p in pts], marker="o", label=f"seed {seed}")
    ks = sorted({r["samples"] for r in rows})
    if len(ks) > 1:
        anchor = max(r["max_abs_error"] for r in rows if r["samples"] == ks[0])
        ref = [anchor * (ks[0] / k) ** 0.5 for k in ks]
        ax.loglog(ks, ref, "k--", linewidth=0.8, label="K^-1/2 slope")
    ax.set_xlabel("samples K")
    ax.set_ylabel("max abs error vs oracle")
    ax.set_title("monte carlo convergence")
    ax.legend(fontsize=8)
    fig.tight_layout()
    path = os.path.join(plot_dir, filename)
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path

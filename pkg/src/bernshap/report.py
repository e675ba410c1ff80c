"""Method dispatch, comparison tables, and the table/csv/json emitters."""

from __future__ import annotations

import csv
import io
import json
import os
import sys
import time
from dataclasses import dataclass, field

import numpy as np

from . import analytic, exact, layered, montecarlo, racs
from .game import BernoulliGame, ShapleyVector
from .gamefile import GameFileResult

METHODS = (
    "exact",
    "exact-symmetric",
    "exact-integral",
    "homogeneous",
    "racs",
    "racs-corrected",
    "layered",
    "meanfield",
    "binomial",
    "riemann",
    "mc",
)

#: Above this the enumeration method refuses to run without a fallback.
EXACT_REFUSAL_N = 24
#: Comparison tables auto-select enumeration up to here, symmetric beyond.
COMPARE_ENUM_N = 20


class InfeasibleExactError(RuntimeError):
    """The enumeration path was requested beyond its cap without a fallback."""


@dataclass
class MethodOptions:
    """Per-invocation knobs shared by the CLI and the report builders."""

    samples: int = 100_000
    seed: int = 0
    delta: float | None = None
    variant: str = layered.VARIANT_UNWEIGHTED
    normalize: str = "none"
    tau_low: float = 0.2
    tau_high: float = 0.8
    frozen_baseline: bool = False
    force_symmetric: bool = False
    riemann_nodes: int | None = None


def _rationalized(
    game: BernoulliGame, source: GameFileResult | None, opts: MethodOptions
) -> racs.RationalizedGame:
    if source is not None and source.rationalized is not None and opts.delta is None:
        return source.rationalized
    return racs.rationalize(game, delta=opts.delta)


def compute_vector(
    game: BernoulliGame,
    method: str,
    opts: MethodOptions | None = None,
    source: GameFileResult | None = None,
) -> ShapleyVector:
    """Run one estimation method over the whole game."""
    opts = opts or MethodOptions()
    n = game.n
    if method == "exact":
        if n > EXACT_REFUSAL_N:
            if not opts.force_symmetric:
                raise InfeasibleExactError(
                    f"exact enumeration is infeasible at n={n} (cap {EXACT_REFUSAL_N}); "
                    "pass --force-symmetric to fall back to the symmetric-sum oracle"
                )
            vec = exact.shapley_vector(game, "exact-symmetric")
            return ShapleyVector(vec.values, "exact-symmetric", dict(vec.meta) | {"fallback": True})
        values = tuple(exact.shapley_exact_enum(game, i) for i in range(n))
        return ShapleyVector(values, "exact-enum")
    if method == "exact-symmetric":
        return exact.shapley_vector(game, "exact-symmetric")
    if method == "exact-integral":
        return exact.shapley_vector(game, "exact-integral")
    if method == "homogeneous":
        probs = set(game.probs)
        if len(probs) != 1:
            raise ValueError("the homogeneous closed form needs all probabilities equal")
        value = exact.shapley_homogeneous(n, game.probs_float[0])
        return ShapleyVector((value,) * n, "homogeneous")
    if method == "racs":
        return racs.shapley_racs(_rationalized(game, source, opts))
    if method == "racs-corrected":
        rg = _rationalized(game, source, opts)
        return racs.racs_corrected(
            game, rg, tau_low=opts.tau_low, tau_high=opts.tau_high,
            target="te" if opts.normalize != "one" else "one",
        )
    if method == "meanfield":
        return racs.meanfield_racs(_rationalized(game, source, opts))
    if method == "layered":
        return layered.shapley_layered(game.probs_float, opts.variant, opts.normalize)
    if method == "binomial":
        values = tuple(analytic.shapley_binomial_closed(game.probs_float, i) for i in range(n))
        return ShapleyVector(values, "binomial-sum")
    if method == "riemann":
        values = tuple(
            analytic.shapley_riemann(game.probs_float, i, opts.riemann_nodes) for i in range(n)
        )
        return ShapleyVector(values, "riemann", {"nodes": opts.riemann_nodes or n})
    if method == "mc":
        cfg = montecarlo.McConfig(samples=opts.samples, seed=opts.seed)
        est = montecarlo.shapley_mc(game, cfg)
        return ShapleyVector(
            est.values,
            "monte-carlo",
            {"stderr": est.stderr, "samples": est.samples_used, "seed": opts.seed},
        )
    raise ValueError(f"unknown method {method!r}; choose from {', '.join(METHODS)}")


@dataclass
class ReportRow:
    player: str
    method: str
    value: float
    m_i: int | None = None
    stderr: float | None = None
    rel_error_pct: float | None = None


@dataclass
class Report:
    """Everything the emitters need: header facts, rows, and footer lines."""

    t_e: float
    regime: str | None
    rows: list[ReportRow]
    title: str = ""
    footer: list[str] = field(default_factory=list)
    columns: list[str] | None = None  # table-mode layout hint


def relative_error_pct(approx: float, exact_value: float) -> float | None:
    """(approx - exact) / exact * 100; None when the exact value is zero."""
    if exact_value == 0:
        return None
    return (approx - exact_value) / exact_value * 100.0


def game_regime_label(game: BernoulliGame) -> str:
    r = float(np.sum(game.probs_float))
    if r <= 0.5:
        return "sparse"
    if r <= 2.0:
        return "critical"
    return "dense"


def build_compute_report(
    game: BernoulliGame,
    method: str,
    opts: MethodOptions,
    source: GameFileResult | None = None,
) -> Report:
    vec = compute_vector(game, method, opts, source)
    stderr = vec.meta.get("stderr")
    rows = []
    for i, pid in enumerate(game.ids):
        rows.append(
            ReportRow(
                player=pid,
                method=vec.method,
                value=float(vec.values[i]),
                stderr=None if stderr is None else float(stderr[i]),
            )
        )
    footer = [f"total {vec.total():.6g}"]
    if "r" in vec.meta:
        footer.append(f"r = m/l = {vec.meta['r']:.6g}")
    if method in ("racs", "racs-corrected", "meanfield"):
        rg = _rationalized(game, source, opts)
        bounds = [racs.error_bound_thm(rg, i).thm_bound for i in range(game.n)]
        footer.append(f"worst-case bound per player <= {max(bounds):.6g}")
    return Report(
        t_e=game.total_capacity(),
        regime=game_regime_label(game),
        rows=rows,
        title=f"shapley values ({vec.method})",
        footer=footer,
    )


def build_compare_report(
    game: BernoulliGame,
    methods: list[str],
    opts: MethodOptions,
    source: GameFileResult | None = None,
) -> Report:
    """Exact column plus one estimate column per method, with error stats."""
    if not methods:
        raise ValueError("need at least one method to compare")
    exact_method = "exact" if game.n <= COMPARE_ENUM_N else "exact-symmetric"
    exact_vec = compute_vector(game, exact_method, opts, source)
    rows: list[ReportRow] = []
    counts = source.rationalized.counts if source is not None and source.is_count_form else None
    for i, pid in enumerate(game.ids):
        rows.append(
            ReportRow(
                player=pid,
                method="exact",
                value=float(exact_vec.values[i]),
                m_i=None if counts is None else int(counts[i]),
            )
        )
    footer = []
    for method in methods:
        start = time.perf_counter()
        vec = compute_vector(game, method, opts, source)
        elapsed = time.perf_counter() - start
        stderr = vec.meta.get("stderr")
        abs_errors = []
        rel_errors = []
        for i, pid in enumerate(game.ids):
            value = float(vec.values[i])
            exact_value = float(exact_vec.values[i])
            rel = relative_error_pct(value, exact_value)
            abs_errors.append(abs(value - exact_value))
            if rel is not None:
                rel_errors.append(abs(rel))
            rows.append(
                ReportRow(
                    player=pid,
                    method=vec.method,
                    value=value,
                    m_i=None if counts is None else int(counts[i]),
                    stderr=None if stderr is None else float(stderr[i]),
                    rel_error_pct=rel,
                )
            )
        footer.append(
            f"{vec.method}: max|err| {max(abs_errors):.3g}, mean|err| "
            f"{sum(abs_errors) / len(abs_errors):.3g}, "
            + (
                f"max|rel| {max(rel_errors):.3g}%, mean|rel| "
                f"{sum(rel_errors) / len(rel_errors):.3g}%, "
                if rel_errors
                else ""
            )
            + f"wall {elapsed:.4f}s"
        )
    return Report(
        t_e=game.total_capacity(),
        regime=game_regime_label(game),
        rows=rows,
        title="shapley value comparison",
        footer=footer,
    )


def _color_enabled(stream) -> bool:
    if os.environ.get("NO_COLOR"):
        return False
    return hasattr(stream, "isatty") and stream.isatty()


def _fmt(value: float | None) -> str:
    if value is None:
        return ""
    return f"{value:.6g}"


def emit_table(report: Report, stream=None) -> str:
    """Aligned human-readable table; numbers at 6 significant digits."""
    stream = stream or sys.stdout
    bold = "\033[1m" if _color_enabled(stream) else ""
    reset = "\033[0m" if bold else ""
    methods = list(dict.fromkeys(row.method for row in report.rows))
    players = list(dict.fromkeys(row.player for row in report.rows))
    by_key = {(row.player, row.method): row for row in report.rows}
    has_counts = any(row.m_i is not None for row in report.rows)
    has_stderr = any(row.stderr is not None for row in report.rows)
    single = len(methods) == 1

    header = ["Player"]
    if has_counts:
        header.append("m_i")
    if single:
        header.append(methods[0])
        if has_stderr:
            header.append("StdErr")
    else:
        for m in methods:
            header.append(m)
            if m != "exact":
                header.append("Error(%)")
    lines = []
    for pid in players:
        cells = [pid]
        if has_counts:
            first = by_key[(pid, methods[0])]
            cells.append("" if first.m_i is None else str(first.m_i))
        for m in methods:
            row = by_key.get((pid, m))
            if row is None:
                cells.append("")
                if not single and m != "exact":
                    cells.append("")
                continue
            cells.append(_fmt(row.value))
            if single and has_stderr:
                cells.append(_fmt(row.stderr))
            elif not single and m != "exact":
                cells.append("" if row.rel_error_pct is None else f"{row.rel_error_pct:+.2f}")
        lines.append(cells)

    widths = [max(len(header[c]), *(len(r[c]) for r in lines)) for c in range(len(header))]
    out = io.StringIO()
    if report.title:
        out.write(f"{bold}{report.title}{reset}\n")
    out.write(
        f"T(E) = {report.t_e:.6g}" + (f"   regime: {report.regime}" if report.regime else "") + "\n"
    )
    out.write(bold + "  ".join(h.ljust(w) for h, w in zip(header, widths)).rstrip() + reset + "\n")
    for cells in lines:
        out.write("  ".join(c.ljust(w) for c, w in zip(cells, widths)).rstrip() + "\n")
    for line in report.footer:
        out.write(f"# {line}\n")
    return out.getvalue()


def emit_csv(report: Report) -> str:
    """Long-form rows under the fixed header player,method,value,stderr,rel_error_pct."""
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["player", "method", "value", "stderr", "rel_error_pct"])
    for row in report.rows:
        writer.writerow(
            [
                row.player,
                row.method,
                repr(row.value),
                "" if row.stderr is None else repr(row.stderr),
                "" if row.rel_error_pct is None else repr(row.rel_error_pct),
            ]
        )
    return out.getvalue()


def emit_json(report: Report) -> str:
    """Schema-versioned object with full-precision numbers."""
    doc = {
        "schema": 1,
        "t_e": report.t_e,
        "regime": report.regime,
        "rows": [
            {
                "player": row.player,
                "method": row.method,
                "value": row.value,
                "m_i": row.m_i,
                "stderr": row.stderr,
                "rel_error_pct": row.rel_error_pct,
            }
            for row in report.rows
        ],
        "footer": report.footer,
    }
    return json.dumps(doc, indent=2) + "\n"


def emit(report: Report, fmt: str, stream=None) -> str:
    if fmt == "table":
        return emit_table(report, stream=stream)
    if fmt == "csv":
        return emit_csv(report)
    if fmt == "json":
        return emit_json(report)
    raise ValueError(f"format must be table, csv or json, got {fmt!r}")

"""Command-line interface.

Subcommands::

    compute      one method over a game file
    compare      exact column vs one or more estimates, with error stats
    risk-report  ranked systemic-risk percentages for vulns-form files
    convergence  monte carlo error vs sample count over a seed grid
    verify       cross-module identity / oracle / bound suites

Exit codes: 0 success, 1 usage, 2 validation, 3 infeasible exact request.
Reports go to stdout; diagnostics go to stderr.  Table mode honors NO_COLOR.
Passing ``--plot-dir`` to the report commands renders matplotlib figures
into that directory alongside the printed output.
"""

from __future__ import annotations

import argparse
import io
import json
import sys

from . import checks, montecarlo, racs, report
from .game import BernoulliGame, GameSizeError
from .gamefile import GameFileError, GameFileResult, parse_game_file
from .refvalues import match_reference_table
from .report import (
    METHODS,
    InfeasibleExactError,
    MethodOptions,
    Report,
    ReportRow,
    build_compare_report,
    build_compute_report,
    emit,
    relative_error_pct,
)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_VALIDATION = 2
EXIT_INFEASIBLE = 3


class _Parser(argparse.ArgumentParser):
    # argparse exits 2 on usage problems by default; this CLI reserves 2 for
    # input validation, so remap usage errors to 1
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _add_common_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--format", choices=("table", "csv", "json"), default="table")
    p.add_argument("--samples", type=int, default=100_000, help="monte carlo sample count")
    p.add_argument("--seed", type=int, default=0, help="monte carlo seed")
    p.add_argument("--delta", type=float, default=None, help="decimal rounding tolerance")
    p.add_argument("--variant", choices=("literal", "unweighted"), default="unweighted")
    p.add_argument("--normalize", choices=("none", "te", "one"), default="none")
    p.add_argument("--tau-low", type=float, default=0.2, dest="tau_low")
    p.add_argument("--tau-high", type=float, default=0.8, dest="tau_high")
    p.add_argument("--force-symmetric", action="store_true", dest="force_symmetric")
    p.add_argument("--nodes", type=int, default=None, help="riemann node count (default n)")
    p.add_argument("--plot-dir", default=None, help="also render figures into this directory")


def _options(args: argparse.Namespace) -> MethodOptions:
    return MethodOptions(
        samples=args.samples,
        seed=args.seed,
        delta=args.delta,
        variant=args.variant,
        normalize=args.normalize,
        tau_low=args.tau_low,
        tau_high=args.tau_high,
        force_symmetric=args.force_symmetric,
        riemann_nodes=args.nodes,
    )


def _default_method(gf: GameFileResult) -> str:
    # count-form files come from the large-network workflow, probability-form
    # files from the precision workflow
    return "racs" if gf.is_count_form else "exact-symmetric"


def cmd_compute(args: argparse.Namespace) -> int:
    gf = parse_game_file(args.file)
    method = args.method or _default_method(gf)
    rep = build_compute_report(gf.game, method, _options(args), source=gf)
    sys.stdout.write(emit(rep, args.format))
    if args.plot_dir:
        from . import figures

        path = figures.render_comparison(rep, args.plot_dir, filename="compute.png")
        print(f"figure written to {path}", file=sys.stderr)
    return EXIT_OK


def cmd_compare(args: argparse.Namespace) -> int:
    gf = parse_game_file(args.file)
    methods = [m.strip() for m in args.methods.split(",") if m.strip()]
    if not methods:
        raise GameFileError("need at least one method to compare")
    for m in methods:
        if m not in METHODS:
            raise GameFileError(f"unknown method {m!r}; choose from {', '.join(METHODS)}")
    rep = build_compare_report(gf.game, methods, _options(args), source=gf)
    sys.stdout.write(emit(rep, args.format))
    if args.plot_dir:
        from . import figures

        path = figures.render_comparison(rep, args.plot_dir)
        print(f"figure written to {path}", file=sys.stderr)
    return EXIT_OK


def _parse_updates(pairs: list[str], gf: GameFileResult) -> dict[str, int]:
    updates: dict[str, int] = {}
    ids = set(gf.game.ids)
    for pair in pairs:
        device, _, count = pair.partition("=")
        if not count:
            raise GameFileError(f"--update takes DEVICE=VULNS, got {pair!r}")
        if device not in ids:
            raise GameFileError(f"unknown device id {device!r}")
        try:
            value = int(count)
        except ValueError as exc:
            raise GameFileError(f"vulns count must be an integer, got {count!r}") from exc
        if value < 0 or value > gf.rationalized.l:
            raise GameFileError(
                f"vulns for {device!r} must be in [0, {gf.rationalized.l}], got {value}"
            )
        updates[device] = value
    return updates


def _risk_rows(ids, counts, values) -> list[ReportRow]:
    rows = [
        ReportRow(player=pid, method="racs", value=float(v), m_i=int(c))
        for pid, c, v in zip(ids, counts, values)
    ]
    rows.sort(key=lambda r: -r.value)
    return rows


def _render_risk_table(rep: Report, updates_note: list[str]) -> str:
    out = io.StringIO()
    out.write("network risk report\n")
    out.write(f"T(E) = {rep.t_e:.6g}   regime: {rep.regime}\n")
    header = ["Priority", "Device", "Vulns", "Shapley", "Risk(%)"]
    lines = []
    for rank, row in enumerate(rep.rows, start=1):
        lines.append(
            [str(rank), row.player, str(row.m_i), f"{row.value:.6g}", f"{100 * row.value:.2f}"]
        )
    widths = [max(len(header[c]), *(len(r[c]) for r in lines)) for c in range(len(header))]
    out.write("  ".join(h.ljust(w) for h, w in zip(header, widths)).rstrip() + "\n")
    for cells in lines:
        out.write("  ".join(c.ljust(w) for c, w in zip(cells, widths)).rstrip() + "\n")
    for note in updates_note:
        out.write(f"# {note}\n")
    for line in rep.footer:
        out.write(f"# {line}\n")
    return out.getvalue()


def cmd_risk_report(args: argparse.Namespace) -> int:
    gf = parse_game_file(args.file)
    if not gf.is_count_form:
        raise GameFileError("risk reports need the vulns + denominator file form")
    rg = gf.rationalized
    base = racs.shapley_racs(rg)
    ids = gf.game.ids
    counts = list(rg.counts)
    values = [float(v) for v in base.values]
    notes: list[str] = []
    game = gf.game

    updates = _parse_updates(args.update or [], gf)
    if updates:
        new_counts = list(counts)
        for device, count in updates.items():
            idx = ids.index(device)
            notes.append(f"update: {device} vulns {counts[idx]} -> {count}")
            new_counts[idx] = count
        if args.frozen_baseline:
            # the O(1) per-device refresh: keep the baseline shared factor and
            # total m, rescale only the updated devices
            factor = base.meta["factor"]
            m_old = base.meta["m"]
            for device, count in updates.items():
                idx = ids.index(device)
                values[idx] = count / m_old * factor
            counts = new_counts
            notes.append("frozen baseline: shared factor and total m kept from the base report")
        else:
            from fractions import Fraction

            game = BernoulliGame.from_probs(
                [Fraction(c, rg.l) for c in new_counts], ids=ids
            )
            rg = racs.RationalizedGame(tuple(new_counts), rg.l, source=game)
            fresh = racs.shapley_racs(rg)
            counts = new_counts
            values = [float(v) for v in fresh.values]

    rows = _risk_rows(ids, counts, values)
    rep = Report(
        t_e=game.total_capacity(),
        regime=report.game_regime_label(game),
        rows=rows,
        title="network risk report",
    )
    if args.verify:
        exact_method = "exact" if game.n <= report.COMPARE_ENUM_N else "exact-symmetric"
        oracle = report.compute_vector(game, exact_method, _options(args))
        oracle_by_id = {pid: float(v) for pid, v in zip(game.ids, oracle.values)}
        for row in rep.rows:
            row.rel_error_pct = relative_error_pct(row.value, oracle_by_id[row.player])
        rep.footer.append(
            "verification against the internal exact oracle: "
            + ", ".join(f"{pid}={oracle_by_id[pid]:.6g}" for pid in game.ids)
        )
        table = match_reference_table(game)
        if table is not None and table.exact is not None:
            rep.footer.append(
                f"bundled reference values ({table.name}): exact column "
                + str(list(table.exact))
                + (f" ; note: {table.note}" if table.note else "")
            )
    if args.format == "table":
        sys.stdout.write(_render_risk_table(rep, notes))
    else:
        rep.footer = notes + rep.footer
        sys.stdout.write(emit(rep, args.format))
    if args.plot_dir:
        from . import figures

        path = figures.render_risk(rep, args.plot_dir)
        print(f"figure written to {path}", file=sys.stderr)
    return EXIT_OK


def cmd_convergence(args: argparse.Namespace) -> int:
    gf = parse_game_file(args.file)
    seeds = [int(s) for s in args.seeds.split(",") if s.strip()]
    grid = [int(s) for s in args.grid.split(",") if s.strip()]
    if not seeds or not grid:
        raise GameFileError("need at least one seed and one sample count")
    rows = montecarlo.mc_convergence_curve(gf.game, seeds, grid)
    if args.format == "json":
        sys.stdout.write(json.dumps({"schema": 1, "rows": rows}, indent=2) + "\n")
    else:
        sys.stdout.write("seed,samples,max_abs_error\n")
        for r in rows:
            sys.stdout.write(f"{r['seed']},{r['samples']},{r['max_abs_error']!r}\n")
    if args.plot_dir:
        from . import figures

        path = figures.render_convergence(rows, args.plot_dir)
        print(f"figure written to {path}", file=sys.stderr)
    return EXIT_OK


def cmd_verify(args: argparse.Namespace) -> int:
    results = checks.run_checks(args.scope)
    doc = {
        "scope": args.scope,
        "passed": all(r.passed for r in results),
        "checks": [{"name": r.name, "passed": r.passed, "detail": r.detail} for r in results],
    }
    sys.stdout.write(json.dumps(doc, indent=2) + "\n")
    return EXIT_OK if doc["passed"] else 1


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="bernshap", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("compute", help="run one method over a game file")
    p.add_argument("file")
    p.add_argument("--method", choices=METHODS, default=None)
    _add_common_flags(p)
    p.set_defaults(func=cmd_compute)

    p = sub.add_parser("compare", help="compare methods against the exact column")
    p.add_argument("file")
    p.add_argument("--methods", default="racs", help="comma-separated method list")
    _add_common_flags(p)
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("risk-report", help="ranked systemic-risk percentages")
    p.add_argument("file")
    p.add_argument("--update", action="append", metavar="DEVICE=VULNS")
    p.add_argument("--frozen-baseline", action="store_true", dest="frozen_baseline")
    p.add_argument("--verify", action="store_true", help="add the exact-oracle comparison")
    _add_common_flags(p)
    p.set_defaults(func=cmd_risk_report)

    p = sub.add_parser("convergence", help="monte carlo error vs sample count")
    p.add_argument("file")
    p.add_argument("--seeds", default="1,2,3")
    p.add_argument("--grid", default="1000,10000,100000", help="comma-separated sample counts")
    _add_common_flags(p)
    p.set_defaults(func=cmd_convergence)

    p = sub.add_parser("verify", help="run the cross-module verification suites")
    p.add_argument("scope", nargs="?", choices=checks.SCOPES, default="all")
    p.set_defaults(func=cmd_verify)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except GameFileError as exc:
        print(f"bernshap: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except InfeasibleExactError as exc:
        print(f"bernshap: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except (GameSizeError, racs.CommonDenominatorOverflow, ValueError) as exc:
        print(f"bernshap: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())

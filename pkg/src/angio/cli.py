"""Command-line interface.

Subcommands:
  simulate  scenario.json -> CSV trajectory (t,x,K,p,c)
  analyze   scenario.json -> JSON stability report
  sweep     grid.json     -> CSV verdict/convergence table over a grid
  plot      traj.csv      -> deterministic SVG chart

Exit codes: 0 success, 1 input error, 2 runtime numerical fault.  A fault
during simulate still writes the rows computed before the fault.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from concurrent.futures import ProcessPoolExecutor

from .analysis import EquilibriumPoint
from .dde import convergence_metric
from .errors import AngioError, IntegrationFault
from .scenario import (
    Scenario,
    ScenarioError,
    load_scenario,
    load_sweep,
    parse_scenario,
    stability_report,
)
from .svgchart import render_line_chart

CONVERGED_THRESHOLD = 1e-4


class _Parser(argparse.ArgumentParser):
    # an unusable command line is an input error: exit 1, not argparse's 2
    def error(self, message):
        self.print_usage(sys.stderr)
        raise SystemExit(self.exit_code_for_usage_error(message))

    @staticmethod
    def exit_code_for_usage_error(message):
        print(f"error: {message}", file=sys.stderr)
        return 1


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="angio",
                     description="Simulate and analyze delayed tumor-vasculature models")
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="integrate a scenario and emit a CSV trajectory")
    sim.add_argument("scenario", help="scenario JSON file")
    sim.add_argument("--out", help="output CSV path (default: stdout)")
    sim.add_argument("--fig", help="also render a matplotlib figure to this path")
    sim.set_defaults(func=cmd_simulate)

    ana = sub.add_parser("analyze", help="run the matching stability certificate")
    ana.add_argument("scenario", help="scenario JSON file")
    ana.add_argument("--out", help="output JSON path (default: stdout)")
    ana.set_defaults(func=cmd_analyze)

    swp = sub.add_parser("sweep", help="verdict and convergence over a parameter grid")
    swp.add_argument("grid", help="sweep grid JSON file")
    swp.add_argument("--out", help="output CSV path (default: stdout)")
    swp.add_argument("--jobs", type=int, default=1, help="worker processes (default 1)")
    swp.add_argument("--fig", help="also render a matplotlib summary figure")
    swp.set_defaults(func=cmd_sweep)

    plo = sub.add_parser("plot", help="render a simulate CSV as a deterministic SVG")
    plo.add_argument("csv", help="trajectory CSV file")
    plo.add_argument("--out", default="chart.svg", help="output SVG path")
    plo.set_defaults(func=cmd_plot)

    return parser


def _trajectory_rows(scenario: Scenario, traj) -> list[tuple[float, float, float, float, float]]:
    rows = []
    if traj is None:
        return rows
    states = traj.states_original()
    n = len(traj.times)
    indices = list(range(0, n, scenario.stride))
    if indices[-1] != n - 1:
        indices.append(n - 1)
    for i in indices:
        t = float(traj.times[i])
        rows.append((t, float(states[i, 0]), float(states[i, 1]),
                     scenario.schedule.p(t), scenario.schedule.c(t)))
    return rows


def _write_csv(out: str | None, header: list[str], rows) -> None:
    def emit(fh):
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([v if isinstance(v, str) else repr(v) for v in row])

    if out:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            emit(fh)
    else:
        emit(sys.stdout)


def cmd_simulate(args) -> int:
    scenario = load_scenario(args.scenario)
    fault: IntegrationFault | None = None
    try:
        traj = scenario.run()
    except IntegrationFault as exc:
        fault = exc
        traj = exc.trajectory

    rows = _trajectory_rows(scenario, traj)
    _write_csv(args.out, ["t", "x", "K", "p", "c"], rows)

    if args.fig and rows:
        from .figures import save_trajectory_figure

        save_trajectory_figure(args.fig,
                               [r[0] for r in rows], [r[1] for r in rows],
                               [r[2] for r in rows], [r[3] for r in rows],
                               [r[4] for r in rows])
    if fault is not None:
        print(f"fault: {fault}", file=sys.stderr)
        return 2
    return 0


def cmd_analyze(args) -> int:
    scenario = load_scenario(args.scenario)
    report = stability_report(scenario)
    text = json.dumps(report.to_json_dict(), indent=2) + "\n"
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


def _sweep_eval(config: dict) -> tuple[str, float]:
    """Verdict and convergence metric for one grid point (worker-safe)."""
    scenario = parse_scenario(config, require_runnable=False)
    report = stability_report(scenario)
    metric = math.nan
    eq = scenario.equilibrium()
    if isinstance(eq, EquilibriumPoint):
        try:
            traj = scenario.run()
            metric = convergence_metric(traj, eq)
        except IntegrationFault:
            metric = math.nan
    return report.verdict.value, metric


def cmd_sweep(args) -> int:
    grid = load_sweep(args.grid)
    points = list(grid.point_configs())
    configs = [cfg for _, cfg in points]
    if args.jobs > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            results = list(pool.map(_sweep_eval, configs, chunksize=1))
    else:
        results = [_sweep_eval(cfg) for cfg in configs]

    axis_names = [path for path, _ in grid.axes]
    header = axis_names + ["verdict", "convergence_metric", "converged"]
    rows = []
    for (values, _), (verdict, metric) in zip(points, results):
        converged = metric == metric and metric < CONVERGED_THRESHOLD
        rows.append(list(values) + [verdict, metric, "true" if converged else "false"])
    _write_csv(args.out, header, rows)

    if args.fig:
        from .figures import save_sweep_figure

        save_sweep_figure(args.fig, axis_names,
                          [values for values, _ in points],
                          [m for _, m in results], [v for v, _ in results])
    return 0


def cmd_plot(args) -> int:
    try:
        with open(args.csv, "r", encoding="utf-8", newline="") as fh:
            reader = csv.DictReader(fh)
            fields = reader.fieldnames or []
            missing = [col for col in ("t", "x", "K") if col not in fields]
            if missing:
                print(f"error: {args.csv}: missing column '{missing[0]}'", file=sys.stderr)
                return 1
            t, x, K = [], [], []
            for row in reader:
                try:
                    t.append(float(row["t"]))
                    x.append(float(row["x"]))
                    K.append(float(row["K"]))
                except (TypeError, ValueError):
                    print(f"error: {args.csv}: non-numeric row {reader.line_num}",
                          file=sys.stderr)
                    return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    if not t:
        print(f"error: {args.csv}: no data rows", file=sys.stderr)
        return 1

    svg = render_line_chart(t, [("x", x), ("K", K)])
    with open(args.out, "w", encoding="utf-8", newline="") as fh:
        fh.write(svg)
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except (ScenarioError, AngioError) as exc:
        if isinstance(exc, IntegrationFault):
            print(f"fault: {exc}", file=sys.stderr)
            return 2
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

"""Command-line front door: solve, rollout, backtest, simulate, compare.

Every command is a pure function of its flags, input files and seed —
identical invocations print identical bytes. Exit codes: 0 success, 2 for
input or validation problems (every detected violation is listed, not just
the first), 3 when a computation exceeds its resource budget.

A flat key=value file passed as ``--config`` supplies defaults for any flag
of the subcommand (keys mirror the long flag names, '#' starts a comment);
flags given on the command line take precedence over the file.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .core import (CostSpec, DataError, DomainError, IndexOutOfRange,
                   InvalidParameter, LengthMismatch, MarketParams, NoiseModel,
                   NonPositivePrice, ParseError, ResourceLimit, TimeGrid)
from .evaluation import (compare, format_report, load_prices, mc_expected_cost,
                         write_report_csv)
from .solver import (DEFAULT_CELL_BUDGET, read_policy_csv, rollout,
                     solve_constrained, solve_fiscal, write_policy_csv)
from .strategies import bertsimas_allocation, one_time_allocation

__all__ = ["main", "build_parser"]


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        argv = _inject_config(argv)
        ns = parser.parse_args(argv)
    except SystemExit as exc:  # argparse already printed help or the error
        return 0 if exc.code in (0, None) else int(exc.code)
    except (ParseError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    try:
        return ns.func(ns)
    except ResourceLimit as exc:
        print(f"resource limit: {exc}", file=sys.stderr)
        return 3
    except (IndexOutOfRange, ValueError, OSError) as exc:
        # ValueError covers InvalidParameter, DomainError, ParseError,
        # DataError, LengthMismatch and NonPositivePrice.
        print(f"error: {exc}", file=sys.stderr)
        return 2


# ---------------------------------------------------------------------------
# parser construction


def _int_arg(text: str) -> int:
    """Integer flag that also accepts scientific notation (1e3 -> 1000)."""
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if value != int(value):
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}")
    return int(value)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="execsched",
        description="Cost-optimal execution schedules under geometric price "
                    "impact: solve, roll out, backtest, simulate, compare.")
    sub = parser.add_subparsers(dest="command", required=True)

    fmt = argparse.ArgumentDefaultsHelpFormatter

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="FILE",
                        help="flat key=value file supplying defaults for any "
                             "flag of this subcommand (flags win)")

    problem = argparse.ArgumentParser(add_help=False)
    problem.add_argument("--k", type=_int_arg, required=True,
                         help="shares to acquire (count)")
    problem.add_argument("--n", type=_int_arg, required=True,
                         help="trading intervals N; there are N+1 decision points (count)")
    problem.add_argument("--horizon", type=float, default=1.0,
                         help="trading horizon length (time units)")
    problem.add_argument("--beta", type=float, default=5e-5,
                         help="permanent relative price impact per share (dimensionless)")
    problem.add_argument("--x0", type=float, default=1.0,
                         help="opening price (currency)")

    cost = argparse.ArgumentParser(add_help=False)
    cost.add_argument("--cost", choices=("constrained", "fiscal"),
                      default="constrained",
                      help="per-period cost: plain outlay (fiscal) or outlay "
                           "plus barrier penalties (constrained)")
    cost.add_argument("--cl", type=float, default=1000.0,
                      help="lower-barrier penalty scale (dimensionless)")
    cost.add_argument("--cu", type=float, default=10.0,
                      help="upper-barrier penalty scale (dimensionless)")
    cost.add_argument("--gamma", type=float, default=2.0,
                      help="barrier time-weight exponent (dimensionless)")
    cost.add_argument("--lb", type=float, default=0.2,
                      help="lower bound on the fraction of outstanding shares "
                           "to buy per point (fraction of remainder)")
    cost.add_argument("--ub", type=float, default=0.6,
                      help="upper bound on the buy fraction (fraction of remainder)")

    mc = argparse.ArgumentParser(add_help=False)
    mc.add_argument("--noise", default="zero", metavar="SPEC",
                    help="per-interval relative shock distribution: 'zero', "
                         "'pm:DELTA' for +/-DELTA with equal weight, or "
                         "'v1:p1,v2:p2,...' (values are price fractions; "
                         "write --noise=SPEC when the first value is negative)")
    mc.add_argument("--paths", type=_int_arg, default=10_000,
                    help="Monte-Carlo paths (count)")
    mc.add_argument("--seed", type=_int_arg, required=True,
                    help="random seed; mandatory so every run is reproducible (integer)")
    mc.add_argument("--workers", type=_int_arg, default=1,
                    help="worker threads for path batches; the estimate is "
                         "bit-identical for any value (count)")
    mc.add_argument("--batch-size", type=_int_arg, default=4096,
                    help="paths per substream batch (count)")

    p = sub.add_parser("solve", parents=[common, problem, cost], formatter_class=fmt,
                       help="solve for the optimal schedule and print it")
    p.add_argument("--out", metavar="FILE", help="write the policy table CSV here")
    p.add_argument("--figure", metavar="FILE", help="render the schedule to this image file")
    p.add_argument("--cell-budget", type=_int_arg, default=DEFAULT_CELL_BUDGET,
                   help="dense solver work budget, (K+1)^2*(N+1) cells (count)")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("rollout", parents=[common], formatter_class=fmt,
                       help="follow a saved policy table from a starting budget")
    p.add_argument("--policy", required=True, metavar="FILE",
                   help="policy table CSV written by 'solve --out'")
    p.add_argument("--k", type=_int_arg, required=True, help="shares to acquire (count)")
    p.set_defaults(func=cmd_rollout)

    p = sub.add_parser("backtest", parents=[common, cost], formatter_class=fmt,
                       help="price schedules on a recorded CSV of opening prices")
    p.add_argument("--prices", required=True, metavar="FILE",
                   help="CSV with header 'date,open' (ISO dates, currency prices)")
    p.add_argument("--k", type=_int_arg, required=True, help="shares to acquire (count)")
    p.add_argument("--n", type=_int_arg, default=None,
                   help="trading intervals (count); default: price count - 1")
    p.add_argument("--horizon", type=float, default=1.0,
                   help="trading horizon length (time units)")
    p.add_argument("--beta", type=float, default=5e-5,
                   help="impact slope used by the 'dp' strategy (dimensionless)")
    p.add_argument("--x0", type=float, default=1.0,
                   help="unit price the 'dp' policy is solved at (currency)")
    p.add_argument("--strategies", default="bertsimas,onetime@mid,dp",
                   help="comma list of bertsimas | onetime@J (J an index or "
                        "'mid') | dp")
    p.add_argument("--baseline", default=None,
                   help="strategy name the ratio column divides by "
                        "(default: bertsimas when present, else the first)")
    p.add_argument("--impact-beta", type=float, default=None,
                   help="optional what-if mode: rescale recorded prices by the "
                        "drift the schedule itself would cause (dimensionless)")
    p.add_argument("--report", metavar="FILE", help="write the report CSV here")
    p.add_argument("--figures", metavar="DIR",
                   help="render cost/schedule/price figures into this directory")
    p.set_defaults(func=cmd_backtest)

    p = sub.add_parser("simulate", parents=[common, problem, cost, mc], formatter_class=fmt,
                       help="Monte-Carlo cost estimates for schedules under the model")
    p.add_argument("--strategies", default="dp",
                   help="comma list of bertsimas | onetime@J | dp")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("compare", parents=[common, problem, cost, mc], formatter_class=fmt,
                       help="model-mode comparison report with ratios")
    p.add_argument("--strategies", default="dp,bertsimas",
                   help="comma list of bertsimas | onetime@J | dp")
    p.add_argument("--baseline", default=None,
                   help="strategy name the ratio column divides by "
                        "(default: bertsimas when present, else the first)")
    p.add_argument("--report", metavar="FILE", help="write the report CSV here")
    p.add_argument("--figures", metavar="DIR",
                   help="render cost/schedule figures into this directory")
    p.set_defaults(func=cmd_compare)

    return parser


# ---------------------------------------------------------------------------
# config file support


def _inject_config(argv: list[str]) -> list[str]:
    """Rewrite argv so config entries precede (and lose to) explicit flags."""
    probe = argparse.ArgumentParser(add_help=False)
    probe.add_argument("--config")
    try:
        known, _ = probe.parse_known_args(argv)
    except SystemExit:
        return argv
    if not known.config or not argv or argv[0].startswith("-"):
        return argv
    injected: list[str] = []
    for key, value in _read_config(known.config):
        injected += [f"--{key}", value]
    return [argv[0], *injected, *argv[1:]]


def _read_config(path: str) -> list[tuple[str, str]]:
    out = []
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ParseError(f"expected key=value, got {raw.rstrip()!r}", line=lineno)
            key, value = line.split("=", 1)
            key = key.strip().replace("_", "-")
            if not key:
                raise ParseError("empty key", line=lineno)
            out.append((key, value.strip()))
    return out


# ---------------------------------------------------------------------------
# shared pieces


def _grid(ns) -> TimeGrid:
    return TimeGrid(n_steps=ns.n, horizon=ns.horizon)


def _market(ns) -> MarketParams:
    return MarketParams(beta=ns.beta, x0=ns.x0)


def _cost_spec(ns) -> CostSpec:
    if ns.cost == "fiscal":
        return CostSpec.fiscal()
    return CostSpec.constrained(c_lower=ns.cl, c_upper=ns.cu, gamma=ns.gamma,
                                lb=ns.lb, ub=ns.ub)


def _parse_noise(text: str) -> NoiseModel:
    text = text.strip()
    if text == "zero":
        return NoiseModel.zero()
    if text.startswith("pm:"):
        try:
            return NoiseModel.two_point(float(text[3:]))
        except ValueError:
            raise InvalidParameter([f"bad --noise delta in {text!r}"]) from None
    support = []
    for piece in text.split(","):
        if ":" not in piece:
            raise InvalidParameter(
                [f"bad --noise entry {piece!r} (expected value:probability)"])
        v, p = piece.split(":", 1)
        try:
            support.append((float(v), float(p)))
        except ValueError:
            raise InvalidParameter([f"bad --noise entry {piece!r}"]) from None
    model = NoiseModel(tuple(support))
    bad = model.violations()
    if bad:
        raise InvalidParameter(bad)
    return model


def _build_strategies(tokens: str, k: int, grid: TimeGrid, market: MarketParams,
                      spec: CostSpec, cell_budget: int = DEFAULT_CELL_BUDGET):
    """Resolve strategy tokens into named schedules sharing (K, N)."""
    n = grid.n_steps
    out = []
    for token in [t.strip() for t in tokens.split(",") if t.strip()]:
        if token == "bertsimas":
            out.append(("bertsimas", bertsimas_allocation(k, n)))
        elif token == "dp":
            if spec.is_constrained:
                policy = solve_constrained(k, grid, market, spec,
                                           cell_budget=cell_budget)
            else:
                policy = solve_fiscal(k, grid, market)
            out.append(("dp", rollout(policy, k)))
        elif token.startswith("onetime@"):
            sel = token[len("onetime@"):]
            j = (n + 1) // 2 if sel == "mid" else _parse_index(sel, token)
            out.append((f"onetime@{j}", one_time_allocation(k, n, j)))
        else:
            raise InvalidParameter(
                [f"unknown strategy token {token!r} "
                 f"(expected bertsimas, dp, or onetime@J with J an index or 'mid')"])
    if not out:
        raise InvalidParameter(["--strategies must name at least one strategy"])
    return out


def _parse_index(sel: str, token: str) -> int:
    try:
        return int(sel)
    except ValueError:
        raise InvalidParameter(
            [f"bad one-time index in {token!r} (expected an integer or 'mid')"]) from None


def _vector_lines(values) -> list[str]:
    width = max(len(str(v)) for v in values)
    return [" ".join(f"{v:{width}d}" for v in values[i:i + 10])
            for i in range(0, len(values), 10)]


# ---------------------------------------------------------------------------
# commands


def cmd_solve(ns) -> int:
    grid, market, spec = _grid(ns), _market(ns), _cost_spec(ns)
    if spec.is_constrained:
        policy = solve_constrained(ns.k, grid, market, spec,
                                   cell_budget=ns.cell_budget)
    else:
        policy = solve_fiscal(ns.k, grid, market)
    schedule = rollout(policy, ns.k)
    print(f"schedule (K={ns.k}, N={grid.n_steps}, rows of 10):")
    for line in _vector_lines(schedule.purchases):
        print(line)
    total = float(policy.values[0, ns.k]) * market.x0
    print(f"expected total cost: {total:.2f}")
    if policy.note:
        print(f"note: {policy.note}")
    if ns.out:
        write_policy_csv(policy, ns.out)
        print(f"policy table written to {ns.out}")
    if ns.figure:
        from .plots import save_schedule_figure
        save_schedule_figure({"dp": schedule}, ns.figure)
        print(f"figure written to {ns.figure}")
    return 0


def cmd_rollout(ns) -> int:
    policy = read_policy_csv(ns.policy)
    schedule = rollout(policy, ns.k)
    print(f"schedule (K={ns.k}, N={policy.n_steps}, rows of 10):")
    for line in _vector_lines(schedule.purchases):
        print(line)
    return 0


def cmd_backtest(ns) -> int:
    path = load_prices(ns.prices)
    n = len(path) - 1 if ns.n is None else ns.n
    if n > len(path) - 1:
        raise InvalidParameter(
            [f"n={n} needs {n + 1} prices but the file has {len(path)}"])
    grid = TimeGrid(n_steps=n, horizon=ns.horizon)
    market = MarketParams(beta=ns.beta, x0=ns.x0)
    strategies = _build_strategies(ns.strategies, ns.k, grid, market, _cost_spec(ns))
    report = compare(strategies, path=path, baseline=ns.baseline,
                     impact_beta=ns.impact_beta, source_name=ns.prices)
    print(format_report(report))
    if ns.report:
        write_report_csv(report, ns.report)
        print(f"report written to {ns.report}")
    if ns.figures:
        _render_figures(ns.figures, report, strategies, path)
    return 0


def cmd_simulate(ns) -> int:
    grid, market, spec = _grid(ns), _market(ns), _cost_spec(ns)
    noise = _parse_noise(ns.noise)
    strategies = _build_strategies(ns.strategies, ns.k, grid, market, spec)
    name_w = max(len("strategy"), *(len(name) for name, _ in strategies))
    print(f"{'strategy':<{name_w}}  {'mean':>16}  {'stderr':>12}  {'paths':>8}  seed")
    for name, alloc in strategies:
        est = mc_expected_cost(alloc, market, noise, spec, grid, ns.paths,
                               ns.seed, n_workers=ns.workers,
                               batch_size=ns.batch_size)
        print(f"{name:<{name_w}}  {est.mean:>16.6f}  {est.standard_error:>12.6g}"
              f"  {est.n_paths:>8d}  {est.seed}")
    return 0


def cmd_compare(ns) -> int:
    grid, market, spec = _grid(ns), _market(ns), _cost_spec(ns)
    noise = _parse_noise(ns.noise)
    strategies = _build_strategies(ns.strategies, ns.k, grid, market, spec)
    report = compare(strategies, params=market, noise=noise, spec=spec,
                     grid=grid, n_paths=ns.paths, seed=ns.seed,
                     baseline=ns.baseline, n_workers=ns.workers)
    print(format_report(report))
    if ns.report:
        write_report_csv(report, ns.report)
        print(f"report written to {ns.report}")
    if ns.figures:
        _render_figures(ns.figures, report, strategies, None)
    return 0


def _render_figures(directory, report, strategies, path) -> None:
    from .plots import save_cost_figure, save_price_figure, save_schedule_figure
    out = Path(directory)
    out.mkdir(parents=True, exist_ok=True)
    save_cost_figure(report, out / "costs.png")
    save_schedule_figure(dict(strategies), out / "schedules.png")
    if path is not None:
        overlay = dict(strategies).get("dp")
        save_price_figure(path, out / "prices.png", purchases=overlay)
    print(f"figures written to {out}")


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())

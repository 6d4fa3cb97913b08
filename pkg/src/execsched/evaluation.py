"""Backtesting on recorded prices and Monte-Carlo evaluation under the model.

Historical mode prices a schedule on a CSV of opening prices exactly as
recorded — no impact adjustment is applied to data that already happened
(an optional what-if rescaling is available but clearly labelled and off by
default). Model mode instead averages simulated paths; its determinism
contract is strict: batches of fixed size draw from per-batch substreams
keyed (seed, batch index) and are reduced in batch order, so the estimate is
bit-identical for any worker count.
"""

from __future__ import annotations

import datetime
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .core import (AllocationVector, CostSpec, DataError, InvalidParameter,
                   LengthMismatch, MarketParams, NoiseModel, ParseError,
                   PricePath, TimeGrid, _is_int)
from .cost import stage_cost
from .price_model import simulate_batch

__all__ = ["McEstimate", "BacktestReport", "load_prices", "execute_on_path",
           "mc_expected_cost", "compare", "format_report", "write_report_csv",
           "REPORT_HEADER", "DEFAULT_BATCH_SIZE"]

DEFAULT_BATCH_SIZE = 4096

REPORT_HEADER = "strategy,total_cost,ratio_vs_baseline"


@dataclass(frozen=True)
class McEstimate:
    """Monte-Carlo mean with its standard error and provenance."""

    mean: float
    standard_error: float
    n_paths: int
    seed: int


@dataclass(frozen=True)
class BacktestReport:
    """Per-strategy total costs plus ratios against a designated baseline."""

    rows: tuple[tuple[str, float], ...]
    ratios: tuple[tuple[str, float], ...]
    metadata: dict = field(default_factory=dict)

    @property
    def baseline(self) -> str:
        return self.metadata.get("baseline", self.rows[0][0] if self.rows else "")


def load_prices(source) -> PricePath:
    """Read a `date,open` CSV into a labelled price path.

    ``source`` may be a filesystem path or a readable file object (text or
    bytes; bytes are decoded as UTF-8). Dates must be ISO-8601 and prices
    positive decimals; rows stay in file order. Malformed content raises
    :class:`ParseError` with the offending 1-based line number; an empty or
    non-positive series raises :class:`DataError`.
    """
    if hasattr(source, "read"):
        raw = source.read()
    else:
        with open(source, "rb") as fh:
            raw = fh.read()
    if isinstance(raw, bytes):
        raw = raw.decode("utf-8")
    lines = raw.splitlines()
    if not lines or not lines[0].strip():
        raise DataError("price file is empty")
    header = lines[0].strip().lstrip("﻿")
    if header != "date,open":
        raise ParseError(f"expected header 'date,open', got {lines[0]!r}", line=1)
    dates: list[str] = []
    prices: list[float] = []
    for lineno, row in enumerate(lines[1:], start=2):
        if not row.strip():
            continue
        parts = row.split(",")
        if len(parts) != 2:
            raise ParseError(f"expected 2 fields, got {len(parts)}", line=lineno)
        label, text = parts[0].strip(), parts[1].strip()
        try:
            datetime.date.fromisoformat(label)
        except ValueError:
            raise ParseError(f"not an ISO-8601 date: {label!r}", line=lineno) from None
        try:
            price = float(text)
        except ValueError:
            raise ParseError(f"not a decimal price: {text!r}", line=lineno) from None
        if not math.isfinite(price) or price <= 0:
            raise DataError(f"line {lineno}: price must be positive and finite (got {text})")
        dates.append(label)
        prices.append(price)
    if not prices:
        raise DataError("price file has a header but no rows")
    return PricePath(prices=tuple(prices), labels=tuple(dates))


def execute_on_path(path: PricePath, alloc: AllocationVector, *,
                    impact_beta: float | None = None) -> float:
    """Total expenditure of a schedule priced on a recorded path.

    The standard accounting is the plain dot product sum(u_k * p_k) over the
    schedule's decision points: recorded prices already contain whatever
    impact actually occurred. ``impact_beta`` switches on a *hypothetical*
    rescaling — p_k is replaced by p_k * prod_{j<k}(1 + beta*u_j), as if the
    schedule's own drift were layered on top of the record. That mode is a
    what-if tool, not part of the standard accounting, and reports label it.
    """
    if len(path) < len(alloc):
        raise LengthMismatch(
            f"path has {len(path)} prices but the schedule needs {len(alloc)}")
    bad = alloc.violations()
    if bad:
        raise InvalidParameter(bad)
    prices = path.as_array()[:len(alloc)]
    if impact_beta is None:
        u = np.asarray(alloc.purchases, dtype=np.float64)
        return float(np.dot(u, prices))
    total = 0.0
    running = 1.0
    for u_k, p_k in zip(alloc.purchases, prices):
        total += u_k * (p_k * running)
        running *= 1.0 + impact_beta * u_k
    return float(total)


def mc_expected_cost(alloc: AllocationVector, params: MarketParams,
                     noise: NoiseModel, spec: CostSpec, grid: TimeGrid,
                     n_paths: int, seed: int, *, n_workers: int = 1,
                     batch_size: int = DEFAULT_BATCH_SIZE) -> McEstimate:
    """Average total stage cost of a fixed schedule over simulated paths.

    Paths are simulated in batches of ``batch_size``; batch b draws from the
    substream keyed (seed, b), and the per-batch results are reduced in batch
    order, so the estimate depends only on (inputs, n_paths, seed) — never on
    ``n_workers``. A single-point noise support makes every path identical;
    that case short-circuits to the exact common value with standard error 0.
    """
    bad = (alloc.violations() + params.violations() + noise.violations()
           + spec.violations() + grid.violations())
    if not _is_int(n_paths) or n_paths < 2:
        bad.append(f"n_paths must be an integer >= 2 (got {n_paths!r})")
    if bad:
        raise InvalidParameter(bad)
    n = grid.n_steps
    if len(alloc) != n + 1:
        raise LengthMismatch(
            f"schedule has {len(alloc)} entries but the grid has {n + 1} decision points")

    if len(noise.support) == 1:
        only = _batch_costs(alloc, params, noise, spec, grid, seed, 0, 1)
        return McEstimate(mean=float(only[0]), standard_error=0.0,
                          n_paths=int(n_paths), seed=int(seed))

    counts = [batch_size] * (n_paths // batch_size)
    if n_paths % batch_size:
        counts.append(n_paths % batch_size)
    jobs = list(enumerate(counts))

    def run(job):
        b, count = job
        return _batch_costs(alloc, params, noise, spec, grid, seed, b, count)

    if n_workers > 1:
        with ThreadPoolExecutor(max_workers=n_workers) as pool:
            batches = list(pool.map(run, jobs))
    else:
        batches = [run(job) for job in jobs]

    s1 = 0.0
    for costs in batches:
        s1 += float(np.sum(costs))
    mean = s1 / n_paths
    sq = 0.0
    for costs in batches:
        dev = costs - mean
        sq += float(np.dot(dev, dev))
    var = max(0.0, sq / (n_paths - 1))
    return McEstimate(mean=mean, standard_error=math.sqrt(var / n_paths),
                      n_paths=int(n_paths), seed=int(seed))


def _batch_costs(alloc, params, noise, spec, grid, seed, stream, count):
    prices = simulate_batch(alloc, params, noise, seed, stream, count)
    n = grid.n_steps
    totals = np.zeros(count, dtype=np.float64)
    r = alloc.total
    for i, u in enumerate(alloc.purchases):
        totals = totals + stage_cost(prices[:, i], u, r, i, n, spec)
        r -= u
    return totals


def compare(strategies, *, path: PricePath | None = None,
            params: MarketParams | None = None, noise: NoiseModel | None = None,
            spec: CostSpec | None = None, grid: TimeGrid | None = None,
            n_paths: int = 10**4, seed: int | None = None,
            baseline: str | None = None, impact_beta: float | None = None,
            n_workers: int = 1, source_name: str | None = None) -> BacktestReport:
    """Evaluate named schedules under one mode and tabulate ratios.

    ``strategies`` is a sequence of (name, AllocationVector) sharing one
    budget and one grid length. Passing ``path`` selects historical mode
    (plain expenditure on the recorded prices); otherwise ``params``,
    ``noise``, ``spec``, ``grid`` and ``seed`` must all be given and each
    schedule is scored by its Monte-Carlo mean. Ratios divide every row by
    the ``baseline`` row (default: the strategy named 'bertsimas' when
    present, else the first).
    """
    named = [(str(name), alloc) for name, alloc in strategies]
    bad = []
    if not named:
        bad.append("at least one strategy is required")
    names = [name for name, _ in named]
    if len(set(names)) != len(names):
        bad.append(f"strategy names must be unique (got {names})")
    totals = {alloc.total for _, alloc in named}
    lengths = {len(alloc) for _, alloc in named}
    if len(totals) > 1:
        bad.append(f"all strategies must share one budget (got totals {sorted(totals)})")
    if len(lengths) > 1:
        bad.append(f"all strategies must share one grid (got lengths {sorted(lengths)})")
    model_inputs = (params, noise, spec, grid)
    if path is not None:
        if any(v is not None for v in model_inputs) or seed is not None:
            bad.append("historical mode takes a path only; model inputs must be omitted")
    else:
        missing = [n for n, v in zip(("params", "noise", "spec", "grid"), model_inputs)
                   if v is None]
        if missing:
            bad.append("model mode requires " + ", ".join(missing))
        if seed is None:
            bad.append("model mode requires an explicit seed")
    if baseline is not None and baseline not in names:
        bad.append(f"baseline {baseline!r} is not among the strategies")
    if bad:
        raise InvalidParameter(bad)

    if baseline is None:
        baseline = "bertsimas" if "bertsimas" in names else names[0]

    rows = []
    if path is not None:
        for name, alloc in named:
            rows.append((name, execute_on_path(path, alloc, impact_beta=impact_beta)))
    else:
        for name, alloc in named:
            est = mc_expected_cost(alloc, params, noise, spec, grid,
                                   n_paths, seed, n_workers=n_workers)
            rows.append((name, est.mean))

    base_cost = dict(rows)[baseline]
    ratios = tuple((f"{name}:{baseline}", cost / base_cost) for name, cost in rows)

    k = named[0][1].total
    n = len(named[0][1]) - 1
    metadata = {"mode": "historical" if path is not None else "model",
                "k": k, "n": n, "baseline": baseline}
    if path is not None:
        if source_name:
            metadata["source"] = str(source_name)
        if path.labels:
            metadata["date_range"] = f"{path.labels[0]}..{path.labels[-1]}"
        if impact_beta is not None:
            metadata["impact_adjusted_beta"] = float(impact_beta)
    else:
        metadata["n_paths"] = int(n_paths)
        metadata["seed"] = int(seed)
    return BacktestReport(rows=tuple(rows), ratios=ratios, metadata=metadata)


def format_report(report: BacktestReport) -> str:
    """Render a report as a plain aligned table (deterministic bytes)."""
    lines = [f"# {key}: {report.metadata[key]}" for key in sorted(report.metadata)]
    name_w = max(len("strategy"), *(len(name) for name, _ in report.rows))
    cost_w = max(len("total_cost"), *(len(f"{c:.2f}") for _, c in report.rows))
    lines.append(f"{'strategy':<{name_w}}  {'total_cost':>{cost_w}}  ratio_vs_baseline")
    for (name, cost), (_, ratio) in zip(report.rows, report.ratios):
        lines.append(f"{name:<{name_w}}  {cost:>{cost_w}.2f}  {ratio:.5f}")
    return "\n".join(lines)


def write_report_csv(report: BacktestReport, dest) -> None:
    """Write `strategy,total_cost,ratio_vs_baseline` rows (12 significant digits)."""
    own = not hasattr(dest, "write")
    fh = open(dest, "w", newline="") if own else dest
    try:
        fh.write(REPORT_HEADER + "\n")
        for (name, cost), (_, ratio) in zip(report.rows, report.ratios):
            fh.write(f"{name},{cost:.12g},{ratio:.12g}\n")
    finally:
        if own:
            fh.close()

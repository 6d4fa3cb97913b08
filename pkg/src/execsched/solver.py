"""Backward-induction solvers and schedule oracles.

The main solver exploits the fact that both cost variants are linear in the
current price: the value function factors as J(x, k, r) = x * j(k, r), so the
recursion runs on the unit-price table j alone and the action is independent
of the price observed. One dense (K+1) x (K+1) layer per decision point:

    val[r, u] = f(1, u, r, k) + (1 + beta*u) * j[k+1, r-u],  0 <= u <= r

with the minimizer taken as the *largest* u attaining the row minimum
(running ``<=`` update in u-ascending order). The float operation order is
pinned so a plain scalar transliteration of the recursion produces
bit-identical tables; tests rely on that.

``solve_tabular`` keeps the price as an explicit state on a finite grid
instead — it exists to cross-check the reduction and to host alternative
impact laws h(u); projection onto the grid erases whatever drift the grid
cannot represent, so its answers coincide with the exact solver only when
the grid resolves all reachable prices (projection bias shrinks with grid
spacing; a one-point grid collapses the model to zero drift).
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass
from typing import Callable, Iterator

import numpy as np

from .core import (AllocationVector, CostSpec, DataError, DomainError,
                   InvalidParameter, LengthMismatch, MarketParams, NoiseModel,
                   NonPositivePrice, ParseError, PolicyTable, ResourceLimit,
                   TimeGrid, validate_problem)
from .cost import stage_cost

__all__ = ["DEFAULT_CELL_BUDGET", "DEFAULT_TABULAR_BUDGET", "solve_constrained",
           "solve_fiscal", "rollout", "expected_cost_closed_form",
           "enumerate_all_allocations", "TabularSolution", "solve_tabular",
           "write_policy_csv", "read_policy_csv", "POLICY_HEADER"]

#: Work budget for the dense solver: (K+1)**2 * (N+1) table cells.
DEFAULT_CELL_BUDGET = 10**9
#: State budget for the tabular solver: (N+1) * |grid| * (K+1) cells.
DEFAULT_TABULAR_BUDGET = 5 * 10**7


def solve_constrained(k: int, grid: TimeGrid, params: MarketParams,
                      spec: CostSpec, *,
                      cell_budget: int = DEFAULT_CELL_BUDGET) -> PolicyTable:
    """Solve the barrier-penalised problem exactly by backward induction.

    Returns the unit-price :class:`PolicyTable`; multiply values by the
    actual price to get currency. Work and memory both scale with the dense
    layers: the budget bounds (K+1)**2 * (N+1) evaluated cells and, at
    budget/50, the (K+1)**2 workspace each layer allocates (roughly nine
    float64 matrices of that shape at peak).
    """
    validate_problem(k, grid, params, spec)
    if not spec.is_constrained:
        raise InvalidParameter(["solve_constrained requires the constrained cost variant"])
    n = grid.n_steps
    cells = (k + 1) ** 2 * (n + 1)
    if cells > cell_budget or (k + 1) ** 2 > cell_budget // 50:
        raise ResourceLimit(
            f"dense solve needs {cells} cells for K={k}, N={n} "
            f"(budget {cell_budget}); raise cell_budget to force it")

    size = k + 1
    u_f = np.arange(size, dtype=np.float64)        # u as float, also r at terminal
    u_i = np.arange(size)
    r_col = u_f[:, None]
    mask = u_i[None, :] <= u_i[:, None]            # admissible: u <= r
    ratio = np.divide(u_f[None, :], r_col,
                      out=np.zeros((size, size)), where=r_col > 0)
    ratio[~mask] = 0.0
    viol_l = np.maximum(0.0, spec.lb - ratio)
    viol_u = np.maximum(0.0, ratio - spec.ub)
    pen_l = -np.log(1.0 - viol_l)
    pen_u = -np.log(1.0 - viol_u)
    gather = np.maximum(u_i[:, None] - u_i[None, :], 0)   # r - u, clipped
    onepbu = 1.0 + params.beta * u_f

    values = np.empty((n + 1, size), dtype=np.float64)
    actions = np.empty((n + 1, size), dtype=np.int64)
    values[n] = u_f
    actions[n] = u_i
    for i in range(n - 1, -1, -1):
        cont = onepbu[None, :] * values[i + 1][gather]
        if i == 0:
            # Start-of-horizon convention: deferral costs nothing, a burst
            # above ub*r is inadmissible outright.
            val = u_f[None, :] + cont
            val[viol_u > 0.0] = np.inf
        else:
            w_l = spec.c_lower * (i / n) ** spec.gamma
            w_u = spec.c_upper * (n / i) ** spec.gamma
            val = (u_f[None, :] + w_l * pen_l) + w_u * pen_u
            val = val + cont
        val[~mask] = np.inf
        best = val.min(axis=1)
        # Largest u attaining the minimum == the running <= update.
        arg = k - (val[:, ::-1] == best[:, None]).argmax(axis=1)
        values[i] = best
        actions[i] = arg
        values[i, 0] = 0.0
        actions[i, 0] = 0

    return PolicyTable(actions=actions, values=values,
                       fingerprint=_fingerprint(k, grid, params, spec))


def solve_fiscal(k: int, grid: TimeGrid, params: MarketParams) -> PolicyTable:
    """Construct the optimal table for the pure-outlay cost directly.

    Under fiscal cost the unit-price value of r outstanding shares is r no
    matter when they are bought — impact raises later prices exactly as much
    as deferral postpones spending, and the expectation is taken under
    zero-mean noise. Every split across time is therefore optimal; this
    table pins the defer-everything representative (buy the whole budget at
    the terminal point). No induction is run: the closed form *is* the
    solution.
    """
    validate_problem(k, grid, params, CostSpec.fiscal())
    n = grid.n_steps
    r = np.arange(k + 1)
    values = np.tile(r.astype(np.float64), (n + 1, 1))
    actions = np.zeros((n + 1, k + 1), dtype=np.int64)
    actions[n] = r
    return PolicyTable(
        actions=actions, values=values,
        fingerprint=_fingerprint(k, grid, params, CostSpec.fiscal()),
        note=("fiscal cost is schedule-indifferent: every completion schedule "
              "has unit-price expected cost r, so any single decision point "
              "may host the entire purchase; this table defers to the terminal."))


def rollout(policy: PolicyTable, k: int) -> AllocationVector:
    """Follow a policy from a starting budget down to the empty book."""
    if not 0 <= k <= policy.capacity:
        raise DomainError(
            f"budget {k} outside the table's capacity 0..{policy.capacity}")
    out = []
    r = k
    for i in range(policy.n_steps + 1):
        u = int(policy.actions[i, r])
        out.append(u)
        r -= u
    return AllocationVector(tuple(out))


def expected_cost_closed_form(alloc: AllocationVector, params: MarketParams,
                              spec: CostSpec, grid: TimeGrid) -> float:
    """Exact expected cost of a fixed schedule, no simulation.

    Costs are linear in price and shocks are independent with mean zero, so
    E[x_k] = x0 * prod_{j<k} (1 + beta*u_j) and the expected total is the
    sum of stage costs evaluated at those expected prices. Can return +inf
    (a schedule that bursts above ub*r at the very first point).
    """
    bad = alloc.violations() + params.violations() + spec.violations()
    if bad:
        raise InvalidParameter(bad)
    n = grid.n_steps
    if len(alloc) != n + 1:
        raise LengthMismatch(
            f"schedule has {len(alloc)} entries but the grid has {n + 1} decision points")
    x = params.x0
    r = alloc.total
    total = 0.0
    for i, u in enumerate(alloc.purchases):
        total = total + stage_cost(x, u, r, i, n, spec)
        x = x * (1.0 + params.beta * u)
        r -= u
    return float(total)


def enumerate_all_allocations(k: int, grid: TimeGrid, params: MarketParams,
                              spec: CostSpec, *,
                              max_compositions: int = 10**7
                              ) -> tuple[AllocationVector, float]:
    """Brute-force optimum: try every way of splitting k over N+1 points.

    There are C(k+N, N) compositions; instances above ``max_compositions``
    are refused with :class:`ResourceLimit`. Compositions are visited in
    ascending lexicographic order with a ``<=`` keep rule, so among exact
    ties the lexicographically largest schedule is returned — the same
    front-loading preference the dynamic program's tie rule has.
    """
    validate_problem(k, grid, params, spec)
    n = grid.n_steps
    count = math.comb(k + n, n)
    if count > max_compositions:
        raise ResourceLimit(
            f"enumeration would visit {count} schedules "
            f"(cap {max_compositions}); use the dynamic program instead")
    best_alloc = None
    best_cost = math.inf
    for tup in _compositions(k, n + 1):
        alloc = AllocationVector(tup)
        cost = expected_cost_closed_form(alloc, params, spec, grid)
        if best_alloc is None or cost <= best_cost:
            best_alloc, best_cost = alloc, cost
    return best_alloc, best_cost


def _compositions(total: int, parts: int) -> Iterator[tuple[int, ...]]:
    if parts == 1:
        yield (total,)
        return
    for first in range(total + 1):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


# ---------------------------------------------------------------------------
# tabular solver (price kept as an explicit grid state)


@dataclass(frozen=True, eq=False)
class TabularSolution:
    """Value/action tables indexed (decision point, grid price, outstanding)."""

    values: np.ndarray
    actions: np.ndarray
    x_grid: tuple[float, ...]

    def __post_init__(self):
        v = np.ascontiguousarray(np.asarray(self.values, dtype=np.float64))
        a = np.ascontiguousarray(np.asarray(self.actions, dtype=np.int64))
        v.flags.writeable = False
        a.flags.writeable = False
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "actions", a)
        object.__setattr__(self, "x_grid", tuple(float(x) for x in self.x_grid))


def solve_tabular(x_grid, k: int, grid: TimeGrid, params: MarketParams,
                  noise: NoiseModel, spec: CostSpec, *,
                  impact: Callable[[int], float] | None = None,
                  cell_budget: int = DEFAULT_TABULAR_BUDGET) -> TabularSolution:
    """Backward induction with the price as an explicit tabulated state.

    The post-trade price x * (1 + h(u) + eps) is projected onto the nearest
    grid point (exact midpoint ties resolve to the lower point). ``impact``
    is the drift law h; the default is the linear h(u) = beta*u the exact
    solver assumes, and any other callable (say h(u) = beta*u**2) may be
    passed to study laws the unit-price reduction does not cover.
    """
    problem = validate_problem(k, grid, params, spec)
    bad = noise.violations()
    xg = np.asarray(list(x_grid), dtype=np.float64)
    if xg.ndim != 1 or xg.size == 0:
        bad.append("x_grid must be a non-empty 1-D sequence")
    elif not np.all(np.isfinite(xg)) or np.any(xg <= 0):
        bad.append("x_grid prices must be positive and finite")
    elif np.any(np.diff(xg) <= 0):
        bad.append("x_grid must be strictly increasing")
    if bad:
        raise InvalidParameter(bad)
    n = grid.n_steps
    nx = xg.size
    cells = (n + 1) * nx * (k + 1)
    if cells > cell_budget:
        raise ResourceLimit(
            f"tabular solve needs {cells} cells for K={k}, N={n}, |grid|={nx} "
            f"(budget {cell_budget})")

    h = impact if impact is not None else (lambda u: params.beta * u)
    eps = noise.values
    probs = noise.probs
    drift = np.array([1.0 + h(u) for u in range(k + 1)], dtype=np.float64)
    factors = drift[:, None] + eps[None, :]            # (u, shock)
    if np.any(factors <= 0.0):
        raise NonPositivePrice(
            "a transition factor 1 + h(u) + eps is not positive on this grid")
    # proj[xi, u, j]: grid index nearest to xg[xi] * factors[u, j]
    proj = _nearest_index(xg, xg[:, None, None] * factors[None, :, :])

    values = np.empty((n + 1, nx, k + 1), dtype=np.float64)
    actions = np.zeros((n + 1, nx, k + 1), dtype=np.int64)
    r_all = np.arange(k + 1, dtype=np.float64)
    values[n] = xg[:, None] * r_all[None, :]
    actions[n] = np.arange(k + 1)[None, :]
    for step in range(n - 1, -1, -1):
        for xi in range(nx):
            x = float(xg[xi])
            values[step, xi, 0] = 0.0
            for r in range(1, k + 1):
                best_val = math.inf
                best_u = 0
                for u in range(r + 1):
                    f = stage_cost(x, u, r, step, n, spec)
                    nxt = values[step + 1, proj[xi, u, :], r - u]
                    val = float(np.dot(probs, f + nxt))
                    if val <= best_val:
                        best_val, best_u = val, u
                values[step, xi, r] = best_val
                actions[step, xi, r] = best_u
    return TabularSolution(values=values, actions=actions, x_grid=tuple(xg))


def _nearest_index(grid_arr: np.ndarray, vals: np.ndarray) -> np.ndarray:
    """Index of the grid point nearest each value; midpoints round down."""
    pos = np.searchsorted(grid_arr, vals)
    pos = np.clip(pos, 0, grid_arr.size - 1)
    lo = np.maximum(pos - 1, 0)
    d_lo = np.abs(vals - grid_arr[lo])
    d_hi = np.abs(grid_arr[pos] - vals)
    return np.where(d_lo <= d_hi, lo, pos).astype(np.int64)


# ---------------------------------------------------------------------------
# policy persistence

POLICY_HEADER = "k,r,u_opt,j_value"


def write_policy_csv(policy: PolicyTable, dest) -> None:
    """Write a policy as delimited text, one (k, r) cell per row.

    Unit-price values are serialised with %.12g — the table stores no price
    state (values scale linearly with price, so consumers multiply by their
    own x0). ``dest`` is a path or a writable text file.
    """
    own, fh = _open_for(dest, "w")
    try:
        fh.write(POLICY_HEADER + "\n")
        for i in range(policy.n_steps + 1):
            for r in range(policy.capacity + 1):
                fh.write(f"{i},{r},{int(policy.actions[i, r])},"
                         f"{policy.values[i, r]:.12g}\n")
    finally:
        if own:
            fh.close()


def read_policy_csv(source) -> PolicyTable:
    """Read a policy written by :func:`write_policy_csv` and re-validate it.

    Raises :class:`ParseError` (with the 1-based line number) for malformed
    lines, :class:`DataError` for an incomplete table and
    :class:`InvalidParameter` when the parsed table breaks the policy
    invariants.
    """
    own, fh = _open_for(source, "r")
    try:
        lines = fh.read().splitlines()
    finally:
        if own:
            fh.close()
    if not lines:
        raise DataError("policy file is empty")
    if lines[0].strip() != POLICY_HEADER:
        raise ParseError(f"expected header {POLICY_HEADER!r}, got {lines[0]!r}", line=1)
    cells = {}
    for lineno, raw in enumerate(lines[1:], start=2):
        if not raw.strip():
            continue
        parts = raw.split(",")
        if len(parts) != 4:
            raise ParseError(f"expected 4 fields, got {len(parts)}", line=lineno)
        try:
            i, r, u = int(parts[0]), int(parts[1]), int(parts[2])
            j = float(parts[3])
        except ValueError as exc:
            raise ParseError(str(exc), line=lineno) from None
        if (i, r) in cells:
            raise ParseError(f"duplicate cell (k={i}, r={r})", line=lineno)
        cells[(i, r)] = (u, j)
    if not cells:
        raise DataError("policy file has a header but no rows")
    n = max(i for i, _ in cells)
    cap = max(r for _, r in cells)
    expect = (n + 1) * (cap + 1)
    if len(cells) != expect:
        raise DataError(
            f"table is ragged: found {len(cells)} cells, "
            f"a complete ({n + 1} x {cap + 1}) table has {expect}")
    actions = np.zeros((n + 1, cap + 1), dtype=np.int64)
    values = np.zeros((n + 1, cap + 1), dtype=np.float64)
    for (i, r), (u, j) in cells.items():
        actions[i, r] = u
        values[i, r] = j
    table = PolicyTable(actions=actions, values=values)
    bad = table.violations()
    if bad:
        raise InvalidParameter(bad)
    return table


def _open_for(target, mode: str):
    if hasattr(target, "write" if "w" in mode else "read"):
        return False, target
    return True, open(target, mode, newline="")


def _fingerprint(k: int, grid: TimeGrid, params: MarketParams,
                 spec: CostSpec) -> dict:
    out = {"k": int(k), "n_steps": int(grid.n_steps),
           "horizon": float(grid.horizon), "beta": float(params.beta),
           "x0": float(params.x0), "cost": spec.variant}
    if spec.is_constrained:
        out.update(c_lower=spec.c_lower, c_upper=spec.c_upper,
                   gamma=spec.gamma, lb=spec.lb, ub=spec.ub)
    return out

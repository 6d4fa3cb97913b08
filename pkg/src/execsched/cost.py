"""Per-period purchase costs.

Costs are linear in the current price x, so every function here accepts x as
a scalar or as an ndarray of prices (one per simulated path) and broadcasts;
all other arguments are scalars. The barrier terms depend only on (u, r, k)
and are computed in scalar arithmetic, which keeps a vectorized evaluation of
one schedule across many paths bit-identical to evaluating each path alone.
"""

from __future__ import annotations

import math

import numpy as np

from .core import CostSpec, DomainError

__all__ = ["fiscal_cost", "constrained_cost", "stage_cost"]


def fiscal_cost(x, u: int):
    """Pure cash outlay: u shares at price x."""
    return x * u


def constrained_cost(x, u: int, r: int, k: int, n_steps: int, spec: CostSpec):
    """Cash outlay plus logarithmic barrier penalties on the buy fraction u/r.

    The lower barrier activates when u/r < lb with weight c_lower*(k/N)**gamma
    (rising over time: falling behind late is worse), the upper barrier when
    u/r > ub with weight c_upper*(N/k)**gamma (falling over time: a large
    burst early is worse). At k = 0 the weights are singular and the
    convention is: no lower penalty at all (deferring everything at the start
    is free), and an infinite upper penalty for any violation (a burst above
    ub*r at the very first opportunity is inadmissible).

    Defined for 0 <= u <= r, r >= 1, 0 <= k <= n_steps - 1; raises
    :class:`DomainError` outside. The result can be +inf (only via the k = 0
    convention; the barrier arguments themselves stay in (0, 1]).
    """
    if not spec.is_constrained:
        raise DomainError("constrained_cost requires a constrained cost spec")
    if r < 1:
        raise DomainError(f"constrained cost needs r >= 1 (got r={r})")
    if not 0 <= u <= r:
        raise DomainError(f"u must lie in 0..r (got u={u}, r={r})")
    if not 0 <= k <= n_steps - 1:
        raise DomainError(f"k must lie in 0..{n_steps - 1} (got k={k})")

    ratio = u / r
    viol_l = max(0.0, spec.lb - ratio)
    viol_u = max(0.0, ratio - spec.ub)
    if k == 0:
        if viol_u > 0.0:
            if isinstance(x, np.ndarray):
                return np.full_like(x, math.inf)
            return math.inf
        return x * u
    term_l = (spec.c_lower * (k / n_steps) ** spec.gamma) * math.log(1.0 - viol_l)
    term_u = (spec.c_upper * (n_steps / k) ** spec.gamma) * math.log(1.0 - viol_u)
    return (x * u - x * term_l) - x * term_u


def stage_cost(x, u: int, r: int, k: int, n_steps: int, spec: CostSpec):
    """Instantaneous cost of buying u of r outstanding shares at point k.

    Dispatches on the situation: nothing outstanding costs nothing; the
    terminal point forces u = r and charges the plain outlay x*r (no
    barriers — completion is mandatory, not discouraged); interior points
    charge the spec's variant. x may be an ndarray of prices.
    """
    if not 0 <= k <= n_steps:
        raise DomainError(f"k must lie in 0..{n_steps} (got k={k})")
    if r < 0 or not 0 <= u <= r:
        raise DomainError(f"u must lie in 0..r (got u={u}, r={r})")
    if r == 0:
        return 0.0
    if k == n_steps:
        if u != r:
            raise DomainError(f"the terminal point must clear the book (u={u}, r={r})")
        return fiscal_cost(x, u)
    if not spec.is_constrained:
        return fiscal_cost(x, u)
    return constrained_cost(x, u, r, k, n_steps, spec)

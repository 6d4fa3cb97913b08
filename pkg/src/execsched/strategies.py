"""Baseline purchase schedules to compare the dynamic program against."""

from __future__ import annotations

from .core import AllocationVector, IndexOutOfRange, InvalidParameter, _is_int

__all__ = ["bertsimas_allocation", "one_time_allocation"]


def bertsimas_allocation(k: int, n_steps: int) -> AllocationVector:
    """Equal-split schedule (the classic Bertsimas-Lo benchmark).

    Each of the N intervals buys floor(K/N) shares at its opening decision
    point; the K mod N leftover shares go one each to the earliest points.
    The terminal point buys nothing — the budget is exhausted on schedule.
    """
    _check(k, n_steps)
    q, rem = divmod(k, n_steps)
    purchases = tuple(q + 1 if i < rem else q for i in range(n_steps)) + (0,)
    return AllocationVector(purchases)


def one_time_allocation(k: int, n_steps: int, j: int) -> AllocationVector:
    """Buy the whole block at decision point j, nothing anywhere else."""
    _check(k, n_steps)
    if not _is_int(j) or not 0 <= j <= n_steps:
        raise IndexOutOfRange(f"j must lie in 0..{n_steps} (got {j!r})")
    return AllocationVector(tuple(k if i == j else 0 for i in range(n_steps + 1)))


def _check(k: int, n_steps: int) -> None:
    bad = []
    if not _is_int(k) or k < 0:
        bad.append(f"k must be a non-negative integer (got {k!r})")
    if not _is_int(n_steps) or n_steps < 1:
        bad.append(f"n_steps must be an integer >= 1 (got {n_steps!r})")
    if bad:
        raise InvalidParameter(bad)

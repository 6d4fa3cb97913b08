"""Domain types, exceptions and input validation.

Every public type here is a frozen dataclass; array-valued fields are stored
as read-only numpy arrays, so instances can be shared across threads freely.
Types report problems through a ``violations()`` method returning a list of
human-readable strings; :func:`validate_problem` aggregates the violations of
a whole problem instance into a single :class:`InvalidParameter` so a caller
sees everything that is wrong at once, not just the first issue.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

#: Hard cap on the number of shares a problem may ask for.
MAX_SHARES = 10**6
#: Hard cap on the number of trading intervals.
MAX_STEPS = 10**4

#: Tolerance for the noise-support probability sum and mean checks.
NOISE_TOL = 1e-12


# ---------------------------------------------------------------------------
# exceptions


class InvalidParameter(ValueError):
    """One or more inputs violate their documented domain.

    The message lists *all* detected violations, semicolon-separated; they are
    also available programmatically via the ``violations`` attribute.
    """

    def __init__(self, violations):
        if isinstance(violations, str):
            violations = [violations]
        self.violations = list(violations)
        super().__init__("invalid parameters: " + "; ".join(self.violations))


class NonPositivePrice(ValueError):
    """A price update produced a zero or negative price."""


class ResourceLimit(RuntimeError):
    """The requested computation exceeds the configured work budget."""


class DomainError(ValueError):
    """A value is outside the domain a function is defined on."""


class ParseError(ValueError):
    """A delimited input file is malformed.

    ``line`` is the 1-based line number (header included) of the offending
    line, or ``None`` when the problem is not attributable to a single line.
    """

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class DataError(ValueError):
    """Input data is well-formed but unusable (empty, non-positive prices...)."""


class LengthMismatch(ValueError):
    """Two sequences that must align have different lengths."""


class IndexOutOfRange(IndexError):
    """A grid index lies outside 0..N."""


# ---------------------------------------------------------------------------
# value types


@dataclass(frozen=True)
class TimeGrid:
    """Equally spaced trading times t_k = k * horizon / n_steps, k = 0..n_steps.

    ``n_steps`` is the number of intervals N; there are N + 1 decision points,
    the last of which is the forced-completion terminal.
    """

    n_steps: int
    horizon: float = 1.0

    def violations(self) -> list[str]:
        out = []
        if not _is_int(self.n_steps) or self.n_steps < 1:
            out.append(f"n_steps must be an integer >= 1 (got {self.n_steps!r})")
        elif self.n_steps > MAX_STEPS:
            out.append(f"n_steps must be <= {MAX_STEPS} (got {self.n_steps})")
        if not _is_finite(self.horizon) or self.horizon <= 0:
            out.append(f"horizon must be a positive finite number (got {self.horizon!r})")
        return out

    def times(self) -> np.ndarray:
        """All n_steps + 1 decision times; times()[k] == k * horizon / n_steps exactly."""
        k = np.arange(self.n_steps + 1, dtype=np.float64)
        return k * self.horizon / self.n_steps


@dataclass(frozen=True)
class MarketParams:
    """Market model parameters: permanent impact slope and starting price.

    ``beta`` is the per-share relative impact (dimensionless); values in
    [1e-5, 1e-4] are typical for the scale of problems this package targets.
    """

    beta: float
    x0: float = 1.0

    def violations(self) -> list[str]:
        out = []
        if not _is_finite(self.beta) or not 0.0 <= self.beta < 1.0:
            out.append(f"beta must lie in [0, 1) (got {self.beta!r})")
        if not _is_finite(self.x0) or self.x0 <= 0:
            out.append(f"x0 must be a positive finite price (got {self.x0!r})")
        return out


@dataclass(frozen=True)
class NoiseModel:
    """Finite-support distribution of the relative price shock per interval.

    ``support`` is a tuple of (value, probability) pairs. The distribution
    must be a probability distribution (positive weights summing to 1), have
    exactly zero mean (both within 1e-12), and every value must satisfy
    |value| < 0.5 so that the price multiplier 1 + beta*u + eps stays away
    from zero for the parameter ranges the solver accepts.
    """

    support: tuple[tuple[float, float], ...]

    @classmethod
    def zero(cls) -> "NoiseModel":
        """Deterministic model: no shock."""
        return cls(((0.0, 1.0),))

    @classmethod
    def two_point(cls, delta: float) -> "NoiseModel":
        """Symmetric +/- delta shock with equal weight."""
        return cls(((+delta, 0.5), (-delta, 0.5)))

    @property
    def values(self) -> np.ndarray:
        return np.array([v for v, _ in self.support], dtype=np.float64)

    @property
    def probs(self) -> np.ndarray:
        return np.array([p for _, p in self.support], dtype=np.float64)

    def mean(self) -> float:
        return float(np.dot(self.values, self.probs))

    def violations(self) -> list[str]:
        out = []
        if not self.support:
            return ["noise support must be non-empty"]
        vals, probs = self.values, self.probs
        if not np.all(np.isfinite(vals)) or not np.all(np.isfinite(probs)):
            return ["noise support contains non-finite entries"]
        if np.any(probs <= 0):
            out.append("noise probabilities must all be positive")
        if abs(float(probs.sum()) - 1.0) > NOISE_TOL:
            out.append(f"noise probabilities must sum to 1 within {NOISE_TOL} (got {float(probs.sum())!r})")
        if abs(self.mean()) > NOISE_TOL:
            out.append(f"noise mean must be 0 within {NOISE_TOL} (got {self.mean()!r})")
        if np.any(np.abs(vals) >= 0.5):
            out.append("noise values must satisfy |value| < 0.5")
        return out


@dataclass(frozen=True)
class CostSpec:
    """Which per-period cost the planner charges.

    Two variants exist. ``fiscal`` charges the pure cash outlay x*u.
    ``constrained`` adds logarithmic barrier penalties that discourage buying
    less than a fraction ``lb`` or more than a fraction ``ub`` of the
    remaining shares, with time-dependent weights c_lower*(k/N)**gamma and
    c_upper*(N/k)**gamma. Use the classmethod constructors.
    """

    variant: str
    c_lower: float | None = None
    c_upper: float | None = None
    gamma: float | None = None
    lb: float | None = None
    ub: float | None = None

    @classmethod
    def fiscal(cls) -> "CostSpec":
        return cls(variant="fiscal")

    @classmethod
    def constrained(cls, c_lower: float, c_upper: float, gamma: float,
                    lb: float, ub: float) -> "CostSpec":
        return cls(variant="constrained", c_lower=c_lower, c_upper=c_upper,
                   gamma=gamma, lb=lb, ub=ub)

    @property
    def is_constrained(self) -> bool:
        return self.variant == "constrained"

    def violations(self) -> list[str]:
        if self.variant == "fiscal":
            extras = [n for n in ("c_lower", "c_upper", "gamma", "lb", "ub")
                      if getattr(self, n) is not None]
            return [f"fiscal cost takes no penalty parameters (got {', '.join(extras)})"] if extras else []
        if self.variant != "constrained":
            return [f"unknown cost variant {self.variant!r}"]
        out = []
        for name in ("c_lower", "c_upper", "gamma", "lb", "ub"):
            v = getattr(self, name)
            if v is None or not _is_finite(v):
                out.append(f"{name} must be a finite number (got {v!r})")
        if out:
            return out
        if self.c_lower <= 0:
            out.append(f"c_lower must be > 0 (got {self.c_lower!r})")
        if self.c_upper <= 0:
            out.append(f"c_upper must be > 0 (got {self.c_upper!r})")
        if self.gamma <= 0:
            out.append(f"gamma must be > 0 (got {self.gamma!r})")
        if not 0.0 <= self.lb < 1.0:
            out.append(f"lb must lie in [0, 1) (got {self.lb!r})")
        if not 0.0 < self.ub <= 1.0:
            out.append(f"ub must lie in (0, 1] (got {self.ub!r})")
        if self.lb is not None and self.ub is not None and not self.lb < self.ub:
            out.append(f"lb must be < ub (got lb={self.lb!r}, ub={self.ub!r})")
        return out


@dataclass(frozen=True, eq=False)
class PolicyTable:
    """Optimal action and value tables on the unit-price problem.

    ``actions[k, r]`` is the optimal number of shares to buy at decision
    point k with r shares outstanding; ``values[k, r]`` is the corresponding
    minimal expected cost-to-go *per unit of current price* (scale by the
    price to get currency). Shapes are (n_steps + 1, capacity + 1). Both
    arrays are read-only.

    ``fingerprint`` records the inputs the table was solved under (informal,
    for reports and file headers); ``note`` carries solver remarks such as
    the fiscal degeneracy statement.
    """

    actions: np.ndarray
    values: np.ndarray
    fingerprint: dict | None = None
    note: str | None = None

    def __post_init__(self):
        a = np.ascontiguousarray(np.asarray(self.actions, dtype=np.int64))
        v = np.ascontiguousarray(np.asarray(self.values, dtype=np.float64))
        a.flags.writeable = False
        v.flags.writeable = False
        object.__setattr__(self, "actions", a)
        object.__setattr__(self, "values", v)

    @property
    def n_steps(self) -> int:
        return self.actions.shape[0] - 1

    @property
    def capacity(self) -> int:
        return self.actions.shape[1] - 1

    def violations(self) -> list[str]:
        out = []
        if self.actions.ndim != 2 or self.values.ndim != 2:
            return ["actions and values must be 2-D arrays"]
        if self.actions.shape != self.values.shape:
            return [f"actions shape {self.actions.shape} != values shape {self.values.shape}"]
        if self.actions.shape[0] < 2 or self.actions.shape[1] < 1:
            return [f"table must cover at least one interval (shape {self.actions.shape})"]
        n, cap = self.n_steps, self.capacity
        r = np.arange(cap + 1)
        if not np.all(np.isfinite(self.values)):
            out.append("values must be finite")
        if np.any(self.actions < 0) or np.any(self.actions > r[None, :]):
            out.append("actions must satisfy 0 <= actions[k, r] <= r")
        if not np.array_equal(self.actions[n], r):
            out.append("terminal actions must equal the outstanding count (buy everything)")
        if not np.array_equal(self.values[n], r.astype(np.float64)):
            out.append("terminal values must equal the outstanding count")
        if np.any(self.actions[:, 0] != 0) or np.any(self.values[:, 0] != 0.0):
            out.append("column r=0 must be identically zero")
        r_f = r[None, :].astype(np.float64)
        if np.any(self.values < r_f * (1.0 - 1e-11) - 1e-9):
            out.append("values must dominate the outstanding count (cost of r shares >= r at unit price)")
        return out


@dataclass(frozen=True)
class AllocationVector:
    """A purchase schedule: purchases[k] shares bought at decision point k."""

    purchases: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "purchases", tuple(int(u) for u in self.purchases))

    @property
    def total(self) -> int:
        return sum(self.purchases)

    @property
    def n_steps(self) -> int:
        return len(self.purchases) - 1

    def violations(self) -> list[str]:
        out = []
        if len(self.purchases) < 2:
            out.append("an allocation needs at least two decision points")
        if any(not _is_int(u) or u < 0 for u in self.purchases):
            out.append("purchases must all be non-negative integers")
        return out

    def __iter__(self):
        return iter(self.purchases)

    def __len__(self):
        return len(self.purchases)

    def __getitem__(self, i):
        return self.purchases[i]


@dataclass(frozen=True)
class PricePath:
    """An observed or simulated sequence of prices, optionally labelled.

    ``labels`` (when present) typically holds the dates the prices were
    recorded on and must align with ``prices`` one-to-one.
    """

    prices: tuple[float, ...]
    labels: tuple[str, ...] | None = None

    def __post_init__(self):
        object.__setattr__(self, "prices", tuple(float(p) for p in self.prices))
        if self.labels is not None:
            object.__setattr__(self, "labels", tuple(str(s) for s in self.labels))

    def violations(self) -> list[str]:
        out = []
        if not self.prices:
            out.append("price path must be non-empty")
        elif not all(_is_finite(p) and p > 0 for p in self.prices):
            out.append("prices must all be positive and finite")
        if self.labels is not None and len(self.labels) != len(self.prices):
            out.append(f"labels length {len(self.labels)} != prices length {len(self.prices)}")
        return out

    def __len__(self):
        return len(self.prices)

    def as_array(self) -> np.ndarray:
        return np.array(self.prices, dtype=np.float64)


@dataclass(frozen=True)
class Problem:
    """A validated problem instance (returned by :func:`validate_problem`)."""

    k: int
    grid: TimeGrid
    params: MarketParams
    spec: CostSpec


def validate_problem(k: int, grid: TimeGrid, params: MarketParams,
                     spec: CostSpec) -> Problem:
    """Check a whole problem instance, aggregating every violation.

    Raises :class:`InvalidParameter` listing *all* problems found; returns a
    :class:`Problem` echoing the inputs when everything is in order.
    """
    out = []
    if not _is_int(k) or k < 0:
        out.append(f"k must be a non-negative integer (got {k!r})")
    elif k > MAX_SHARES:
        out.append(f"k must be <= {MAX_SHARES} (got {k})")
    out.extend(grid.violations())
    out.extend(params.violations())
    out.extend(spec.violations())
    if out:
        raise InvalidParameter(out)
    return Problem(k=int(k), grid=grid, params=params, spec=spec)


def _is_int(x) -> bool:
    return isinstance(x, (int, np.integer)) and not isinstance(x, bool)


def _is_finite(x) -> bool:
    return isinstance(x, (int, float, np.integer, np.floating)) and np.isfinite(x)

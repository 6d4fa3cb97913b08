"""Price dynamics and reproducible noise streams.

The primary model is geometric with permanent relative impact:

    x_{k+1} = x_k * (1 + beta * u_k + eps_k)

Shocks eps_k are i.i.d. draws from a finite zero-mean support. Because the
multiplier is bounded below by 1 - |eps| > 0.5 for admissible parameters,
geometric prices stay positive; the arithmetic alternative (kept for
comparison) adds beta*u + eta*eps to the price level and can run a price
straight through zero on a long unlucky streak — callers comparing the two
models should expect that and it is deliberately not masked here.

Randomness contract: all draws come from numpy's Philox (4x64-10) counter
bit generator keyed as seed * 2**64 + stream. Streams partition work (one
per Monte-Carlo batch) so results never depend on how many workers consumed
them. A uniform draw v maps to support entry j iff cum[j-1] <= v < cum[j],
cum being the running sum of the probabilities in listed order.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import (AllocationVector, InvalidParameter, MarketParams,
                   NoiseModel, NonPositivePrice, PricePath, _is_finite)

__all__ = ["GENERATOR_NAME", "AbmParams", "make_generator", "draw_noise",
           "step_geometric", "step_arithmetic", "simulate_path",
           "simulate_batch"]

#: The bit-generator identity every stream in this package derives from.
GENERATOR_NAME = "philox4x64-10"

_KEY_BOUND = 2**64


@dataclass(frozen=True)
class AbmParams:
    """Arithmetic-model extras: absolute noise scale eta (price units)."""

    eta: float

    def violations(self) -> list[str]:
        if not _is_finite(self.eta) or self.eta < 0:
            return [f"eta must be a non-negative finite number (got {self.eta!r})"]
        return []


def make_generator(seed: int, stream: int = 0) -> np.random.Generator:
    """Keyed Philox generator; (seed, stream) fully determines the bit stream."""
    bad = [f"{name} must be an integer in [0, 2**64) (got {val!r})"
           for name, val in (("seed", seed), ("stream", stream))
           if not isinstance(val, (int, np.integer)) or not 0 <= val < _KEY_BOUND]
    if bad:
        raise InvalidParameter(bad)
    return np.random.Generator(np.random.Philox(key=int(seed) * _KEY_BOUND + int(stream)))


def draw_noise(noise: NoiseModel, gen: np.random.Generator, size) -> np.ndarray:
    """Sample shocks by inverting the cumulative weights of the support."""
    cum = np.cumsum(noise.probs)
    idx = np.searchsorted(cum, gen.random(size), side="right")
    idx = np.minimum(idx, len(noise.support) - 1)
    return noise.values[idx]


def step_geometric(x: float, u: int, eps: float, beta: float) -> float:
    """One geometric update x * (1 + beta*u + eps); x must be positive."""
    factor = 1.0 + beta * u + eps
    if factor <= 0.0:
        raise NonPositivePrice(
            f"geometric factor 1 + beta*u + eps = {factor!r} is not positive")
    return x * factor

def step_arithmetic(x: float, u: int, eps: float, beta: float,
                    abm: AbmParams) -> float:
    """One arithmetic update x + beta*u + eta*eps.

    No positivity guard: the additive form has no floor and the returned
    price can be zero or negative. That failure mode is why the geometric
    model is the default everywhere else in this package.
    """
    return x + beta * u + abm.eta * eps


def simulate_path(k: int, alloc: AllocationVector, params: MarketParams,
                  noise: NoiseModel, seed: int, *, stream: int = 0) -> PricePath:
    """Simulate one geometric price path under a fixed schedule.

    The path has len(alloc) prices: the opening price params.x0 plus one
    update per interval. ``k`` states the intended budget and must match the
    schedule's total — passing both catches a mismatched schedule early.
    """
    bad = alloc.violations() + params.violations() + noise.violations()
    if alloc.total != k:
        bad.append(f"schedule sums to {alloc.total}, not the stated budget {k}")
    if bad:
        raise InvalidParameter(bad)
    gen = make_generator(seed, stream)
    eps = draw_noise(noise, gen, alloc.n_steps)
    prices = [params.x0]
    for u, e in zip(alloc.purchases[:-1], eps):
        prices.append(step_geometric(prices[-1], u, float(e), params.beta))
    return PricePath(prices=tuple(prices))


def simulate_batch(alloc: AllocationVector, params: MarketParams,
                   noise: NoiseModel, seed: int, stream: int,
                   n_paths: int) -> np.ndarray:
    """Simulate n_paths geometric paths at once; returns (n_paths, N+1).

    Row i of the result equals simulate_path(..., seed, stream=stream) would
    for the i-th block of the stream's uniforms: the batch draws its whole
    (n_paths, N) shock matrix in one call, row-major, so the batch content
    depends only on (seed, stream, n_paths) and never on threading.
    """
    n = alloc.n_steps
    gen = make_generator(seed, stream)
    eps = draw_noise(noise, gen, (n_paths, n))
    u = np.asarray(alloc.purchases[:-1], dtype=np.float64)
    factors = 1.0 + params.beta * u[None, :] + eps
    if np.any(factors <= 0.0):
        raise NonPositivePrice("a geometric factor 1 + beta*u + eps is not positive")
    prices = np.empty((n_paths, n + 1), dtype=np.float64)
    prices[:, 0] = params.x0
    for j in range(n):
        prices[:, j + 1] = prices[:, j] * factors[:, j]
    return prices

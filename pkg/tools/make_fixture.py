"""Regenerate the bundled synthetic price fixture and its expected costs.

The fixture is a 100-row `date,open` CSV whose prices walk on a 0.25 tick
grid. Quarter ticks are exactly representable in binary floating point, and
the products and partial sums a backtest forms from them stay exactly
representable too, so the expected-cost file written next to the fixture is
exact to the last bit — tests compare with `==`, no tolerances.

Run from the repository root:

    python3 tools/make_fixture.py

Both outputs are committed; regeneration is only needed if the recipe here
changes, and is deterministic (fixed Philox key).
"""

from __future__ import annotations

import datetime
from fractions import Fraction
from pathlib import Path

import numpy as np

ROOT = Path(__file__).resolve().parent.parent
OUT_CSV = ROOT / "data" / "synthetic_opens.csv"
OUT_EXPECTED = ROOT / "data" / "synthetic_opens_expected.csv"

N_ROWS = 100
START_PRICE = Fraction(100)
TICK = Fraction(1, 4)
FLOOR = Fraction(80)
KEY = 20160201
K = 1000
N = 99  # intervals for the bundled backtest example (100 prices)


def business_days(start: datetime.date, count: int):
    day = start
    out = []
    while len(out) < count:
        if day.weekday() < 5:
            out.append(day)
        day += datetime.timedelta(days=1)
    return out


def make_prices() -> list[Fraction]:
    gen = np.random.Generator(np.random.Philox(key=KEY))
    price = START_PRICE
    prices = [price]
    while len(prices) < N_ROWS:
        ticks = int(round(gen.normal(0.0, 3.0)))
        price = max(FLOOR, price + TICK * ticks)
        prices.append(price)
    return prices


def expected_rows(prices: list[Fraction]):
    """Exact strategy costs, the long way (per-term products, Fractions)."""
    q, rem = divmod(K, N)
    bertsimas = [q + 1 if i < rem else q for i in range(N)] + [0]
    cost_b = sum(Fraction(u) * p for u, p in zip(bertsimas, prices))
    mid = (N + 1) // 2
    cost_ot = Fraction(K) * prices[mid]
    return [("bertsimas", cost_b), (f"onetime@{mid}", cost_ot)]


def main() -> None:
    prices = make_prices()
    days = business_days(datetime.date(2016, 2, 1), N_ROWS)
    OUT_CSV.parent.mkdir(parents=True, exist_ok=True)
    with OUT_CSV.open("w", newline="") as fh:
        fh.write("date,open\n")
        for day, price in zip(days, prices):
            fh.write(f"{day.isoformat()},{float(price):.2f}\n")
    with OUT_EXPECTED.open("w", newline="") as fh:
        fh.write("k,n,strategy,total_cost\n")
        for name, cost in expected_rows(prices):
            assert cost.denominator in (1, 2, 4), cost
            fh.write(f"{K},{N},{name},{float(cost):.2f}\n")
    print(f"wrote {OUT_CSV} and {OUT_EXPECTED}")


if __name__ == "__main__":
    main()

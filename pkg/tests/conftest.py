"""Shared constants and fixtures for the test suite.

REFERENCE_BLOCKS holds frozen known-good optimal schedules for the canonical
parameter set (K=1000, beta=5e-5, c_lower=1000, c_upper=10, gamma=2,
lb=0.2, ub=0.6). Each block lists the purchases at decision points 1..N; the
optimal schedule defers at point 0 (deferring there is free and strictly
better), so the full rollout is [0] + block.
"""

from pathlib import Path

import pytest

from execsched import CostSpec, MarketParams, TimeGrid

DATA_DIR = Path(__file__).resolve().parent.parent / "data"
FIXTURE_CSV = DATA_DIR / "synthetic_opens.csv"
FIXTURE_EXPECTED = DATA_DIR / "synthetic_opens_expected.csv"

REFERENCE_K = 1000
REFERENCE_BETA = 5e-5

REFERENCE_BLOCKS = {
    10: [600, 240, 96, 38, 15, 6, 1, 2, 1, 1],
    30: [0, 600, 110, 58, 47, 37, 30, 24, 19, 15,
         12, 10, 8, 6, 5, 4, 3, 3, 2, 2,
         1, 1, 1, 1, 1, 0, 0, 0, 0, 0],
    50: [0, 0, 0, 600, 39, 72, 58, 46, 37, 30,
         24, 19, 15, 12, 10, 8, 6, 5, 4, 3,
         3, 2, 2, 1, 1, 1, 1, 1, 0, 0] + [0] * 20,
    100: [0] * 9 + [119,
          176, 141, 113, 90, 72, 58, 46, 37, 30, 24,
          19, 15, 12, 10, 8, 6, 5, 4, 3, 3,
          2, 2, 1, 1, 1, 1, 1] + [0] * 63,
}


def reference_spec() -> CostSpec:
    return CostSpec.constrained(c_lower=1000.0, c_upper=10.0, gamma=2.0,
                                lb=0.2, ub=0.6)


def reference_market() -> MarketParams:
    return MarketParams(beta=REFERENCE_BETA, x0=1.0)


@pytest.fixture
def ref_spec():
    return reference_spec()


@pytest.fixture
def ref_market():
    return reference_market()


@pytest.fixture
def grid10():
    return TimeGrid(10)

"""Cost-optimal execution scheduling under geometric price impact.

The problem: acquire K shares over N+1 decision points while your own buying
pushes the price up by a factor (1 + beta*u + noise) per interval. The cost
of a period is linear in the price, which collapses the stochastic dynamic
program to a unit-price table whose optimal actions do not depend on the
price observed — solved exactly by backward induction, then rolled out into
a concrete schedule, benchmarked against classic baselines, and backtested
on recorded prices.
"""

from .core import (AllocationVector, CostSpec, DataError, DomainError,
                   IndexOutOfRange, InvalidParameter, LengthMismatch,
                   MarketParams, NoiseModel, NonPositivePrice, ParseError,
                   PolicyTable, PricePath, Problem, ResourceLimit, TimeGrid,
                   validate_problem)
from .cost import constrained_cost, fiscal_cost, stage_cost
from .evaluation import (BacktestReport, McEstimate, compare, execute_on_path,
                         format_report, load_prices, mc_expected_cost,
                         write_report_csv)
from .price_model import (GENERATOR_NAME, AbmParams, draw_noise, make_generator,
                          simulate_batch, simulate_path, step_arithmetic,
                          step_geometric)
from .solver import (TabularSolution, enumerate_all_allocations,
                     expected_cost_closed_form, read_policy_csv, rollout,
                     solve_constrained, solve_fiscal, solve_tabular,
                     write_policy_csv)
from .strategies import bertsimas_allocation, one_time_allocation

__version__ = "0.1.0"

__all__ = [
    "AllocationVector", "CostSpec", "DataError", "DomainError",
    "IndexOutOfRange", "InvalidParameter", "LengthMismatch", "MarketParams",
    "NoiseModel", "NonPositivePrice", "ParseError", "PolicyTable", "PricePath",
    "Problem", "ResourceLimit", "TimeGrid", "validate_problem",
    "constrained_cost", "fiscal_cost", "stage_cost",
    "BacktestReport", "McEstimate", "compare", "execute_on_path",
    "format_report", "load_prices", "mc_expected_cost", "write_report_csv",
    "GENERATOR_NAME", "AbmParams", "draw_noise", "make_generator",
    "simulate_batch", "simulate_path", "step_arithmetic", "step_geometric",
    "TabularSolution", "enumerate_all_allocations", "expected_cost_closed_form",
    "read_policy_csv", "rollout", "solve_constrained", "solve_fiscal",
    "solve_tabular", "write_policy_csv",
    "bertsimas_allocation", "one_time_allocation",
    "__version__",
]

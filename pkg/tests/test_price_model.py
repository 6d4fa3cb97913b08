"""Price dynamics and randomness-contract tests.

The randomness contract is pinned hard: Philox 4x64-10 keyed
seed * 2**64 + stream, uniforms inverted through the cumulative support
weights with right-closed bins. Several tests below re-derive paths from
that contract with independent code and demand bitwise agreement.
"""

import numpy as np
import pytest

from execsched import (AbmParams, AllocationVector, InvalidParameter,
                       MarketParams, NoiseModel, NonPositivePrice, draw_noise,
                       make_generator, simulate_batch, simulate_path,
                       step_arithmetic, step_geometric)
from execsched.price_model import GENERATOR_NAME


def test_generator_identity():
    assert GENERATOR_NAME == "philox4x64-10"
    ours = make_generator(5, 7).random(16)
    raw = np.random.Generator(np.random.Philox(key=5 * 2**64 + 7)).random(16)
    assert np.array_equal(ours, raw)


def test_generator_streams_differ():
    a = make_generator(5, 0).random(8)
    b = make_generator(5, 1).random(8)
    c = make_generator(6, 0).random(8)
    assert not np.array_equal(a, b)
    assert not np.array_equal(a, c)


@pytest.mark.parametrize("seed,stream", [(-1, 0), (0, -1), (2**64, 0),
                                         (0, 2**64), (1.5, 0), ("3", 0)])
def test_generator_rejects_bad_keys(seed, stream):
    with pytest.raises(InvalidParameter):
        make_generator(seed, stream)


class _FakeGen:
    """Duck-typed stand-in feeding preset uniforms to draw_noise."""

    def __init__(self, uniforms):
        self._u = np.asarray(uniforms, dtype=np.float64)

    def random(self, size):
        assert np.prod(size) == self._u.size
        return self._u.reshape(size)


def test_draw_noise_bin_edges():
    # support cum weights [0.25, 0.75, 1.0]; bins are right-closed:
    # value j is drawn iff cum[j-1] <= v < cum[j].
    noise = NoiseModel(((-0.01, 0.25), (0.0, 0.5), (+0.01, 0.25)))
    fake = _FakeGen([0.0, 0.25, 0.7499, 0.75, 0.9999])
    got = draw_noise(noise, fake, 5)
    assert got.tolist() == [-0.01, 0.0, 0.0, 0.01, 0.01]


def test_draw_noise_matches_probabilities():
    noise = NoiseModel(((-0.02, 0.25), (0.0, 0.5), (+0.02, 0.25)))
    eps = draw_noise(noise, make_generator(11), 200_000)
    freq = [float(np.mean(eps == v)) for v in (-0.02, 0.0, 0.02)]
    assert freq == pytest.approx([0.25, 0.5, 0.25], abs=5e-3)


def test_step_geometric_hand_value():
    # 100 * (1 + 1e-4*200 + 0) = 100 * 1.02 == 102.0 exactly in binary64.
    assert step_geometric(100.0, 200, 0.0, 1e-4) == 102.0


def test_step_geometric_rejects_collapse():
    with pytest.raises(NonPositivePrice):
        step_geometric(100.0, 0, -1.5, 0.0)
    with pytest.raises(NonPositivePrice):
        step_geometric(100.0, 0, -1.0, 0.0)


def test_step_arithmetic_has_no_floor():
    abm = AbmParams(eta=25.0)
    got = step_arithmetic(1.0, 0, -0.05, 5e-5, abm)
    assert got == 1.0 + 25.0 * -0.05   # -0.25: negative, returned as-is
    assert got < 0.0


def test_arithmetic_walk_goes_nonpositive():
    # Frozen demonstration of the additive model's failure mode: with no
    # purchases, eta=1 and +/-5% shocks the level is a simple random walk
    # of step 0.05 started at 1.0 — seed 0 first touches <= 0 at step 220.
    noise = NoiseModel.two_point(0.05)
    eps = draw_noise(noise, make_generator(0), 10_000)
    abm = AbmParams(eta=1.0)
    x = 1.0
    first = None
    for i, e in enumerate(eps, start=1):
        x = step_arithmetic(x, 0, float(e), 5e-5, abm)
        if x <= 0.0:
            first = i
            break
    assert first == 220


def test_abm_params_validation():
    assert AbmParams(eta=0.0).violations() == []
    assert AbmParams(eta=-1.0).violations()
    assert AbmParams(eta=float("nan")).violations()


def test_simulate_path_zero_noise():
    alloc = AllocationVector((200, 100, 0))
    params = MarketParams(beta=1e-4, x0=100.0)
    path = simulate_path(300, alloc, params, NoiseModel.zero(), seed=0)
    assert len(path) == 3
    assert path.prices[0] == 100.0
    assert path.prices[1] == 102.0          # 100 * 1.02 exactly
    assert path.prices[2] == 102.0 * 1.01   # (1 + 1e-4*100)


def test_simulate_path_matches_contract():
    # Independent transliteration of the documented randomness contract.
    alloc = AllocationVector((3, 2, 0, 5, 0))
    params = MarketParams(beta=2e-3, x0=50.0)
    noise = NoiseModel(((-0.04, 0.25), (0.0, 0.5), (+0.04, 0.25)))
    seed, stream = 42, 3

    gen = np.random.Generator(np.random.Philox(key=seed * 2**64 + stream))
    cum = np.cumsum([0.25, 0.5, 0.25])
    vals = np.array([-0.04, 0.0, 0.04])
    idx = np.minimum(np.searchsorted(cum, gen.random(4), side="right"), 2)
    expect = [50.0]
    for u, e in zip((3, 2, 0, 5), vals[idx]):
        expect.append(expect[-1] * (1.0 + 2e-3 * u + float(e)))

    path = simulate_path(10, alloc, params, noise, seed, stream=stream)
    assert list(path.prices) == expect


def test_simulate_path_is_deterministic():
    alloc = AllocationVector((1, 2, 3, 0))
    params = MarketParams(beta=1e-4, x0=10.0)
    noise = NoiseModel.two_point(0.01)
    a = simulate_path(6, alloc, params, noise, seed=9)
    b = simulate_path(6, alloc, params, noise, seed=9)
    c = simulate_path(6, alloc, params, noise, seed=10)
    assert a.prices == b.prices
    assert a.prices != c.prices


def test_simulate_path_validates_budget():
    alloc = AllocationVector((1, 2, 3, 0))
    params = MarketParams(beta=1e-4, x0=10.0)
    with pytest.raises(InvalidParameter, match="stated budget"):
        simulate_path(7, alloc, params, NoiseModel.zero(), seed=0)
    with pytest.raises(InvalidParameter):
        simulate_path(6, alloc, MarketParams(beta=-0.5, x0=10.0),
                      NoiseModel.zero(), seed=0)


def test_simulate_batch_first_row_equals_single_path():
    alloc = AllocationVector((4, 0, 2, 1, 0))
    params = MarketParams(beta=5e-5, x0=100.0)
    noise = NoiseModel.two_point(0.01)
    batch = simulate_batch(alloc, params, noise, seed=123, stream=2, n_paths=7)
    single = simulate_path(7, alloc, params, noise, seed=123, stream=2)
    assert batch.shape == (7, 5)
    assert batch[0].tolist() == list(single.prices)


def test_simulate_batch_zero_noise_rows_identical():
    alloc = AllocationVector((4, 0, 2, 1, 0))
    params = MarketParams(beta=5e-5, x0=100.0)
    batch = simulate_batch(alloc, params, NoiseModel.zero(), seed=0, stream=0,
                           n_paths=5)
    assert np.all(batch == batch[0])
    assert np.all(batch[:, 0] == 100.0)
    assert np.all(np.diff(batch[0]) >= 0.0)   # impact only: non-decreasing

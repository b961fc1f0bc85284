from __future__ import annotations

import math
import random

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from mifstream.algorithms import (
    BitCost,
    DeterministicMif,
    IntervalMif,
    OnTheFlyMif,
    bit_cost,
    ceil_log2,
    intervals_init,
    long_regime_build,
    long_regime_copies,
    on_the_fly_query,
    preset_params,
    static_build,
    static_copies,
)
from mifstream.sampler import SketchL1Sampler
from mifstream.stream import FAIL, Item, ItemRangeError, missing_items_oracle


def test_static_copy_counts():
    assert static_copies(0.05) == 13
    assert 0.75**13 <= 0.025 < 0.75**12
    alg = static_build(10, 0.05)
    assert alg.m == 13
    assert alg.delta2 == pytest.approx(0.05 / 26)
    # the formula floors at ceil(ln 2 / ln(4/3)) = 3 as delta approaches 1
    assert static_copies(0.999999) == 3
    with pytest.raises(ValueError):
        static_copies(1.0)
    with pytest.raises(ValueError):
        static_copies(0.0)


def test_long_regime_copy_counts():
    assert long_regime_copies(10, 0.1) == 120
    alg = long_regime_build(100, 10, 0.1)
    assert alg.m == 120
    assert alg.delta2 == pytest.approx(0.1 / 240)
    assert long_regime_copies(1, 0.05) > static_copies(0.05)
    with pytest.raises(ValueError):
        long_regime_build(10, 11, 0.1)
    with pytest.raises(ValueError):
        long_regime_build(10, 0, 0.1)


@pytest.mark.parametrize("kind", ["exact", "sketch"])
def test_static_update_represents_offset_vector(kind):
    alg = static_build(4, 0.3, kind, seed=1)
    for item in (1, 2, 2):
        alg.update(item)
    if kind == "exact":
        assert alg.copies[0].frequency_vector().tolist() == [0, 1, -1, -1]
    else:
        for sampler in alg.copies:
            ref = SketchL1Sampler(4, sampler.params, seed=sampler.seed)
            for item in (1, 2, 2):
                ref.ingest(item, 1)
            for item in range(1, 5):
                ref.ingest(item, -1)
            assert np.array_equal(ref.tables, sampler.tables)
    with pytest.raises(ItemRangeError):
        alg.update(5)


def test_static_exact_duplicate_heavy_stream():
    alg = static_build(4, 0.3)
    for item in (3, 3, 3):
        alg.update(item)
    assert alg.copies[0].frequency_vector().tolist() == [-1, -1, 2, -1]


def test_static_single_copy_distribution():
    counts = {3: 0, 4: 0, "fail": 0}
    for seed in range(6000):
        alg = static_build(4, 0.5, seed=seed, m=1)
        for item in (1, 2, 2):
            alg.update(item)
        out = alg.query()
        counts["fail" if out is FAIL else out.item] += 1
    for key in counts:
        assert counts[key] / 6000 == pytest.approx(1 / 3, abs=0.03)


def test_static_empty_stream_never_fails():
    seen = set()
    for seed in range(400):
        out = static_build(4, 0.5, seed=seed, m=1).query()
        assert isinstance(out, Item)
        seen.add(out.item)
    assert seen == {1, 2, 3, 4}


def test_static_full_coverage_fails():
    alg = static_build(4, 0.1)
    for item in (1, 2, 3, 4):
        alg.update(item)
    assert alg.query() is FAIL


def test_static_exact_is_zero_error_on_random_streams():
    rng = random.Random(0)
    answered = 0
    for trial in range(10_000):
        n = rng.randint(1, 64)
        stream = [rng.randint(1, n) for _ in range(rng.randint(0, n))]
        alg = static_build(n, 0.5, seed=trial, m=2)
        for item in stream:
            alg.update(item)
        out = alg.query()
        if isinstance(out, Item):
            answered += 1
            assert out.estimate == -1
            assert out.item in missing_items_oracle(n, stream)
    assert answered > 5000


@pytest.mark.parametrize(
    "n,stream",
    [(32, list(range(1, 32))), (32, [1] * 31), (20, [i % 10 + 1 for i in range(19)]), (8, [1, 2, 2, 3, 3, 3])],
)
def test_single_copy_success_at_least_half(n, stream):
    ok = 0
    trials = 10_000
    alg = static_build(n, 0.5, seed=7, m=1)
    for item in stream:
        alg.update(item)
    rng = alg.rngs[0]
    sampler = alg.copies[0]
    for _ in range(trials):
        out = sampler.sample(rng)
        ok += isinstance(out, Item) and out.estimate < 0
    assert ok / trials >= 0.48


def test_amplification_decreases_with_copies():
    n, stream = 10, [1, 1, 1, 1, 1, 1, 1, 1, 2]
    rates = []
    for m in (1, 2, 4, 8):
        fails = 0
        for seed in range(3000):
            alg = static_build(n, 0.5, seed=seed, m=m)
            for item in stream:
                alg.update(item)
            fails += alg.query() is FAIL
        rates.append(fails / 3000)
    assert rates == sorted(rates, reverse=True)
    # per-copy success here is 8/16 = 1/2
    for m, rate in zip((1, 2, 4, 8), rates):
        assert rate <= 0.5**m + 3 * math.sqrt(0.25 / 3000)


def test_sketch_static_rarely_errs():
    wrong = answered = 0
    for seed in range(100):
        alg = static_build(64, 0.05, "sketch", seed=seed)
        stream = random.Random(seed).choices(range(1, 65), k=40)
        for item in stream:
            alg.update(item)
        out = alg.query()
        if isinstance(out, Item):
            answered += 1
            wrong += out.item not in missing_items_oracle(64, stream)
    assert answered >= 95
    assert wrong <= 2


def test_static_bit_cost_charges_every_copy():
    alg = static_build(10, 0.05)
    assert alg.bit_cost() == BitCost(64 * 13, 10 * 64 * 13)
    sk = static_build(10, 0.05, "sketch")
    assert sk.bit_cost().state_bits == 13 * sk.copies[0].bits()


def run_det(h, stream):
    alg = DeterministicMif(n=h + 5, ell=h - 1)
    for item in stream:
        alg.update(item)
    return alg.query()


def test_deterministic_examples():
    assert run_det(4, [2, 4, 4]) == Item(1, -1)
    assert run_det(4, [1, 2, 3]) == Item(4, -1)
    assert run_det(4, []) == Item(1, -1)
    assert run_det(4, [1, 2, 3, 4]) is FAIL
    assert DeterministicMif(100, 3).bit_cost() == BitCost(0, 4)
    assert DeterministicMif(3, 10).h == 3


@given(st.integers(1, 30).flatmap(lambda h: st.lists(st.integers(1, h + 3), max_size=h - 1).map(lambda s: (h, s))))
def test_deterministic_never_fails_short_streams(case):
    h, stream = case
    out = run_det(h, stream)
    assert isinstance(out, Item) and out.item not in stream and out.item <= h


def test_on_the_fly():
    rng = random.Random(0)
    assert {on_the_fly_query(1, rng) for _ in range(20)} == {1}
    draws = [on_the_fly_query(10, rng) for _ in range(20000)]
    assert set(draws) == set(range(1, 11))
    assert all(abs(draws.count(i) / 20000 - 0.1) < 0.015 for i in range(1, 11))
    alg = OnTheFlyMif(10_000, seed=3)
    assert alg.bit_cost() == BitCost(14, 0)
    with pytest.raises(ValueError):
        on_the_fly_query(0, rng)


def test_on_the_fly_bound_small():
    # n=10, ell=3: game fails with probability at most 12/20
    fails = 0
    for seed in range(5000):
        alg = OnTheFlyMif(10, seed)
        rng = random.Random(seed + 10**6)
        seen = set()
        for _ in range(3):
            item = rng.randint(1, 10)
            seen.add(item)
            alg.update(item)
            if alg.query().item in seen:
                fails += 1
                break
    assert fails / 5000 <= 0.6


class FixedRng:
    def __init__(self, picks):
        self.picks = picks

    def sample(self, population, k):
        return list(self.picks)


def test_intervals_init_examples():
    alg = intervals_init(8, 2, 4, random.Random(5))
    assert sorted(alg.tracked) == [1, 2, 3, 4]
    alg = intervals_init(8, 2, 2, FixedRng([1, 3]))
    assert alg.tracked == [1, 3]
    assert alg.curr == 1
    assert list(alg.L) == [1, 0]
    assert list(alg.X) == [0, 0]
    assert alg.bit_cost() == BitCost(4, 6)
    assert alg.bit_cost().total_bits == 10
    with pytest.raises(ValueError):
        intervals_init(8, 2, 5, random.Random(0))
    with pytest.raises(ValueError):
        intervals_init(8, 0, 1, random.Random(0))


def test_intervals_update_walkthrough():
    alg = IntervalMif(8, 2, 2, [1, 3])
    alg.update(5)
    assert (alg.curr, list(alg.L), list(alg.X)) == (3, [1, 1], [1, 0])
    assert alg.query() == Item(6, -1)
    alg.update(8)
    assert (alg.curr, list(alg.L), list(alg.X)) == (3, [1, 1], [1, 0])
    alg.update(6)
    assert list(alg.X) == [1, 1]
    assert alg.query() is FAIL


def test_intervals_query_adopts_next_tracked():
    alg = IntervalMif(8, 2, 2, [1, 3])
    alg.update(1)
    alg.update(2)
    assert (alg.curr, list(alg.X), list(alg.L)) == (1, [1, 1], [1, 0])
    assert alg.query() == Item(5, -1)
    assert (alg.curr, list(alg.X)) == (3, [1, 0])


def test_intervals_padding_never_reported():
    alg = IntervalMif(7, 3, 1, [3])  # I_3 = {7, 8, 9}; 8 and 9 do not exist
    assert alg.query() == Item(7, -1)
    alg.update(7)
    assert alg.query() is FAIL


@settings(max_examples=200, deadline=None)
@given(
    st.integers(1, 40).flatmap(
        lambda n: st.tuples(
            st.just(n),
            st.integers(1, n),
            st.lists(st.integers(1, n), max_size=3 * n),
            st.integers(0, 2**32),
        )
    )
)
def test_intervals_zero_error_and_locality(case):
    n, alpha, stream, seed = case
    r = -(-n // alpha)
    rng = random.Random(seed)
    alg = intervals_init(n, alpha, rng.randint(1, r), rng)
    seen = set()
    for item in stream:
        alg.update(item)
        seen.add(item)
        out = alg.query()
        if isinstance(out, Item):
            assert out.item not in seen
            assert alg.interval_of(out.item) == alg.curr


def test_preset_params():
    assert preset_params(2**20, 256) == (16, 16)
    assert preset_params(10**6, 10**5) == (3, 160_000)
    # beta is capped by the number of intervals
    assert preset_params(1000, 500) == (1, 1000)
    assert preset_params(10, 1) == (1, 1)
    with pytest.raises(ValueError):
        preset_params(10, 11)


def test_interval_bit_cost_examples():
    alg = IntervalMif(2**20, 64, 64, list(range(1, 65)))
    cost = bit_cost(alg)
    assert cost == BitCost(896, 142)
    assert cost.total_bits == 1038
    assert bit_cost(DeterministicMif(10, 3)).total_bits == 4


def test_ceil_log2():
    assert [ceil_log2(x) for x in (1, 2, 3, 4, 5, 16384)] == [0, 1, 2, 2, 3, 14]

"""Missing-item-finding (MIF) algorithms.

All of them speak the same streaming interface:

    alg.update(item)    # item in [1, n]
    alg.query()         # -> Item | FAIL
    alg.bit_cost()      # -> BitCost

``StaticMif``
    Parallel copies of an L1 sampler over ``f = counts - 1``; a query reports
    the first copy whose sample carries a negative estimate. Built by
    :func:`static_build` (stream shorter than the universe) or
    :func:`long_regime_build` (stream of length ``n + k``).
``DeterministicMif``
    Bitmap over ``[min(ell + 1, n)]``; reports the smallest unused id.
``OnTheFlyMif``
    Fresh uniform draw every turn, nothing stored.
``IntervalMif``
    Random-start, zero-error interval tracker: ``beta`` secret intervals of
    length ``alpha``; only the current interval's usage bitmap is kept.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass

import numpy as np

from .sampler import ExactL1Sampler, SamplerParams, SketchL1Sampler
from .seeding import derive_seed
from .stream import FAIL, Item, QueryResult, check_item

SAMPLER_KINDS = ("exact", "sketch")


@dataclass(frozen=True)
class BitCost:
    random_bits: int
    state_bits: int

    @property
    def total_bits(self) -> int:
        return self.random_bits + self.state_bits


def ceil_log2(x: int) -> int:
    """Bits needed to index ``x`` values; 0 for ``x <= 1``."""
    return (x - 1).bit_length() if x > 1 else 0


# --- sampler-based algorithms ---------------------------------------------


def static_copies(delta: float) -> int:
    """Copies needed so that ``(3/4)^m <= delta/2``."""
    if not 0 < delta < 1:
        raise ValueError(f"delta must lie in (0, 1), got {delta}")
    return max(1, math.ceil(math.log(2 / delta) / math.log(4 / 3)))


def long_regime_copies(k: int, delta: float) -> int:
    """Copies needed so that ``(1 - 1/(k+2))^m <= delta/2``."""
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    if not 0 < delta < 1:
        raise ValueError(f"delta must lie in (0, 1), got {delta}")
    return max(1, math.ceil(4 * k * math.log(2 / delta)))


class StaticMif:
    """``m`` parallel copies of the sampler-based missing-item finder.

    Each copy starts from ``f_i = -1`` for every item and ingests ``(i, +1)``
    per stream item, so an item is unseen iff its coordinate is negative.

    With the exact sampler every copy would hold the same vector (the state
    is a deterministic function of the stream), so the copies share a single
    sampler and differ only in their sampling coins. ``bit_cost`` still
    charges ``m`` independent copies.
    """

    def __init__(
        self,
        n: int,
        m: int,
        sampler_kind: str = "exact",
        delta2: float = 0.01,
        seed: int = 0,
        sketch_options: dict | None = None,
    ):
        if m < 1:
            raise ValueError(f"need at least one copy, got m={m}")
        if sampler_kind not in SAMPLER_KINDS:
            raise ValueError(f"unknown sampler kind {sampler_kind!r}")
        self.n = n
        self.m = m
        self.sampler_kind = sampler_kind
        self.params = SamplerParams(v=0.25, epsilon=0.25, delta1=0.25, delta2=delta2)
        self.rngs = [random.Random(derive_seed(seed, 1, j)) for j in range(m)]
        if sampler_kind == "exact":
            shared = ExactL1Sampler(n, offset=True)
            self.copies = [shared] * m
            self._distinct = [shared]
        else:
            opts = sketch_options or {}
            self.copies = [
                SketchL1Sampler(n, self.params, seed=derive_seed(seed, 2, j), offset=True, **opts)
                for j in range(m)
            ]
            self._distinct = self.copies

    @property
    def delta2(self) -> float:
        return self.params.delta2

    def update(self, item: int) -> None:
        check_item(item, self.n)
        for sampler in self._distinct:
            sampler.ingest(item, 1)

    def query(self) -> QueryResult:
        for sampler, rng in zip(self.copies, self.rngs):
            out = sampler.sample(rng)
            if isinstance(out, Item) and out.estimate < 0:
                return out
        return FAIL

    def bit_cost(self) -> BitCost:
        per_copy = self.copies[0].bits()
        return BitCost(random_bits=64 * self.m, state_bits=per_copy * self.m)


def static_build(
    n: int, delta: float, sampler_kind: str = "exact", seed: int = 0, m: int | None = None, **kw
) -> StaticMif:
    """Amplified finder for streams shorter than the universe.

    ``m`` defaults to ``ceil(ln(2/delta) / ln(4/3))`` and the per-copy
    estimate failure budget to ``delta / (2m)``.
    """
    copies = static_copies(delta) if m is None else m
    return StaticMif(n, copies, sampler_kind, delta2=delta / (2 * copies), seed=seed, **kw)


def long_regime_build(
    n: int, k: int, delta: float, sampler_kind: str = "exact", seed: int = 0, m: int | None = None, **kw
) -> StaticMif:
    """Finder for streams of length ``n + k``; ``m = ceil(4 k ln(2/delta))``."""
    if not 1 <= k <= n:
        raise ValueError(f"need 1 <= k <= n, got k={k}, n={n}")
    copies = long_regime_copies(k, delta) if m is None else m
    return StaticMif(n, copies, sampler_kind, delta2=delta / (2 * copies), seed=seed, **kw)


# --- deterministic and on-the-fly -----------------------------------------


class DeterministicMif:
    """Remember which of the first ``h = min(ell + 1, n)`` ids have appeared."""

    def __init__(self, n: int, ell: int):
        self.n = n
        self.h = min(ell + 1, n)
        self.used = bytearray(self.h)
        self._lowest = 0  # every index below this is used

    def update(self, item: int) -> None:
        check_item(item, self.n)
        if item <= self.h:
            self.used[item - 1] = 1
            while self._lowest < self.h and self.used[self._lowest]:
                self._lowest += 1

    def query(self) -> QueryResult:
        if self._lowest >= self.h:
            return FAIL
        return Item(self._lowest + 1, -1)

    def bit_cost(self) -> BitCost:
        return BitCost(random_bits=0, state_bits=self.h)


def on_the_fly_query(n: int, rng: random.Random) -> int:
    if n < 1:
        raise ValueError("n must be >= 1")
    return rng.randint(1, n)


class OnTheFlyMif:
    """Guess a uniformly random id every turn; stores nothing between turns."""

    def __init__(self, n: int, seed: int = 0):
        if n < 1:
            raise ValueError("n must be >= 1")
        self.n = n
        self.rng = random.Random(derive_seed(seed, 3))

    def update(self, item: int) -> None:
        check_item(item, self.n)

    def query(self) -> QueryResult:
        return Item(on_the_fly_query(self.n, self.rng), -1)

    def bit_cost(self) -> BitCost:
        # per-query draw; not cumulative over the game
        return BitCost(random_bits=ceil_log2(self.n), state_bits=0)


# --- interval tracking -------------------------------------------------------


class IntervalMif:
    """Zero-error random-start finder that tracks ``beta`` secret intervals.

    The universe is cut into ``r = ceil(n / alpha)`` intervals
    ``I_j = [(j-1)*alpha + 1, j*alpha]`` (1-based ``j``). ``tracked`` holds
    the secret interval ids, ``L[j]`` marks tracked interval ``j`` as adopted,
    and ``X`` records, for the current interval, which positions are known
    to be seen (or were handed out by a query-time adoption).

    Invariant: ``X[j] == 0`` implies id ``(curr-1)*alpha + j + 1`` has not
    appeared. Positions past ``n`` in a padded final interval start at 1 so
    they are never reported.
    """

    def __init__(self, n: int, alpha: int, beta: int, tracked: list[int]):
        self.n = n
        self.alpha = alpha
        self.beta = beta
        self.intervals = -(-n // alpha)
        ids = np.asarray(tracked, dtype=np.int64)
        if beta < 1 or ids.shape != (beta,):
            raise ValueError("tracked must list beta distinct interval ids")
        if (ids.min() < 1 or ids.max() > self.intervals):
            raise ValueError(f"interval ids must lie in [1, {self.intervals}]")
        # slot of each interval id in tracked, -1 if untracked (index 0 unused)
        self._slot = np.full(self.intervals + 1, -1, dtype=np.int64)
        self._slot[ids] = np.arange(beta)
        if int((self._slot >= 0).sum()) != beta:
            raise ValueError("tracked must list beta distinct interval ids")
        self.tracked = ids.tolist()
        self.L = bytearray(beta)
        self.X = bytearray(alpha)
        self.curr = self.tracked[0]
        self._adopt(0)

    def _adopt(self, j: int) -> None:
        self.curr = self.tracked[j]
        self.L[j] = 1
        self.X = bytearray(self.alpha)
        pad_from = self.n - (self.curr - 1) * self.alpha
        for pos in range(max(pad_from, 0), self.alpha):
            self.X[pos] = 1

    def interval_of(self, item: int) -> int:
        return (item - 1) // self.alpha + 1

    def update(self, item: int) -> None:
        check_item(item, self.n)
        interval = self.interval_of(item)
        if interval == self.curr:
            self.X[(item - 1) % self.alpha] = 1
            return
        j = int(self._slot[interval])
        if j >= 0 and not self.L[j]:
            self._adopt(j)
            self.X[(item - 1) % self.alpha] = 1

    def query(self) -> QueryResult:
        pos = self.X.find(0)
        if pos >= 0:
            return Item((self.curr - 1) * self.alpha + pos + 1, -1)
        j = self.L.find(0)
        if j >= 0:
            self._adopt(j)
            self.X[0] = 1
            return Item((self.curr - 1) * self.alpha + 1, -1)
        return FAIL

    def bit_cost(self) -> BitCost:
        idx_bits = ceil_log2(self.intervals)
        return BitCost(random_bits=self.beta * idx_bits, state_bits=idx_bits + self.beta + self.alpha)


def intervals_init(
    n: int, alpha: int, beta: int, rng: random.Random, tracked: list[int] | None = None
) -> IntervalMif:
    """Draw ``beta`` distinct intervals uniformly and start on the first one.

    ``tracked`` pins the draw (useful for replaying a known state).
    """
    if alpha < 1:
        raise ValueError(f"alpha must be >= 1, got {alpha}")
    intervals = -(-n // alpha)
    if not 1 <= beta <= intervals:
        raise ValueError(f"beta must lie in [1, {intervals}] for n={n}, alpha={alpha}; got {beta}")
    if tracked is None:
        tracked = rng.sample(range(1, intervals + 1), beta)
    return IntervalMif(n, alpha, beta, tracked)


def preset_params(n: int, ell: int) -> tuple[int, int]:
    """Default ``(alpha, beta)`` for a stream of length ``ell`` over ``[n]``.

    Up to ``ell = n^(2/3)``: ``alpha = beta = ceil(sqrt(ell))``.
    Beyond: ``alpha = ceil(n / 4 ell)``, ``beta = ceil(16 ell^2 / n)``.
    ``beta`` is capped at the number of intervals.
    """
    if not 1 <= ell <= n:
        raise ValueError(f"need 1 <= ell <= n, got ell={ell}, n={n}")
    if ell**3 <= n**2:
        alpha = beta = math.isqrt(ell - 1) + 1
    else:
        alpha = max(1, -(-n // (4 * ell)))
        beta = -(-16 * ell * ell // n)
    return alpha, min(beta, -(-n // alpha))


def bit_cost(state) -> BitCost:
    return state.bit_cost()

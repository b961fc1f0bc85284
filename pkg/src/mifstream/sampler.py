"""L1 / L_p samplers over turnstile streams.

Two samplers share one interface (``ingest``, ``sample``, ``bits``):

``ExactL1Sampler``
    Keeps the full frequency vector. Draws item ``i`` with probability
    exactly ``|f_i| / ||f||_1`` and reports the true ``f_i``. It is the
    oracle that gives every downstream missing-item test a precise meaning.

``SketchL1Sampler``
    Precision sampling. Every item is split into ``dup`` virtual
    coordinates; coordinate ``k`` is scaled by ``1/t_k`` with ``t_k ~ Exp(1)``
    derived by hashing ``k`` with the seed, so the largest scaled coordinate
    lands on item ``i`` with probability ``|f_i| / ||f||_1``. The scaled
    vector lives in count-sketches; a query recovers the heaviest coordinate
    and rejects (FAIL) unless it stands clear of the sketch noise. Several
    independent repetitions push the FAIL probability below ``delta1``.

Scaled values are stored as fixed-point integers so the sketch is an exact
linear function of the updates: any ingestion order gives identical tables.
"""

from __future__ import annotations

import bisect
import math
import random
from dataclasses import dataclass
from itertools import accumulate

import numpy as np

from .stream import FAIL, FrequencyVector, Item, QueryResult, check_item


@dataclass(frozen=True)
class SamplerParams:
    """Accuracy knobs of the sampling contract.

    v: relative distortion of the sampling distribution.
    epsilon: relative error of the reported frequency estimate.
    delta1: bound on the FAIL probability.
    delta2: probability that the estimate misses the epsilon band.
    c: exponent of the additive ``n^-c`` slack.

    The space bound's beta term, ``min(eps^-2, max(eps^-1, log(1/delta2)))``,
    only informs sizing; it is not a runtime value.
    """

    v: float = 0.25
    epsilon: float = 0.25
    delta1: float = 0.25
    delta2: float = 0.01
    c: int = 2

    def __post_init__(self) -> None:
        if not 0 <= self.v < 1:
            raise ValueError(f"v must lie in [0, 1), got {self.v}")
        for name in ("epsilon", "delta1", "delta2"):
            value = getattr(self, name)
            if not 0 < value < 1:
                raise ValueError(f"{name} must lie in (0, 1), got {value}")
        if self.c < 1:
            raise ValueError(f"c must be >= 1, got {self.c}")


def _weighted_draw(fv: FrequencyVector, p: float, rng: random.Random) -> QueryResult:
    values = fv.tolist()
    if p == 1:
        weights = [abs(x) for x in values]
    elif p == 0:
        weights = [1 if x else 0 for x in values]
    else:
        weights = [abs(x) ** p for x in values]
    cum = list(accumulate(weights))
    if not cum or cum[-1] == 0:
        return FAIL
    # integer weights get an exact draw; fractional ones go through floats
    if isinstance(cum[-1], int):
        r = rng.randrange(cum[-1])
    else:
        r = rng.random() * cum[-1]
    idx = bisect.bisect_right(cum, r)
    idx = min(idx, len(cum) - 1)
    while weights[idx] == 0:  # float round-off at the top end
        idx -= 1
    return Item(idx + 1, values[idx])


def exact_sample(fv: FrequencyVector, rng: random.Random) -> QueryResult:
    """Draw ``i`` with probability ``|f_i| / ||f||_1``; FAIL on the zero vector."""
    return _weighted_draw(fv, 1, rng)


def exact_sample_lp(fv: FrequencyVector, p: float, rng: random.Random) -> QueryResult:
    """Draw ``i`` with probability ``|f_i|^p / sum_j |f_j|^p``.

    Zero coordinates are never drawn, including at ``p = 0``.
    """
    if not 0 <= p <= 1:
        raise ValueError(f"p must lie in [0, 1], got {p}")
    return _weighted_draw(fv, p, rng)


def lp_distribution(values, p: float = 1.0) -> list[float]:
    """Exact target probabilities for an L_p sampler (all zeros if f = 0)."""
    weights = [0.0 if x == 0 else abs(x) ** p for x in values]
    total = sum(weights)
    if total == 0:
        return [0.0] * len(weights)
    return [w / total for w in weights]


class ExactL1Sampler:
    """Exact L1 sampler backed by an urn.

    The urn holds item ``i`` exactly ``|f_i|`` times, so a uniform urn slot
    is an exact L1 draw. Unit updates cost O(1).
    """

    counter_bits = 64

    def __init__(self, n: int, offset: bool = False):
        self.n = n
        self.f = [0] * (n + 1)  # index 0 unused
        self._urn: list[int] = []
        self._slots: list[set[int]] = [set() for _ in range(n + 1)]
        if offset:
            for item in range(1, n + 1):
                self.ingest(item, -1)

    def _push(self, item: int) -> None:
        self._slots[item].add(len(self._urn))
        self._urn.append(item)

    def _pop(self, item: int) -> None:
        slot = self._slots[item].pop()
        last = len(self._urn) - 1
        moved = self._urn[last]
        if slot != last:
            self._urn[slot] = moved
            self._slots[moved].discard(last)
            self._slots[moved].add(slot)
        self._urn.pop()

    def ingest(self, item: int, delta: int = 1) -> None:
        check_item(item, self.n)
        old = self.f[item]
        new = old + delta
        self.f[item] = new
        grow = abs(new) - abs(old)
        for _ in range(grow):
            self._push(item)
        for _ in range(-grow):
            self._pop(item)

    def sample(self, rng: random.Random) -> QueryResult:
        if not self._urn:
            return FAIL
        item = self._urn[rng.randrange(len(self._urn))]
        return Item(item, self.f[item])

    def frequency_vector(self) -> FrequencyVector:
        return FrequencyVector(self.n, self.f[1:])

    @property
    def l1(self) -> int:
        return len(self._urn)

    @property
    def negative_mass(self) -> int:
        return sum(-x for x in self.f[1:] if x < 0)

    def bits(self) -> int:
        return self.n * self.counter_bits


# --- hashing ---------------------------------------------------------------

_GOLDEN = 0x9E3779B97F4A7C15
_MASK64 = (1 << 64) - 1


def _mix_int(x: int) -> int:
    x &= _MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & _MASK64
    return x ^ (x >> 31)


def _mix(x: np.ndarray) -> np.ndarray:
    """splitmix64 finalizer on a uint64 array (wrapping arithmetic)."""
    x = x ^ (x >> np.uint64(30))
    x = x * np.uint64(0xBF58476D1CE4E5B9)
    x = x ^ (x >> np.uint64(27))
    x = x * np.uint64(0x94D049BB133111EB)
    return x ^ (x >> np.uint64(31))


def _key(seed: int, *parts: int) -> int:
    h = seed
    for part in parts:
        h = _mix_int(h ^ (part * _GOLDEN))
    return h


def _hash(keys: np.ndarray, coords: np.ndarray) -> np.ndarray:
    """Hash every coordinate under every key; output shape ``keys.shape + coords.shape``."""
    c = coords.astype(np.uint64) * np.uint64(_GOLDEN)
    k = keys.reshape(keys.shape + (1,) * coords.ndim)
    return _mix(c + k)


class SketchL1Sampler:
    """Precision-sampling L1 sampler over a general turnstile stream.

    Parameters
    ----------
    n:
        Universe size.
    params:
        Sampling contract; ``delta1`` sets the number of repetitions,
        ``delta2`` the number of count-sketch rows, ``epsilon`` the width
        and the acceptance threshold.
    seed:
        64-bit seed. All hash functions and exponential scalings derive from
        it, so ``(seed, params, updates)`` fixes the sampler's answer.
    offset:
        Start from ``f = -1`` on every coordinate. The contribution of the
        offset is added to the tables in one vectorized pass instead of ``n``
        separate updates; the resulting tables are identical.
    dup:
        Virtual coordinates per item. Splitting an item keeps the rejection
        test from favouring heavy items.
    """

    SCALE_BITS = 20
    CAP = 1 << 44
    counter_bits = 64
    seed_bits = 64

    def __init__(
        self,
        n: int,
        params: SamplerParams | None = None,
        seed: int = 0,
        offset: bool = False,
        dup: int = 4,
        width: int | None = None,
        rows: int | None = None,
        reps: int | None = None,
    ):
        self.n = n
        self.params = params or SamplerParams()
        self.seed = seed & _MASK64
        self.dup = dup
        eps = self.params.epsilon
        self.width = width or max(16, math.ceil(4 / eps**2))
        self.rows = rows or max(3, 2 * math.ceil(0.5 * math.log2(1 / self.params.delta2)) + 1)
        self.reps = reps or max(1, 2 * math.ceil(math.log2(1 / self.params.delta1)))
        # accept when the top estimate clears the noise level by this factor
        self.threshold = 2.0 / eps
        self.tables = np.zeros((self.reps, self.rows, self.width), dtype=np.int64)

        mix_key = lambda *parts: _key(self.seed, *parts)
        self._scale_keys = np.array([mix_key(r, 0xE1) for r in range(self.reps)], dtype=np.uint64)
        self._bucket_keys = np.array(
            [[mix_key(r, row, 0xB0) for row in range(self.rows)] for r in range(self.reps)], dtype=np.uint64
        )
        self._sign_keys = np.array(
            [[mix_key(r, row, 0x51) for row in range(self.rows)] for r in range(self.reps)], dtype=np.uint64
        )
        # flat offset of each (rep, row) table inside self.tables
        self._base = (np.arange(self.reps * self.rows, dtype=np.int64) * self.width).reshape(self.reps, self.rows, 1)
        self._cache = None
        if offset:
            self._add_offset()

    # Hash values are recomputed from the seed; caching them trades time for
    # memory and does not count toward the sketch's state.
    def _coord_hashes(self, coords: np.ndarray):
        u = (_hash(self._scale_keys, coords) >> np.uint64(11)).astype(np.float64)
        t = -np.log((u + 0.5) / float(1 << 53))
        q = np.floor((1 << self.SCALE_BITS) / t)
        scale = np.minimum(q, float(self.CAP)).astype(np.int64)  # (reps, k)
        bucket = (_hash(self._bucket_keys, coords) % np.uint64(self.width)).astype(np.int64)  # (reps, rows, k)
        sign = 1 - 2 * (_hash(self._sign_keys, coords) >> np.uint64(63)).astype(np.int64)
        return scale, bucket, sign

    def _all_hashes(self):
        if self._cache is None:
            self._cache = self._coord_hashes(np.arange(self.n * self.dup, dtype=np.int64))
        return self._cache

    def _scatter(self, scale, bucket, sign, weight: int) -> None:
        values = sign * (scale * weight)[:, None, :]
        np.add.at(self.tables.reshape(-1), (bucket + self._base).ravel(), values.ravel())

    def _add_offset(self) -> None:
        self._scatter(*self._all_hashes(), -1)

    def ingest(self, item: int, delta: int = 1) -> None:
        check_item(item, self.n)
        if self._cache is not None:
            sl = slice((item - 1) * self.dup, item * self.dup)
            scale, bucket, sign = (a[..., sl] for a in self._cache)
        else:
            coords = np.arange((item - 1) * self.dup, item * self.dup, dtype=np.int64)
            scale, bucket, sign = self._coord_hashes(coords)
        self._scatter(scale, bucket, sign, delta)

    def sample(self, rng: random.Random | None = None) -> QueryResult:
        """Recover a sample from the current tables.

        The sampler's randomness lives in its seed; ``rng`` is accepted for
        interface parity with :class:`ExactL1Sampler` and is not consumed.
        """
        scale, bucket, sign = self._all_hashes()
        rows = np.arange(self.rows)[None, :, None]
        reps = np.arange(self.reps)[:, None, None]
        votes = sign * self.tables[reps, rows, bucket]  # (reps, rows, N)
        est = np.sort(votes, axis=1)[:, self.rows // 2, :]  # odd row count: exact integer median
        mag = np.abs(est)
        tops = np.argmax(mag, axis=1)  # first maximum: smallest coordinate wins ties
        energy = (self.tables.astype(np.float64) ** 2).sum(axis=2)  # (reps, rows)
        for r in range(self.reps):
            k = int(tops[r])
            top = int(mag[r, k])
            if top == 0:
                continue
            own = self.tables[r, np.arange(self.rows), bucket[r, :, k]].astype(np.float64) ** 2
            noise = float(np.median(np.sqrt(np.maximum(energy[r] - own, 0.0) / self.width)))
            if top < self.threshold * noise:
                continue
            estimate = int(round(int(est[r, k]) / int(scale[r, k])))
            return Item(k // self.dup + 1, estimate)
        return FAIL

    def bits(self) -> int:
        return self.tables.size * self.counter_bits + self.seed_bits

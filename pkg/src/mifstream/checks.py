"""Exhaustive small-universe checks and the sampler fidelity battery.

These back the ``selftest`` and ``sampler-tv`` subcommands and the test
suite. Every exhaustive check computes probabilities analytically from the
frequency vector, so there is no sampling noise.
"""

from __future__ import annotations

import itertools
import math
import random
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .algorithms import DeterministicMif, IntervalMif
from .sampler import ExactL1Sampler, SketchL1Sampler, exact_sample, lp_distribution
from .seeding import derive_seed
from .stream import FrequencyVector, Item


@dataclass
class CheckResult:
    name: str
    passed: bool
    cases: int
    detail: str

    def line(self) -> str:
        return f"{'PASS' if self.passed else 'FAIL'} {self.name}: {self.detail} ({self.cases} cases)"


def offset_counts(n: int, stream) -> list[int]:
    f = [-1] * n
    for item in stream:
        f[item - 1] += 1
    return f


def negative_fraction(f, p: float) -> float | Fraction:
    """Probability that a perfect L_p sampler on ``f`` lands on a negative coordinate.

    Exact (a Fraction) for ``p`` in {0, 1}; a float otherwise.
    """
    if p in (0, 1):
        w = [Fraction(0) if x == 0 else Fraction(abs(x)) ** int(p) for x in f]
    else:
        w = [0.0 if x == 0 else abs(x) ** p for x in f]
    total = sum(w)
    if total == 0:
        return Fraction(0)
    return sum(wi for wi, x in zip(w, f) if x < 0) / total


def lp_negative_mass_check(max_n: int = 6, max_ell: int = 5, ps=(0, 0.5, 1)) -> CheckResult:
    """Every stream shorter than the universe puts at least half the L_p mass on unseen ids."""
    worst = 1.0
    cases = 0
    for n in range(1, max_n + 1):
        for ell in range(0, min(max_ell, n - 1) + 1):
            for stream in itertools.combinations_with_replacement(range(1, n + 1), ell):
                f = offset_counts(n, stream)
                for p in ps:
                    frac = negative_fraction(f, p)
                    cases += 1
                    worst = min(worst, float(frac))
                    # p = 1/2 sums square roots; allow float round-off there
                    ok = frac >= Fraction(1, 2) if isinstance(frac, Fraction) else frac >= 0.5 - 1e-12
                    if not ok:
                        return CheckResult("lp-negative-mass", False, cases, f"n={n} stream={stream} p={p}: {frac}")
    return CheckResult("lp-negative-mass", True, cases, f"min negative fraction {worst:.6f} >= 1/2")


def long_regime_rate_check(max_n: int = 8, max_k: int = 3) -> CheckResult:
    """On length-(n+k) streams with a missing id, the negative L1 mass is >= 1/(k+2)."""
    cases = 0
    tightest = math.inf
    for n in range(1, max_n + 1):
        for k in range(1, min(max_k, n) + 1):
            bound = Fraction(1, k + 2)
            for stream in itertools.combinations_with_replacement(range(1, n + 1), n + k):
                f = offset_counts(n, stream)
                if -1 not in f:
                    continue
                cases += 1
                frac = negative_fraction(f, 1)
                if frac < bound:
                    return CheckResult("long-regime-rate", False, cases, f"n={n} k={k} stream={stream}: {frac}")
                tightest = min(tightest, float(frac - bound))
    return CheckResult("long-regime-rate", True, cases, f"min slack over 1/(k+2) = {tightest:.6f}")


def deterministic_pigeonhole_check(max_h: int = 8, alphabet_cap: int = 6) -> CheckResult:
    """The bitmap finder never fails or errs on streams shorter than its horizon.

    Streams range over ids ``1..min(h + 1, alphabet_cap)`` so the check
    also exercises ids beyond the horizon while staying enumerable.
    """
    cases = 0
    for h in range(1, max_h + 1):
        n = h + 1
        ell = h - 1
        alphabet = range(1, min(h + 1, alphabet_cap) + 1)

        def walk(prefix: tuple[int, ...]) -> str | None:
            nonlocal cases
            alg = DeterministicMif(n, ell)
            for item in prefix:
                alg.update(item)
            out = alg.query()
            cases += 1
            if not isinstance(out, Item) or out.item in prefix:
                return f"h={h} stream={prefix}: {out}"
            if len(prefix) < ell:
                for item in alphabet:
                    bad = walk(prefix + (item,))
                    if bad:
                        return bad
            return None

        bad = walk(())
        if bad:
            return CheckResult("deterministic-pigeonhole", False, cases, bad)
    return CheckResult("deterministic-pigeonhole", True, cases, "no FAIL and no seen id on any short stream")


def interval_zero_error_check(n: int = 6, max_len: int = 4, max_beta: int = 3) -> CheckResult:
    """No seen id is ever reported, and every answer lies in the current interval.

    Covers every ``alpha``, every ordered choice of at most ``max_beta``
    tracked intervals, and every stream of length up to ``max_len``.
    """
    cases = 0
    for alpha in range(1, n + 1):
        intervals = -(-n // alpha)
        for beta in range(1, min(intervals, max_beta) + 1):
            for tracked in itertools.permutations(range(1, intervals + 1), beta):
                for length in range(max_len + 1):
                    for stream in itertools.product(range(1, n + 1), repeat=length):
                        alg = IntervalMif(n, alpha, beta, list(tracked))
                        seen = set()
                        for item in stream:
                            alg.update(item)
                            seen.add(item)
                            out = alg.query()
                            cases += 1
                            if isinstance(out, Item):
                                lo = (alg.curr - 1) * alpha + 1
                                if out.item in seen or not lo <= out.item < lo + alpha or out.item > n:
                                    detail = f"alpha={alpha} tracked={tracked} stream={stream}: {out}"
                                    return CheckResult("interval-zero-error", False, cases, detail)
    return CheckResult("interval-zero-error", True, cases, "every answer unseen and inside the current interval")


def run_selftest() -> list[CheckResult]:
    return [
        lp_negative_mass_check(),
        long_regime_rate_check(),
        deterministic_pigeonhole_check(),
        interval_zero_error_check(),
    ]


# --- sampler fidelity --------------------------------------------------------


def total_variation(p, q) -> float:
    return 0.5 * float(np.abs(np.asarray(p, dtype=float) - np.asarray(q, dtype=float)).sum())


def random_test_vector(n: int, rng: random.Random) -> list[int]:
    """Alternate between offset stream vectors and arbitrary signed vectors."""
    if rng.random() < 0.5:
        return offset_counts(n, [rng.randint(1, n) for _ in range(rng.randint(0, 2 * n))])
    f = [rng.randint(-5, 5) for _ in range(n)]
    if not any(f):
        f[0] = 1
    return f


def exact_tv(f, draws: int, rng: random.Random) -> float:
    """TV distance between the exact sampler's empirical distribution and the target."""
    n = len(f)
    sampler = ExactL1Sampler(n)
    for i, x in enumerate(f, 1):
        if x:
            sampler.ingest(i, x)
    counts = [0] * n
    for _ in range(draws):
        counts[sampler.sample(rng).item - 1] += 1
    return total_variation(lp_distribution(f), [c / draws for c in counts])


def exact_tv_functional(f, draws: int, rng: random.Random) -> float:
    """Same as :func:`exact_tv` but through the stateless ``exact_sample``."""
    fv = FrequencyVector(len(f), f)
    counts = [0] * len(f)
    for _ in range(draws):
        counts[exact_sample(fv, rng).item - 1] += 1
    return total_variation(lp_distribution(f), [c / draws for c in counts])


@dataclass
class SketchFidelity:
    tv: float
    fail_rate: float
    sign_errors: int
    seeds: int


def sketch_fidelity(f, seeds: int, base_seed: int = 0, **sketch_kw) -> SketchFidelity:
    """Distribution of the sketch's answer over independent seeds, against the exact target."""
    n = len(f)
    counts = np.zeros(n)
    fails = sign_errors = 0
    for s in range(seeds):
        sk = SketchL1Sampler(n, seed=derive_seed(base_seed, s), **sketch_kw)
        for i, x in enumerate(f, 1):
            if x:
                sk.ingest(i, x)
        out = sk.sample()
        if isinstance(out, Item):
            counts[out.item - 1] += 1
            if np.sign(out.estimate) != np.sign(f[out.item - 1]):
                sign_errors += 1
        else:
            fails += 1
    ok = seeds - fails
    tv = total_variation(lp_distribution(f), counts / ok) if ok else 1.0
    return SketchFidelity(tv=tv, fail_rate=fails / seeds, sign_errors=sign_errors, seeds=seeds)


@dataclass
class TVBattery:
    exact_max_tv: float
    sketch_max_tv: float
    sketch_max_fail: float
    sketch_sign_errors: int

    def lines(self) -> list[str]:
        return [
            f"exact sampler max TV: {self.exact_max_tv:.6f}",
            f"sketch sampler max TV: {self.sketch_max_tv:.6f}",
            f"sketch sampler max FAIL rate: {self.sketch_max_fail:.6f}",
            f"sketch sign errors: {self.sketch_sign_errors}",
        ]


def run_tv_battery(
    n: int = 16,
    exact_vectors: int = 20,
    draws: int = 100_000,
    sketch_vectors: int = 5,
    sketch_seeds: int = 2000,
    seed: int = 0,
) -> TVBattery:
    rng = random.Random(derive_seed(seed, 0x7F))
    exact_max = 0.0
    for _ in range(exact_vectors):
        f = random_test_vector(n, rng)
        exact_max = max(exact_max, exact_tv(f, draws, rng))
    sketch_max = fail_max = 0.0
    sign_errors = 0
    for v in range(sketch_vectors):
        f = random_test_vector(n, rng)
        fid = sketch_fidelity(f, sketch_seeds, base_seed=derive_seed(seed, v))
        sketch_max = max(sketch_max, fid.tv)
        fail_max = max(fail_max, fid.fail_rate)
        sign_errors += fid.sign_errors
    return TVBattery(exact_max, sketch_max, fail_max, sign_errors)

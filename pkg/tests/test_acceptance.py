"""Acceptance criteria. Each test prints one PASS/FAIL line.

Run on its own with ``pytest tests/test_acceptance.py -s`` (the lines are
printed even without ``-s``).
"""

from __future__ import annotations

import math
import random
import time
from fractions import Fraction

import pytest

from mifstream.algorithms import IntervalMif, long_regime_build, preset_params
from mifstream.checks import long_regime_rate_check, lp_negative_mass_check, run_tv_battery
from mifstream.cli import main
from mifstream.harness import (
    ReplayAdversary,
    TrialConfig,
    card_guessing_game,
    exact_guesser,
    near_cover_stream,
    play_game,
    run_trials,
    trial_seeds,
)
from mifstream.report import parse_report
from mifstream.seeding import make_rng

# CLI reports produced by earlier criteria, rerun by the determinism check
REPORTS: dict[str, tuple[list[str], bytes]] = {}


@pytest.fixture
def verdict(capsys):
    def emit(number: int, title: str, ok: bool, detail: str, elapsed: float, limit: float) -> None:
        in_time = elapsed < limit
        passed = ok and in_time
        line = f"{'PASS' if passed else 'FAIL'} [{number}] {title}: {detail}; {elapsed:.1f}s (limit {limit:g}s)"
        with capsys.disabled():
            print("\n" + line)
        assert ok, line
        assert in_time, line

    return emit


def sigma(p: float, trials: int) -> float:
    return math.sqrt(p * (1 - p) / trials)


def cli_report(tmp_path, name: str, argv: list[str]) -> bytes:
    out = tmp_path / f"{name}.csv"
    assert main(argv + ["--output", str(out)]) == 0
    data = out.read_bytes()
    REPORTS[name] = (argv, data)
    return data


def test_1_zero_error_suites(verdict):
    start = time.perf_counter()
    details = []
    ok = True
    configs = [
        TrialConfig("intervals", 2**20, 256, adversary=adv, trials=400, seed=11)
        for adv in ("echo", "interval_hunter", "uniform")
    ]
    configs.append(TrialConfig("static", 1000, 999, adversary="static_random", trials=101, seed=11))
    for cfg in configs:
        stats = run_trials(cfg)
        ok &= stats.wrong_outputs == 0 and stats.turns >= 10**5
        details.append(f"{cfg.model}/{cfg.adversary} turns={stats.turns} wrong={stats.wrong_outputs}")
    verdict(1, "zero-error", ok, "; ".join(details), time.perf_counter() - start, 60)


def test_2_static_upper_bound(verdict, tmp_path):
    start = time.perf_counter()
    argv = ["run", "--model", "static", "--sampler", "exact", "--n", "1000", "--ell", "999"]
    argv += ["--delta", "0.05", "--adversary", "static_random", "--trials", "2000", "--seed", "2"]
    (row,) = parse_report(cli_report(tmp_path, "static", argv), "csv")
    limit = 0.05 + 3 * sigma(0.05, 2000)
    ok = row.params.endswith("m=13") and row.failure_rate <= limit and row.wrong_outputs == 0
    detail = f"{row.params} failure_rate={row.failure_rate:.4f} <= {limit:.4f}"
    verdict(2, "static bound", ok, detail, time.perf_counter() - start, 60)


def test_3_per_copy_negative_rate(verdict):
    start = time.perf_counter()
    result = lp_negative_mass_check(max_n=6, max_ell=5, ps=(0, 0.5, 1))
    verdict(3, "negative L_p mass", result.passed, f"{result.detail} over {result.cases} cases", time.perf_counter() - start, 10)


def test_4_long_regime(verdict):
    start = time.perf_counter()
    n, k, delta, trials = 100, 10, 0.1, 1000
    failures = wrong = 0
    for trial in range(trials):
        alg_seed, adv_seed = trial_seeds(4, trial)
        stream = near_cover_stream(n, n + k, make_rng(adv_seed))
        alg = long_regime_build(n, k, delta, seed=alg_seed)
        res = play_game(alg, ReplayAdversary(stream), n, n + k)
        failures += res.failed
        wrong += res.wrong_outputs
    rate = failures / trials
    limit = delta + 3 * sigma(delta, trials)
    exhaustive = long_regime_rate_check(max_n=8, max_k=3)
    ok = rate <= limit and wrong == 0 and exhaustive.passed
    detail = f"m=120 failure_rate={rate:.4f} <= {limit:.4f}; exhaustive 1/(k+2) check {exhaustive.cases} cases {'ok' if exhaustive.passed else 'violated'}"
    verdict(4, "long regime", ok, detail, time.perf_counter() - start, 120)


def test_5_on_the_fly_bound(verdict, tmp_path):
    start = time.perf_counter()
    bound = (50**2 + 50) / (2 * 10**4)
    limit = bound + 3 * sigma(bound, 10**4)
    ok = True
    details = []
    for adv in ("static_random", "echo"):
        argv = ["run", "--model", "on_the_fly", "--n", "10000", "--ell", "50", "--adversary", adv, "--trials", "10000", "--seed", "5"]
        (row,) = parse_report(cli_report(tmp_path, f"otf-{adv}", argv), "csv")
        ok &= row.failure_rate <= limit and row.bound == bound
        details.append(f"{adv} {row.failure_rate:.4f}")
    verdict(5, "on-the-fly bound", ok, f"{', '.join(details)} <= {limit:.4f}", time.perf_counter() - start, 60)


def test_6_interval_beta_direction(verdict, tmp_path):
    start = time.perf_counter()
    trials = 2000
    argv = ["sweep", "--model", "intervals", "--n", str(2**20), "--ell", "256", "--alpha", "16"]
    argv += ["--adversary", "interval_hunter", "--sweep", "beta=8,16,32,64", "--trials", str(trials), "--seed", "6"]
    rows = parse_report(cli_report(tmp_path, "beta-sweep", argv), "csv")
    rates = [r.failure_rate for r in rows]
    monotone = all(
        b <= a + 2 * math.sqrt(sigma(a, trials) ** 2 + sigma(b, trials) ** 2) for a, b in zip(rates, rates[1:])
    )
    ok = monotone and rates[-1] < rates[0] and all(r.wrong_outputs == 0 for r in rows)
    detail = "failure_rate by beta 8/16/32/64 = " + "/".join(f"{x:.4f}" for x in rates)
    verdict(6, "interval beta direction", ok, detail, time.perf_counter() - start, 120)


def bits_oracle(n: int, alpha: int, beta: int) -> int:
    # smallest b with n / alpha <= 2^b, in exact arithmetic
    b = 0
    while Fraction(n, alpha) > 2**b:
        b += 1
    return beta * b + b + beta + alpha


def test_7_bit_cost_formula(verdict):
    start = time.perf_counter()
    rng = random.Random(7)
    exact_ok = True
    for _ in range(100):
        n = rng.randint(1, 2**24)
        alpha = rng.randint(1, min(n, 4096))
        r = -(-n // alpha)
        beta = rng.randint(1, min(r, 256))
        alg = IntervalMif(n, alpha, beta, list(range(1, beta + 1)))
        exact_ok &= alg.bit_cost().total_bits == bits_oracle(n, alpha, beta)
    preset_ok = True
    worst = 0.0
    for n in (2**10, 2**16, 2**20, 10**6):
        for ell in (1, 2, 10, 100, 1000, n // 2, n):
            if ell > n:
                continue
            alpha, beta = preset_params(n, ell)
            total = IntervalMif(n, alpha, beta, list(range(1, beta + 1))).bit_cost().total_bits
            cap = 8 * (beta * math.log2(n) + alpha)
            preset_ok &= total <= cap
            worst = max(worst, total / cap)
    detail = f"100 random triples {'match' if exact_ok else 'mismatch'}; presets max total/cap={worst:.3f}"
    verdict(7, "interval bit cost", exact_ok and preset_ok, detail, time.perf_counter() - start, 1)


def test_8_sampler_fidelity(verdict):
    start = time.perf_counter()
    battery = run_tv_battery(n=16, exact_vectors=20, draws=100_000, sketch_vectors=5, sketch_seeds=2000, seed=8)
    fail_limit = 0.25 + 3 * sigma(0.25, 2000)
    ok = battery.exact_max_tv <= 0.02 and battery.sketch_max_tv <= 0.1 and battery.sketch_max_fail <= fail_limit
    detail = (
        f"exact max TV={battery.exact_max_tv:.4f} <= 0.02; sketch max TV={battery.sketch_max_tv:.4f} <= 0.1; "
        f"sketch max FAIL={battery.sketch_max_fail:.4f} <= {fail_limit:.4f}"
    )
    verdict(8, "sampler fidelity", ok, detail, time.perf_counter() - start, 120)


def test_9_card_guessing(verdict):
    start = time.perf_counter()
    n, games = 256, 500
    h = sum(Fraction(1, t) for t in range(1, n + 1))
    dealer = random.Random(9)
    total = 0
    for g in range(games):
        deck = list(range(1, n + 1))
        dealer.shuffle(deck)
        total += card_guessing_game(exact_guesser(n, 0.1, seed=g), deck)
    mean = total / games
    lo, hi = 0.9 * float(h), 1.1 * float(h)
    verdict(9, "card guessing", lo <= mean <= hi, f"mean score {mean:.3f} in [{lo:.3f}, {hi:.3f}]", time.perf_counter() - start, 60)


def test_10_determinism(verdict, tmp_path):
    start = time.perf_counter()
    if not REPORTS:
        argv = ["run", "--model", "on_the_fly", "--n", "10000", "--ell", "50", "--adversary", "echo", "--trials", "2000", "--seed", "5"]
        cli_report(tmp_path, "fallback", argv)
    same = []
    for name, (argv, first) in REPORTS.items():
        out = tmp_path / f"{name}-again.csv"
        main(argv + ["--output", str(out)])
        same.append(out.read_bytes() == first)
    detail = f"{sum(same)}/{len(same)} reports byte-identical on rerun ({', '.join(REPORTS)})"
    verdict(10, "determinism", all(same), detail, time.perf_counter() - start, 300)

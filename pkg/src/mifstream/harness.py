"""Adaptive-adversary game loop, adversary strategies, and trial aggregation.

One game is ``ell`` turns of: the adversary picks an item looking only at
the transcript of past items and outputs; the algorithm ingests it and
answers a query; the answer is checked against everything played so far.
A game fails if any turn gives a wrong answer, or FAIL while some item is
still missing. Once every id has appeared any answer is accepted.
"""

from __future__ import annotations

import math
import random
import time
from dataclasses import dataclass, field
from typing import Protocol, Sequence

from .algorithms import (
    BitCost,
    DeterministicMif,
    OnTheFlyMif,
    intervals_init,
    long_regime_build,
    long_regime_copies,
    preset_params,
    static_build,
    static_copies,
)
from .seeding import derive_seed, make_rng
from .stream import Item, QueryResult

MODELS = ("deterministic", "static", "long_regime", "on_the_fly", "intervals")
ADVERSARIES = ("static_random", "replay", "echo", "interval_hunter", "uniform")

Transcript = list[tuple[int, QueryResult]]


class HarnessError(RuntimeError):
    """An adversary produced an illegal item."""


class ConfigError(ValueError):
    """Invalid trial configuration; ``errors`` lists every violation."""

    def __init__(self, errors: Sequence[str]):
        self.errors = list(errors)
        super().__init__("; ".join(self.errors))


class MifAlgorithm(Protocol):
    def update(self, item: int) -> None: ...

    def query(self) -> QueryResult: ...

    def bit_cost(self) -> BitCost: ...


# --- adversaries -----------------------------------------------------------


class Unplayed:
    """Uniform sampling from the ids an adversary has not played yet."""

    def __init__(self, n: int, rng: random.Random):
        self.n = n
        self.rng = rng
        self.played: set[int] = set()

    def mark(self, item: int) -> None:
        self.played.add(item)

    def draw(self) -> int:
        if len(self.played) >= self.n:
            return self.rng.randint(1, self.n)
        if len(self.played) <= self.n // 2:
            while True:
                item = self.rng.randint(1, self.n)
                if item not in self.played:
                    return item
        pool = [i for i in range(1, self.n + 1) if i not in self.played]
        return self.rng.choice(pool)


def last_output(transcript: Transcript) -> QueryResult | None:
    return transcript[-1][1] if transcript else None


def latest_item_output(transcript: Transcript) -> Item | None:
    for _, out in reversed(transcript):
        if isinstance(out, Item):
            return out
    return None


def echo_next(transcript: Transcript, n: int, rng: random.Random) -> int:
    """Replay the algorithm's latest answer; uniform if it was FAIL or absent."""
    out = last_output(transcript)
    if isinstance(out, Item):
        return out.item
    return rng.randint(1, n)


def interval_hunter_next(transcript: Transcript, n: int, alpha_guess: int, unplayed: Unplayed) -> int:
    """Drain the block revealed by the latest answer, else guess a fresh id.

    Blocks are the ``alpha_guess``-aligned runs ``[(b-1)*a + 1, b*a]``. Ids
    are emitted smallest first and never repeated while fresh ids remain.
    """
    out = latest_item_output(transcript)
    if out is not None:
        block = (out.item - 1) // alpha_guess
        lo = block * alpha_guess + 1
        for item in range(lo, min(lo + alpha_guess, n + 1)):
            if item not in unplayed.played:
                return item
    return unplayed.draw()


class Adversary:
    kind = "base"

    def next_item(self, transcript: Transcript) -> int:
        raise NotImplementedError


class StaticRandomAdversary(Adversary):
    """Stream of i.i.d. uniform ids drawn before the game starts."""

    kind = "static_random"

    def __init__(self, n: int, ell: int, rng: random.Random):
        self.stream = [rng.randint(1, n) for _ in range(ell)]

    def next_item(self, transcript: Transcript) -> int:
        return self.stream[len(transcript)]


class ReplayAdversary(Adversary):
    kind = "replay"

    def __init__(self, stream: Sequence[int]):
        self.stream = list(stream)

    def next_item(self, transcript: Transcript) -> int:
        return self.stream[len(transcript)]


class EchoAdversary(Adversary):
    kind = "echo"

    def __init__(self, n: int, rng: random.Random):
        self.n = n
        self.rng = rng

    def next_item(self, transcript: Transcript) -> int:
        return echo_next(transcript, self.n, self.rng)


class UniformAdversary(Adversary):
    """Online uniform draw over ids not yet played (fresh ids every turn)."""

    kind = "uniform"

    def __init__(self, n: int, rng: random.Random):
        self.unplayed = Unplayed(n, rng)

    def next_item(self, transcript: Transcript) -> int:
        item = self.unplayed.draw()
        self.unplayed.mark(item)
        return item


class IntervalHunterAdversary(Adversary):
    kind = "interval_hunter"

    def __init__(self, n: int, alpha_guess: int, rng: random.Random):
        if alpha_guess < 1:
            raise ValueError("alpha_guess must be >= 1")
        self.n = n
        self.alpha_guess = alpha_guess
        self.unplayed = Unplayed(n, rng)

    def next_item(self, transcript: Transcript) -> int:
        item = interval_hunter_next(transcript, self.n, self.alpha_guess, self.unplayed)
        self.unplayed.mark(item)
        return item


# --- the game --------------------------------------------------------------


@dataclass
class GameResult:
    turns_played: int
    wrong_outputs: int
    fail_outputs: int
    first_failure_turn: int | None
    bit_cost: BitCost
    transcript: Transcript | None = None

    @property
    def failed(self) -> bool:
        return self.first_failure_turn is not None


def play_game(algorithm: MifAlgorithm, adversary: Adversary, n: int, ell: int, record: bool = False) -> GameResult:
    if ell < 0:
        raise ValueError("ell must be >= 0")
    transcript: Transcript = []
    seen: set[int] = set()
    wrong = fails = 0
    first = None
    for turn in range(1, ell + 1):
        item = adversary.next_item(transcript)
        if not isinstance(item, int) or not 1 <= item <= n:
            raise HarnessError(f"{adversary.kind} adversary emitted {item!r} outside [1, {n}]")
        seen.add(item)
        algorithm.update(item)
        out = algorithm.query()
        transcript.append((item, out))
        if len(seen) == n:
            continue  # nothing is missing: any answer is accepted
        if isinstance(out, Item):
            if out.item in seen:
                wrong += 1
                first = first or turn
        else:
            fails += 1
            first = first or turn
    return GameResult(
        turns_played=ell,
        wrong_outputs=wrong,
        fail_outputs=fails,
        first_failure_turn=first,
        bit_cost=algorithm.bit_cost(),
        transcript=transcript if record else None,
    )


# --- trials ------------------------------------------------------------------


@dataclass
class TrialConfig:
    model: str
    n: int
    ell: int
    sampler: str = "exact"
    k: int | None = None
    delta: float = 0.05
    alpha: int | None = None
    beta: int | None = None
    m: int | None = None
    adversary: str = "static_random"
    replay: list[int] | None = None
    alpha_guess: int | None = None
    trials: int = 1
    seed: int = 0

    def errors(self) -> list[str]:
        errs = []
        if self.model not in MODELS:
            errs.append(f"unknown model {self.model!r}")
        if self.adversary not in ADVERSARIES:
            errs.append(f"unknown adversary {self.adversary!r}")
        if self.sampler not in ("exact", "sketch"):
            errs.append(f"unknown sampler {self.sampler!r}")
        if self.n < 1:
            errs.append("n must be >= 1")
        if self.ell < 0:
            errs.append("ell must be >= 0")
        if self.trials < 0:
            errs.append("trials must be >= 0")
        if not 0 < self.delta < 1:
            errs.append("delta must lie in (0, 1)")
        if self.m is not None and self.m < 1:
            errs.append("m must be >= 1")
        if self.m is not None and self.model not in ("static", "long_regime"):
            errs.append("m applies only to model=static or model=long_regime")
        if self.k is not None and self.model != "long_regime":
            errs.append("k requires model=long_regime")
        if self.model == "long_regime":
            if self.ell < self.n:
                errs.append("long regime requires ell >= n")
            k = self.ell - self.n if self.k is None else self.k
            if not 1 <= k <= self.n:
                errs.append(f"long regime requires 1 <= k <= n, got k={k}")
            elif self.ell != self.n + k:
                errs.append(f"ell must equal n + k ({self.n + k}), got {self.ell}")
        if self.model == "static" and self.ell >= self.n:
            errs.append("static model requires ell < n")
        if (self.alpha is not None or self.beta is not None) and self.model != "intervals":
            errs.append("alpha/beta apply only to model=intervals")
        if self.model == "intervals" and self.n >= 1:
            if self.alpha is None and self.beta is None and not 1 <= self.ell <= self.n:
                errs.append("intervals presets need 1 <= ell <= n; pass alpha and beta explicitly")
            else:
                try:
                    alpha, beta = self.interval_params()
                except ValueError as exc:
                    errs.append(str(exc))
                else:
                    if alpha < 1:
                        errs.append("alpha must be >= 1")
                    elif not 1 <= beta <= -(-self.n // alpha):
                        errs.append(f"beta must lie in [1, {-(-self.n // alpha)}] for alpha={alpha}")
        if self.adversary == "replay":
            if self.replay is None:
                errs.append("replay adversary needs a stream")
            else:
                if len(self.replay) < self.ell:
                    errs.append(f"replay stream has {len(self.replay)} items, ell={self.ell}")
                if any(not 1 <= i <= self.n for i in self.replay):
                    errs.append(f"replay stream has ids outside [1, {self.n}]")
        if self.alpha_guess is not None and self.alpha_guess < 1:
            errs.append("alpha_guess must be >= 1")
        return errs

    def validate(self) -> "TrialConfig":
        errs = self.errors()
        if errs:
            raise ConfigError(errs)
        return self

    def interval_params(self) -> tuple[int, int]:
        if self.alpha is not None and self.beta is not None:
            return self.alpha, self.beta
        alpha, beta = preset_params(self.n, self.ell)
        return (self.alpha or alpha), (self.beta or beta)

    @property
    def long_k(self) -> int:
        return self.ell - self.n if self.k is None else self.k

    @property
    def zero_error(self) -> bool:
        """Whether any wrong output counts as a correctness violation."""
        if self.model in ("deterministic", "intervals"):
            return True
        return self.model in ("static", "long_regime") and self.sampler == "exact"

    def bound(self) -> float | None:
        """Analytic failure bound, where one is known."""
        if self.model == "on_the_fly":
            return (self.ell**2 + self.ell) / (2 * self.n)
        if self.model in ("static", "long_regime") and self.m is None:
            return self.delta
        if self.model == "deterministic":
            return 0.0
        return None

    def params_string(self) -> str:
        parts: list[str] = []
        if self.model in ("static", "long_regime"):
            parts.append(f"sampler={self.sampler}")
            if self.model == "long_regime":
                parts.append(f"k={self.long_k}")
            parts.append(f"delta={self.delta!r}")
            parts.append(f"m={self.copies()}")
        elif self.model == "intervals":
            alpha, beta = self.interval_params()
            parts += [f"alpha={alpha}", f"beta={beta}"]
        elif self.model == "deterministic":
            parts.append(f"h={min(self.ell + 1, self.n)}")
        if self.adversary == "interval_hunter":
            parts.append(f"alpha_guess={self.hunter_alpha()}")
        return ";".join(parts)

    def copies(self) -> int:
        if self.m is not None:
            return self.m
        if self.model == "long_regime":
            return long_regime_copies(self.long_k, self.delta)
        return static_copies(self.delta)

    def hunter_alpha(self) -> int:
        if self.alpha_guess is not None:
            return self.alpha_guess
        if self.model == "intervals":
            return self.interval_params()[0]
        return math.isqrt(max(self.ell, 1))


def build_algorithm(config: TrialConfig, seed: int) -> MifAlgorithm:
    model = config.model
    if model == "deterministic":
        return DeterministicMif(config.n, config.ell)
    if model == "on_the_fly":
        return OnTheFlyMif(config.n, seed)
    if model == "static":
        return static_build(config.n, config.delta, config.sampler, seed=seed, m=config.m)
    if model == "long_regime":
        return long_regime_build(config.n, config.long_k, config.delta, config.sampler, seed=seed, m=config.m)
    if model == "intervals":
        alpha, beta = config.interval_params()
        return intervals_init(config.n, alpha, beta, make_rng(seed, 4))
    raise ConfigError([f"unknown model {model!r}"])


def build_adversary(config: TrialConfig, seed: int) -> Adversary:
    rng = make_rng(seed, 5)
    kind = config.adversary
    if kind == "static_random":
        return StaticRandomAdversary(config.n, config.ell, rng)
    if kind == "replay":
        return ReplayAdversary(config.replay or [])
    if kind == "echo":
        return EchoAdversary(config.n, rng)
    if kind == "uniform":
        return UniformAdversary(config.n, rng)
    if kind == "interval_hunter":
        return IntervalHunterAdversary(config.n, config.hunter_alpha(), rng)
    raise ConfigError([f"unknown adversary {kind!r}"])


def trial_seeds(base_seed: int, trial: int) -> tuple[int, int]:
    """Independent (algorithm, adversary) seeds for one trial."""
    trial_seed = base_seed + trial
    return derive_seed(trial_seed, 0xA1), derive_seed(trial_seed, 0xAD)


@dataclass
class TrialStats:
    trials: int = 0
    failures: int = 0
    wrong_outputs: int = 0
    fail_outputs: int = 0
    turns: int = 0
    mean_bits: float = 0.0
    max_bits: int = 0
    wall_clock: float = 0.0
    first_failure_turns: list[int] = field(default_factory=list)

    @property
    def failure_rate(self) -> float:
        return self.failures / self.trials if self.trials else 0.0


def run_trials(config: TrialConfig) -> TrialStats:
    """Run ``config.trials`` independent games; trial ``t`` uses seed ``config.seed + t``."""
    config.validate()
    stats = TrialStats()
    start = time.perf_counter()
    total_bits = 0
    for trial in range(config.trials):
        alg_seed, adv_seed = trial_seeds(config.seed, trial)
        algorithm = build_algorithm(config, alg_seed)
        adversary = build_adversary(config, adv_seed)
        result = play_game(algorithm, adversary, config.n, config.ell)
        stats.trials += 1
        stats.turns += result.turns_played
        stats.wrong_outputs += result.wrong_outputs
        stats.fail_outputs += result.fail_outputs
        if result.failed:
            stats.failures += 1
            stats.first_failure_turns.append(result.first_failure_turn)
        bits = result.bit_cost.total_bits
        total_bits += bits
        stats.max_bits = max(stats.max_bits, bits)
    if stats.trials:
        stats.mean_bits = total_bits / stats.trials
    stats.wall_clock = time.perf_counter() - start
    return stats


# --- card guessing -------------------------------------------------------------


def card_guessing_game(guesser: MifAlgorithm, permutation: Sequence[int]) -> int:
    """Score a guesser against a fixed deck.

    Each turn the guesser names a card it believes is still in the deck
    (FAIL counts as guessing 1), then the dealer reveals the next card and
    the guesser ingests it whether or not the guess was right.
    """
    n = len(permutation)
    if sorted(permutation) != list(range(1, n + 1)):
        raise ValueError("dealer deck must be a permutation of [1, n]")
    score = 0
    for card in permutation:
        out = guesser.query()
        guess = out.item if isinstance(out, Item) else 1
        score += guess == card
        guesser.update(card)
    return score


def exact_guesser(n: int, delta_prime: float = 0.1, seed: int = 0):
    """Static finder with the exact sampler, amplified to ``delta = delta_prime / n``."""
    return static_build(n, delta_prime / n, "exact", seed=seed)


def near_cover_stream(n: int, ell: int, rng: random.Random) -> list[int]:
    """Shuffled stream of length ``ell >= n - 1`` that covers every id but one.

    The missing id is uniform; the ``ell - n + 1`` extra items are uniform
    repeats of covered ids.
    """
    if n < 2 or ell < n - 1:
        raise ValueError(f"need n >= 2 and ell >= n - 1, got n={n}, ell={ell}")
    missing = rng.randint(1, n)
    covered = [i for i in range(1, n + 1) if i != missing]
    stream = covered + [rng.choice(covered) for _ in range(ell - len(covered))]
    rng.shuffle(stream)
    return stream

"""Streaming algorithms that name an item missing from a stream, plus an adversarial test harness."""

from __future__ import annotations

from .algorithms import (
    BitCost,
    DeterministicMif,
    IntervalMif,
    OnTheFlyMif,
    StaticMif,
    bit_cost,
    intervals_init,
    long_regime_build,
    on_the_fly_query,
    preset_params,
    static_build,
)
from .harness import (
    ConfigError,
    GameResult,
    TrialConfig,
    TrialStats,
    card_guessing_game,
    play_game,
    run_trials,
)
from .report import ReportRow, emit_report, parse_report
from .sampler import ExactL1Sampler, SamplerParams, SketchL1Sampler, exact_sample, exact_sample_lp
from .stream import FAIL, Fail, FrequencyVector, Item, Update, apply_update, read_stream, write_stream

__all__ = [
    "BitCost",
    "ConfigError",
    "DeterministicMif",
    "ExactL1Sampler",
    "FAIL",
    "Fail",
    "FrequencyVector",
    "GameResult",
    "IntervalMif",
    "Item",
    "OnTheFlyMif",
    "ReportRow",
    "SamplerParams",
    "SketchL1Sampler",
    "StaticMif",
    "TrialConfig",
    "TrialStats",
    "Update",
    "apply_update",
    "bit_cost",
    "card_guessing_game",
    "emit_report",
    "exact_sample",
    "exact_sample_lp",
    "intervals_init",
    "long_regime_build",
    "on_the_fly_query",
    "parse_report",
    "play_game",
    "preset_params",
    "read_stream",
    "run_trials",
    "static_build",
    "write_stream",
]

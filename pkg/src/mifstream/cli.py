"""Experiment runner.

    mif run --model on_the_fly --n 10000 --ell 50 --adversary echo --trials 10000 --seed 7
    mif sweep --model intervals --n 1048576 --ell 256 --alpha 16 --adversary interval_hunter \\
        --sweep beta=8,16,32,64 --trials 2000
    mif sampler-tv
    mif selftest

Reports go to stdout (or ``--output``) as CSV or JSON. The exit status is
1 when a zero-error algorithm produced a wrong answer, 2 on bad
configuration.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from dataclasses import dataclass, field, replace
from pathlib import Path

from .checks import run_selftest, run_tv_battery
from .harness import ADVERSARIES, MODELS, ConfigError, TrialConfig, run_trials
from .report import ReportRow, emit_report
from .stream import read_stream

SEED_ENV = "MIF_SEED"
ROW_SEED_STRIDE = 10**6
SWEEP_AXES = {"m": int, "beta": int, "ell": int, "delta": float}
FORMATS = ("csv", "json")


@dataclass
class ExperimentConfig:
    model: str
    n: int
    ell: int
    sampler: str = "exact"
    k: int | None = None
    delta: float = 0.05
    alpha: int | None = None
    beta: int | None = None
    m: int | None = None
    alpha_guess: int | None = None
    adversary: str = "static_random"
    trials: int = 100
    seed: int = 0
    output_format: str = "csv"
    replay: list[int] | None = None
    sweep_axis: str | None = None
    sweep_values: list = field(default_factory=list)

    @property
    def adversary_kind(self) -> str:
        return self.adversary.split(":", 1)[0]

    def trial_config(self, row: int = 0, **overrides) -> TrialConfig:
        cfg = TrialConfig(
            model=self.model,
            n=self.n,
            ell=self.ell,
            sampler=self.sampler,
            k=self.k,
            delta=self.delta,
            alpha=self.alpha,
            beta=self.beta,
            m=self.m,
            adversary=self.adversary_kind,
            replay=self.replay,
            alpha_guess=self.alpha_guess,
            trials=self.trials,
            seed=self.seed + ROW_SEED_STRIDE * row,
        )
        return replace(cfg, **overrides)

    def points(self) -> list[dict]:
        if self.sweep_axis is None:
            return [{}]
        return [{self.sweep_axis: v} for v in self.sweep_values]


def _add_experiment_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="JSON file with default values for any flag")
    p.add_argument("--model", help=f"one of {', '.join(MODELS)}")
    p.add_argument("--sampler", help="exact or sketch (static / long_regime)")
    p.add_argument("--n", type=int, help="universe size")
    p.add_argument("--ell", type=int, help="stream length")
    p.add_argument("--k", type=int, help="excess length for long_regime (ell = n + k)")
    p.add_argument("--delta", type=float, help="target failure probability")
    p.add_argument("--alpha", type=int, help="interval length (intervals)")
    p.add_argument("--beta", type=int, help="tracked intervals (intervals)")
    p.add_argument("--m", type=int, help="override the number of parallel copies")
    p.add_argument("--alpha-guess", dest="alpha_guess", type=int, help="interval_hunter block size")
    p.add_argument("--adversary", help=f"one of {', '.join(a for a in ADVERSARIES if a != 'replay')} or replay:<path>")
    p.add_argument("--trials", type=int)
    p.add_argument("--seed", type=int, help=f"base seed (default ${SEED_ENV} or 0)")
    p.add_argument("--format", dest="output_format", help="csv or json")
    p.add_argument("--output", "-o", help="write the report here instead of stdout")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mif", description="Missing-item-finding experiments")
    sub = parser.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", help="run one parameter point")
    _add_experiment_flags(run)
    sweep = sub.add_parser("sweep", help="run one row per value of a single axis")
    _add_experiment_flags(sweep)
    sweep.add_argument(
        "--sweep", action="append", default=[], metavar="AXIS=V1,V2,...", help=f"axis in {', '.join(SWEEP_AXES)}"
    )
    tv = sub.add_parser("sampler-tv", help="sampler total-variation battery")
    tv.add_argument("--n", type=int, default=16)
    tv.add_argument("--vectors", type=int, default=20)
    tv.add_argument("--draws", type=int, default=100_000)
    tv.add_argument("--sketch-vectors", type=int, default=5)
    tv.add_argument("--sketch-seeds", type=int, default=2000)
    tv.add_argument("--seed", type=int)
    sub.add_parser("selftest", help="exhaustive small-universe oracle suites")
    return parser


_DEFAULTS = {"sampler": "exact", "delta": 0.05, "adversary": "static_random", "trials": 100, "output_format": "csv"}
_KEYS = ("model", "sampler", "n", "ell", "k", "delta", "alpha", "beta", "m", "alpha_guess", "adversary", "trials", "seed", "output_format")


def default_seed() -> int:
    return int(os.environ.get(SEED_ENV, "0"))


def parse_config(argv: list[str]) -> ExperimentConfig:
    """Parse ``run``/``sweep`` arguments into a validated config.

    Raises :class:`ConfigError` listing every violation found.
    """
    args = build_parser().parse_args(argv)
    if args.command not in ("run", "sweep"):
        raise ConfigError([f"{args.command} takes no experiment configuration"])
    return config_from_args(args)


def config_from_args(args: argparse.Namespace) -> ExperimentConfig:
    errors: list[str] = []
    values: dict = dict(_DEFAULTS)
    if args.config:
        try:
            loaded = json.loads(Path(args.config).read_text())
        except (OSError, ValueError) as exc:
            raise ConfigError([f"cannot read config file {args.config}: {exc}"]) from None
        unknown = set(loaded) - set(_KEYS) - {"sweep"}
        errors += [f"unknown config key {key!r}" for key in sorted(unknown)]
        values.update({k: v for k, v in loaded.items() if k in _KEYS or k == "sweep"})
    for key in _KEYS:
        v = getattr(args, key, None)
        if v is not None:
            values[key] = v
    if values.get("seed") is None:
        values["seed"] = default_seed()
    for key in ("model", "n", "ell"):
        if values.get(key) is None:
            errors.append(f"--{key} is required")

    sweep_specs = list(getattr(args, "sweep", []) or [])
    if not sweep_specs and "sweep" in values:
        file_sweep = values.pop("sweep")
        sweep_specs = [f"{k}={','.join(map(str, v))}" for k, v in file_sweep.items()]
    values.pop("sweep", None)
    axis = None
    sweep_values: list = []
    if args.command == "sweep":
        if len(sweep_specs) != 1:
            errors.append(f"sweep needs exactly one axis, got {len(sweep_specs)}")
        else:
            name, _, raw = sweep_specs[0].partition("=")
            if name not in SWEEP_AXES:
                errors.append(f"cannot sweep {name!r}; choose one of {', '.join(SWEEP_AXES)}")
            else:
                try:
                    sweep_values = [SWEEP_AXES[name](v) for v in raw.split(",") if v.strip()]
                except ValueError:
                    errors.append(f"bad value list for {name}: {raw!r}")
                if not sweep_values:
                    errors.append(f"sweep axis {name} has no values")
                axis = name

    if values["output_format"] not in FORMATS:
        errors.append(f"unknown format {values['output_format']!r}")

    replay = None
    adversary = values["adversary"]
    if adversary.startswith("replay:"):
        path = adversary.split(":", 1)[1]
        try:
            header_n, replay = read_stream(path)
        except FileNotFoundError:
            errors.append(f"replay file not found: {path}")
        except ValueError as exc:
            errors.append(f"bad replay file: {exc}")
        else:
            if header_n is not None and values.get("n") is not None and header_n != values["n"]:
                errors.append(f"replay file declares n={header_n}, config has n={values['n']}")
    elif adversary == "replay":
        errors.append("replay adversary needs a path: replay:<path>")

    if any(values.get(key) is None for key in ("model", "n", "ell")):
        # no full config to validate; still report bad names
        if values.get("model") is not None and values["model"] not in MODELS:
            errors.append(f"unknown model {values['model']!r}")
        if adversary.split(":", 1)[0] not in ADVERSARIES:
            errors.append(f"unknown adversary {adversary!r}")
        raise ConfigError(errors)

    config = ExperimentConfig(**{k: values.get(k) for k in _KEYS}, replay=replay, sweep_axis=axis, sweep_values=sweep_values)
    if config.adversary_kind == "replay" and replay is None and not any("replay" in e for e in errors):
        errors.append("replay adversary needs a path: replay:<path>")
    points = config.points() or [{}]
    for point in points:
        for err in config.trial_config(**point).errors():
            label = f" at {axis}={point[axis]}" if point else ""
            if err + label not in errors:
                errors.append(err + label)
    if errors:
        raise ConfigError(errors)
    return config


def _row(config: ExperimentConfig, index: int, point: dict) -> tuple[ReportRow, bool]:
    tc = config.trial_config(row=index, **point)
    stats = run_trials(tc)
    row = ReportRow(
        model=tc.model,
        n=tc.n,
        ell=tc.ell,
        params=tc.params_string(),
        adversary=config.adversary if tc.adversary == "replay" else tc.adversary,
        trials=stats.trials,
        failures=stats.failures,
        wrong_outputs=stats.wrong_outputs,
        fail_outputs=stats.fail_outputs,
        bound=tc.bound(),
        mean_bits=stats.mean_bits,
        max_bits=stats.max_bits,
        seed=tc.seed,
    )
    return row, tc.zero_error and stats.wrong_outputs > 0


def execute(config: ExperimentConfig) -> tuple[list[ReportRow], bool]:
    """Run every parameter point. Returns the rows and whether a zero-error violation occurred."""
    rows = []
    violated = False
    for index, point in enumerate(config.points()):
        row, bad = _row(config, index, point)
        rows.append(row)
        violated |= bad
    return rows, violated


def sweep(config: ExperimentConfig) -> list[ReportRow]:
    if config.sweep_axis is None:
        raise ConfigError(["sweep needs exactly one axis"])
    return execute(config)[0]


def _write(data: bytes, output: str | None) -> None:
    if output:
        Path(output).write_bytes(data)
    else:
        sys.stdout.buffer.write(data)
        sys.stdout.flush()


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "selftest":
        results = run_selftest()
        for r in results:
            print(r.line())
        return 0 if all(r.passed for r in results) else 1
    if args.command == "sampler-tv":
        seed = default_seed() if args.seed is None else args.seed
        battery = run_tv_battery(
            n=args.n,
            exact_vectors=args.vectors,
            draws=args.draws,
            sketch_vectors=args.sketch_vectors,
            sketch_seeds=args.sketch_seeds,
            seed=seed,
        )
        for line in battery.lines():
            print(line)
        fail_slack = 3 * math.sqrt(0.25 * 0.75 / max(args.sketch_seeds, 1))
        ok = battery.exact_max_tv <= 0.02 and battery.sketch_max_tv <= 0.1 and battery.sketch_max_fail <= 0.25 + fail_slack
        print("PASS" if ok else "FAIL")
        return 0 if ok else 1
    try:
        config = config_from_args(args)
    except ConfigError as exc:
        for err in exc.errors:
            print(f"mif: error: {err}", file=sys.stderr)
        return 2
    rows, violated = execute(config)
    _write(emit_report(rows, config.output_format), getattr(args, "output", None))
    if violated:
        print("mif: zero-error violation: a wrong answer was reported", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())

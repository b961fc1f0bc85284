"""Seed derivation. Every random stream in the package comes from here."""

from __future__ import annotations

import random

import numpy as np


def derive_seed(*entropy: int) -> int:
    """A 64-bit seed derived from a tuple of nonnegative ints."""
    ss = np.random.SeedSequence([e & 0xFFFFFFFFFFFFFFFF for e in entropy])
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def make_rng(*entropy: int) -> random.Random:
    return random.Random(derive_seed(*entropy))

"""Turnstile stream model and brute-force ground truth.

Items are 1-based ids in ``[1, n]``. A stream is a sequence of ``Update``
events; the frequency vector holds the running sum of deltas per item.
The missing-item algorithms offset every coordinate by -1 before the
stream starts, so an item is missing exactly when its frequency is -1.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence, Union

import numpy as np


class ItemRangeError(ValueError):
    """An item id fell outside ``[1, n]``."""


def check_item(item: int, n: int) -> int:
    if not 1 <= item <= n:
        raise ItemRangeError(f"item {item} outside [1, {n}]")
    return item


@dataclass(frozen=True)
class Update:
    item: int
    delta: int = 1

    def __post_init__(self) -> None:
        if self.delta == 0:
            raise ValueError("update delta must be nonzero")


@dataclass(frozen=True)
class Item:
    """A reported item together with the sampler's estimate of its frequency."""

    item: int
    estimate: int


@dataclass(frozen=True)
class Fail:
    def __repr__(self) -> str:
        return "FAIL"


FAIL = Fail()
QueryResult = Union[Item, Fail]


class FrequencyVector:
    """Dense signed counts over ``[1, n]``."""

    __slots__ = ("n", "f")

    def __init__(self, n: int, f: Iterable[int] | None = None):
        if n < 0:
            raise ValueError("n must be nonnegative")
        self.n = n
        if f is None:
            self.f = np.zeros(n, dtype=np.int64)
        else:
            self.f = np.array(list(f) if not isinstance(f, np.ndarray) else f, dtype=np.int64)
            if self.f.shape != (n,):
                raise ValueError(f"expected {n} coordinates, got {self.f.shape}")

    @classmethod
    def offset(cls, n: int) -> "FrequencyVector":
        """The vector after feeding ``(i, -1)`` for every item."""
        return cls(n, np.full(n, -1, dtype=np.int64))

    @classmethod
    def from_stream(cls, n: int, stream: Iterable[int], offset: bool = True) -> "FrequencyVector":
        fv = cls.offset(n) if offset else cls(n)
        for item in stream:
            fv.add(item, 1)
        return fv

    def add(self, item: int, delta: int) -> None:
        """In-place update; most callers want :func:`apply_update`."""
        check_item(item, self.n)
        self.f[item - 1] += delta

    def __getitem__(self, item: int) -> int:
        check_item(item, self.n)
        return int(self.f[item - 1])

    def copy(self) -> "FrequencyVector":
        return FrequencyVector(self.n, self.f.copy())

    def tolist(self) -> list[int]:
        return [int(x) for x in self.f]

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, FrequencyVector):
            return NotImplemented
        return self.n == other.n and bool(np.array_equal(self.f, other.f))

    def __repr__(self) -> str:
        return f"FrequencyVector(n={self.n}, f={self.tolist()})"


def apply_update(fv: FrequencyVector, u: Update) -> FrequencyVector:
    out = fv.copy()
    out.add(u.item, u.delta)
    return out


def l1_norm(fv: FrequencyVector) -> int:
    return int(np.abs(fv.f).sum())


def net_sum(fv: FrequencyVector) -> int:
    return int(fv.f.sum())


def missing_items_oracle(n: int, stream: Iterable[int]) -> set[int]:
    seen = set()
    for item in stream:
        seen.add(check_item(item, n))
    return set(range(1, n + 1)) - seen


def read_stream(path: str | Path) -> tuple[int | None, list[int]]:
    """Parse a replay file: one decimal id per line, optional ``n=<int>`` header.

    Returns ``(n, items)`` where ``n`` is None when the header is absent.
    """
    n = None
    items: list[int] = []
    lines = Path(path).read_text().splitlines()
    for lineno, raw in enumerate(lines, 1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("n="):
            if items or n is not None:
                raise ValueError(f"{path}:{lineno}: header must be the first line")
            n = int(line[2:])
            continue
        try:
            items.append(int(line))
        except ValueError:
            raise ValueError(f"{path}:{lineno}: not an item id: {line!r}") from None
    if n is not None:
        for item in items:
            check_item(item, n)
    elif any(item < 1 for item in items):
        raise ItemRangeError(f"{path}: item ids are 1-based")
    return n, items


def write_stream(path: str | Path, items: Sequence[int], n: int | None = None) -> None:
    lines = [] if n is None else [f"n={n}"]
    lines.extend(str(i) for i in items)
    Path(path).write_text("\n".join(lines) + "\n")

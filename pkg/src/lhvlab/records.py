"""Columnar record sets produced by the harness.

Outcome codes follow :mod:`lhvlab.models`: ``+1``/``-1`` click, ``0`` no click.
Franson slots are ``0`` (early) and ``1`` (late).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import numpy as np

EARLY, LATE = 0, 1


@dataclass(frozen=True)
class BellRecords:
    alice: np.ndarray
    bob: np.ndarray

    def __len__(self) -> int:
        return int(self.alice.size)

    @classmethod
    def from_trials(cls, trials: Iterable) -> BellRecords:
        trials = list(trials)
        return cls(
            np.array([t.alice for t in trials], dtype=np.int8),
            np.array([t.bob for t in trials], dtype=np.int8),
        )

    @classmethod
    def concat(cls, parts: list[BellRecords]) -> BellRecords:
        return cls(np.concatenate([p.alice for p in parts]), np.concatenate([p.bob for p in parts]))

    @property
    def coincident(self) -> np.ndarray:
        return (self.alice != 0) & (self.bob != 0)

    def equals(self, other: BellRecords) -> bool:
        return np.array_equal(self.alice, other.alice) and np.array_equal(self.bob, other.bob)


@dataclass(frozen=True)
class FransonRecords:
    alice: np.ndarray
    bob: np.ndarray
    alice_slot: np.ndarray
    bob_slot: np.ndarray
    emission_time: np.ndarray
    delta_t: float = 1.0

    def __len__(self) -> int:
        return int(self.alice.size)

    @classmethod
    def from_trials(cls, trials: Iterable, delta_t: float = 1.0) -> FransonRecords:
        trials = list(trials)
        return cls(
            np.array([t.alice.value for t in trials], dtype=np.int8),
            np.array([t.bob.value for t in trials], dtype=np.int8),
            np.array([t.alice.slot for t in trials], dtype=np.int8),
            np.array([t.bob.slot for t in trials], dtype=np.int8),
            np.array([t.emission_time for t in trials], dtype=np.float64),
            delta_t,
        )

    @classmethod
    def concat(cls, parts: list[FransonRecords]) -> FransonRecords:
        cols = ("alice", "bob", "alice_slot", "bob_slot", "emission_time")
        return cls(*(np.concatenate([getattr(p, c) for p in parts]) for c in cols), parts[0].delta_t)

    @property
    def coincident(self) -> np.ndarray:
        return self.alice_slot == self.bob_slot

    def subset(self, mask: np.ndarray) -> FransonRecords:
        return FransonRecords(
            self.alice[mask],
            self.bob[mask],
            self.alice_slot[mask],
            self.bob_slot[mask],
            self.emission_time[mask],
            self.delta_t,
        )

    def equals(self, other: FransonRecords) -> bool:
        cols = ("alice", "bob", "alice_slot", "bob_slot", "emission_time")
        return all(np.array_equal(getattr(self, c), getattr(other, c)) for c in cols)

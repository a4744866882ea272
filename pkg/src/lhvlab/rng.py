"""Counter-based per-trial random streams (SplitMix64).

Each trial owns an independent stream whose starting state is a pure
function of ``(master_seed, pair_index, trial_index)``. Draw ``j`` of a
stream is ``mix64(state0 + (j + 1) * GOLDEN)``, so any draw of any trial
can be computed directly, in any order, scalar or vectorised, and the
two routes are bit-identical.

Pinned constants (golden-value tests guard them):

    GOLDEN     = 0x9E3779B97F4A7C15
    TRIAL_SALT = 0xD1B54A32D192ED03
    state0     = mix64(seed ^ (pair * GOLDEN) ^ mix64(trial + TRIAL_SALT))
    uniform    = (draw >> 11) * 2**-53            in [0, 1)
"""

from __future__ import annotations

import numpy as np

MASK64 = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15
TRIAL_SALT = 0xD1B54A32D192ED03
_M1 = 0xBF58476D1CE4E5B9
_M2 = 0x94D049BB133111EB
_INV53 = 1.0 / (1 << 53)


def mix64(z: int) -> int:
    z &= MASK64
    z = ((z ^ (z >> 30)) * _M1) & MASK64
    z = ((z ^ (z >> 27)) * _M2) & MASK64
    return z ^ (z >> 31)


def initial_state(master_seed: int, pair_index: int, trial_index: int) -> int:
    pair_scrambled = (pair_index * GOLDEN) & MASK64
    return mix64((master_seed & MASK64) ^ pair_scrambled ^ mix64(trial_index + TRIAL_SALT))


class TrialStream:
    """Sequential view of one trial's stream."""

    __slots__ = ("state0", "counter")

    def __init__(self, state0: int) -> None:
        self.state0 = state0 & MASK64
        self.counter = 0

    def next_u64(self) -> int:
        self.counter += 1
        return mix64(self.state0 + self.counter * GOLDEN)

    def uniform(self) -> float:
        return (self.next_u64() >> 11) * _INV53


def derive_trial_rng(master_seed: int, pair_index: int, trial_index: int) -> TrialStream:
    return TrialStream(initial_state(master_seed, pair_index, trial_index))


# -- vectorised route -------------------------------------------------------

_U_M1 = np.uint64(_M1)
_U_M2 = np.uint64(_M2)
_U_GOLDEN = np.uint64(GOLDEN)


def mix64_array(z: np.ndarray) -> np.ndarray:
    z = z.astype(np.uint64, copy=True)
    with np.errstate(over="ignore"):
        z ^= z >> np.uint64(30)
        z *= _U_M1
        z ^= z >> np.uint64(27)
        z *= _U_M2
        z ^= z >> np.uint64(31)
    return z


def initial_states(master_seed: int, pair_index: int, trial_indices: np.ndarray) -> np.ndarray:
    trials = np.asarray(trial_indices, dtype=np.uint64)
    with np.errstate(over="ignore"):
        salted = mix64_array(trials + np.uint64(TRIAL_SALT))
    key = np.uint64((master_seed & MASK64) ^ ((pair_index * GOLDEN) & MASK64))
    return mix64_array(salted ^ key)


def uniform_block(
    master_seed: int, pair_index: int, trial_indices: np.ndarray, n_draws: int
) -> np.ndarray:
    """Uniforms of shape ``(n_draws, len(trial_indices))``; row ``j`` is draw ``j``."""
    states = initial_states(master_seed, pair_index, trial_indices)
    out = np.empty((n_draws, states.size), dtype=np.float64)
    with np.errstate(over="ignore"):
        for j in range(n_draws):
            z = mix64_array(states + np.uint64(j + 1) * _U_GOLDEN)
            out[j] = (z >> np.uint64(11)).astype(np.float64) * _INV53
    return out

"""Franson-type model with perfect detectors.

Erased events of the circle model are not lost: the filtered photon is
detected one slot away from its partner, giving a non-coincident pair.
Kept events are coincident in a slot fixed by a fair coin at the source,
so early and late coincidences are equally frequent and so are the two
orders of non-coincident pairs.

Each side is local: the non-filtered side always clicks in the committed
slot with its linear-model value; the filtered side joins that slot if its
keep test passes, otherwise it clicks in the other slot with an
independent fair value. Phases are read once, at emission.

Sign convention: the target correlation is ``-cos(alpha + beta)``; Bob's
phase enters the circle machinery as ``-beta``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .geometry import TWO_PI, sgn, sgn_array
from .models import CIRCLE_KEEP_SCALE
from .records import EARLY, LATE, FransonRecords
from .stats import CorrEstimate, correlation_from_counts

FRANSON_DRAWS = 7  # 6 hidden + emission time
QUANTUM_FRANSON_DRAWS = 7
DEFAULT_WINDOW = 1.0e4  # in units of delta_t


@dataclass(frozen=True)
class PhaseSchedule:
    """Interferometer phases as a function of time.

    For ``waveform="square"`` both phases step up by ``amplitude`` for every
    other interval of length ``period``: ``period`` is the dwell time between
    successive switches (not the full up-down cycle), in units of delta_t.
    """

    base_alpha: float
    base_beta: float
    waveform: str = "constant"
    period: float = 1.0
    amplitude: float = math.pi / 2

    def __post_init__(self) -> None:
        if self.waveform not in ("constant", "square"):
            raise ValueError(f"unknown waveform {self.waveform!r}")
        if not self.period > 0:
            raise ValueError("period must be positive")

    def level(self, t: float) -> int:
        if self.waveform == "constant":
            return 0
        return int(math.floor(t / self.period)) % 2

    def alpha_at(self, t: float) -> float:
        return self.base_alpha + self.amplitude * self.level(t)

    def beta_at(self, t: float) -> float:
        return self.base_beta + self.amplitude * self.level(t)

    def levels(self, t: np.ndarray) -> np.ndarray:
        if self.waveform == "constant":
            return np.zeros(np.shape(t), dtype=np.int64)
        return np.floor(np.asarray(t) / self.period).astype(np.int64) % 2

    def to_dict(self) -> dict:
        return {
            "base_alpha": self.base_alpha,
            "base_beta": self.base_beta,
            "waveform": self.waveform,
            "period": self.period,
            "amplitude": self.amplitude,
        }


@dataclass(frozen=True)
class TimedOutcome:
    value: int
    slot: int  # EARLY or LATE

    def __post_init__(self) -> None:
        if self.value not in (-1, 1) or self.slot not in (EARLY, LATE):
            raise ValueError(f"bad timed outcome ({self.value}, {self.slot})")


@dataclass(frozen=True)
class FransonRecord:
    alice: TimedOutcome
    bob: TimedOutcome
    emission_index: int = 0
    emission_time: float = 0.0

    @property
    def coincident(self) -> bool:
        return self.alice.slot == self.bob.slot


@dataclass(frozen=True)
class FransonHidden:
    phi: float
    r: float
    side_coin: str  # "A" or "B"
    slot_coin: int  # EARLY or LATE
    u_a: int
    u_b: int


def _coin(u: float) -> int:
    return 1 if u < 0.5 else -1


def sample_franson_hidden(rng) -> FransonHidden:
    phi = TWO_PI * rng.uniform()
    r = rng.uniform()
    side = "A" if rng.uniform() < 0.5 else "B"
    slot = EARLY if rng.uniform() < 0.5 else LATE
    return FransonHidden(phi, r, side, slot, _coin(rng.uniform()), _coin(rng.uniform()))


def franson_trial(
    h: FransonHidden,
    sched: PhaseSchedule,
    delta_t: float,
    emission_time: float,
    emission_index: int = 0,
) -> FransonRecord:
    if not delta_t > 0:
        raise ValueError("delta_t must be positive")
    a = sched.alpha_at(emission_time)
    b = -sched.beta_at(emission_time)
    ca = math.cos(h.phi - a)
    cb = math.cos(h.phi - b)
    s = h.slot_coin
    alice = TimedOutcome(sgn(ca), s)
    bob = TimedOutcome(-sgn(cb), s)
    if h.side_coin == "A":
        if not h.r < CIRCLE_KEEP_SCALE * abs(ca):
            alice = TimedOutcome(h.u_a, 1 - s)
    elif not h.r < CIRCLE_KEEP_SCALE * abs(cb):
        bob = TimedOutcome(h.u_b, 1 - s)
    return FransonRecord(alice, bob, emission_index, emission_time)


def quantum_franson_trial(
    rng,
    alpha: float,
    beta: float,
    visibility: float = 1.0,
    emission_time: float = 0.0,
    emission_index: int = 0,
) -> FransonRecord:
    """Standard prediction: half the pairs coincident with correlation
    ``-V cos(alpha + beta)``, half split across slots with fair, independent values."""
    if not (0.0 <= visibility <= 1.0):
        raise ValueError(f"visibility must be in [0, 1], got {visibility}")
    u = [rng.uniform() for _ in range(6)]
    if u[0] < 0.5:
        slot = EARLY if u[1] < 0.5 else LATE
        c1, c2, c3 = _joint_cdf(visibility * math.cos(alpha + beta))
        k = 0 if u[2] < c1 else 1 if u[2] < c2 else 2 if u[2] < c3 else 3
        va, vb = _JOINT[k]
        return FransonRecord(TimedOutcome(va, slot), TimedOutcome(vb, slot), emission_index, emission_time)
    slot_a = EARLY if u[3] < 0.5 else LATE
    return FransonRecord(
        TimedOutcome(_coin(u[4]), slot_a),
        TimedOutcome(_coin(u[5]), 1 - slot_a),
        emission_index,
        emission_time,
    )


_JOINT = ((1, 1), (1, -1), (-1, 1), (-1, -1))


def _joint_cdf(vc: float) -> tuple[float, float, float]:
    p_same = (1.0 - vc) / 4.0
    p_diff = (1.0 + vc) / 4.0
    return p_same, p_same + p_diff, p_same + 2.0 * p_diff


# -- vectorised fast path ---------------------------------------------------


def franson_batch(
    u: np.ndarray, sched: PhaseSchedule, delta_t: float, window: float
) -> FransonRecords:
    """Evaluate trials from their uniforms, shape ``(FRANSON_DRAWS, n)``."""
    if not delta_t > 0:
        raise ValueError("delta_t must be positive")
    phi = TWO_PI * u[0]
    r = u[1]
    side_a = u[2] < 0.5
    slot = np.where(u[3] < 0.5, EARLY, LATE).astype(np.int8)
    u_a = np.where(u[4] < 0.5, 1, -1).astype(np.int8)
    u_b = np.where(u[5] < 0.5, 1, -1).astype(np.int8)
    t = window * delta_t * u[6]

    lev = sched.levels(t)
    a = sched.base_alpha + sched.amplitude * lev
    b = -(sched.base_beta + sched.amplitude * lev)
    ca = np.cos(phi - a)
    cb = np.cos(phi - b)
    alice = sgn_array(ca)
    bob = -sgn_array(cb)
    slot_a = slot.copy()
    slot_b = slot.copy()
    drop_a = side_a & ~(r < CIRCLE_KEEP_SCALE * np.abs(ca))
    drop_b = ~side_a & ~(r < CIRCLE_KEEP_SCALE * np.abs(cb))
    alice[drop_a] = u_a[drop_a]
    slot_a[drop_a] = 1 - slot[drop_a]
    bob[drop_b] = u_b[drop_b]
    slot_b[drop_b] = 1 - slot[drop_b]
    return FransonRecords(alice, bob, slot_a, slot_b, t, delta_t)


def franson_hidden_from_uniforms(u: np.ndarray, i: int) -> tuple[FransonHidden, float]:
    """Scalar hidden state and unscaled emission uniform for column ``i``."""
    h = FransonHidden(
        float(TWO_PI * u[0, i]),
        float(u[1, i]),
        "A" if u[2, i] < 0.5 else "B",
        EARLY if u[3, i] < 0.5 else LATE,
        _coin(u[4, i]),
        _coin(u[5, i]),
    )
    return h, float(u[6, i])


def quantum_franson_batch(
    u: np.ndarray, alpha: float, beta: float, visibility: float, delta_t: float, window: float
) -> FransonRecords:
    if not (0.0 <= visibility <= 1.0):
        raise ValueError(f"visibility must be in [0, 1], got {visibility}")
    coinc = u[0] < 0.5
    slot = np.where(u[1] < 0.5, EARLY, LATE).astype(np.int8)
    c1, c2, c3 = _joint_cdf(visibility * math.cos(alpha + beta))
    k = (u[2] >= c1).astype(np.int8) + (u[2] >= c2) + (u[2] >= c3)
    table = np.array(_JOINT, dtype=np.int8)
    early_a = np.where(u[3] < 0.5, EARLY, LATE).astype(np.int8)
    alice = np.where(coinc, table[k, 0], np.where(u[4] < 0.5, 1, -1)).astype(np.int8)
    bob = np.where(coinc, table[k, 1], np.where(u[5] < 0.5, 1, -1)).astype(np.int8)
    slot_a = np.where(coinc, slot, early_a).astype(np.int8)
    slot_b = np.where(coinc, slot, 1 - early_a).astype(np.int8)
    t = window * delta_t * u[6]
    return FransonRecords(alice, bob, slot_a, slot_b, t, delta_t)


@dataclass(frozen=True)
class PhaseBin:
    alpha: float
    beta: float
    estimate: CorrEstimate
    target: float = field(init=False)
    residual: float = field(init=False)

    def __post_init__(self) -> None:
        target = -math.cos(self.alpha + self.beta)
        object.__setattr__(self, "target", target)
        object.__setattr__(self, "residual", abs(self.estimate.e_hat - target))

    def to_dict(self) -> dict:
        return {
            "alpha": self.alpha,
            "beta": self.beta,
            **self.estimate.to_dict(),
            "target": self.target,
            "residual": self.residual,
        }


def bin_by_detection_phase(records: FransonRecords, sched: PhaseSchedule) -> list[PhaseBin]:
    """Correlation of coincident pairs grouped by the phases in force when they
    were detected (emission time, plus delta_t for the late slot)."""
    co = records.subset(records.coincident)
    t_det = co.emission_time + co.alice_slot.astype(np.float64) * records.delta_t
    lev = sched.levels(t_det)
    prod = co.alice.astype(np.int64) * co.bob
    bins = []
    for level in np.unique(lev):
        sel = prod[lev == level]
        n_same = int(np.count_nonzero(sel > 0))
        est = correlation_from_counts(n_same, 0, int(sel.size) - n_same, 0)
        bins.append(
            PhaseBin(
                sched.base_alpha + sched.amplitude * int(level),
                sched.base_beta + sched.amplitude * int(level),
                est,
            )
        )
    return bins

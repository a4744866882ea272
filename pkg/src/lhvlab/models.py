"""Bell-type local hidden variable models and the singlet oracle sampler.

Every model is a pure function ``(hidden state, setting) -> local outcome``
evaluated once per side, so locality holds by construction: nothing on
Alice's side reads Bob's setting and vice versa.

Outcomes are encoded as small integers: ``+1``/``-1`` for a click with that
value, ``0`` (``NO_CLICK``) for a missing detection. The same encoding is
used in the vectorised ``*_batch`` functions, which are the fast path used
by the harness and are bit-identical to the scalar functions.

Erasure rule
------------
Starting from the linear model (``sgn cos(phi - a)`` versus
``-sgn cos(phi - b)``), one side (chosen by a fair coin fixed at the source)
keeps its click only with a local probability whose mean is exactly 1/2:

* circle: ``(pi/4) |cos(phi - x)|``
* sphere: ``|x . lambda|``

Conditioned on both clicking, both rules give correlation ``-cos(theta)``.
The sphere rule is rotation invariant, the circle rule only sees azimuths.
An optional double-null branch (probability 1/9 by default) makes the click
pattern that of two independent detectors of efficiency 2/3.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .geometry import (
    TWO_PI,
    Direction3,
    as_direction,
    azimuth,
    relative_angle,
    sgn,
    sgn_array,
)

NO_CLICK = 0
CIRCLE_KEEP_SCALE = math.pi / 4.0

# fixed per-trial draw budgets; changing these shifts every stream
CIRCLE_DRAWS = 4
SPHERE_DRAWS = 5
SINGLET_DRAWS = 1

PATTERNS = ("coincidence", "alice-only", "bob-only", "double-null")


@dataclass(frozen=True)
class TrialRecord:
    alice: int
    bob: int

    def __post_init__(self) -> None:
        if self.alice not in (-1, 0, 1) or self.bob not in (-1, 0, 1):
            raise ValueError(f"bad outcome codes ({self.alice}, {self.bob})")

    @property
    def pattern(self) -> str:
        if self.alice and self.bob:
            return "coincidence"
        if self.alice:
            return "alice-only"
        if self.bob:
            return "bob-only"
        return "double-null"


@dataclass(frozen=True)
class ErasureOptions:
    """Options shared by the erasure models.

    ``weight_power`` raises the keep weight to a power. It exists only as a
    negative-control hook for the acceptance run; anything other than 1
    breaks the model on purpose.
    """

    null_injection_probability: float = 1.0 / 9.0
    symmetrize: bool = True
    weight_power: float = 1.0

    def __post_init__(self) -> None:
        p = self.null_injection_probability
        if not (0.0 <= p <= 1.0):
            raise ValueError(f"null_injection_probability must be in [0, 1], got {p}")
        if not self.weight_power > 0:
            raise ValueError("weight_power must be positive")


BARE = ErasureOptions(null_injection_probability=0.0)


@dataclass(frozen=True)
class CircleHidden:
    phi: float
    r: float
    side_coin: str  # "A" or "B": which side carries the erasure filter
    null_coin: float


@dataclass(frozen=True)
class SphereHidden:
    lam: Direction3
    r: float
    side_coin: str
    null_coin: float


def sample_circle_hidden(rng) -> CircleHidden:
    phi = TWO_PI * rng.uniform()
    r = rng.uniform()
    side = "A" if rng.uniform() < 0.5 else "B"
    return CircleHidden(phi, r, side, rng.uniform())


def _sphere_point(u0: float, u1: float) -> tuple[float, float, float]:
    z = 2.0 * u0 - 1.0
    az = TWO_PI * u1
    s = math.sqrt(1.0 - z * z)
    return s * math.cos(az), s * math.sin(az), z


def sample_sphere_hidden(rng) -> SphereHidden:
    u0, u1 = rng.uniform(), rng.uniform()
    lam = Direction3(*_sphere_point(u0, u1))
    r = rng.uniform()
    side = "A" if rng.uniform() < 0.5 else "B"
    return SphereHidden(lam, r, side, rng.uniform())


def _keep_weight(c: float, scale: float, power: float) -> float:
    w = abs(c)
    if power != 1.0:
        w = w**power
    return scale * w


def _filtered_side(side_coin: str, opts: ErasureOptions) -> str:
    return side_coin if opts.symmetrize else "A"


def linear_trial(h: CircleHidden, a: float, b: float) -> TrialRecord:
    return TrialRecord(sgn(math.cos(h.phi - a)), -sgn(math.cos(h.phi - b)))


def erased_circle_trial(
    h: CircleHidden, a: float, b: float, opts: ErasureOptions = ErasureOptions()
) -> TrialRecord:
    if h.null_coin < opts.null_injection_probability:
        return TrialRecord(NO_CLICK, NO_CLICK)
    ca = math.cos(h.phi - a)
    cb = math.cos(h.phi - b)
    alice, bob = sgn(ca), -sgn(cb)
    if _filtered_side(h.side_coin, opts) == "A":
        if not h.r < _keep_weight(ca, CIRCLE_KEEP_SCALE, opts.weight_power):
            alice = NO_CLICK
    elif not h.r < _keep_weight(cb, CIRCLE_KEEP_SCALE, opts.weight_power):
        bob = NO_CLICK
    return TrialRecord(alice, bob)


def sphere_erasure_trial(
    h: SphereHidden, a: Direction3, b: Direction3, opts: ErasureOptions = ErasureOptions()
) -> TrialRecord:
    a, b = as_direction(a), as_direction(b)
    if h.null_coin < opts.null_injection_probability:
        return TrialRecord(NO_CLICK, NO_CLICK)
    lam = h.lam
    da = lam.x * a.x + lam.y * a.y + lam.z * a.z
    db = lam.x * b.x + lam.y * b.y + lam.z * b.z
    alice, bob = sgn(da), -sgn(db)
    if _filtered_side(h.side_coin, opts) == "A":
        if not h.r < _keep_weight(da, 1.0, opts.weight_power):
            alice = NO_CLICK
    elif not h.r < _keep_weight(db, 1.0, opts.weight_power):
        bob = NO_CLICK
    return TrialRecord(alice, bob)


def circle_model_with_3d_settings(
    h: CircleHidden, a: Direction3, b: Direction3, opts: ErasureOptions = ErasureOptions()
) -> TrialRecord:
    """The circle model fed polariser vectors: it can only use their azimuths
    about the lab frame fixed at the source."""
    return erased_circle_trial(h, azimuth(a), azimuth(b), opts)


def _singlet_cdf(cos_theta: float) -> tuple[float, float, float]:
    p_same = (1.0 - cos_theta) / 4.0
    p_diff = (1.0 + cos_theta) / 4.0
    return p_same, p_same + p_diff, p_same + 2.0 * p_diff


_SINGLET_TABLE = ((1, 1), (1, -1), (-1, 1), (-1, -1))


def quantum_singlet_trial(rng, a: Direction3, b: Direction3) -> TrialRecord:
    """One joint draw from ``P(x, y) = (1 - x y cos theta) / 4``.

    Deliberately nonlocal: a single uniform selects the joint outcome.
    """
    c = math.cos(relative_angle(a, b))
    u = rng.uniform()
    c1, c2, c3 = _singlet_cdf(c)
    k = 0 if u < c1 else 1 if u < c2 else 2 if u < c3 else 3
    return TrialRecord(*_SINGLET_TABLE[k])


# -- vectorised fast path ---------------------------------------------------


@dataclass(frozen=True)
class CircleHiddenBatch:
    phi: np.ndarray
    r: np.ndarray
    side_a: np.ndarray  # bool
    null_coin: np.ndarray

    @classmethod
    def from_uniforms(cls, u: np.ndarray) -> CircleHiddenBatch:
        return cls(TWO_PI * u[0], u[1], u[2] < 0.5, u[3])

    def __getitem__(self, i: int) -> CircleHidden:
        return CircleHidden(
            float(self.phi[i]), float(self.r[i]), "A" if self.side_a[i] else "B", float(self.null_coin[i])
        )


@dataclass(frozen=True)
class SphereHiddenBatch:
    lam: np.ndarray  # (3, n)
    r: np.ndarray
    side_a: np.ndarray
    null_coin: np.ndarray

    @classmethod
    def from_uniforms(cls, u: np.ndarray) -> SphereHiddenBatch:
        z = 2.0 * u[0] - 1.0
        az = TWO_PI * u[1]
        s = np.sqrt(1.0 - z * z)
        lam = np.stack([s * np.cos(az), s * np.sin(az), z])
        return cls(lam, u[2], u[3] < 0.5, u[4])

    def __getitem__(self, i: int) -> SphereHidden:
        lam = Direction3(*(float(c) for c in self.lam[:, i]))
        return SphereHidden(lam, float(self.r[i]), "A" if self.side_a[i] else "B", float(self.null_coin[i]))


def _weights(c: np.ndarray, scale: float, power: float) -> np.ndarray:
    w = np.abs(c)
    if power != 1.0:
        w = w**power
    return scale * w


def _apply_erasure(
    alice: np.ndarray,
    bob: np.ndarray,
    keep_a: np.ndarray,
    keep_b: np.ndarray,
    h,
    opts: ErasureOptions,
) -> tuple[np.ndarray, np.ndarray]:
    side_a = h.side_a if opts.symmetrize else np.ones_like(h.side_a)
    alice[side_a & ~keep_a] = NO_CLICK
    bob[~side_a & ~keep_b] = NO_CLICK
    null = h.null_coin < opts.null_injection_probability
    alice[null] = NO_CLICK
    bob[null] = NO_CLICK
    return alice, bob


def linear_batch(h: CircleHiddenBatch, a: float, b: float) -> tuple[np.ndarray, np.ndarray]:
    return sgn_array(np.cos(h.phi - a)), -sgn_array(np.cos(h.phi - b))


def erased_circle_batch(
    h: CircleHiddenBatch, a: float, b: float, opts: ErasureOptions = ErasureOptions()
) -> tuple[np.ndarray, np.ndarray]:
    ca = np.cos(h.phi - a)
    cb = np.cos(h.phi - b)
    keep_a = h.r < _weights(ca, CIRCLE_KEEP_SCALE, opts.weight_power)
    keep_b = h.r < _weights(cb, CIRCLE_KEEP_SCALE, opts.weight_power)
    return _apply_erasure(sgn_array(ca), -sgn_array(cb), keep_a, keep_b, h, opts)


def sphere_erasure_batch(
    h: SphereHiddenBatch, a: Direction3, b: Direction3, opts: ErasureOptions = ErasureOptions()
) -> tuple[np.ndarray, np.ndarray]:
    a, b = as_direction(a), as_direction(b)
    lx, ly, lz = h.lam
    da = lx * a.x + ly * a.y + lz * a.z
    db = lx * b.x + ly * b.y + lz * b.z
    keep_a = h.r < _weights(da, 1.0, opts.weight_power)
    keep_b = h.r < _weights(db, 1.0, opts.weight_power)
    return _apply_erasure(sgn_array(da), -sgn_array(db), keep_a, keep_b, h, opts)


def circle_3d_batch(
    h: CircleHiddenBatch, a: Direction3, b: Direction3, opts: ErasureOptions = ErasureOptions()
) -> tuple[np.ndarray, np.ndarray]:
    return erased_circle_batch(h, azimuth(a), azimuth(b), opts)


def quantum_singlet_batch(u: np.ndarray, a: Direction3, b: Direction3) -> tuple[np.ndarray, np.ndarray]:
    c1, c2, c3 = _singlet_cdf(math.cos(relative_angle(a, b)))
    k = (u[0] >= c1).astype(np.int8) + (u[0] >= c2) + (u[0] >= c3)
    table = np.array(_SINGLET_TABLE, dtype=np.int8)
    return table[k, 0], table[k, 1]

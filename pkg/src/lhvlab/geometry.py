"""Angles, unit vectors and the dichotomic sign convention shared by every model."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

TWO_PI = 2.0 * math.pi
UNIT_TOL = 1e-9


def normalize_angle(x: float) -> float:
    """Map ``x`` into ``[0, 2*pi)``."""
    y = math.fmod(x, TWO_PI)
    if y < 0.0:
        y += TWO_PI
    # fmod of a tiny negative number can round up to exactly 2*pi
    if y >= TWO_PI:
        y = 0.0
    return y


@dataclass(frozen=True)
class Angle:
    radians: float

    def __post_init__(self) -> None:
        if not math.isfinite(self.radians):
            raise ValueError(f"angle must be finite, got {self.radians!r}")
        object.__setattr__(self, "radians", normalize_angle(self.radians))

    def __float__(self) -> float:
        return self.radians


@dataclass(frozen=True)
class Direction3:
    x: float
    y: float
    z: float

    def __post_init__(self) -> None:
        n2 = self.x * self.x + self.y * self.y + self.z * self.z
        if not math.isfinite(n2) or abs(n2 - 1.0) > UNIT_TOL:
            raise ValueError(f"not a unit vector: ({self.x}, {self.y}, {self.z})")

    @classmethod
    def normalized(cls, x: float, y: float, z: float) -> Direction3:
        n = math.sqrt(x * x + y * y + z * z)
        if n == 0.0:
            raise ValueError("cannot normalize the zero vector")
        return cls(x / n, y / n, z / n)

    @classmethod
    def in_plane(cls, angle: float) -> Direction3:
        """Unit vector in the x-y plane at ``angle`` from +x."""
        return cls(math.cos(angle), math.sin(angle), 0.0)

    def dot(self, other: Direction3) -> float:
        return self.x * other.x + self.y * other.y + self.z * other.z

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z])

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.x, self.y, self.z)


def as_direction(v) -> Direction3:
    if isinstance(v, Direction3):
        return v
    x, y, z = (float(c) for c in v)
    return Direction3(x, y, z)


def sgn(x: float) -> int:
    """Dichotomic outcome: +1 for ``x >= 0``, -1 otherwise."""
    if not math.isfinite(x):
        raise ValueError(f"sgn of non-finite value {x!r}")
    return 1 if x >= 0.0 else -1


def sgn_array(x: np.ndarray) -> np.ndarray:
    """Vectorised :func:`sgn` returning int8, zero mapped to +1."""
    return np.where(x >= 0.0, 1, -1).astype(np.int8)


def angular_distance(a: float, b: float) -> float:
    d = abs(float(a) - float(b)) % TWO_PI
    return min(d, TWO_PI - d)


def relative_angle(u: Direction3, v: Direction3) -> float:
    u, v = as_direction(u), as_direction(v)
    return math.acos(max(-1.0, min(1.0, u.dot(v))))


def azimuth(v: Direction3) -> float:
    """Angle of the x-y projection from +x; polar vectors map to 0."""
    v = as_direction(v)
    if v.x == 0.0 and v.y == 0.0:
        return 0.0
    return normalize_angle(math.atan2(v.y, v.x))

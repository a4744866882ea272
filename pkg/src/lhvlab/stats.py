"""Estimators and closed-form references for correlation, rates and efficiencies."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

import numpy as np

from .geometry import relative_angle
from .records import BellRecords, FransonRecords

SQRT2 = math.sqrt(2.0)
TSIRELSON = 2.0 * SQRT2
LHV_CHSH_BOUND = 2.0
REFERENCE_THRESHOLD = 0.8283  # four-digit reference value; 2/(1+sqrt2) rounds to 0.8284
LITERATURE_EFFICIENCY = 0.7780  # literature value for earlier detection-loophole models; not reproduced here


class EmptySampleError(ValueError):
    pass


@dataclass(frozen=True)
class CorrEstimate:
    e_hat: float
    se: float
    n_coinc: int

    def to_dict(self) -> dict:
        return {"e_hat": self.e_hat, "se": self.se, "n_coinc": self.n_coinc}


@dataclass(frozen=True)
class RatesSummary:
    f_cc: float
    f_a_only: float
    f_b_only: float
    f_none: float

    def __post_init__(self) -> None:
        fs = (self.f_cc, self.f_a_only, self.f_b_only, self.f_none)
        if min(fs) < 0 or abs(sum(fs) - 1.0) > 1e-12:
            raise ValueError(f"rates must be non-negative and sum to 1: {fs}")

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.f_cc, self.f_a_only, self.f_b_only, self.f_none)


def _as_records(records):
    if isinstance(records, (BellRecords, FransonRecords)):
        return records
    records = list(records)
    if records and hasattr(records[0], "emission_index"):
        return FransonRecords.from_trials(records)
    return BellRecords.from_trials(records)


def correlation_from_counts(n_pp: int, n_mm: int, n_pm: int, n_mp: int) -> CorrEstimate:
    n = n_pp + n_mm + n_pm + n_mp
    if n == 0:
        raise EmptySampleError("no coincidences")
    e = (n_pp + n_mm - n_pm - n_mp) / n
    return CorrEstimate(e, math.sqrt(max(0.0, 1.0 - e * e) / n), n)


def estimate_correlation(records) -> CorrEstimate:
    """Post-selected correlation: both-click for Bell records, same-slot for Franson."""
    rec = _as_records(records)
    mask = rec.coincident
    prod = rec.alice[mask].astype(np.int64) * rec.bob[mask]
    n = int(prod.size)
    n_same = int(np.count_nonzero(prod > 0))
    return correlation_from_counts(n_same, 0, n - n_same, 0)


def quantum_corr(theta: float) -> float:
    _check_theta(theta)
    return -math.cos(theta)


def linear_corr(theta: float) -> float:
    _check_theta(theta)
    return -1.0 + 2.0 * theta / math.pi


def _check_theta(theta: float) -> None:
    if not (-1e-12 <= theta <= math.pi + 1e-12):
        raise ValueError(f"theta must lie in [0, pi], got {theta}")


def chsh(e_ab: float, e_ab2: float, e_a2b: float, e_a2b2: float) -> float:
    """S = E(a,b) + E(a',b) + E(a',b') - E(a,b')."""
    for e in (e_ab, e_ab2, e_a2b, e_a2b2):
        if not (-1.0 <= e <= 1.0):
            raise ValueError(f"correlation out of range: {e}")
    return e_ab + e_a2b + e_a2b2 - e_ab2


def chsh_se(ses: Sequence[float]) -> float:
    return math.sqrt(sum(s * s for s in ses))


def detection_rates(records) -> RatesSummary:
    rec = _as_records(records)
    n = len(rec)
    if n == 0:
        raise EmptySampleError("no records")
    a = rec.alice != 0
    b = rec.bob != 0
    n_cc = int(np.count_nonzero(a & b))
    n_a = int(np.count_nonzero(a & ~b))
    n_b = int(np.count_nonzero(~a & b))
    n_none = n - n_cc - n_a - n_b
    return RatesSummary(n_cc / n, n_a / n, n_b / n, n_none / n)


def effective_efficiency(rates: RatesSummary) -> float:
    """Per-side detection probability under a symmetric click pattern."""
    den = rates.f_cc + rates.f_a_only
    if rates.f_cc <= 0 or den <= 0:
        raise EmptySampleError("no coincidences")
    return rates.f_cc / den


def naive_efficiency(rates: RatesSummary) -> float:
    """sqrt(coincidences / detected pairs): the square-root reading of a 50% coincidence rate."""
    den = rates.f_cc + rates.f_a_only + rates.f_b_only
    if rates.f_cc <= 0 or den <= 0:
        raise EmptySampleError("no coincidences")
    return math.sqrt(rates.f_cc / den)


def singles_to_coinc_ratio(rates: RatesSummary) -> float:
    if rates.f_cc <= 0:
        raise EmptySampleError("no coincidences")
    return (rates.f_a_only + rates.f_b_only) / rates.f_cc


def lhv_efficiency_bound(eta: float) -> float:
    """Largest post-selected |S| reachable by local models at per-side efficiency eta.

    Standard detection-loophole bound 4/eta - 2, taken from the literature.
    """
    if not (0.0 < eta <= 1.0):
        raise ValueError(f"eta must lie in (0, 1], got {eta}")
    return 4.0 / eta - 2.0


def efficiency_threshold() -> float:
    """Efficiency at which 4/eta - 2 meets 2*sqrt(2)."""
    return 2.0 / (1.0 + SQRT2)


def visibility_fit(points: Iterable[tuple[float, float, float]]) -> float:
    """Least-squares amplitude V of E = -V cos(x), weighted by 1/se^2.

    Falls back to unweighted least squares if any se is zero.
    """
    pts = [(float(x), float(e), float(s)) for x, e, s in points]
    if len(pts) < 2:
        raise ValueError("need at least two points")
    x = np.array([p[0] for p in pts])
    e = np.array([p[1] for p in pts])
    se = np.array([p[2] for p in pts])
    w = np.ones_like(se) if np.any(se <= 0) else 1.0 / se**2
    c = np.cos(x)
    den = float(np.sum(w * c * c))
    if den <= 1e-300 or float(np.sum(c * c)) <= 1e-24:
        raise ValueError("degenerate design: cos(x) vanishes at every point")
    return float(np.sum(w * e * -c) / den)


def noncoplanar_deviation(
    model: Callable[[object, object], CorrEstimate | float],
    setting_pairs: Sequence[tuple[object, object]],
) -> float:
    """Max |E_model(a, b) + cos(angle(a, b))| over the given vector pairs."""
    worst = 0.0
    for a, b in setting_pairs:
        est = model(a, b)
        e = est.e_hat if isinstance(est, CorrEstimate) else float(est)
        worst = max(worst, abs(e - quantum_corr(relative_angle(a, b))))
    return worst


@dataclass(frozen=True)
class MarginalCheck:
    """Click-conditioned marginals and single-detection value means, in SE units."""

    p_alice_plus: float
    z_alice: float
    p_bob_plus: float
    z_bob: float
    singles_mean_alice: float
    z_singles_alice: float
    singles_mean_bob: float
    z_singles_bob: float

    def max_z(self) -> float:
        return max(abs(self.z_alice), abs(self.z_bob), abs(self.z_singles_alice), abs(self.z_singles_bob))


def _fair_z(values: np.ndarray) -> tuple[float, float]:
    n = values.size
    if n == 0:
        return 0.5, 0.0
    p = float(np.count_nonzero(values > 0)) / n
    return p, (p - 0.5) / math.sqrt(0.25 / n)


def _mean_z(values: np.ndarray) -> tuple[float, float]:
    n = values.size
    if n == 0:
        return 0.0, 0.0
    m = float(values.mean())
    return m, m / math.sqrt(1.0 / n)


def marginal_check(records) -> MarginalCheck:
    """Unbiasedness of each side's clicks and of values on single detections.

    For Franson records "single" means the non-coincident events.
    """
    rec = _as_records(records)
    a, b = rec.alice, rec.bob
    if isinstance(rec, FransonRecords):
        non = ~rec.coincident
        sa, sb = a[non], b[non]
    else:
        sa, sb = a[(a != 0) & (b == 0)], b[(b != 0) & (a == 0)]
    pa, za = _fair_z(a[a != 0])
    pb, zb = _fair_z(b[b != 0])
    ma, zma = _mean_z(sa.astype(np.float64))
    mb, zmb = _mean_z(sb.astype(np.float64))
    return MarginalCheck(pa, za, pb, zb, ma, zma, mb, zmb)

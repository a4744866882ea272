"""Independent reference computations.

Nothing here imports the simulation code paths it is used to check.
"""

from __future__ import annotations

import math

import numpy as np
from scipy import integrate


def _sign(x: float) -> float:
    return 1.0 if x >= 0 else -1.0


def circle_erasure_correlation(theta: float) -> float:
    """Both-click correlation of the circle rule by quadrature over phi.

    Alice filtered with weight (pi/4)|cos phi| at a = 0, Bob at b = theta.
    """
    breaks = sorted({(k * math.pi / 2 + s) % (2 * math.pi) for k in (1, 3) for s in (0.0, theta)})
    num = integrate.quad(
        lambda x: (math.pi / 4) * abs(math.cos(x)) * _sign(math.cos(x)) * -_sign(math.cos(x - theta)),
        0.0, 2 * math.pi, points=breaks, limit=400,
    )[0]
    den = integrate.quad(lambda x: (math.pi / 4) * abs(math.cos(x)), 0.0, 2 * math.pi, points=breaks, limit=400)[0]
    return num / den


def circle_keep_mean() -> float:
    return integrate.quad(lambda x: (math.pi / 4) * abs(math.cos(x)), 0.0, 2 * math.pi, limit=200)[0] / (2 * math.pi)


def sphere_erasure_correlation(a, b, n: int = 3000) -> float:
    """Both-click correlation of the sphere rule on an n x n midpoint grid in
    (z, azimuth), which is area-uniform on the sphere."""
    a, b = np.asarray(a, float), np.asarray(b, float)
    z = (np.arange(n) + 0.5) / n * 2 - 1
    ph = (np.arange(n) + 0.5) / n * 2 * math.pi
    s = np.sqrt(1 - z * z)[:, None]
    lam = (s * np.cos(ph)[None, :], s * np.sin(ph)[None, :], np.broadcast_to(z[:, None], (n, n)))
    da = a[0] * lam[0] + a[1] * lam[1] + a[2] * lam[2]
    db = b[0] * lam[0] + b[1] * lam[1] + b[2] * lam[2]
    return float(np.sum(da * -np.where(db >= 0, 1.0, -1.0)) / np.sum(np.abs(da)))


def linear_correlation_bruteforce(theta: float, n: int = 200_000) -> float:
    """Midpoint average of sgn cos(phi) * -sgn cos(phi - theta) over phi."""
    phi = (np.arange(n) + 0.5) * (2 * math.pi / n)
    return float(np.mean(np.where(np.cos(phi) >= 0, 1, -1) * -np.where(np.cos(phi - theta) >= 0, 1, -1)))


def count_correlation(pairs) -> tuple[float, float, int]:
    """Direct count over both-click pairs: (e_hat, se, n)."""
    npp = nmm = npm = nmp = 0
    for x, y in pairs:
        if x == 0 or y == 0:
            continue
        if x > 0 and y > 0:
            npp += 1
        elif x < 0 and y < 0:
            nmm += 1
        elif x > 0:
            npm += 1
        else:
            nmp += 1
    n = npp + nmm + npm + nmp
    e = (npp + nmm - npm - nmp) / n
    return e, math.sqrt((1 - e * e) / n), n


def square_level_intervals(dwell: float, start: float, stop: float):
    """Yield (lo, hi, level) pieces of [start, stop) for a square wave that
    toggles between level 0 and 1 every ``dwell``."""
    k = math.floor(start / dwell)
    lo = start
    while lo < stop:
        hi = min((k + 1) * dwell, stop)
        yield lo, hi, k % 2
        lo, k = hi, k + 1


def switching_bin_expectation(
    base_alpha: float, base_beta: float, amplitude: float, dwell: float, delta_t: float, window: float
) -> dict[int, float]:
    """Exact expected coincidence correlation per detection-time phase level.

    Emission times are uniform on [0, window * delta_t); a coincident pair
    lands in the early or late slot with probability 1/2, independent of the
    phases, and carries correlation -cos(alpha + beta) of its emission-time
    phases. Detection happens at t (early) or t + delta_t (late). The result
    maps each detection level to the weighted mean of emission correlations.
    """
    t_max = window * delta_t
    weight = {0: 0.0, 1: 0.0}
    acc = {0: 0.0, 1: 0.0}
    for offset in (0.0, delta_t):
        # breakpoints of the emission level and of the detection level
        pts = {0.0, t_max}
        for lo, hi, _ in square_level_intervals(dwell, 0.0, t_max):
            pts.update((lo, hi))
        for lo, hi, _ in square_level_intervals(dwell, offset, t_max + offset):
            pts.update((lo - offset, hi - offset))
        grid = sorted(p for p in pts if 0.0 <= p <= t_max)
        for lo, hi in zip(grid, grid[1:]):
            if hi <= lo:
                continue
            mid = 0.5 * (lo + hi)
            emit = math.floor(mid / dwell) % 2
            det = math.floor((mid + offset) / dwell) % 2
            e = -math.cos(base_alpha + base_beta + 2 * amplitude * emit)
            weight[det] += hi - lo
            acc[det] += (hi - lo) * e
    return {lvl: acc[lvl] / weight[lvl] for lvl in (0, 1) if weight[lvl] > 0}


def switching_residuals(base_alpha, base_beta, amplitude, dwell, delta_t=1.0, window=1.0e4) -> dict[int, float]:
    exp = switching_bin_expectation(base_alpha, base_beta, amplitude, dwell, delta_t, window)
    return {
        lvl: abs(e + math.cos(base_alpha + base_beta + 2 * amplitude * lvl)) for lvl, e in exp.items()
    }

"""Scenario runners shared by the CLI and the acceptance suite.

Each ``build_*`` function takes a :class:`RunConfig` and returns a plain
report dict. Reports embed the resolved config, so every number can be
regenerated from the report alone.
"""

from __future__ import annotations

import dataclasses
import json
import math
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from . import franson as fr
from .geometry import Direction3, azimuth, angular_distance, relative_angle
from .harness import (
    ANGLE_KINDS,
    DEFAULT_GRID,
    FRANSON_KINDS,
    ConfigError,
    ExperimentSpec,
    coplanar_pair,
    run_experiment,
)
from .models import ErasureOptions
from .records import EARLY, LATE
from .stats import (
    LHV_CHSH_BOUND,
    CorrEstimate,
    chsh,
    chsh_se,
    detection_rates,
    effective_efficiency,
    estimate_correlation,
    linear_corr,
    naive_efficiency,
    noncoplanar_deviation,
    quantum_corr,
    singles_to_coinc_ratio,
    lhv_efficiency_bound,
    visibility_fit,
)

SCENARIOS = ("sweep", "rates", "chsh", "noncoplanar", "franson", "verify")
DEFAULT_CHSH_ANGLES = (0.0, math.pi / 2, math.pi / 4, 3 * math.pi / 4)  # a, a', b, b'
FEATURED_PAIR = ((0.0, 0.0, 1.0), (0.0, 1 / math.sqrt(2), 1 / math.sqrt(2)))
DEFAULT_NONCOPLANAR = (
    FEATURED_PAIR,
    ((1.0, 0.0, 0.0), (math.cos(math.pi / 3), math.sin(math.pi / 3), 0.0)),
    ((1.0, 0.0, 0.0), (0.0, 1.0, 0.0)),
)
FRANSON_STATIC_POINTS = 12
SWITCHING_BASE = (0.0, math.pi / 3)
SIG_DIGITS = 6


@dataclass
class RunConfig:
    scenario: str = "sweep"
    model: str | None = None
    n_trials: int | None = None
    master_seed: int = 42
    null_injection: float = 1.0 / 9.0
    symmetrize: bool = True
    grid: list[float] | None = None
    settings: list[Any] | None = None
    period: float | None = None
    delta_t: float = 1.0
    amplitude: float = math.pi / 2
    visibility: float = 1.0
    format: str = "json"
    out: str | None = None
    workers: int = 1
    weight_power: float = 1.0  # negative-control hook; 1 is the real model

    def __post_init__(self) -> None:
        if self.scenario not in SCENARIOS:
            raise ConfigError(f"unknown scenario {self.scenario!r}")
        if self.format not in ("csv", "json"):
            raise ConfigError(f"unknown format {self.format!r}")
        if self.n_trials is not None and self.n_trials < 1:
            raise ConfigError("n_trials must be at least 1")

    @property
    def options(self) -> ErasureOptions:
        return ErasureOptions(self.null_injection, self.symmetrize, self.weight_power)

    def resolved(self, **defaults) -> RunConfig:
        """Copy with unset fields filled from scenario defaults."""
        updates = {k: v for k, v in defaults.items() if getattr(self, k) is None}
        return dataclasses.replace(self, **updates)

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> RunConfig:
        names = {f.name for f in dataclasses.fields(cls)}
        unknown = set(d) - names
        if unknown:
            raise ConfigError(f"unknown config fields: {sorted(unknown)}")
        return cls(**d)

    @classmethod
    def from_json_file(cls, path) -> RunConfig:
        with open(path) as fh:
            try:
                return cls.from_dict(json.load(fh))
            except json.JSONDecodeError as exc:
                raise ConfigError(f"bad JSON in {path}: {exc}") from exc


def round_sig(obj, digits: int = SIG_DIGITS):
    """Recursively round floats to ``digits`` significant digits."""
    if isinstance(obj, bool) or obj is None:
        return obj
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return float(f"{x:.{digits}g}") if math.isfinite(x) else x
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, dict):
        return {k: round_sig(v, digits) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [round_sig(v, digits) for v in obj]
    return obj


def dumps_report(report: dict) -> str:
    return json.dumps(round_sig(report), indent=2) + "\n"


def _spec(cfg: RunConfig, model: str, settings, n_trials: int, options: ErasureOptions | None = None):
    return ExperimentSpec(
        model,
        settings,
        n_trials,
        cfg.master_seed,
        options or cfg.options,
        delta_t=cfg.delta_t,
        visibility=cfg.visibility,
    )


# -- sweep --------------------------------------------------------------------


def build_sweep(cfg: RunConfig) -> dict:
    cfg = cfg.resolved(model="sphere", n_trials=1_000_000, grid=list(DEFAULT_GRID))
    if cfg.model in FRANSON_KINDS:
        raise ConfigError("sweep runs Bell-type models; use the franson scenario")
    grid = [float(t) for t in cfg.grid]
    if not grid:
        raise ConfigError("grid must be non-empty")
    for t in grid:
        if not 0.0 <= t <= math.pi:
            raise ConfigError(f"grid angles must lie in [0, pi], got {t}")
    ds = run_experiment(
        _spec(cfg, cfg.model, [coplanar_pair(cfg.model, t) for t in grid], cfg.n_trials), workers=cfg.workers
    )
    rows = []
    for t, rec in zip(grid, ds.records):
        est = estimate_correlation(rec)
        rows.append(
            {
                "theta": t,
                "e_hat": est.e_hat,
                "se": est.se,
                "n_coinc": est.n_coinc,
                "e_quantum": quantum_corr(t),
                "e_linear": linear_corr(t),
            }
        )
    return {
        "scenario": "sweep",
        "config": cfg.to_dict(),
        "rows": rows,
        "max_residual_quantum": max(abs(r["e_hat"] - r["e_quantum"]) for r in rows),
        "max_residual_linear": max(abs(r["e_hat"] - r["e_linear"]) for r in rows),
        "_datasets": [ds],
    }


SWEEP_COLUMNS = ("theta", "e_hat", "se", "n_coinc", "e_quantum", "e_linear")


def sweep_csv(report: dict) -> str:
    cfg = json.dumps(round_sig(report["config"]))
    lines = [f"# config: {cfg}", ",".join(SWEEP_COLUMNS)]
    for row in report["rows"]:
        lines.append(
            ",".join(str(row[c]) if c == "n_coinc" else f"{row[c]:.{SIG_DIGITS}g}" for c in SWEEP_COLUMNS)
        )
    return "\n".join(lines) + "\n"


# -- rates --------------------------------------------------------------------


def build_rates(cfg: RunConfig) -> dict:
    cfg = cfg.resolved(model="sphere", n_trials=1_000_000)
    if cfg.model in FRANSON_KINDS:
        raise ConfigError("rates are defined for Bell-type models")
    ds = run_experiment(
        _spec(cfg, cfg.model, [coplanar_pair(cfg.model, math.pi / 3)], cfg.n_trials), workers=cfg.workers
    )
    rates = detection_rates(ds.records[0])
    return {
        "scenario": "rates",
        "config": cfg.to_dict(),
        "f_cc": rates.f_cc,
        "f_a_only": rates.f_a_only,
        "f_b_only": rates.f_b_only,
        "f_none": rates.f_none,
        "effective_efficiency": effective_efficiency(rates),
        "naive_efficiency": naive_efficiency(rates),
        "singles_to_coinc_ratio": singles_to_coinc_ratio(rates),
        "_datasets": [ds],
    }


# -- chsh ---------------------------------------------------------------------


def _chsh_pairs(model: str, angles):
    a, a2, b, b2 = (float(x) for x in angles)
    pairs = [(a, b), (a, b2), (a2, b), (a2, b2)]
    if model in ANGLE_KINDS:
        return pairs
    return [(Direction3.in_plane(x), Direction3.in_plane(y)) for x, y in pairs]


def chsh_verdict(s_abs: float, s_se: float, bound: float) -> str:
    if s_abs - LHV_CHSH_BOUND <= 3.0 * s_se:
        return "no violation"
    if s_abs <= bound:
        return "loophole-consistent"
    return "genuine violation"


def build_chsh(cfg: RunConfig) -> dict:
    cfg = cfg.resolved(model="sphere", n_trials=1_000_000, settings=list(DEFAULT_CHSH_ANGLES))
    if cfg.model in FRANSON_KINDS:
        raise ConfigError("chsh is defined for Bell-type models")
    if len(cfg.settings) != 4:
        raise ConfigError("chsh settings are four angles: a, a', b, b'")
    ds = run_experiment(
        _spec(cfg, cfg.model, _chsh_pairs(cfg.model, cfg.settings), cfg.n_trials), workers=cfg.workers
    )
    ests = [estimate_correlation(r) for r in ds.records]
    s = chsh(*(e.e_hat for e in ests))
    s_se = chsh_se([e.se for e in ests])
    pooled = detection_rates(
        type(ds.records[0]).concat(ds.records)  # all four runs together
    )
    eta = effective_efficiency(pooled)
    bound = lhv_efficiency_bound(min(1.0, eta))
    names = ("ab", "ab'", "a'b", "a'b'")
    return {
        "scenario": "chsh",
        "config": cfg.to_dict(),
        "correlations": {n: e.to_dict() for n, e in zip(names, ests)},
        "S": s,
        "abs_S": abs(s),
        "S_se": s_se,
        "effective_efficiency": eta,
        "lhv_efficiency_bound": bound,
        "lhv_efficiency_bound_two_thirds": lhv_efficiency_bound(2.0 / 3.0),
        "verdict": chsh_verdict(abs(s), s_se, bound),
        "_datasets": [ds],
    }


# -- non-coplanar -------------------------------------------------------------


def build_noncoplanar(cfg: RunConfig) -> dict:
    cfg = cfg.resolved(n_trials=1_000_000, settings=[list(map(list, p)) for p in DEFAULT_NONCOPLANAR])
    pairs = [(Direction3.normalized(*a), Direction3.normalized(*b)) for a, b in cfg.settings]
    models = ("circle-3d", "sphere")
    datasets = []
    estimates: dict[str, list[CorrEstimate]] = {}
    for m in models:
        ds = run_experiment(_spec(cfg, m, pairs, cfg.n_trials), workers=cfg.workers)
        datasets.append(ds)
        estimates[m] = [estimate_correlation(r) for r in ds.records]
    rows = []
    for i, (a, b) in enumerate(pairs):
        target = quantum_corr(relative_angle(a, b))
        row = {
            "a": list(a.as_tuple()),
            "b": list(b.as_tuple()),
            "relative_angle": relative_angle(a, b),
            "azimuth_gap": angular_distance(azimuth(a), azimuth(b)),
            "quantum_target": target,
        }
        for m in models:
            row[f"e_hat_{m}"] = estimates[m][i].e_hat
            row[f"se_{m}"] = estimates[m][i].se
            row[f"deviation_{m}"] = abs(estimates[m][i].e_hat - target)
        rows.append(row)
    summary = {}
    for m in models:
        lookup = {(p[0], p[1]): e for p, e in zip(pairs, estimates[m])}
        summary[m] = noncoplanar_deviation(lambda a, b, lk=lookup: lk[(a, b)], pairs)
    return {
        "scenario": "noncoplanar",
        "config": cfg.to_dict(),
        "pairs": rows,
        "max_deviation": summary,
        "_datasets": datasets,
    }


# -- franson ------------------------------------------------------------------


def static_phase_points(n: int = FRANSON_STATIC_POINTS) -> list[tuple[float, float]]:
    """Equispaced phase sums x_k = 2 pi k / n, split evenly between the two sides."""
    return [(math.pi * k / n, math.pi * k / n) for k in range(n)]


def build_franson(cfg: RunConfig) -> dict:
    cfg = cfg.resolved(model="franson")
    if cfg.model not in FRANSON_KINDS:
        raise ConfigError("franson scenario needs model franson or quantum-franson")
    if not cfg.delta_t > 0:
        raise ConfigError("delta_t must be positive")
    if cfg.period is None:
        return _franson_static(cfg.resolved(n_trials=100_000))
    if cfg.model != "franson":
        raise ConfigError("switching mode is only defined for the local model")
    return _franson_switching(cfg.resolved(n_trials=1_000_000))


def _slot_summary(records) -> dict:
    co = records.coincident
    n_co = int(np.count_nonzero(co))
    n = len(records)
    n_ee = int(np.count_nonzero(co & (records.alice_slot == EARLY)))
    non = ~co
    n_non = int(np.count_nonzero(non))
    n_a_early = int(np.count_nonzero(non & (records.alice_slot == EARLY)))
    valid = (
        np.all(np.isin(records.alice, (-1, 1)))
        and np.all(np.isin(records.bob, (-1, 1)))
        and np.all(np.isin(records.alice_slot, (EARLY, LATE)))
        and np.all(np.isin(records.bob_slot, (EARLY, LATE)))
    )
    return {
        "n_records": n,
        "coincident_fraction": n_co / n,
        "early_late_balance": (2 * n_ee - n_co) / n_co if n_co else 0.0,
        "noncoincident_side_balance": (2 * n_a_early - n_non) / n_non if n_non else 0.0,
        "two_clicks_every_record": bool(valid),
    }


def _franson_static(cfg: RunConfig) -> dict:
    if cfg.settings is not None:
        points = [(float(a), float(b)) for a, b in cfg.settings]
    else:
        points = static_phase_points()
    ds = run_experiment(_spec(cfg, cfg.model, points, cfg.n_trials), workers=cfg.workers)
    bins, fit_points = [], []
    for (alpha, beta), rec in zip(points, ds.records):
        est = estimate_correlation(rec)
        target = -math.cos(alpha + beta)
        bins.append(
            {"alpha": alpha, "beta": beta, **est.to_dict(), "target": target, "residual": abs(est.e_hat - target)}
        )
        fit_points.append((alpha + beta, est.e_hat, est.se))
    pooled = type(ds.records[0]).concat(ds.records)
    non = pooled.subset(~pooled.coincident)
    noncoinc = (
        estimate_correlation(dataclasses.replace(non, alice_slot=non.bob_slot)) if len(non) else None
    )  # realign slots so the non-coincident pairs are scored together
    return {
        "scenario": "franson",
        "mode": "static",
        "config": cfg.to_dict(),
        **_slot_summary(pooled),
        "bins": bins,
        "max_residual": max(b["residual"] for b in bins),
        "visibility": visibility_fit(fit_points),
        "noncoincident_correlation": noncoinc.to_dict() if noncoinc else None,
        "_datasets": [ds],
    }


def _franson_switching(cfg: RunConfig) -> dict:
    alpha, beta = (float(x) for x in cfg.settings[0]) if cfg.settings else SWITCHING_BASE
    sched = fr.PhaseSchedule(alpha, beta, "square", float(cfg.period), cfg.amplitude)
    ds = run_experiment(_spec(cfg, "franson", [sched], cfg.n_trials), workers=cfg.workers)
    rec = ds.records[0]
    bins = fr.bin_by_detection_phase(rec, sched)
    z = [b.residual / b.estimate.se if b.estimate.se > 0 else math.inf for b in bins]
    fast = any(v > 10.0 for v in z)
    return {
        "scenario": "franson",
        "mode": "switching",
        "config": cfg.to_dict(),
        "schedule": sched.to_dict(),
        **_slot_summary(rec),
        "bins": [{**b.to_dict(), "z": v} for b, v in zip(bins, z)],
        "max_residual": max(b.residual for b in bins),
        "max_z": max(z),
        "verdict": "fast: detection-time statistics break" if fast else "slow: static statistics preserved",
        "_datasets": [ds],
    }


BUILDERS = {
    "sweep": build_sweep,
    "rates": build_rates,
    "chsh": build_chsh,
    "noncoplanar": build_noncoplanar,
    "franson": build_franson,
}


def public(report: dict) -> dict:
    """Report without in-memory attachments (keys starting with ``_``)."""
    return {k: v for k, v in report.items() if not k.startswith("_")}

"""Deterministic Monte Carlo execution.

Trials are evaluated in fixed-size chunks of consecutive trial indices.
Every chunk reads only its own counter-based streams, so the dataset is the
same whatever the number of worker threads or the order chunks finish in.
"""

from __future__ import annotations

import dataclasses
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Sequence

import numpy as np

from . import __version__
from . import franson as fr
from . import models as md
from .geometry import Direction3, as_direction
from .records import BellRecords, FransonRecords
from .rng import derive_trial_rng, uniform_block
from .stats import CorrEstimate, estimate_correlation

CHUNK = 1 << 16

BELL_KINDS = ("linear", "erased-circle", "sphere", "circle-3d", "quantum-singlet")
FRANSON_KINDS = ("franson", "quantum-franson")
ANGLE_KINDS = ("linear", "erased-circle")
VECTOR_KINDS = ("sphere", "circle-3d", "quantum-singlet")
LHV_KINDS = ("linear", "erased-circle", "sphere", "circle-3d", "franson")

DRAWS = {
    "linear": md.CIRCLE_DRAWS,
    "erased-circle": md.CIRCLE_DRAWS,
    "circle-3d": md.CIRCLE_DRAWS,
    "sphere": md.SPHERE_DRAWS,
    "quantum-singlet": md.SINGLET_DRAWS,
    "franson": fr.FRANSON_DRAWS,
    "quantum-franson": fr.QUANTUM_FRANSON_DRAWS,
}


class ConfigError(ValueError):
    pass


class LocalityViolation(AssertionError):
    pass


@dataclass(frozen=True)
class ExperimentSpec:
    model: str
    settings: Sequence[Any]
    n_trials: int
    master_seed: int = 42
    options: md.ErasureOptions = md.ErasureOptions()
    delta_t: float = 1.0
    window: float = fr.DEFAULT_WINDOW
    visibility: float = 1.0

    def __post_init__(self) -> None:
        if self.model not in DRAWS:
            raise ConfigError(f"unknown model kind {self.model!r}; expected one of {sorted(DRAWS)}")
        if self.n_trials < 1:
            raise ConfigError("n_trials must be at least 1")
        if not self.settings:
            raise ConfigError("settings must be non-empty")
        object.__setattr__(self, "settings", tuple(_coerce_setting(self.model, s) for s in self.settings))

    def to_dict(self) -> dict:
        return {
            "model": self.model,
            "settings": [_setting_to_json(s) for s in self.settings],
            "n_trials": self.n_trials,
            "master_seed": self.master_seed,
            "options": dataclasses.asdict(self.options),
            "delta_t": self.delta_t,
            "window": self.window,
            "visibility": self.visibility,
        }


def _coerce_setting(kind: str, s):
    if kind in FRANSON_KINDS:
        if isinstance(s, fr.PhaseSchedule):
            return s
        if isinstance(s, dict):
            return fr.PhaseSchedule(**s)
        alpha, beta = s
        return fr.PhaseSchedule(float(alpha), float(beta))
    a, b = s
    if kind in ANGLE_KINDS:
        return (float(a), float(b))
    return (as_direction(a), as_direction(b))


def _setting_to_json(s):
    if isinstance(s, fr.PhaseSchedule):
        return s.to_dict()
    return [list(x.as_tuple()) if isinstance(x, Direction3) else x for x in s]


@dataclass
class Dataset:
    spec: ExperimentSpec
    records: list  # BellRecords or FransonRecords, one per settings pair
    metadata: dict = field(default_factory=dict)

    def equals(self, other: Dataset) -> bool:
        return len(self.records) == len(other.records) and all(
            x.equals(y) for x, y in zip(self.records, other.records)
        )


def _evaluate_chunk(spec: ExperimentSpec, pair_index: int, start: int, stop: int):
    kind = spec.model
    setting = spec.settings[pair_index]
    idx = np.arange(start, stop, dtype=np.uint64)
    u = uniform_block(spec.master_seed, pair_index, idx, DRAWS[kind])
    if kind == "franson":
        return fr.franson_batch(u, setting, spec.delta_t, spec.window)
    if kind == "quantum-franson":
        return fr.quantum_franson_batch(
            u, setting.base_alpha, setting.base_beta, spec.visibility, spec.delta_t, spec.window
        )
    a, b = setting
    if kind == "quantum-singlet":
        return BellRecords(*md.quantum_singlet_batch(u, a, b))
    if kind == "sphere":
        return BellRecords(*md.sphere_erasure_batch(md.SphereHiddenBatch.from_uniforms(u), a, b, spec.options))
    h = md.CircleHiddenBatch.from_uniforms(u)
    if kind == "linear":
        return BellRecords(*md.linear_batch(h, a, b))
    if kind == "erased-circle":
        return BellRecords(*md.erased_circle_batch(h, a, b, spec.options))
    return BellRecords(*md.circle_3d_batch(h, a, b, spec.options))


def simulate_trial(spec: ExperimentSpec, pair_index: int, trial_index: int):
    """Scalar route for a single trial; must agree with the batch route."""
    kind = spec.model
    setting = spec.settings[pair_index]
    rng = derive_trial_rng(spec.master_seed, pair_index, trial_index)
    if kind == "franson":
        h = fr.sample_franson_hidden(rng)
        t = spec.window * spec.delta_t * rng.uniform()
        return fr.franson_trial(h, setting, spec.delta_t, t, trial_index)
    if kind == "quantum-franson":
        rec = fr.quantum_franson_trial(rng, setting.base_alpha, setting.base_beta, spec.visibility)
        t = spec.window * spec.delta_t * rng.uniform()
        return dataclasses.replace(rec, emission_time=t, emission_index=trial_index)
    a, b = setting
    if kind == "quantum-singlet":
        return md.quantum_singlet_trial(rng, a, b)
    if kind == "sphere":
        return md.sphere_erasure_trial(md.sample_sphere_hidden(rng), a, b, spec.options)
    h = md.sample_circle_hidden(rng)
    if kind == "linear":
        return md.linear_trial(h, a, b)
    if kind == "erased-circle":
        return md.erased_circle_trial(h, a, b, spec.options)
    return md.circle_model_with_3d_settings(h, a, b, spec.options)


def run_experiment(
    spec: ExperimentSpec,
    workers: int = 1,
    chunk_size: int = CHUNK,
    order: Sequence[int] | None = None,
) -> Dataset:
    """Run every settings pair; ``order`` permutes chunk evaluation (testing hook)."""
    t0 = time.perf_counter()
    jobs = [
        (p, start, min(start + chunk_size, spec.n_trials))
        for p in range(len(spec.settings))
        for start in range(0, spec.n_trials, chunk_size)
    ]
    schedule = list(order) if order is not None else list(range(len(jobs)))
    if sorted(schedule) != list(range(len(jobs))):
        raise ValueError("order must be a permutation of the chunk indices")

    results: dict[int, Any] = {}
    if workers <= 1:
        for j in schedule:
            results[j] = _evaluate_chunk(spec, *jobs[j])
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            futures = {j: pool.submit(_evaluate_chunk, spec, *jobs[j]) for j in schedule}
            results = {j: f.result() for j, f in futures.items()}

    container = FransonRecords if spec.model in FRANSON_KINDS else BellRecords
    records = []
    for p in range(len(spec.settings)):
        parts = [results[j] for j, job in enumerate(jobs) if job[0] == p]
        records.append(container.concat(parts))
    meta = {
        "spec": spec.to_dict(),
        "wall_clock_s": time.perf_counter() - t0,
        "version": __version__,
    }
    return Dataset(spec, records, meta)


DEFAULT_GRID = tuple(np.linspace(0.0, math.pi, 25).tolist())


def coplanar_pair(kind: str, theta: float):
    """Settings at relative angle ``theta`` for the given model kind."""
    if kind in ANGLE_KINDS:
        return (0.0, theta)
    if kind in FRANSON_KINDS:
        return fr.PhaseSchedule(theta, 0.0)
    return (Direction3(1.0, 0.0, 0.0), Direction3.in_plane(theta))


def sweep(
    kind: str,
    theta_grid: Sequence[float] = DEFAULT_GRID,
    n_trials: int = 1_000_000,
    master_seed: int = 42,
    options: md.ErasureOptions = md.ErasureOptions(),
    workers: int = 1,
) -> list[tuple[float, CorrEstimate]]:
    if len(theta_grid) == 0:
        raise ConfigError("theta grid must be non-empty")
    spec = ExperimentSpec(
        kind, [coplanar_pair(kind, t) for t in theta_grid], n_trials, master_seed, options
    )
    ds = run_experiment(spec, workers=workers)
    return [(float(t), estimate_correlation(r)) for t, r in zip(theta_grid, ds.records)]


@dataclass(frozen=True)
class LocalityReport:
    model: str
    n: int
    alice_unchanged: bool
    bob_unchanged: bool

    @property
    def passed(self) -> bool:
        return self.alice_unchanged and self.bob_unchanged


def _local_view(rec, side: str) -> np.ndarray:
    if isinstance(rec, FransonRecords):
        v, s = (rec.alice, rec.alice_slot) if side == "A" else (rec.bob, rec.bob_slot)
        return np.stack([v, s])
    return rec.alice if side == "A" else rec.bob


def locality_audit(
    kind: str,
    a,
    b,
    b_alt,
    n: int = 10_000,
    master_seed: int = 42,
    options: md.ErasureOptions = md.ErasureOptions(),
    a_alt=None,
    raise_on_failure: bool = False,
) -> LocalityReport:
    """Re-run the same hidden states with one remote setting changed and
    compare the other side's outcome sequence bit for bit."""
    if a_alt is None:
        a_alt = b_alt

    def run(x, y):
        setting = (x, y)
        spec = ExperimentSpec(kind, [setting], n, master_seed, options)
        return run_experiment(spec).records[0]

    base = run(a, b)
    alice_ok = bool(np.array_equal(_local_view(base, "A"), _local_view(run(a, b_alt), "A")))
    bob_ok = bool(np.array_equal(_local_view(base, "B"), _local_view(run(a_alt, b), "B")))
    report = LocalityReport(kind, n, alice_ok, bob_ok)
    if raise_on_failure and not report.passed:
        raise LocalityViolation(f"{kind}: remote setting change altered a local outcome sequence")
    return report

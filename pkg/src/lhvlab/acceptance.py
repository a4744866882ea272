"""Exit criteria for the whole laboratory, runnable from ``lhvlab verify``.

Tolerances are fixed here and never calibrated against a run.
"""

from __future__ import annotations

import dataclasses
import json
import math
from dataclasses import dataclass, field
from typing import Callable

from .harness import CHUNK, LHV_KINDS, ExperimentSpec, coplanar_pair, locality_audit, run_experiment
from .models import ErasureOptions
from .scenarios import (
    RunConfig,
    build_chsh,
    build_franson,
    build_noncoplanar,
    build_rates,
    build_sweep,
    dumps_report,
    public,
    round_sig,
)
from .stats import REFERENCE_THRESHOLD, TSIRELSON, efficiency_threshold, lhv_efficiency_bound, marginal_check

TOL_SINGLET = 0.01
TOL_EFFICIENCY = 0.005
TOL_RATIO = 0.02
TOL_PATTERN = 0.005
TOL_NAIVE = 0.005
TOL_S_LINEAR = 0.01
TOL_S_ERASURE = 0.02
TOL_THRESHOLD = 0.001
TOL_COINC = 0.003
TOL_SLOT_BALANCE = 0.006
TOL_VISIBILITY = 0.01
TOL_SLOW_RESIDUAL = 0.02
FAST_Z = 10.0
NONCOPLANAR_CIRCLE_MIN = 0.1
NONCOPLANAR_SPHERE_MAX = 0.01
MARGINAL_Z = 4.0
LOCALITY_N = 10_000


@dataclass
class AcceptanceConfig:
    master_seed: int = 42
    n_trials: int = 1_000_000
    franson_static_trials: int = 100_000
    workers: int = 4
    corrupt_erasure: bool = False  # negative control

    @property
    def injected(self) -> ErasureOptions:
        return ErasureOptions(1.0 / 9.0, True, 2.0 if self.corrupt_erasure else 1.0)

    @property
    def bare(self) -> ErasureOptions:
        return dataclasses.replace(self.injected, null_injection_probability=0.0)

    def run_config(self, scenario: str, **kw) -> RunConfig:
        opts = kw.pop("options", self.injected)
        base = RunConfig(
            scenario=scenario,
            master_seed=self.master_seed,
            n_trials=kw.pop("n_trials", self.n_trials),
            null_injection=opts.null_injection_probability,
            weight_power=opts.weight_power,
            workers=self.workers,
        )
        return dataclasses.replace(base, **kw)


@dataclass
class CriterionResult:
    number: int
    name: str
    passed: bool
    detail: str
    values: dict = field(default_factory=dict)

    def line(self) -> str:
        return f"[{'PASS' if self.passed else 'FAIL'}] {self.number:2d}. {self.name}: {self.detail}"

    def to_dict(self) -> dict:
        return {"criterion": self.number, "name": self.name, "passed": self.passed, "detail": self.detail, "values": self.values}


class Suite:
    """Runs criteria and keeps every dataset for the marginal check."""

    def __init__(self, cfg: AcceptanceConfig) -> None:
        self.cfg = cfg
        self.datasets: list = []

    def scenario(self, builder: Callable[[RunConfig], dict], run_cfg: RunConfig) -> dict:
        report = builder(run_cfg)
        self.datasets.extend(report.get("_datasets", []))
        return report


# -- individual criteria --------------------------------------------------------


def c1_singlet(s: Suite) -> CriterionResult:
    rep = s.scenario(build_sweep, s.cfg.run_config("sweep", model="sphere"))
    worst = rep["max_residual_quantum"]
    return CriterionResult(
        1, "singlet reproduction (sphere)", worst <= TOL_SINGLET,
        f"max |E+cos| over {len(rep['rows'])} points = {worst:.4g} (tol {TOL_SINGLET})",
        {"max_residual": worst},
    )


def c2_c3_rates(s: Suite) -> list[CriterionResult]:
    out2, out3 = [], []
    vals2, vals3 = {}, {}
    for model in ("sphere", "erased-circle"):
        rep = s.scenario(build_rates, s.cfg.run_config("rates", model=model))
        eff, ratio = rep["effective_efficiency"], rep["singles_to_coinc_ratio"]
        out2.append(abs(eff - 2 / 3) <= TOL_EFFICIENCY and abs(ratio - 1.0) <= TOL_RATIO)
        vals2[model] = {"effective_efficiency": eff, "singles_to_coinc_ratio": ratio}
        got = (rep["f_cc"], rep["f_a_only"], rep["f_b_only"], rep["f_none"])
        want = (4 / 9, 2 / 9, 2 / 9, 1 / 9)
        out3.append(all(abs(g - w) <= TOL_PATTERN for g, w in zip(got, want)))
        vals3[model] = list(got)
    d2 = "; ".join(f"{m}: eta={v['effective_efficiency']:.4f} ratio={v['singles_to_coinc_ratio']:.4f}" for m, v in vals2.items())
    d3 = "; ".join(f"{m}: " + ",".join(f"{x:.4f}" for x in v) for m, v in vals3.items())
    return [
        CriterionResult(2, "effective efficiency 2/3, singles/coinc = 1", all(out2), d2, vals2),
        CriterionResult(3, "click pattern (4/9, 2/9, 2/9, 1/9)", all(out3), d3, vals3),
    ]


def c4_naive(s: Suite) -> CriterionResult:
    bare = s.scenario(build_rates, s.cfg.run_config("rates", model="sphere", options=s.cfg.bare))
    inj = s.scenario(build_rates, s.cfg.run_config("rates", model="sphere"))
    naive, eff = bare["naive_efficiency"], inj["effective_efficiency"]
    ok = abs(naive - math.sqrt(0.5)) <= TOL_NAIVE and abs(eff - 2 / 3) <= TOL_EFFICIENCY
    return CriterionResult(
        4, "naive sqrt(0.5) vs effective 2/3", ok,
        f"naive(bare)={naive:.4f}, effective(injected)={eff:.4f}",
        {"naive_efficiency": naive, "effective_efficiency": eff},
    )


def c5_chsh(s: Suite) -> CriterionResult:
    lin = s.scenario(build_chsh, s.cfg.run_config("chsh", model="linear"))
    ok = abs(lin["abs_S"] - 2.0) <= TOL_S_LINEAR
    vals = {"linear": lin["abs_S"]}
    for model in ("sphere", "erased-circle"):
        rep = s.scenario(build_chsh, s.cfg.run_config("chsh", model=model))
        vals[model] = rep["abs_S"]
        ok &= abs(rep["abs_S"] - TSIRELSON) <= TOL_S_ERASURE
        ok &= rep["lhv_efficiency_bound_two_thirds"] == 4.0
    bound = lhv_efficiency_bound(2 / 3)
    vals["bound_two_thirds"] = bound
    return CriterionResult(
        5, "CHSH: linear saturates, erasure models reach 2*sqrt2", bool(ok),
        f"|S| linear={vals['linear']:.4f} sphere={vals['sphere']:.4f} circle={vals['erased-circle']:.4f}; "
        f"bound(2/3)={bound:g}",
        vals,
    )


def c6_threshold() -> CriterionResult:
    th = efficiency_threshold()
    return CriterionResult(
        6, "efficiency threshold", abs(th - REFERENCE_THRESHOLD) <= TOL_THRESHOLD,
        f"2/(1+sqrt2)={th:.5f} vs reference {REFERENCE_THRESHOLD} (reference truncates 0.82843)",
        {"threshold": th},
    )


def c7_franson_static(s: Suite) -> CriterionResult:
    rep = s.scenario(build_franson, s.cfg.run_config("franson", model="franson", n_trials=s.cfg.franson_static_trials))
    cf, bal, vis = rep["coincident_fraction"], rep["early_late_balance"], rep["visibility"]
    ok = (
        abs(cf - 0.5) <= TOL_COINC
        and abs(bal) <= TOL_SLOT_BALANCE
        and abs(vis - 1.0) <= TOL_VISIBILITY
        and rep["two_clicks_every_record"]
    )
    return CriterionResult(
        7, "Franson static", ok,
        f"coincident={cf:.4f} early-late balance={bal:+.4f} V={vis:.4f} two-clicks={rep['two_clicks_every_record']}",
        {"coincident_fraction": cf, "early_late_balance": bal, "visibility": vis},
    )


def c8_franson_switching(s: Suite) -> CriterionResult:
    slow = s.scenario(build_franson, s.cfg.run_config("franson", model="franson", period=100.0))
    fast = s.scenario(build_franson, s.cfg.run_config("franson", model="franson", period=1.0))
    ok = slow["max_residual"] <= TOL_SLOW_RESIDUAL and fast["max_z"] > FAST_Z
    return CriterionResult(
        8, "Franson switching", ok,
        f"period 100: max residual={slow['max_residual']:.4f}; period 1: max residual={fast['max_residual']:.4f} "
        f"({fast['max_z']:.1f} SE)",
        {"slow_max_residual": slow["max_residual"], "fast_max_residual": fast["max_residual"], "fast_max_z": fast["max_z"]},
    )


def c9_noncoplanar(s: Suite) -> CriterionResult:
    rep = s.scenario(build_noncoplanar, s.cfg.run_config("noncoplanar"))
    circ, sph = rep["max_deviation"]["circle-3d"], rep["max_deviation"]["sphere"]
    ok = circ > NONCOPLANAR_CIRCLE_MIN and sph <= NONCOPLANAR_SPHERE_MAX
    return CriterionResult(
        9, "non-coplanar discrimination", ok,
        f"circle max deviation={circ:.4f} (>{NONCOPLANAR_CIRCLE_MIN}), sphere={sph:.4f} (<={NONCOPLANAR_SPHERE_MAX})",
        {"circle": circ, "sphere": sph},
    )


def c10_locality(s: Suite) -> CriterionResult:
    results = {}
    for kind in LHV_KINDS:
        if kind == "franson":
            a, b, b_alt = 0.3, 1.1, -0.4
        else:
            a, b = coplanar_pair(kind, 0.7)
            b_alt = coplanar_pair(kind, 2.3)[1]
        rep = locality_audit(kind, a, b, b_alt, LOCALITY_N, s.cfg.master_seed, s.cfg.injected)
        results[kind] = rep.passed
    return CriterionResult(
        10, "locality audit", all(results.values()),
        ", ".join(f"{k}={'ok' if v else 'VIOLATED'}" for k, v in results.items()),
        results,
    )


def c11_marginals(s: Suite) -> CriterionResult:
    worst, n_checked = 0.0, 0
    for ds in s.datasets:
        for rec in ds.records:
            worst = max(worst, marginal_check(rec).max_z())
            n_checked += 1
    return CriterionResult(
        11, "no-signalling and unbiased singles", worst <= MARGINAL_Z,
        f"max |z| = {worst:.2f} over {n_checked} record sets (limit {MARGINAL_Z})",
        {"max_z": worst, "record_sets": n_checked},
    )


def c12_reproducibility(s: Suite) -> CriterionResult:
    cfg = s.cfg.run_config("rates", model="sphere", n_trials=200_000, workers=1)
    first = dumps_report(public(build_rates(cfg)))
    second = dumps_report(public(build_rates(cfg)))
    spec = ExperimentSpec("sphere", [coplanar_pair("sphere", 1.0)], 300_000, s.cfg.master_seed, s.cfg.injected)
    one = run_experiment(spec, workers=1)
    many = run_experiment(spec, workers=4)
    n_chunks = math.ceil(spec.n_trials / CHUNK)
    shuffled = run_experiment(spec, workers=1, order=list(reversed(range(n_chunks))))
    ok = first == second and one.equals(many) and one.equals(shuffled)
    return CriterionResult(
        12, "reproducibility", ok,
        f"report bytes identical={first == second}, 1 vs 4 threads identical={one.equals(many)}, "
        f"reversed chunk order identical={one.equals(shuffled)}",
    )


def run_all(cfg: AcceptanceConfig | None = None) -> list[CriterionResult]:
    s = Suite(cfg or AcceptanceConfig())
    results = [c1_singlet(s), *c2_c3_rates(s), c4_naive(s), c5_chsh(s), c6_threshold(),
               c7_franson_static(s), c8_franson_switching(s), c9_noncoplanar(s), c10_locality(s)]
    results.append(c11_marginals(s))
    results.append(c12_reproducibility(s))
    return sorted(results, key=lambda r: r.number)


def format_table(results: list[CriterionResult]) -> str:
    lines = [r.line() for r in results]
    n_pass = sum(r.passed for r in results)
    lines.append(f"{n_pass}/{len(results)} criteria passed")
    return "\n".join(lines) + "\n"


def format_json(results: list[CriterionResult], cfg: AcceptanceConfig) -> str:
    payload = {"config": dataclasses.asdict(cfg), "results": [r.to_dict() for r in results]}
    return json.dumps(round_sig(payload), indent=2) + "\n"

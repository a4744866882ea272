import math

import numpy as np
import pytest
from hypothesis import assume, given, strategies as st
from scipy.spatial.transform import Rotation

import oracles
from lhvlab import models as md
from lhvlab.geometry import Direction3, relative_angle
from lhvlab.harness import ExperimentSpec, coplanar_pair, run_experiment, simulate_trial
from lhvlab.records import BellRecords
from lhvlab.rng import derive_trial_rng, uniform_block
from lhvlab.stats import detection_rates, estimate_correlation

N = 1_000_000
BARE = md.ErasureOptions(null_injection_probability=0.0)
FEATURED = ((0.0, 0.0, 1.0), (0.0, 1 / math.sqrt(2), 1 / math.sqrt(2)))


def run(kind, settings, n=N, opts=md.ErasureOptions(), seed=42):
    return run_experiment(ExperimentSpec(kind, settings, n, seed, opts), workers=4).records


def corr(kind, setting, n=N, opts=md.ErasureOptions()):
    return estimate_correlation(run(kind, [setting], n, opts)[0])


# -- pre-build integration oracles ------------------------------------------------


@pytest.mark.parametrize("theta", np.linspace(0.05, math.pi - 0.05, 7))
def test_circle_rule_integrates_to_minus_cos(theta):
    assert oracles.circle_erasure_correlation(theta) == pytest.approx(-math.cos(theta), abs=1e-7)


def test_circle_keep_probability_has_mean_half():
    assert oracles.circle_keep_mean() == pytest.approx(0.5, abs=1e-12)


@pytest.mark.parametrize("theta", [0.4, math.pi / 3, 2.2])
def test_sphere_rule_integrates_to_minus_cos(theta):
    a = (0.0, 0.0, 1.0)
    b = (math.sin(theta), 0.0, math.cos(theta))
    assert oracles.sphere_erasure_correlation(a, b) == pytest.approx(-math.cos(theta), abs=1e-3)


def test_sphere_rule_noncoplanar_oracle():
    assert oracles.sphere_erasure_correlation(*FEATURED) == pytest.approx(-math.sqrt(0.5), abs=1e-3)


# -- hidden-state sampling --------------------------------------------------------


def test_hidden_sampling_is_deterministic():
    assert md.sample_circle_hidden(derive_trial_rng(1, 2, 3)) == md.sample_circle_hidden(derive_trial_rng(1, 2, 3))
    assert md.sample_sphere_hidden(derive_trial_rng(1, 2, 3)) == md.sample_sphere_hidden(derive_trial_rng(1, 2, 3))


def test_scalar_and_batch_hidden_states_agree():
    u = uniform_block(42, 0, np.arange(50, dtype=np.uint64), md.SPHERE_DRAWS)
    batch = md.SphereHiddenBatch.from_uniforms(u)
    for i in range(50):
        h = md.sample_sphere_hidden(derive_trial_rng(42, 0, i))
        hb = batch[i]
        assert (h.r, h.side_coin, h.null_coin) == (hb.r, hb.side_coin, hb.null_coin)
        assert np.allclose(h.lam.as_array(), hb.lam.as_array(), atol=1e-15)
    cb = md.CircleHiddenBatch.from_uniforms(u[:4])
    assert cb[3] == md.sample_circle_hidden(derive_trial_rng(42, 0, 3))


@pytest.fixture(scope="module")
def sphere_hidden():
    u = uniform_block(42, 0, np.arange(N, dtype=np.uint64), md.SPHERE_DRAWS)
    return md.SphereHiddenBatch.from_uniforms(u)


def test_lambda_isotropic(sphere_hidden):
    lam = sphere_hidden.lam
    assert np.allclose(np.sum(lam * lam, axis=0), 1.0, atol=1e-12)
    for comp in lam:
        assert abs(comp.mean()) < 4 / math.sqrt(N)
    assert -0.004 < lam[2].mean() < 0.004


@pytest.mark.parametrize("a", [(1, 0, 0), (0, 0, 1), (0.6, 0.0, 0.8)])
def test_projection_on_fixed_axis_uniform(sphere_hidden, a):
    frac = np.mean(np.abs(np.asarray(a, float) @ sphere_hidden.lam) >= 0.5)
    assert frac == pytest.approx(0.5, abs=0.002)


# -- linear model -------------------------------------------------------------------


def test_linear_equal_settings_anticorrelated():
    assert md.linear_trial(md.CircleHidden(0.0, 0.5, "A", 0.5), 0.0, 0.0) == md.TrialRecord(1, -1)


@given(st.floats(0, 2 * math.pi), st.floats(-10, 10))
def test_linear_same_setting_opposite_values(phi, a):
    rec = md.linear_trial(md.CircleHidden(phi, 0.0, "A", 0.0), a, a)
    assert rec.alice == -rec.bob != 0


def test_linear_curve_point():
    assert corr("linear", (0.0, math.pi / 4)).e_hat == pytest.approx(-0.5, abs=0.003)


@pytest.mark.parametrize("theta", [0.3, 1.0, 2.0])
def test_linear_matches_bruteforce_oracle(theta):
    want = oracles.linear_correlation_bruteforce(theta)
    assert corr("linear", (0.0, theta), 200_000).e_hat == pytest.approx(want, abs=0.01)


# -- erased circle --------------------------------------------------------------------


def test_forced_null_branch():
    h = md.CircleHidden(1.0, 0.0, "A", 0.0)
    assert md.erased_circle_trial(h, 0.0, 0.0, md.ErasureOptions(1 / 9)).pattern == "double-null"


def test_erased_circle_correlation_without_injection():
    assert corr("erased-circle", (0.0, math.pi / 3), opts=BARE).e_hat == pytest.approx(-0.5, abs=0.005)


@pytest.mark.parametrize("kind", ["erased-circle", "sphere"])
def test_injected_rates(kind):
    rates = detection_rates(run(kind, [coplanar_pair(kind, 0.9)])[0])
    for got, want in zip(rates.as_tuple(), (4 / 9, 2 / 9, 2 / 9, 1 / 9)):
        assert got == pytest.approx(want, abs=0.004)
    assert rates.f_a_only + rates.f_b_only == pytest.approx(rates.f_cc, abs=0.006)


@pytest.mark.parametrize("kind", ["erased-circle", "sphere"])
@pytest.mark.parametrize("theta", [0.0, 1.1, 2.7])
def test_filtered_side_keeps_half(kind, theta):
    opts = md.ErasureOptions(0.0, symmetrize=False)
    rec = run(kind, [coplanar_pair(kind, theta)], opts=opts)[0]
    assert np.mean(rec.alice != 0) == pytest.approx(0.5, abs=0.003)
    assert np.all(rec.bob != 0)


def test_unsymmetrized_option_filters_alice_only():
    h = md.CircleHidden(0.0, 0.99, "B", 0.5)
    assert md.erased_circle_trial(h, math.pi / 2, 0.0, md.ErasureOptions(0.0, symmetrize=False)).pattern == "bob-only"
    assert md.erased_circle_trial(h, 0.0, math.pi / 2, md.ErasureOptions(0.0)).pattern == "alice-only"


# -- sphere -------------------------------------------------------------------------------


@given(st.floats(0, 1), st.floats(0, 1), st.floats(0, 1, exclude_max=True))
def test_sphere_equal_settings_anticorrelated(u0, u1, r):
    lam = Direction3(*md._sphere_point(u0, u1))
    a = Direction3.normalized(0.3, -0.2, 0.9)
    h = md.SphereHidden(lam, r * abs(a.dot(lam)), "A", 1.0)
    assume(h.r < abs(a.dot(lam)))
    rec = md.sphere_erasure_trial(h, a, a)
    assert rec.alice == -rec.bob != 0


def test_sphere_rejects_non_unit_settings():
    h = md.sample_sphere_hidden(derive_trial_rng(0, 0, 0))
    with pytest.raises(ValueError):
        md.sphere_erasure_trial(h, (1, 1, 0), (1, 0, 0))


def test_sphere_correlation_coplanar():
    setting = coplanar_pair("sphere", math.pi / 3)
    assert corr("sphere", setting, opts=BARE).e_hat == pytest.approx(-0.5, abs=0.005)


def test_sphere_correlation_noncoplanar():
    assert corr("sphere", FEATURED, opts=BARE).e_hat == pytest.approx(-math.sqrt(0.5), abs=0.005)


def test_sphere_rotational_invariance():
    rng = np.random.default_rng(5)
    a = np.array([1.0, 0.0, 0.0])
    b = np.array([math.cos(1.2), math.sin(1.2), 0.0])
    base = corr("sphere", (a, b), 400_000)
    for rot in Rotation.random(3, random_state=rng):
        ra, rb = rot.apply(a), rot.apply(b)
        ra, rb = ra / np.linalg.norm(ra), rb / np.linalg.norm(rb)
        est = corr("sphere", (ra, rb), 400_000)
        assert abs(est.e_hat - base.e_hat) < 4 * math.hypot(est.se, base.se)


@pytest.mark.parametrize("kind", ["sphere", "erased-circle"])
def test_post_selected_curve_on_grid(kind):
    grid = np.linspace(0, math.pi, 25)
    recs = run(kind, [coplanar_pair(kind, t) for t in grid], 200_000)
    for t, rec in zip(grid, recs):
        est = estimate_correlation(rec)
        assert abs(est.e_hat + math.cos(t)) <= max(0.01, 5 * est.se)


# -- circle model fed with vectors --------------------------------------------------------


def test_circle_3d_coplanar_matches_circle_on_azimuths():
    spec_vec = ExperimentSpec("circle-3d", [coplanar_pair("sphere", 0.8)], 5000)
    spec_ang = ExperimentSpec("erased-circle", [(0.0, 0.8)], 5000)
    assert run_experiment(spec_vec).records[0].equals(run_experiment(spec_ang).records[0])


def test_circle_3d_accidental_agreement():
    est = corr("circle-3d", ((0, 0, 1), (0, 1, 0)))
    assert est.e_hat == pytest.approx(0.0, abs=0.005)
    assert est.e_hat == pytest.approx(-math.cos(math.pi / 2), abs=0.005)


def test_circle_3d_fails_noncoplanar():
    est = corr("circle-3d", FEATURED)
    assert est.e_hat == pytest.approx(0.0, abs=0.005)
    target = -math.cos(relative_angle(*(Direction3(*v) for v in FEATURED)))
    assert abs(est.e_hat - target) == pytest.approx(0.707, abs=0.006)


# -- singlet oracle -----------------------------------------------------------------------


def test_singlet_equal_settings_anticorrelated():
    rec = run("quantum-singlet", [coplanar_pair("sphere", 0.0)], 10_000)[0]
    assert np.all(rec.alice == -rec.bob)


def test_singlet_orthogonal_uniform():
    rec = run("quantum-singlet", [coplanar_pair("sphere", math.pi / 2)])[0]
    for x in (1, -1):
        for y in (1, -1):
            assert np.mean((rec.alice == x) & (rec.bob == y)) == pytest.approx(0.25, abs=0.002)


def test_singlet_correlation():
    assert corr("quantum-singlet", coplanar_pair("sphere", math.pi / 3)).e_hat == pytest.approx(-0.5, abs=0.003)


# -- scalar route agrees with the batch route ---------------------------------------------


@pytest.mark.parametrize(
    "kind, setting",
    [
        ("linear", (0.2, 1.7)),
        ("erased-circle", (0.2, 1.7)),
        ("circle-3d", FEATURED),
        ("sphere", FEATURED),
        ("quantum-singlet", FEATURED),
    ],
)
def test_scalar_route_matches_batch(kind, setting):
    spec = ExperimentSpec(kind, [setting], 3000, 9)
    rec = run_experiment(spec).records[0]
    scalar = BellRecords.from_trials(simulate_trial(spec, 0, i) for i in range(3000))
    assert scalar.equals(rec)


# -- no-signalling ------------------------------------------------------------------------


@pytest.mark.parametrize("kind", ["linear", "erased-circle", "sphere", "circle-3d", "quantum-singlet"])
def test_marginals_unbiased_and_independent_of_remote_setting(kind):
    thetas = (0.4, 1.9)
    recs = run(kind, [coplanar_pair(kind, t) for t in thetas], 300_000)
    for rec in recs:
        for side, other in ((rec.alice, rec.bob), (rec.bob, rec.alice)):
            clicks = side[side != 0]
            se = math.sqrt(0.25 / clicks.size)
            assert abs(np.mean(clicks > 0) - 0.5) < 4 * se
            singles = side[(side != 0) & (other == 0)]
            if singles.size:
                assert abs(singles.mean()) < 4 / math.sqrt(singles.size)


def test_record_patterns_are_exhaustive():
    seen = {md.TrialRecord(a, b).pattern for a in (-1, 0, 1) for b in (-1, 0, 1)}
    assert seen == set(md.PATTERNS)
    with pytest.raises(ValueError):
        md.TrialRecord(2, 0)


def test_options_validate_probability():
    with pytest.raises(ValueError):
        md.ErasureOptions(1.5)

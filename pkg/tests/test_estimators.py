import json

import numpy as np
import pytest

from permlc.density import DensityModel, build_density, log_density
from permlc.errors import ChainDiverged, DimensionTooLarge, NonFiniteWeight
from permlc.estimators import (
    ChainState,
    SamplerConfig,
    _phase_grad,
    _phase_log_density,
    _ratio_estimate,
    _run_chains,
    default_schedule,
    estimate_anneal,
    estimate_direct,
    metropolis_accept,
    mh_step,
    phase_state,
    sample_complex_gaussian,
    wick_check,
)
from permlc.hermitian import random_instance, random_psd
from permlc.permanent import permanent_ryser

TWO_BY_TWO = np.array([[1.5, 0.5], [0.5, 1.5]])
N_1E5 = SamplerConfig(seed=0, chains=4, steps_per_phase=25_000)


class TestComplexGaussian:
    def test_second_moment(self):
        z = sample_complex_gaussian(3, 100_000, seed=1)
        np.testing.assert_allclose(np.mean(np.abs(z) ** 2, axis=0), 1.0, atol=0.02)

    def test_mean(self):
        z = sample_complex_gaussian(3, 100_000, seed=2)
        m = z.mean(axis=0)
        assert np.all(np.abs(m.real) <= 0.02) and np.all(np.abs(m.imag) <= 0.02)

    def test_real_and_imaginary_parts_have_variance_half(self):
        z = sample_complex_gaussian(2, 100_000, seed=3)
        np.testing.assert_allclose(z.real.var(axis=0), 0.5, atol=0.01)
        np.testing.assert_allclose(z.imag.var(axis=0), 0.5, atol=0.01)
        assert abs(np.mean(z.real * z.imag)) <= 0.01

    def test_deterministic(self):
        a = sample_complex_gaussian(4, 10, seed=9)
        b = sample_complex_gaussian(4, 10, seed=9)
        assert a.tobytes() == b.tobytes()


class TestSamplerConfig:
    def test_defaults(self):
        cfg = SamplerConfig()
        assert (cfg.chains, cfg.steps_per_phase, cfg.burn_in, cfg.proposal) == (4, 5000, 1000, "langevin")
        assert cfg.step_size_for(8) == pytest.approx(0.25 / 4)

    @pytest.mark.parametrize("n", [1, 8, 12, 20])
    def test_default_schedule(self, n):
        s = default_schedule(n)
        assert s[0] == 0.0 and s[-1] == 1.0
        assert len(s) == max(8, n) + 1
        assert np.all(np.diff(s) > 0)

    @pytest.mark.parametrize("sched", [(0.0, 0.5), (0.1, 1.0), (0.0, 0.6, 0.4, 1.0), (0.0, 0.5, 0.5, 1.0)])
    def test_rejects_bad_schedule(self, sched):
        with pytest.raises(ValueError):
            SamplerConfig(anneal_schedule=sched)

    @pytest.mark.parametrize(
        "kwargs", [dict(chains=0), dict(steps_per_phase=0), dict(proposal="hmc"), dict(step_size=0.0), dict(threads=0)]
    )
    def test_rejects_bad_values(self, kwargs):
        with pytest.raises(ValueError):
            SamplerConfig(**kwargs)


class TestDirect:
    def test_identity_exact(self):
        rep = estimate_direct(build_density(np.eye(5)), N_1E5)
        assert rep.estimate == 1.0 and rep.std_error == 0.0

    def test_two_by_two(self):
        rep = estimate_direct(build_density(TWO_BY_TWO), N_1E5)
        assert rep.samples_used == 100_000
        assert rep.z_score(2.5) <= 3.0

    def test_scalar(self):
        # E(1 + |z|^2) = 2 for the standard complex Gaussian
        rep = estimate_direct(build_density([[2.0]]), N_1E5)
        assert rep.z_score(2.0) <= 3.0

    def test_report_invariants(self):
        rep = estimate_direct(build_density(random_instance(4, 1.0, 0)), SamplerConfig(steps_per_phase=500))
        assert rep.estimate >= 0 and rep.std_error >= 0
        assert 0 < rep.effective_sample_size <= rep.samples_used


class TestMetropolis:
    def test_accept_rule(self):
        log_ratio = np.array([-0.75, -0.75, 0.3, 0.0])
        u = np.array([np.exp(-0.75) * 0.999, np.exp(-0.75) * 1.001, 0.9999, 0.5])
        np.testing.assert_array_equal(metropolis_accept(log_ratio, u), [True, False, True, True])

    def test_random_walk_scripted(self):
        # target exp(-|z|^2); eps = 1/8 makes the proposal z + xi / 2
        L = np.zeros((1, 1), dtype=complex)
        z = np.array([[0.5 + 0j], [0.5 + 0j], [1.0 + 0j]])
        lp, ell = _phase_log_density(L, 0.0, z)
        xi = np.array([[1.0 + 0j], [1.0 + 0j], [-1.0 + 0j]])
        thresh = np.exp(-0.75)  # log f(1) - log f(0.5)
        u = np.array([thresh * 0.999, thresh * 1.001, 0.999])
        z_new, lp_new, _, _, acc = mh_step(L, 0.0, z, lp, None, ell, xi, u, 0.125, "randomWalk")
        np.testing.assert_array_equal(acc, [True, False, True])
        np.testing.assert_allclose(z_new[:, 0], [1.0, 0.5, 0.5])
        np.testing.assert_allclose(lp_new, -np.abs(z_new[:, 0]) ** 2)

    def test_langevin_uses_hastings_correction(self):
        rng = np.random.default_rng(0)
        D = build_density(random_instance(3, 1.0, 4))
        L = np.asarray(D.forms.coefficients)
        eps, beta = 0.2, 0.7
        z = rng.standard_normal((1, 3)) + 1j * rng.standard_normal((1, 3))
        xi = rng.standard_normal((1, 3)) + 1j * rng.standard_normal((1, 3))
        lp, ell = _phase_log_density(L, beta, z)
        grad = _phase_grad(L, beta, z, ell)
        prop = z + eps * grad + np.sqrt(2 * eps) * xi
        lp_prop, ell_prop = _phase_log_density(L, beta, prop)
        grad_prop = _phase_grad(L, beta, prop, ell_prop)
        log_alpha = (
            lp_prop
            - lp
            - np.sum(np.abs(z - prop - eps * grad_prop) ** 2) / (4 * eps)
            + np.sum(np.abs(prop - z - eps * grad) ** 2) / (4 * eps)
        )[0]
        assert log_alpha < 0
        for factor, expect in ((0.999, True), (1.001, False)):
            u = np.array([np.exp(log_alpha) * factor])
            *_, acc = mh_step(L, beta, z, lp, grad, ell, xi, u, eps, "langevin")
            assert acc[0] == expect

    def test_phase_gradient_matches_density_gradient(self):
        from permlc.density import grad_log_density, to_real

        D = build_density(random_instance(4, 1.0, 2))
        L = np.asarray(D.forms.coefficients)
        z = np.random.default_rng(1).standard_normal((1, 4)) + 0.3j
        _, ell = _phase_log_density(L, 1.0, z)
        np.testing.assert_allclose(to_real(_phase_grad(L, 1.0, z, ell))[0], grad_log_density(D, z[0]), atol=1e-14)


class TestChains:
    def test_cached_log_density(self):
        D = build_density(random_instance(3, 1.0, 1))
        L = np.asarray(D.forms.coefficients)
        beta = 0.4
        state = phase_state(D, beta, np.zeros((2, 3)), 1)
        rngs = [np.random.default_rng(s) for s in (1, 2)]
        final, log_w, accepted = _run_chains(L, beta, 0.6, state, rngs, 10, 200, 0.1, "langevin")
        expected = log_density(D.scaled(beta), final.position)
        np.testing.assert_allclose(final.cached_log_density, expected, atol=1e-12, rtol=0)
        assert log_w.shape == (2, 200)
        assert 0 < accepted <= 400

    def test_divergence_guard(self):
        D = build_density(random_instance(2, 1.0, 1))
        L = np.asarray(D.forms.coefficients)
        state = phase_state(D, 0.5, np.full((1, 2), 2e3 + 0j), 1)
        with pytest.raises(ChainDiverged):
            _run_chains(L, 0.5, 1.0, state, [np.random.default_rng(0)], 0, 10, 1e-6, "randomWalk")

    def test_non_finite_weight(self):
        with pytest.raises(NonFiniteWeight):
            _ratio_estimate(np.array([[0.0, np.inf, 1.0, 2.0]]))


class TestAnneal:
    def test_identity_exact(self):
        rep = estimate_anneal(build_density(np.eye(3)), SamplerConfig(steps_per_phase=200, burn_in=10))
        assert rep.estimate == 1.0 and rep.std_error == 0.0
        assert rep.phase_ratios == (1.0,) * (len(rep.schedule) - 1)

    def test_two_by_two_defaults(self):
        rep = estimate_anneal(build_density(TWO_BY_TWO), SamplerConfig(seed=1))
        assert rep.z_score(2.5) <= 3.0
        assert rep.acceptance_rates[0] == 1.0
        assert all(0.0 <= a <= 1.0 for a in rep.acceptance_rates)

    def test_random_walk_proposal(self):
        rep = estimate_anneal(build_density(TWO_BY_TWO), SamplerConfig(seed=2, proposal="randomWalk"))
        assert rep.z_score(2.5) <= 3.0

    def test_n10_within_five_percent(self):
        A = random_instance(10, 1.0, 11)
        rep = estimate_anneal(build_density(A), SamplerConfig(seed=11))
        exact = permanent_ryser(A).real
        assert abs(rep.estimate - exact) / exact <= 0.05

    def test_weights_positive(self):
        rep = estimate_anneal(build_density(random_instance(4, 1.0, 3)), SamplerConfig(steps_per_phase=300, burn_in=50))
        assert all(r >= 1.0 for r in rep.phase_ratios)
        assert rep.estimate > 0

    def test_deterministic(self):
        D = build_density(random_instance(3, 1.0, 5))
        cfg = SamplerConfig(seed=7, steps_per_phase=300, burn_in=50)
        a, b = estimate_anneal(D, cfg), estimate_anneal(D, cfg)
        assert a.to_json(timing=False) == b.to_json(timing=False)

    def test_threaded_is_deterministic(self):
        D = build_density(random_instance(3, 1.0, 5))
        cfg = SamplerConfig(seed=7, steps_per_phase=300, burn_in=50, threads=2)
        a, b = estimate_anneal(D, cfg), estimate_anneal(D, cfg)
        assert a.to_json(timing=False) == b.to_json(timing=False)

    def test_custom_schedule(self):
        rep = estimate_anneal(
            build_density(TWO_BY_TWO), SamplerConfig(seed=3, anneal_schedule=(0.0, 0.25, 0.5, 1.0))
        )
        assert rep.schedule == (0.0, 0.25, 0.5, 1.0)
        assert len(rep.acceptance_rates) == 3
        assert rep.z_score(2.5) <= 3.0


@pytest.mark.slow
def test_estimators_agree_on_random_instances():
    cfg = SamplerConfig(seed=0, steps_per_phase=1500, burn_in=300)
    for i in range(50):
        n = 1 + i % 8
        D = build_density(random_instance(n, 1.0, 500 + i))
        d = estimate_direct(D, cfg)
        a = estimate_anneal(D, cfg)
        assert abs(d.estimate - a.estimate) <= 3 * (d.std_error + a.std_error), (i, d, a)


class TestWick:
    def test_zero(self):
        rep = wick_check(np.zeros((3, 3)), N_1E5)
        assert rep.estimate == 0.0 and rep.std_error == 0.0 and rep.reference == 0.0

    def test_identity(self):
        rep = wick_check(np.eye(2), N_1E5)
        assert rep.reference == 1.0
        assert rep.z_score(1.0) <= 3.0

    def test_two_by_two(self):
        # per B = 0.5 * 0.5 + 0.25 * 0.25
        B = np.array([[0.5, 0.25], [0.25, 0.5]])
        rep = wick_check(B, N_1E5)
        assert rep.reference == pytest.approx(0.3125)
        assert rep.z_score(0.3125) <= 3.0
        assert rep.method == "wick"

    def test_guard(self):
        with pytest.raises(DimensionTooLarge):
            wick_check(np.eye(11) * 0.5)

    def test_random(self):
        B = random_psd(5, 3)
        rep = wick_check(B, N_1E5)
        assert rep.z_score(permanent_ryser(B).real) <= 3.0


class TestReport:
    def test_json_fields(self):
        rep = estimate_direct(build_density(TWO_BY_TWO), SamplerConfig(steps_per_phase=100))
        data = json.loads(rep.to_json())
        assert set(data) == {
            "method", "estimate", "stdError", "ess", "acceptanceRates",
            "samplesUsed", "seed", "wallClockSeconds", "schedule",
        }
        assert data["estimate"] == rep.estimate
        assert json.loads(rep.to_json(timing=False))["wallClockSeconds"] is None

    def test_seventeen_digits(self):
        rep = estimate_direct(build_density(TWO_BY_TWO), SamplerConfig(steps_per_phase=100))
        text = rep.to_json()
        assert format(rep.estimate, ".17g") in text

    def test_rel_error_target(self):
        rep = estimate_direct(build_density(TWO_BY_TWO), SamplerConfig(steps_per_phase=1000))
        assert rep.rel_error_target == pytest.approx(1.96 * rep.std_error / rep.estimate)

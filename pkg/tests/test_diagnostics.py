import math
import unittest

import numpy as np
import pytest

from immigration.diagnostics import (
    Verdict,
    compare_samples,
    convergence_test,
    dri_mean_check,
    dri_path_check,
    dri_verdict,
    hypothesis_warnings,
    intensity_check,
    laplace_functional_compare,
    overshoot_check,
    poisson_laplace_reference,
    shift_invariance_check,
)
from immigration.distributions import EtaLaw, InterarrivalLaw
from immigration.errors import DomainError
from immigration.kernels import DeterministicTable, Indicator, ScaledExpDecay, SpikeTrain
from immigration.utils.io import dumps_json
from immigration.utils.rng import make_stream


class TestDriVerdict(unittest.TestCase):
    def test_zero_terms(self):
        verdict, fit = dri_verdict(np.zeros(20))
        assert verdict == Verdict.CONVERGENT
        assert fit["rule"] == "zero_tail"

    def test_geometric(self):
        verdict, fit = dri_verdict(0.5 ** np.arange(50))
        assert verdict == Verdict.CONVERGENT
        assert fit["rule"] == "geometric"

    def test_inverse_square(self):
        k = np.arange(50)
        verdict, fit = dri_verdict(1.0 / (k**2 + 1.0))
        assert verdict == Verdict.CONVERGENT
        assert fit["rule"] == "power_law"
        assert fit["power_exponent"] == pytest.approx(2.0, abs=0.1)

    def test_constant_terms_diverge(self):
        verdict, _ = dri_verdict(np.ones(50))
        assert verdict == Verdict.DIVERGENT

    def test_harmonic_terms_diverge(self):
        verdict, fit = dri_verdict(1.0 / (np.arange(50) + 1.0))
        assert verdict == Verdict.DIVERGENT
        assert fit["rule"] == "log_growth"

    def test_slow_harmonic_is_inconclusive(self):
        verdict, _ = dri_verdict(0.1 / (np.arange(50) + 1.0))
        assert verdict == Verdict.INCONCLUSIVE


class TestDriChecks(unittest.TestCase):
    def test_exp_decay_both_convergent(self):
        spec = ScaledExpDecay(EtaLaw.point_mass(1.0), 1.0)
        mean = dri_mean_check(spec, 30, 4, 50, make_stream(0))
        path = dri_path_check(spec, 30, 50, make_stream(1))
        np.testing.assert_allclose(mean.terms[:5], np.exp(-np.arange(5.0)), rtol=1e-12)
        np.testing.assert_allclose(path.terms[:5], np.exp(-np.arange(5.0)), rtol=1e-12)
        assert mean.verdict == Verdict.CONVERGENT
        assert path.verdict == Verdict.CONVERGENT
        np.testing.assert_allclose(mean.std_errors, 0.0, atol=1e-6)

    def test_indicator_exponential_convergent(self):
        spec = Indicator(EtaLaw.exponential(1.0))
        assert dri_mean_check(spec, 50, 4, 2000, make_stream(2)).verdict == Verdict.CONVERGENT
        assert dri_path_check(spec, 50, 2000, make_stream(3)).verdict == Verdict.CONVERGENT

    def test_indicator_pareto_divergent(self):
        spec = Indicator(EtaLaw.pareto(0.8, 1.0))
        report = dri_mean_check(spec, 50, 4, 2000, make_stream(4))
        assert report.verdict == Verdict.DIVERGENT
        # P{eta > k} = k^-0.8
        assert report.terms[10] == pytest.approx(10**-0.8, abs=5 * report.std_errors[10] + 1e-3)

    def test_spike_separates_criteria(self):
        spec = SpikeTrain()
        mean = dri_mean_check(spec, 40, 10, 4000, make_stream(5))
        path = dri_path_check(spec, 40, 4000, make_stream(6))
        assert mean.terms[0] == 0.0
        k = np.arange(1, 6)
        # the grid maximum sits within one grid step of the peak 1 / (k² + 1)
        assert np.all(mean.terms[1:6] <= 1.0 / (k**2 + 1) + 4 * mean.std_errors[1:6] + 1e-3)
        assert np.all(mean.terms[1:6] >= 0.8 / (k**2 + 1) - 4 * mean.std_errors[1:6] - 1e-3)
        np.testing.assert_allclose(path.terms[1:], 1.0)
        assert path.verdict == Verdict.DIVERGENT
        assert mean.verdict != Verdict.DIVERGENT

    def test_path_terms_dominate_mean_terms(self):
        for seed, spec in enumerate((SpikeTrain(), Indicator(EtaLaw.exponential(1.0)))):
            mean = dri_mean_check(spec, 30, 10, 2000, make_stream(40 + seed))
            path = dri_path_check(spec, 30, 2000, make_stream(50 + seed))
            slack = 4 * np.hypot(mean.std_errors, path.std_errors) + 1e-12
            assert np.all(path.terms >= mean.terms - slack), spec

    def test_argument_validation(self):
        spec = SpikeTrain()
        with pytest.raises(DomainError):
            dri_mean_check(spec, 0, 4, 10, make_stream(0))
        with pytest.raises(DomainError):
            dri_mean_check(spec, 5, 1, 10, make_stream(0))
        with pytest.raises(DomainError):
            dri_path_check(spec, 5, 0, make_stream(0))

    def test_report_serializes(self):
        report = dri_path_check(Indicator(EtaLaw.exponential(1.0)), 5, 10, make_stream(7))
        text = dumps_json(report)
        assert '"criterion": "path"' in text
        assert report.verdict.value in text


class TestPointProcessChecks(unittest.TestCase):
    def test_poisson_reference(self):
        box = DeterministicTable.box(0.0, 1.0)
        assert poisson_laplace_reference(box, 1.0) == pytest.approx(math.exp(-(1 - math.exp(-1))))
        assert poisson_laplace_reference(box, 1.0) == pytest.approx(0.5314, abs=1e-4)

    def test_laplace_functional(self):
        law = InterarrivalLaw.exponential(1.0)
        result = laplace_functional_compare(law, DeterministicTable.box(0.0, 1.0), 50.0, 2000, make_stream(8))
        assert result.reference == pytest.approx(0.5314, abs=1e-4)
        t_hw, s_hw = result.ci_halfwidths
        assert abs(result.transient_estimate - result.reference) < 2 * t_hw
        assert abs(result.stationary_estimate - result.reference) < 2 * s_hw
        assert result.warnings == ()

    def test_laplace_requires_nonnegative_compact_h(self):
        law = InterarrivalLaw.exponential(1.0)
        with pytest.raises(DomainError):
            laplace_functional_compare(law, DeterministicTable((0.0,), (1.0,)), 5.0, 10, make_stream(0))
        with pytest.raises(DomainError):
            laplace_functional_compare(law, DeterministicTable.box(0.0, 1.0, -1.0), 5.0, 10, make_stream(0))

    def test_laplace_lattice_warning(self):
        law = InterarrivalLaw.point_mass(1.0)
        result = laplace_functional_compare(law, DeterministicTable.box(0.0, 1.0), 5.0, 20, make_stream(9))
        assert len(result.warnings) == 1
        assert result.reference is None

    def test_intensity(self):
        for law in (InterarrivalLaw.exponential(1.0), InterarrivalLaw.uniform(0.0, 2.0)):
            (result,) = intensity_check(law, [(0.0, 10.0)], 1000, make_stream(10))
            assert result.expected == pytest.approx(10.0 / law.mean())
            assert abs(result.z_score) < 5

    def test_intensity_of_lattice_law_is_exact(self):
        (result,) = intensity_check(InterarrivalLaw.point_mass(1.0), [(0.0, 3.0)], 50, make_stream(11))
        assert result.empirical_mean == 3.0
        assert result.z_score == 0.0

    def test_overshoot_uniform(self):
        report = overshoot_check(InterarrivalLaw.uniform(0.0, 1.0), 50.0, 2000, make_stream(12))
        assert report.overshoot.p_value > 1e-4
        assert report.undershoot.p_value > 1e-4
        assert report.warnings == ()
        assert not report.lattice

    def test_overshoot_short_horizon_warns(self):
        report = overshoot_check(InterarrivalLaw.exponential(1.0), 5.0, 100, make_stream(13))
        assert any("horizon" in w for w in report.warnings)

    def test_shift_invariance(self):
        report = shift_invariance_check(
            InterarrivalLaw.exponential(1.0), 0.25, (0.0, 1.0), 2000, make_stream(14), alpha=1e-4
        )
        assert not report.reject
        assert report.plain_mean == pytest.approx(1.0, abs=0.15)


class TestConvergence(unittest.TestCase):
    def test_compare_samples_detects_difference(self):
        rng = make_stream(15)
        a = rng.normal(size=(200, 2))
        b = rng.normal(size=(200, 2)) + np.array([0.0, 1.0])
        report = compare_samples(a, b, [0.0, 1.0], 0.01, 99, make_stream(16), t=3.0)
        assert report.reject
        assert report.bonferroni_alpha == pytest.approx(0.005)
        assert report.ks[1].p_value < report.ks[0].p_value

    def test_compare_samples_shape_check(self):
        with pytest.raises(DomainError):
            compare_samples(np.zeros((5, 2)), np.zeros((5, 2)), [0.0], 0.01, 19, make_stream(0))

    def test_hypothesis_warnings(self):
        lattice = hypothesis_warnings(InterarrivalLaw.point_mass(1.0), Indicator(EtaLaw.exponential(1.0)), 1)
        assert any("lattice" in w for w in lattice)
        heavy = hypothesis_warnings(InterarrivalLaw.exponential(1.0), Indicator(EtaLaw.pareto(0.8, 1.0)), 1)
        assert any("infinite" in w for w in heavy)
        assert hypothesis_warnings(InterarrivalLaw.exponential(1.0), Indicator(EtaLaw.exponential(1.0)), 1) == []

    def test_mm_infinity_converges(self):
        study = convergence_test(
            InterarrivalLaw.exponential(1.0),
            Indicator(EtaLaw.exponential(1.0)),
            [30.0],
            [0.0, 1.0],
            400,
            0.001,
            seed=17,
            n_permutations=99,
        )
        assert study.hypothesis_violation is None
        assert study.warnings == ()
        assert len(study.reports) == 1
        assert not study.reports[0].reject
        assert study.rejection_decays is None
        assert len(study.transient_means[30.0]) == 2

    def test_truncation_failure_is_a_hypothesis_violation(self):
        study = convergence_test(
            InterarrivalLaw.exponential(1.0),
            ScaledExpDecay(EtaLaw.point_mass(1.0), 1.0),
            [5.0],
            [0.0],
            5,
            0.01,
            seed=18,
            tol=1e-300,
        )
        assert study.reports == ()
        assert study.hypothesis_violation is not None
        assert 5.0 in study.transient_means

    def test_alpha_validation(self):
        with pytest.raises(DomainError):
            convergence_test(
                InterarrivalLaw.exponential(1.0), Indicator(EtaLaw.exponential(1.0)), [1.0], [0.0], 5, 1.5, seed=0
            )

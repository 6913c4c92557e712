import csv
import math
import os
import tempfile
import unittest

import numpy as np
import pytest

from immigration.distributions import EtaLaw, InterarrivalLaw
from immigration.errors import DomainError, TruncationError
from immigration.kernels import DeterministicTable, Indicator, ScaledExpDecay
from immigration.process import (
    Stationary,
    Transient,
    eval_stationary,
    eval_transient,
    fdd_sample,
    sample_metadata,
    simulate_replicates,
    write_fdd_csv,
)
from immigration.utils.rng import TRANSIENT_KEY, make_stream

from conftest import mm_infinity_sample


def _within(sample, expected, k=5.0):
    sample = np.asarray(sample, dtype=float)
    se = sample.std(ddof=1) / math.sqrt(len(sample))
    return abs(sample.mean() - expected) < k * se


class TestEvalTransient(unittest.TestCase):
    def test_lattice_box_counts_one_epoch(self):
        law = InterarrivalLaw.point_mass(1.0)
        box = DeterministicTable.box(0.0, 1.0)
        sample = eval_transient(law, box, 5.0, [0.0, 0.25, 0.5], make_stream(0))
        np.testing.assert_array_equal(sample.values, [1.0, 1.0, 1.0])
        assert sample.kind == "transient"
        assert sample.truncation_bound is None

    def test_negative_argument_is_zero(self):
        sample = eval_transient(
            InterarrivalLaw.exponential(1.0), Indicator(EtaLaw.exponential(1.0)), 0.0, [-2.0, -1.0], make_stream(1)
        )
        np.testing.assert_array_equal(sample.values, [0.0, 0.0])
        assert sample.n_paths == 0

    def test_origin_epoch_contributes(self):
        # only S_0 = 0 lies in [0, 0.5] for PointMass(1)
        sample = eval_transient(
            InterarrivalLaw.point_mass(1.0), DeterministicTable.box(0.0, 2.0, height=3.0), 0.5, [0.0], make_stream(2)
        )
        assert sample.values.tolist() == [3.0]

    def test_grid_validation(self):
        law = InterarrivalLaw.exponential(1.0)
        spec = Indicator(EtaLaw.exponential(1.0))
        with pytest.raises(DomainError) as info:
            eval_transient(law, spec, 1.0, [1.0, 0.0], make_stream(0))
        assert info.value.field == "u_grid"
        with pytest.raises(DomainError):
            eval_transient(law, spec, 1.0, [], make_stream(0))

    def test_matches_queue_simulation(self):
        law = InterarrivalLaw.exponential(1.0)
        spec = Indicator(EtaLaw.exponential(1.0))
        ours = fdd_sample(law, spec, Transient(1.0), [0.0], 3000, seed=3)[:, 0]
        oracle = mm_infinity_sample(3000, 1.0, seed=4)
        # P{Y(1) = 0} = (1 - e^-1) exp(-(1 - e^-1))
        p0 = (1 - math.exp(-1)) * math.exp(-(1 - math.exp(-1)))
        se = math.sqrt(p0 * (1 - p0) / 3000)
        assert abs(np.mean(ours == 0) - p0) < 5 * se
        assert abs(np.mean(oracle == 0) - p0) < 5 * se
        assert abs(ours.mean() - oracle.mean()) < 0.1


class TestEvalStationary(unittest.TestCase):
    def test_zero_kernel(self):
        sample = eval_stationary(
            InterarrivalLaw.exponential(1.0), DeterministicTable.zero(), [0.0, 1.0, 2.0], 1e-8, make_stream(0)
        )
        np.testing.assert_array_equal(sample.values, [0.0, 0.0, 0.0])
        assert sample.truncation_bound == 0.0

    def test_lattice_box_counts_one_point(self):
        sample = eval_stationary(
            InterarrivalLaw.point_mass(1.0), DeterministicTable.box(0.0, 1.0), [-0.5, 0.0, 0.7], 1e-8, make_stream(1)
        )
        np.testing.assert_array_equal(sample.values, [1.0, 1.0, 1.0])

    def test_exp_decay_campbell_mean(self):
        law = InterarrivalLaw.exponential(1.0)
        spec = ScaledExpDecay(EtaLaw.point_mass(1.0), 1.0)
        samples = simulate_replicates(law, spec, Stationary(1e-6), [0.0], 400, seed=5)
        values = [s.values[0] for s in samples]
        assert _within(values, 1.0)
        assert max(s.truncation_bound for s in samples) < 1e-6
        assert all(s.c_used >= 10.0 for s in samples)

    def test_poisson_marginal(self):
        law = InterarrivalLaw.exponential(1.0)
        spec = Indicator(EtaLaw.exponential(1.0))
        values = fdd_sample(law, spec, Stationary(), [0.0], 2000, seed=6)[:, 0]
        assert _within(values, 1.0)
        assert values.var() == pytest.approx(1.0, abs=0.2)
        assert np.all(values == np.round(values))

    def test_indicator_bound_is_an_expectation_bound(self):
        law = InterarrivalLaw.exponential(1.0)
        unbounded = eval_stationary(law, Indicator(EtaLaw.exponential(1.0)), [0.0], 1e-8, make_stream(2))
        # E[(eta - c)^+] / mu for Exp(1) marks
        assert unbounded.truncation_bound == pytest.approx(math.exp(-unbounded.c_used))
        assert 0.0 < unbounded.truncation_bound < 1e-8
        bounded = eval_stationary(law, Indicator(EtaLaw.uniform(0.0, 3.0)), [0.0], 1e-8, make_stream(2))
        assert bounded.truncation_bound == 0.0

    def test_wider_window_only_adds_mass(self):
        law = InterarrivalLaw.exponential(1.0)
        cases = (
            (Indicator(EtaLaw.exponential(1.0)), 1e-2, 1e-12),
            (ScaledExpDecay(EtaLaw.point_mass(1.0), 1.0), 1e-2, 1e-6),
        )
        for spec, loose_tol, tight_tol in cases:
            for seed in range(100):
                loose = eval_stationary(law, spec, [0.0, 1.0], loose_tol, make_stream(seed))
                tight = eval_stationary(law, spec, [0.0, 1.0], tight_tol, make_stream(seed))
                assert tight.c_used >= loose.c_used
                assert tight.n_paths >= loose.n_paths
                assert np.all(tight.values >= loose.values), (spec, seed)

    def test_truncation_failure(self):
        law = InterarrivalLaw.exponential(1.0)
        spec = ScaledExpDecay(EtaLaw.point_mass(1.0), 1.0)
        with pytest.raises(TruncationError) as info:
            simulate_replicates(law, spec, Stationary(tol=1e-300), [0.0], 1, seed=7)
        error = info.value
        assert error.replicate == 0
        assert error.bound >= 1e-300
        assert len(error.values) == 1

    def test_explicit_c_max(self):
        law = InterarrivalLaw.exponential(1.0)
        spec = ScaledExpDecay(EtaLaw.point_mass(1.0), 1.0)
        with pytest.raises(TruncationError) as info:
            eval_stationary(law, spec, [0.0], 1e-12, make_stream(8), c_max=5.0)
        assert info.value.c_used == 5.0

    def test_non_positive_tol(self):
        with pytest.raises(DomainError):
            eval_stationary(
                InterarrivalLaw.exponential(1.0), DeterministicTable.zero(), [0.0], 0.0, make_stream(0)
            )


class TestReplicates(unittest.TestCase):
    def setUp(self):
        self.law = InterarrivalLaw.exponential(1.0)
        self.spec = Indicator(EtaLaw.exponential(1.0))

    def test_replicate_streams(self):
        samples = simulate_replicates(self.law, self.spec, Transient(4.0), [0.0, 1.0], 3, seed=9)
        direct = eval_transient(self.law, self.spec, 4.0, [0.0, 1.0], make_stream(9, TRANSIENT_KEY, 2))
        np.testing.assert_array_equal(samples[2].values, direct.values)

    def test_fdd_shape_and_determinism(self):
        a = fdd_sample(self.law, self.spec, Transient(30.0), [0.0], 100, seed=7)
        b = fdd_sample(self.law, self.spec, Transient(30.0), [0.0], 100, seed=7)
        assert a.shape == (100, 1)
        np.testing.assert_array_equal(a, b)

    def test_independent_of_jobs(self):
        grid = [0.0, 1.0, 5.0]
        serial = fdd_sample(self.law, self.spec, Stationary(), grid, 24, seed=10, n_jobs=1)
        parallel = fdd_sample(self.law, self.spec, Stationary(), grid, 24, seed=10, n_jobs=2)
        np.testing.assert_array_equal(serial, parallel)

    def test_rejects_empty_run(self):
        with pytest.raises(DomainError):
            simulate_replicates(self.law, self.spec, Transient(1.0), [0.0], 0, seed=1)

    def test_metadata(self):
        samples = simulate_replicates(self.law, self.spec, Stationary(), [0.0, 1.0], 5, seed=11)
        meta = sample_metadata(self.law, self.spec, Stationary(), 11, samples)
        assert meta["n_replicates"] == 5
        assert meta["mode"]["kind"] == "stationary"
        assert meta["lattice"] is False
        assert meta["c_used"]["min"] <= meta["c_used"]["median"] <= meta["c_used"]["max"]
        assert meta["kernel"] == self.spec.to_config()

    def test_csv_layout(self):
        matrix = fdd_sample(self.law, self.spec, Transient(2.0), [0.0, 1.0, 5.0], 4, seed=12)
        with tempfile.TemporaryDirectory() as tmp:
            path = write_fdd_csv(os.path.join(tmp, "fdd.csv"), [0.0, 1.0, 5.0], matrix)
            with open(path) as f:
                rows = list(csv.reader(f))
        assert rows[0] == ["u=0", "u=1", "u=5"]
        assert len(rows) == 5
        np.testing.assert_array_equal(np.array(rows[1:], dtype=float), matrix)

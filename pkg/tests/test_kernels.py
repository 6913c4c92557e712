import math
import unittest

import numpy as np
import pytest

from immigration.distributions import EtaLaw
from immigration.errors import DomainError, NonAbsorbedPathError
from immigration.kernels import (
    BirthDeath,
    DeterministicTable,
    ExpDecayPath,
    Indicator,
    IndicatorPath,
    KernelSpec,
    ScaledExpDecay,
    ScaledTable,
    SpikePath,
    SpikeTrain,
    StepPath,
    absorption_time,
    eval_path,
    kernel_from_config,
    sample_path,
    sup_over_interval,
)
from immigration.utils.rng import make_stream


class TestPaths(unittest.TestCase):
    def test_step_path_values(self):
        path = StepPath([0.0, 1.0, 2.0], [3.0, -5.0, 0.0])
        np.testing.assert_array_equal(path.value([-0.1, 0.0, 0.5, 1.0, 2.0, 9.0]), [0, 3, 3, -5, 0, 0])
        assert eval_path(path, 1.5) == -5.0

    def test_step_path_sup_closed_and_open(self):
        path = StepPath([0.0, 1.0, 2.0], [3.0, -5.0, 0.0])
        assert path.sup(0.0, 1.0) == 5.0
        assert sup_over_interval(path, 0.0, 1.0, right_open=True) == 3.0
        assert path.sup(2.0, 4.0) == 0.0
        np.testing.assert_array_equal(path.sups([0.0, 1.0, 2.0, 3.0]), [3.0, 5.0, 0.0])

    def test_step_path_absorption(self):
        assert absorption_time(StepPath([0.0, 1.0, 2.0], [3.0, -5.0, 0.0])) == 2.0
        assert StepPath([0.0, 1.0], [1.0, 2.0]).absorption_time() is None
        assert StepPath([0.0], [0.0]).absorption_time() == 0.0

    def test_indicator_path(self):
        path = IndicatorPath(2.0)
        np.testing.assert_array_equal(path.value([-1.0, 0.0, 1.999, 2.0]), [0, 1, 1, 0])
        assert path.sup(0.0, 2.0, right_open=True) == 1.0
        assert path.sup(2.0, 3.0) == 0.0
        assert path.absorption_time() == 2.0

    def test_exp_decay_path(self):
        path = ExpDecayPath(-2.0, 1.0)
        assert path.value(1.0) == pytest.approx(-2.0 * math.exp(-1.0))
        assert path.sup(1.0, 3.0) == pytest.approx(2.0 * math.exp(-1.0))
        assert path.value(-0.5) == 0.0
        assert path.absorption_time() is None
        assert ExpDecayPath(0.0, 1.0).absorption_time() == 0.0

    def test_spike_path(self):
        path = SpikePath(0.5)
        # first spike is [1.25, 1.5)
        np.testing.assert_array_equal(path.value([0.5, 1.2, 1.3, 1.5]), [0, 0, 1, 0])
        assert path.sup(1.0, 2.0, right_open=True) == 1.0
        # second spike is [2.4, 2.5)
        assert path.sup(2.0, 2.3) == 0.0
        assert path.sup(2.0, 2.45) == 1.0
        assert path.absorption_time() is None

    def test_sups_default_matches_sup(self):
        path = SpikePath(0.3)
        edges = np.arange(0.0, 6.0)
        expected = [path.sup(a, b, right_open=True) for a, b in zip(edges[:-1], edges[1:])]
        np.testing.assert_array_equal(path.sups(edges), expected)

    def test_reversed_interval(self):
        with pytest.raises(DomainError):
            IndicatorPath(1.0).sup(2.0, 1.0)


class TestKernelSpecs(unittest.TestCase):
    def test_table_validation(self):
        with pytest.raises(DomainError) as info:
            DeterministicTable((1.0, 0.5), (1.0, 0.0))
        assert info.value.field == "breakpoints"
        with pytest.raises(DomainError):
            DeterministicTable((0.0,), (1.0, 2.0))

    def test_table_support_and_tail(self):
        box = DeterministicTable.box(0.0, 2.0)
        assert box.support_bound() == 2.0
        assert box.tail_bound(1.0, 0.5, 0.1) == pytest.approx(2.0)
        assert box.tail_bound(3.0, 0.5, 0.1) == 0.0
        assert box.fixed_discontinuities() == (0.0, 2.0)
        assert DeterministicTable.zero().support_end() == 0.0

    def test_deterministic_table_paths_are_shared(self):
        box = DeterministicTable.box(0.0, 1.0, height=3.0)
        paths = box.sample_paths(make_stream(0), 3)
        assert all(p.value(0.5) == 3.0 for p in paths)

    def test_indicator_tail_bound(self):
        spec = Indicator(EtaLaw.exponential(1.0))
        assert spec.tail_bound(3.0, 1.0, 0.1) == pytest.approx(math.exp(-3.0))
        assert spec.support_bound() is None
        assert Indicator(EtaLaw.uniform(0.0, 3.0)).support_bound() == 3.0

    def test_indicator_fixed_discontinuities(self):
        assert Indicator(EtaLaw.point_mass(2.0)).fixed_discontinuities() == (2.0,)
        assert Indicator(EtaLaw.exponential(1.0)).fixed_discontinuities() == ()

    def test_exp_decay(self):
        with pytest.raises(DomainError) as info:
            ScaledExpDecay(EtaLaw.point_mass(1.0), 0.0)
        assert info.value.field == "a"
        spec = ScaledExpDecay(EtaLaw.point_mass(1.0), 1.0)
        assert spec.tail_bound(2.0, 1.0, math.inf) == pytest.approx(math.exp(-2.0))
        assert math.isinf(spec.tail_bound(2.0, 1.0, 0.0))
        assert spec.is_nonnegative()
        assert not ScaledExpDecay(EtaLaw.point_mass(-1.0), 1.0).is_nonnegative()

    def test_scaled_table_scales_each_path(self):
        spec = ScaledTable(EtaLaw.exponential(1.0), DeterministicTable.box(0.0, 1.0))
        rng = make_stream(9)
        eta = EtaLaw.exponential(1.0).sample(make_stream(9), 4)
        paths = spec.sample_paths(rng, 4)
        np.testing.assert_allclose([p.value(0.5) for p in paths], eta)
        assert spec.support_bound() == 1.0

    def test_spike_train_rejects_eta_beyond_one(self):
        with pytest.raises(DomainError):
            SpikeTrain(EtaLaw.uniform(0.0, 2.0))

    def test_sampled_paths_are_right_continuous(self):
        rng = make_stream(30)
        grid = rng.uniform(-1.0, 12.0, 500)
        specs = (
            Indicator(EtaLaw.exponential(1.0)),
            ScaledTable(EtaLaw.exponential(1.0), DeterministicTable((0.0, 0.5, 2.0), (1.0, 3.0, 0.0))),
            SpikeTrain(),
            BirthDeath(initial=2, birth_rates=1.0, death_rates=2.0, state_cap=20),
        )
        for spec in specs:
            for path in spec.sample_paths(rng, 20):
                jumps = [0.0]
                if isinstance(path, StepPath):
                    jumps.extend(path.breakpoints)
                elif isinstance(path, IndicatorPath):
                    jumps.append(path.eta)
                elif isinstance(path, SpikePath):
                    for k in range(1, 12):
                        jumps.extend(path._spike(float(k)))
                t = np.concatenate([grid, jumps])
                right = np.nextafter(t, np.inf)
                np.testing.assert_array_equal(path.value(t), path.value(right), err_msg=repr(path))

        decay = ExpDecayPath(2.0, 1.5)
        t = np.concatenate([grid, [0.0]])
        np.testing.assert_allclose(decay.value(t), decay.value(t + 1e-12), atol=1e-10)

    def test_spike_train_tail_decreases(self):
        spec = SpikeTrain()
        bounds = [spec.tail_bound(x, 1.0, 0.1) for x in (1.0, 10.0, 100.0)]
        assert bounds[0] > bounds[1] > bounds[2] > 0

    def test_birth_death_single_step(self):
        spec = BirthDeath(initial=1, birth_rates=0.0, death_rates=1.0, state_cap=1)
        path = sample_path(spec, make_stream(1))
        tau = path.absorption_time()
        assert tau > 0
        assert path.value(0.0) == 1.0
        assert path.value(tau) == 0.0

    def test_birth_death_absorption_mean(self):
        # from state 1 with birth 1 and death 2 the mean absorption time is 1
        spec = BirthDeath(initial=1, birth_rates=1.0, death_rates=2.0, state_cap=60)
        rng = make_stream(21)
        taus = np.array([p.absorption_time() for p in spec.sample_paths(rng, 4000)])
        se = taus.std() / math.sqrt(len(taus))
        assert abs(taus.mean() - 1.0) < 5 * se

    def test_birth_death_budget(self):
        spec = BirthDeath(initial=1, birth_rates=10.0, death_rates=1.0, state_cap=50, max_time=1e-9)
        with pytest.raises(NonAbsorbedPathError) as info:
            spec.sample_path(make_stream(2))
        assert isinstance(info.value.partial_path, StepPath)

    def test_birth_death_validation(self):
        with pytest.raises(DomainError) as info:
            BirthDeath(initial=1, birth_rates=1.0, death_rates=[0.0, 1.0], state_cap=2)
        assert info.value.field == "death_rates"
        with pytest.raises(DomainError) as info:
            BirthDeath(initial=3, birth_rates=1.0, death_rates=1.0, state_cap=2)
        assert info.value.field == "initial"


class TestKernelConfig(unittest.TestCase):
    def test_roundtrip(self):
        specs = [
            DeterministicTable.box(0.0, 2.0),
            Indicator(EtaLaw.exponential(1.0)),
            ScaledExpDecay(EtaLaw.point_mass(1.0), 0.5),
            ScaledTable(EtaLaw.uniform(0.0, 1.0), DeterministicTable.box(1.0, 2.0)),
            BirthDeath(initial=2, birth_rates=[1.0, 1.0, 0.0], death_rates=2.0, state_cap=3),
            SpikeTrain(),
        ]
        for spec in specs:
            assert KernelSpec.from_config(spec.to_config()) == spec

    def test_unknown_kind(self):
        with pytest.raises(DomainError) as info:
            kernel_from_config({"kind": "wiener"})
        assert info.value.field == "kind"

    def test_nested_field_paths(self):
        with pytest.raises(DomainError) as info:
            kernel_from_config({"kind": "indicator", "eta": {"family": "exponential", "rate": -1.0}})
        assert info.value.field == "eta.rate"
        with pytest.raises(DomainError) as info:
            kernel_from_config(
                {
                    "kind": "scaled_table",
                    "eta": {"family": "point_mass", "value": 1.0},
                    "table": {"breakpoints": [1.0, 0.0], "values": [1.0, 0.0]},
                }
            )
        assert info.value.field == "table.breakpoints"

    def test_spike_train_default_eta(self):
        spec = kernel_from_config({"kind": "spike_train"})
        assert spec.eta == EtaLaw.uniform(0.0, 1.0)

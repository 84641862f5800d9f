import numpy as np
import pytest

from evolkv.allocators import (
    fixed_position_allocation,
    pyramidal_allocation,
    uniform_allocation,
)
from evolkv.budgets import PositionPolicy


class TestUniform:
    def test_shape(self):
        b = uniform_allocation(32, 128)
        assert b.budgets == (128,) * 32

    def test_single_layer(self):
        assert uniform_allocation(1, 7).budgets == (7,)

    def test_mean_exact(self):
        assert uniform_allocation(13, 77).mean() == 77.0

    def test_bad_inputs(self):
        with pytest.raises(ValueError):
            uniform_allocation(0, 128)


class TestPyramidal:
    def test_taper_one_is_uniform(self):
        assert pyramidal_allocation(16, 100, 1.0) == uniform_allocation(16, 100)

    def test_reference_two_layer_case(self):
        # solve 1.5 * k_max = 200, round, assign residue
        assert pyramidal_allocation(2, 100, 0.5).budgets == (133, 67)

    def test_default_shape_32_layers(self):
        b = pyramidal_allocation(32, 128, 0.2)
        assert list(b.budgets) == sorted(b.budgets, reverse=True)
        assert abs(b.mean() - 128) < 1.0
        assert b.budgets[0] > b.budgets[-1]

    def test_taper_out_of_range(self):
        for taper in (0.0, -0.5, 1.5):
            with pytest.raises(ValueError):
                pyramidal_allocation(32, 128, taper)

    def test_randomized_monotone_and_on_target(self):
        rng = np.random.default_rng(31)
        for _ in range(300):
            layers = int(rng.integers(1, 80))
            target = int(rng.integers(1, 2000))
            taper = float(rng.uniform(0.05, 1.0))
            b = pyramidal_allocation(layers, target, taper)
            assert list(b.budgets) == sorted(b.budgets, reverse=True)
            assert abs(b.mean() - target) < 1.0
            assert all(k >= 0 for k in b.budgets)


class TestFixedPosition:
    def test_reference_case(self):
        b, policy = fixed_position_allocation(32, 128, 4)
        assert b.budgets == (128,) * 32
        assert policy == PositionPolicy(kind="fixed_position", sink_tokens=4)

    def test_pure_recency_window(self):
        _, policy = fixed_position_allocation(8, 64, 0)
        assert policy.sink_tokens == 0

    def test_sink_equal_to_budget_rejected(self):
        with pytest.raises(ValueError):
            fixed_position_allocation(8, 64, 64)

    def test_mean_exact(self):
        b, _ = fixed_position_allocation(5, 99, 10)
        assert b.mean() == 99.0

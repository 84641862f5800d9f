import math

import numpy as np
import pytest

from evolkv.budgets import LayerBudgets
from evolkv.completion import complete


def reference_formula(budgets, target_average):
    """Direct float evaluation of the redistribution rule, for cross-checking."""
    achieved = sum(budgets)
    total = target_average * len(budgets)
    delta = total - achieved
    return [math.ceil(k + (k / achieved) * delta) for k in budgets]


class TestCompleteExamples:
    def test_identity_when_already_on_target(self):
        b = LayerBudgets.of([128] * 32)
        assert complete(b, 128) == b

    def test_upscale_two_layers(self):
        # T=384, A=256, delta=128: [ceil(96), ceil(288)]
        assert complete(LayerBudgets.of([64, 192]), 192).budgets == (96, 288)

    def test_ceiling_overshoot(self):
        # T=4, A=3, delta=1: ceilings push the sum to 5 >= T
        out = complete(LayerBudgets.of([1, 2]), 2)
        assert out.budgets == (2, 3)
        assert out.total() == 5

    def test_all_zero_rejected(self):
        with pytest.raises(ValueError):
            complete(LayerBudgets.of([0, 0, 0]), 10)

    def test_bad_target_rejected(self):
        with pytest.raises(ValueError):
            complete(LayerBudgets.of([1, 2]), 0)

    def test_downscale(self):
        out = complete(LayerBudgets.of([400, 800]), 150)
        assert out.budgets == (100, 200)


class TestCompleteProperties:
    def test_randomized_conservation_order_zero(self):
        rng = np.random.default_rng(2024)
        for _ in range(1000):
            length = int(rng.integers(1, 65))
            budgets = rng.integers(0, 4097, size=length)
            if budgets.sum() == 0:
                budgets[int(rng.integers(length))] = int(rng.integers(1, 4097))
            target = int(rng.integers(1, 4097))
            b = LayerBudgets.of(budgets)
            out = complete(b, target)

            total = target * length
            assert total <= out.total() <= total + length

            for i in range(length):
                if budgets[i] == 0:
                    assert out.budgets[i] == 0
                for j in range(i + 1, length):
                    if budgets[i] <= budgets[j]:
                        assert out.budgets[i] <= out.budgets[j]
                    else:
                        assert out.budgets[i] >= out.budgets[j]

    def test_matches_direct_formula(self):
        rng = np.random.default_rng(7)
        for _ in range(300):
            length = int(rng.integers(1, 33))
            budgets = rng.integers(0, 2000, size=length)
            if budgets.sum() == 0:
                budgets[0] = 1
            target = int(rng.integers(1, 2000))
            out = complete(LayerBudgets.of(budgets), target)
            assert list(out.budgets) == reference_formula(list(budgets), target)

    def test_proportions_preserved_before_ceiling(self):
        # T/A = 210/70 is integral, so ceilings introduce no skew at all
        assert complete(LayerBudgets.of([10, 20, 40]), 70).budgets == (30, 60, 120)
        # in general each layer lands within the ceiling of its exact share
        b = LayerBudgets.of([10, 20, 40])
        out = complete(b, 1000)
        for k, scaled in zip(b.budgets, out.budgets):
            exact = k * 3000 / 70
            assert exact <= scaled < exact + 1

    def test_identity_when_total_already_exact(self):
        rng = np.random.default_rng(99)
        for _ in range(200):
            length = int(rng.integers(1, 40))
            budgets = rng.integers(0, 500, size=length)
            if budgets.sum() == 0:
                budgets[0] = 3
            b = LayerBudgets.of(budgets)
            target = int(rng.integers(1, 500))
            once = complete(b, target)
            if b.total() == target * length:
                assert once == b
            # re-targeting an at-or-over-target result only ever shrinks layers
            if once.mean() >= target:
                twice = complete(once, target)
                assert all(t <= o for t, o in zip(twice.budgets, once.budgets))

"""Energy-efficiency composition, association rules, and the CDF table."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ntnsim.cellfree import (
    AssociationMode,
    CellfreeConfig,
    _ee_trial,
    associate,
    ee_total,
    energy_efficiency,
    los_probability_sigmoid,
    simulate_ee_cdf,
)
from ntnsim.harness import trial_rng

SMALL = CellfreeConfig(
    n_uav=200,
    disc_radius_km=10.0,
    user_density_per_km2=0.5,
    haps_counts=(2, 4, 8),
)


class TestEeTotal:
    def test_known_value(self):
        # product over sum: 200*300/500
        assert ee_total(200.0, 300.0) == pytest.approx(120.0)

    def test_zero_stage_kills_link(self):
        assert ee_total(0.0, 100.0) == 0.0
        assert ee_total(0.0, 0.0) == 0.0

    def test_rejects_negative(self):
        with pytest.raises(ValueError):
            ee_total(-1.0, 10.0)

    @given(st.floats(0.0, 1e6), st.floats(0.001, 1e6))
    @settings(max_examples=100, deadline=None)
    def test_never_exceeds_weaker_stage(self, a, b):
        assert ee_total(a, b) <= min(a, b) + 1e-9


class TestEnergyEfficiency:
    def test_one_megabit_per_watt(self):
        # 30 dBm is exactly one watt
        assert energy_efficiency(1e6, 30.0) == pytest.approx(1.0)

    def test_scales_with_power(self):
        assert energy_efficiency(1e6, 40.0) == pytest.approx(0.1)


class TestAssociate:
    def test_rules_can_disagree(self):
        distances = np.array([100.0, 200.0])
        mean_rx = np.array([-90.0, -60.0])  # the far one is unblocked
        assert associate(AssociationMode.CELLULAR, distances, mean_rx) == 0
        assert associate(AssociationMode.CELL_FREE, distances, mean_rx) == 1

    def test_empty_raises(self):
        with pytest.raises(ValueError):
            associate(AssociationMode.CELLULAR, np.empty(0), np.empty(0))


class TestSigmoid:
    def test_inflection_and_limits(self):
        assert los_probability_sigmoid(np.array([9.61]), 9.61, 0.16)[0] == pytest.approx(
            1 / 10.61
        )
        assert los_probability_sigmoid(np.array([90.0]), 9.61, 0.16)[0] > 0.99
        assert los_probability_sigmoid(np.array([0.0]), 9.61, 0.16)[0] < 0.05


class TestTrialPayload:
    def test_platform_growth_is_samplewise_monotone(self):
        # nested platform prefixes shorten each backhaul, never lengthen it
        payload = _ee_trial(SMALL, 0, trial_rng(5, 0))
        assert payload["n"] > 0
        for mode in AssociationMode:
            e2 = payload[(mode.value, 2)]
            e4 = payload[(mode.value, 4)]
            e8 = payload[(mode.value, 8)]
            assert e2.shape == e4.shape == e8.shape
            assert np.all(e4 >= e2)
            assert np.all(e8 >= e4)

    def test_samples_positive_and_finite(self):
        payload = _ee_trial(SMALL, 0, trial_rng(6, 0))
        for mode in AssociationMode:
            for k in SMALL.haps_counts:
                ee = payload[(mode.value, k)]
                assert np.all(np.isfinite(ee))
                assert np.all(ee >= 0.0)


class TestConfigValidation:
    def test_counts_must_increase(self):
        with pytest.raises(ValueError):
            CellfreeConfig(haps_counts=(8, 4))
        with pytest.raises(ValueError):
            CellfreeConfig(haps_counts=())

    def test_active_fraction_range(self):
        with pytest.raises(ValueError):
            CellfreeConfig(active_fraction=0.0)
        with pytest.raises(ValueError):
            CellfreeConfig(active_fraction=1.5)


class TestCdfTable:
    def test_layout_and_monotone_cdf_rows(self):
        table = simulate_ee_cdf(SMALL, trials=2, seed=3)
        assert table.columns == ("mode", "n_haps", "ee_mbj", "cdf_value", "statistic")
        groups = {(r[0], r[1]) for r in table.rows}
        assert groups == {
            (m.value, k) for m in AssociationMode for k in SMALL.haps_counts
        }
        for mode in AssociationMode:
            for k in SMALL.haps_counts:
                cdf_rows = [
                    r for r in table.rows
                    if r[0] == mode.value and r[1] == k and r[4] == "cdf"
                ]
                xs = [r[2] for r in cdf_rows]
                ys = [r[3] for r in cdf_rows]
                assert xs == sorted(xs)
                assert all(a <= b for a, b in zip(ys, ys[1:]))
                assert 0.0 <= ys[0] and ys[-1] <= 1.0

    def test_mean_and_threshold_rows_present(self):
        table = simulate_ee_cdf(SMALL, trials=2, seed=3)
        stats = {r[4] for r in table.rows}
        assert stats == {"cdf", "mean", "frac_ge"}
        for r in table.rows:
            if r[4] == "frac_ge":
                assert r[2] == SMALL.ee_threshold_mbj
                assert 0.0 <= r[3] <= 1.0
            if r[4] == "mean":
                assert r[2] > 0.0

    def test_deterministic_across_workers(self):
        a = simulate_ee_cdf(SMALL, trials=2, seed=3, workers=1)
        b = simulate_ee_cdf(SMALL, trials=2, seed=3, workers=2)
        assert a.to_csv_text() == b.to_csv_text()

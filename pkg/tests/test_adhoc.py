"""Routing rules, latency accounting, and the swarm latency sweep."""

import dataclasses

import numpy as np
import pytest
from numpy.random import default_rng

from ntnsim.adhoc import (
    RECEIVER,
    SWEEP_ARMS,
    AdhocConfig,
    RouteStrategy,
    RouteStuck,
    next_hop_long,
    next_hop_short,
    route,
    sweep_latency,
)
from ntnsim.constants import SPEED_OF_LIGHT

UAV_ALT = 50.0
NO_RELAYS = np.empty((0, 3))


def _at(x_km, y_km=0.0):
    return np.array([x_km * 1e3, y_km * 1e3, UAV_ALT])


class TestNextHopLong:
    def test_receiver_in_range_wins(self):
        relays = np.array([_at(1.0)])
        assert next_hop_long(_at(0.0), _at(9.0), relays, 10e3) == RECEIVER

    def test_picks_candidate_closest_to_receiver(self):
        relays = np.array([_at(3.0), _at(8.0), _at(12.0)])
        # 12 km is out of range; of the rest, 8 km is closer to the receiver
        assert next_hop_long(_at(0.0), _at(20.0), relays, 10e3) == 1

    def test_stuck_when_nothing_reachable(self):
        with pytest.raises(RouteStuck):
            next_hop_long(_at(0.0), _at(20.0), NO_RELAYS, 10e3)
        with pytest.raises(RouteStuck):
            next_hop_long(_at(0.0), _at(20.0), np.array([_at(15.0)]), 10e3)


class TestNextHopShort:
    def test_cone_admits_29_degrees(self):
        inside = 3e3 * np.array([np.cos(np.radians(29)), np.sin(np.radians(29)), 0.0])
        choice = next_hop_short(_at(0.0), _at(10.0), inside[None, :], 5e3, 30.0)
        assert choice == 0

    def test_cone_rejects_31_degrees(self):
        outside = 3e3 * np.array([np.cos(np.radians(31)), np.sin(np.radians(31)), 0.0])
        with pytest.raises(RouteStuck):
            next_hop_short(_at(0.0), _at(10.0), outside[None, :], 5e3, 30.0)

    def test_nearest_in_cone_wins(self):
        relays = np.array([_at(4.0), _at(2.0)])
        assert next_hop_short(_at(0.0), _at(10.0), relays, 5e3, 30.0) == 1

    def test_receiver_competes_on_distance(self):
        # receiver at 4 km beats the 5 km relay, loses to a 3 km one
        relays = np.array([_at(5.0)])
        assert next_hop_short(_at(0.0), _at(4.0), relays, 10e3, 30.0) == RECEIVER
        relays = np.array([_at(3.0)])
        assert next_hop_short(_at(0.0), _at(4.0), relays, 10e3, 30.0) == 0


class TestRoute:
    def test_zero_distance_is_empty(self):
        config = AdhocConfig()
        r = route(config, _at(1.0), _at(1.0), NO_RELAYS, default_rng(0))
        assert r.n_hops == 0
        assert r.total_s == 0.0

    def test_single_los_hop_accounting(self):
        config = AdhocConfig(blockage_beta_per_km=0.0)
        r = route(config, _at(-1.0), _at(1.0), NO_RELAYS, default_rng(0))
        assert r.n_hops == 1
        assert r.hops[0].los
        assert not r.used_haps
        assert r.propagation_s == pytest.approx(2e3 / SPEED_OF_LIGHT)
        assert r.total_s == r.propagation_s + r.transmission_s
        # a 5 Mbit packet on a short link: transmission dwarfs propagation
        assert r.transmission_s > r.propagation_s

    def test_blocked_hop_detours_through_platform(self):
        config = AdhocConfig(blockage_beta_per_km=1e6)
        r = route(config, _at(-3.0), _at(3.0), NO_RELAYS, default_rng(0))
        assert r.used_haps
        assert r.n_hops == 2
        assert r.hops[0].end == (0.0, 0.0, 20e3)
        assert r.hops[0].start == tuple(_at(-3.0))
        assert all(h.distance_m > 20e3 for h in r.hops)

    def test_blocked_hop_without_platform_pays_penalty(self):
        blocked = AdhocConfig(blockage_beta_per_km=1e6, haps_available=False)
        clear = AdhocConfig(blockage_beta_per_km=0.0, haps_available=False)
        r_blocked = route(blocked, _at(-3.0), _at(3.0), NO_RELAYS, default_rng(0))
        r_clear = route(clear, _at(-3.0), _at(3.0), NO_RELAYS, default_rng(0))
        assert not r_blocked.used_haps
        assert not r_blocked.hops[0].los
        assert r_blocked.hops[0].capacity_bps < r_clear.hops[0].capacity_bps

    def test_multi_hop_respects_range_and_never_revisits(self):
        config = AdhocConfig(blockage_beta_per_km=0.0)
        relays = default_rng(11).uniform(-20e3, 20e3, size=(400, 3))
        relays[:, 2] = UAV_ALT
        r = route(config, _at(-9.0), _at(9.0), relays, default_rng(1))
        assert r.n_hops >= 2
        assert all(h.distance_m <= config.comm_range_km * 1e3 + 1e-6 for h in r.hops)
        starts = [h.start for h in r.hops]
        assert len(set(starts)) == len(starts)
        assert r.hops[-1].end == tuple(_at(9.0))

    def test_stuck_propagates(self):
        config = AdhocConfig(blockage_beta_per_km=0.0)
        with pytest.raises(RouteStuck):
            route(config, _at(-9.0), _at(9.0), NO_RELAYS, default_rng(0))

    def test_direct_haps_ignores_relays_and_grows_with_distance(self):
        config = AdhocConfig(strategy=RouteStrategy.DIRECT_HAPS)
        totals = []
        for d_km in (2.0, 10.0, 20.0, 30.0):
            half = d_km / 2
            r = route(config, _at(-half), _at(half), NO_RELAYS, default_rng(0))
            assert r.used_haps
            assert r.n_hops == 2
            totals.append(r.total_s)
        assert all(a < b for a, b in zip(totals, totals[1:]))


class TestPairedAvailabilityArms:
    def test_shared_draws_give_common_prefix(self):
        # identical child seeds must repeat the route up to the first blocked
        # hop, where the platform arm switches to its two-hop detour
        base = AdhocConfig(blockage_beta_per_km=0.3)
        relays = default_rng(21).uniform(-15e3, 15e3, size=(300, 3))
        relays[:, 2] = UAV_ALT
        tx, rx = _at(-7.0), _at(7.0)
        checked_detour = checked_clean = 0
        for child in range(40):
            arms = {}
            for haps in (False, True):
                cfg = dataclasses.replace(base, haps_available=haps)
                try:
                    arms[haps] = route(cfg, tx, rx, relays, default_rng(child))
                except RouteStuck:
                    arms[haps] = None
            if arms[False] is None:
                continue
            off = arms[False]
            on = arms[True]
            blocked = [i for i, h in enumerate(off.hops) if not h.los]
            if blocked:
                k = blocked[0]
                assert on.used_haps
                assert on.hops[:k] == off.hops[:k]
                assert on.n_hops == k + 2
                checked_detour += 1
            else:
                assert on.hops == off.hops
                assert not on.used_haps
                checked_clean += 1
        assert checked_detour > 0
        assert checked_clean >= 0


class TestConfigValidation:
    def test_bad_geometry(self):
        with pytest.raises(ValueError):
            AdhocConfig(comm_range_km=50.0)
        with pytest.raises(ValueError):
            AdhocConfig(distances_km=(45.0,))
        with pytest.raises(ValueError):
            AdhocConfig(n_uav=0)
        with pytest.raises(ValueError):
            AdhocConfig(short_hop_half_angle_deg=0.0)


class TestSweepEstimator:
    def test_closed_form_matches_sampled_route_means(self):
        # the sweep averages blockage analytically along the walk; that must
        # agree with the mean of many sampled route() runs on the same
        # deployment, for both availability arms
        from ntnsim.adhoc import _arm_expectations, _links, _walk_path

        config = AdhocConfig()
        tx, rx = _at(-6.0), _at(6.0)
        relays = np.array([_at(2.5)])

        points = _walk_path(config, RouteStrategy.LONG_HOP, tx, rx, relays)
        assert [tuple(p) for p in points] == [tuple(tx), tuple(relays[0]), tuple(rx)]
        off_arm, on_arm = _arm_expectations(config, _links(config), points)

        rng = default_rng(9)
        for haps, (want_prop, want_tx) in ((False, off_arm), (True, on_arm)):
            cfg = dataclasses.replace(
                config, strategy=RouteStrategy.LONG_HOP, haps_available=haps
            )
            samples = np.array(
                [
                    (r.propagation_s, r.transmission_s)
                    for r in (route(cfg, tx, rx, relays, rng) for _ in range(6000))
                ]
            )
            for k, want in ((0, want_prop), (1, want_tx)):
                got = samples[:, k].mean()
                se = samples[:, k].std(ddof=1) / np.sqrt(len(samples))
                assert abs(got - want) < 5 * se + 1e-12


class TestSweep:
    def test_small_sweep_layout(self):
        config = AdhocConfig(n_uav=80)
        table = sweep_latency(config, (4.0, 8.0), trials=4, seed=1)
        assert table.columns == (
            "strategy",
            "haps_available",
            "distance_km",
            "mean_total_s",
            "mean_prop_s",
            "mean_tx_s",
            "stuck_rate",
            "trials",
        )
        assert len(table.rows) == len(SWEEP_ARMS) * 2
        arm_order = [(row[0], row[1]) for row in table.rows[::2]]
        assert arm_order == [(s.value, h) for s, h in SWEEP_ARMS]
        for row in table.rows:
            assert row[3] == pytest.approx(row[4] + row[5])
            assert 0.0 <= row[6] <= 1.0
            assert row[7] <= 4

    def test_sweep_deterministic_across_workers(self):
        config = AdhocConfig(n_uav=60)
        a = sweep_latency(config, (6.0,), trials=4, seed=9, workers=1)
        b = sweep_latency(config, (6.0,), trials=4, seed=9, workers=2)
        assert a.to_csv_text() == b.to_csv_text()

"""Donor-fed platform tree: topology, allocation arithmetic, output tables."""

import math

import numpy as np
import pytest
from numpy.random import default_rng

from ntnsim.geometry import PlatformKind
from ntnsim.harness import trial_rng
from ntnsim.iab import (
    IabAllocation,
    IabConfig,
    IabDemand,
    allocate_resources,
    build_topology,
    demand_from_users,
    downlink_heatmap,
    simulate,
    uplink_aggregate,
)

SMALL = IabConfig(
    disc_radius_km=20.0,
    ring_counts=(2, 4),
    ring_radii_km=(6.0, 12.0),
    user_density_per_km2=0.5,
    grid_step_km=2.0,
)


def _uniform_demand(n_nodes, users=2, se=5.0):
    rates = tuple(tuple([se] * users) for _ in range(n_nodes))
    return IabDemand((users,) * n_nodes, (se,) * n_nodes, rates, rates)


class TestTopology:
    def test_default_tree_shape(self):
        topo = build_topology(IabConfig())
        assert len(topo.nodes) == 29
        assert topo.nodes[0].node_id == "mbs"
        assert topo.nodes[0].position == (0.0, 0.0, 10.0)
        by_layer = {layer: [n for n in topo.nodes if n.layer == layer] for layer in range(4)}
        assert [len(by_layer[i]) for i in range(4)] == [1, 4, 8, 16]

    def test_parents_point_one_layer_in(self):
        topo = build_topology(IabConfig())
        lookup = {n.node_id: n for n in topo.nodes}
        for node in topo.nodes[1:]:
            parent = lookup[node.parent]
            assert parent.layer == node.layer - 1

    def test_ring_radii_and_altitude(self):
        config = IabConfig()
        topo = build_topology(config)
        haps_alt = config.radio.altitude_m(PlatformKind.HAPS)
        for node in topo.nodes[1:]:
            r_km = math.hypot(node.position[0], node.position[1]) / 1e3
            assert r_km == pytest.approx(config.ring_radii_km[node.layer - 1])
            assert node.position[2] == haps_alt

    def test_even_layer_half_step_rotation(self):
        topo = build_topology(IabConfig())
        first_l2 = next(n for n in topo.nodes if n.node_id == "l2-0")
        angle = math.degrees(math.atan2(first_l2.position[1], first_l2.position[0]))
        assert angle == pytest.approx(22.5)

    def test_no_platforms_leaves_the_donor(self):
        topo = build_topology(IabConfig(include_haps=False))
        assert len(topo.nodes) == 1

    def test_subtree_matrix_consistency(self):
        topo = build_topology(SMALL)
        member = topo.subtree_matrix()
        parents = topo.parent_indices()
        assert member[0].all()  # everything transits the root
        assert np.array_equal(np.diag(member), np.ones(len(topo.nodes), bool))
        for j, p in enumerate(parents):
            if p >= 0:
                assert member[p, j]
        leaves = [i for i in range(len(topo.nodes)) if i not in set(parents)]
        for leaf in leaves:
            assert member[leaf].sum() == 1


class TestConfigValidation:
    def test_bad_rings(self):
        with pytest.raises(ValueError):
            IabConfig(ring_radii_km=(25.0, 12.5, 37.5))
        with pytest.raises(ValueError):
            IabConfig(ring_counts=(4, 8), ring_radii_km=(12.5,))
        with pytest.raises(ValueError):
            IabConfig(ring_radii_km=(12.5, 25.0, 80.0))

    def test_access_fraction_open_interval(self):
        with pytest.raises(ValueError):
            IabConfig(access_fraction=0.0)
        with pytest.raises(ValueError):
            IabConfig(access_fraction=1.0)


class TestAllocation:
    def test_uniform_demand_gives_equal_access_slices(self):
        topo = build_topology(IabConfig())
        alloc = allocate_resources(IabConfig(), topo, _uniform_demand(29))
        shares = np.array(alloc.access_share)
        assert np.allclose(shares, shares[0])
        assert shares.sum() <= 0.5 + 1e-9
        assert alloc.target_rate_bps > 0

    def test_uniform_demand_layer_share_ordering(self):
        config = IabConfig()
        topo = build_topology(config)
        alloc = allocate_resources(config, topo, _uniform_demand(29))
        by_layer = {}
        for i, node in enumerate(topo.nodes):
            by_layer.setdefault(node.layer, []).append(alloc.node_share(i))
        means = [float(np.mean(by_layer[layer])) for layer in (1, 2, 3)]
        # inner nodes forward for larger subtrees
        assert means[0] > means[1] > means[2]

    def test_backhaul_binds_when_its_pool_shrinks(self):
        topo = build_topology(IabConfig())
        loose = allocate_resources(IabConfig(access_fraction=0.5), topo, _uniform_demand(29))
        tight = allocate_resources(IabConfig(access_fraction=0.9), topo, _uniform_demand(29))
        assert not loose.saturated
        assert tight.saturated
        # widening the access pool cannot raise the target once backhaul binds
        assert tight.target_rate_bps < loose.target_rate_bps * 9 / 5

    def test_zero_demand_is_all_zero(self):
        topo = build_topology(SMALL)
        n = len(topo.nodes)
        alloc = allocate_resources(SMALL, topo, IabDemand((0,) * n, (0.0,) * n, ((),) * n, ((),) * n))
        assert alloc.target_rate_bps == 0.0
        assert all(s == 0.0 for s in alloc.access_share)
        assert all(s == 0.0 for s in alloc.backhaul_share)
        assert not alloc.saturated

    def test_flow_conservation(self):
        # each node's access slice delivers exactly target * users
        config = SMALL
        topo = build_topology(config)
        users = default_rng(8).uniform(-15e3, 15e3, size=(60, 3))
        users[:, 2] = 0.0
        demand = demand_from_users(config, topo, users, trial_rng(8, 0))
        alloc = allocate_resources(config, topo, demand)
        _, bandwidth = config.radio.band("mmwave")
        for i, n_users in enumerate(demand.users_per_node):
            if n_users == 0:
                continue
            per_user_hz = alloc.access_share[i] * bandwidth / n_users
            delivered = per_user_hz * sum(demand.user_rates_se_dl[i])
            assert delivered == pytest.approx(alloc.target_rate_bps * n_users, rel=1e-9)


class TestDemand:
    def test_empty_draw(self):
        topo = build_topology(SMALL)
        demand = demand_from_users(SMALL, topo, np.empty((0, 3)), trial_rng(0, 0))
        assert demand.total_users == 0
        assert all(se == 0.0 for se in demand.access_se_dl)

    def test_user_under_a_platform_is_served_by_it(self):
        config = IabConfig()
        topo = build_topology(config)
        target = topo.index_of("l1-0")
        under = np.array([[topo.nodes[target].position[0], topo.nodes[target].position[1], 0.0]])
        demand = demand_from_users(config, topo, under, trial_rng(1, 0))
        assert demand.users_per_node[target] == 1
        assert demand.total_users == 1
        assert demand.access_se_dl[target] > 0

    def test_rates_finite_and_grouped(self):
        topo = build_topology(SMALL)
        users = default_rng(9).uniform(-18e3, 18e3, size=(50, 3))
        users[:, 2] = 0.0
        demand = demand_from_users(SMALL, topo, users, trial_rng(9, 0))
        assert demand.total_users == 50
        for i, n in enumerate(demand.users_per_node):
            assert len(demand.user_rates_se_dl[i]) == n
            assert len(demand.user_rates_se_ul[i]) == n
            assert all(np.isfinite(v) and v > 0 for v in demand.user_rates_se_dl[i])


class TestTables:
    def test_heatmap_capped_at_target(self):
        heatmap, _ = simulate(SMALL, seed=3)
        target = heatmap.metadata["target_rate_mbps"]
        caps = [row[2] for row in heatmap.rows]
        assert max(caps) <= target + 1e-9
        assert min(caps) >= 0.0

    def test_heatmap_center_serves_from_donor(self):
        config = SMALL
        topo = build_topology(config)
        demand = _uniform_demand(len(topo.nodes))
        alloc = allocate_resources(config, topo, demand)
        heatmap = downlink_heatmap(config, topo, alloc, demand)
        center = min(heatmap.rows, key=lambda r: r[0] ** 2 + r[1] ** 2)
        assert center[3] == "mbs"

    def test_node_table_layout(self):
        config = SMALL
        topo = build_topology(config)
        demand = _uniform_demand(len(topo.nodes))
        alloc = allocate_resources(config, topo, demand)
        nodes = uplink_aggregate(config, topo, alloc, demand)
        assert nodes.columns == ("node_id", "layer", "uplink_mbps", "downlink_share", "x_km", "y_km")
        assert len(nodes.rows) == len(topo.nodes)
        for i, row in enumerate(nodes.rows):
            assert row[0] == topo.nodes[i].node_id
            assert row[1] == topo.nodes[i].layer
            assert row[3] == pytest.approx(alloc.node_share(i))
            assert row[4] == pytest.approx(topo.nodes[i].position[0] / 1e3)

    def test_root_aggregates_entire_uplink(self):
        config = SMALL
        topo = build_topology(config)
        demand = _uniform_demand(len(topo.nodes))
        alloc = allocate_resources(config, topo, demand)
        nodes = uplink_aggregate(config, topo, alloc, demand)
        root = nodes.rows[0][2]
        assert all(root >= row[2] for row in nodes.rows[1:])

    def test_simulate_deterministic(self):
        h1, n1 = simulate(SMALL, seed=5)
        h2, n2 = simulate(SMALL, seed=5)
        assert h1.to_csv_text() == h2.to_csv_text()
        assert n1.to_csv_text() == n2.to_csv_text()
        h3, _ = simulate(SMALL, seed=6)
        assert h3.to_csv_text() != h1.to_csv_text()

    def test_donor_only_configuration_runs(self):
        config = IabConfig(
            disc_radius_km=10.0,
            ring_counts=(2,),
            ring_radii_km=(6.0,),
            include_haps=False,
            user_density_per_km2=0.5,
            grid_step_km=2.0,
        )
        heatmap, nodes = simulate(config, seed=1)
        assert len(nodes.rows) == 1
        assert nodes.rows[0][1] == 0
        assert {row[3] for row in heatmap.rows} == {"mbs"}

"""Integrated access and backhaul over a platform tree rooted at one donor.

A ground donor at the disc center feeds three concentric platform rings over
wireless backhaul; each node forwards for the ring outside it.  The band is
split into disjoint access and backhaul pools.  Resource shares are closed
form: every node's access slice is sized so its users hit one common target
rate, and every backhaul link is sized to carry its whole subtree at that
target, with the tighter pool deciding the target (clipping reported as
saturation).

One seeded draw of active users supplies the demand; everything after it is
pure arithmetic, so a config plus seed maps to exactly one heat map.  Donor
access links suffer elevation-dependent blockage from its 10 m mast height;
platform links ride well above the clutter and stay line-of-sight.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .channel import (
    BlockageModel,
    ergodic_capacity_bps,
    linear_to_db,
    los_probability,
    noise_power_dbm,
    rx_power_dbm,
)
from .geometry import PlatformKind, sample_ppp_disc
from .harness import ResultTable, trial_rng
from .radio import RadioTable


@dataclass(frozen=True)
class IabConfig:
    radio: RadioTable = RadioTable()
    disc_radius_km: float = 50.0
    ring_counts: tuple[int, ...] = (4, 8, 16)
    ring_radii_km: tuple[float, ...] = (12.5, 25.0, 37.5)
    mbs_height_m: float = 10.0
    include_haps: bool = True
    user_density_per_km2: float = 1.0
    active_fraction: float = 0.1
    sigmoid_a: float = 9.61
    sigmoid_b: float = 0.16
    nlos_excess_db: float = 35.0
    access_fraction: float = 0.5
    grid_step_km: float = 1.0

    def __post_init__(self) -> None:
        if len(self.ring_counts) != len(self.ring_radii_km):
            raise ValueError("ring_counts and ring_radii_km must have equal length")
        if any(c < 1 for c in self.ring_counts):
            raise ValueError("ring_counts must be positive")
        if list(self.ring_radii_km) != sorted(self.ring_radii_km) or len(set(self.ring_radii_km)) != len(self.ring_radii_km):
            raise ValueError("ring_radii_km must be strictly increasing")
        if self.ring_radii_km and self.ring_radii_km[-1] > self.disc_radius_km:
            raise ValueError("ring_radii_km must fit inside disc_radius_km")
        if self.mbs_height_m <= 0:
            raise ValueError("mbs_height_m must be positive")
        if not 0 < self.access_fraction < 1:
            raise ValueError("access_fraction must be in (0, 1)")
        if self.grid_step_km <= 0:
            raise ValueError("grid_step_km must be positive")
        if not 0 < self.active_fraction <= 1:
            raise ValueError("active_fraction must be in (0, 1]")
        if self.user_density_per_km2 < 0:
            raise ValueError("user_density_per_km2 must be >= 0")


@dataclass(frozen=True)
class IabNode:
    node_id: str
    layer: int  # 0 is the fiber-fed donor
    position: tuple[float, float, float]  # meters
    parent: str | None


@dataclass(frozen=True)
class IabTopology:
    nodes: tuple[IabNode, ...]

    def index_of(self, node_id: str) -> int:
        for i, node in enumerate(self.nodes):
            if node.node_id == node_id:
                return i
        raise KeyError(node_id)

    def positions(self) -> np.ndarray:
        return np.array([n.position for n in self.nodes])

    def parent_indices(self) -> np.ndarray:
        """-1 for the root, else index of each node's backhaul parent."""
        out = np.full(len(self.nodes), -1, dtype=int)
        for i, node in enumerate(self.nodes):
            if node.parent is not None:
                out[i] = self.index_of(node.parent)
        return out

    def subtree_matrix(self) -> np.ndarray:
        """Boolean (n, n): row i marks nodes whose traffic transits node i."""
        parents = self.parent_indices()
        n = len(self.nodes)
        member = np.eye(n, dtype=bool)
        for j in range(n):
            k = parents[j]
            while k >= 0:
                member[k, j] = True
                k = parents[k]
        return member


def build_topology(config: IabConfig) -> IabTopology:
    """Donor at the center plus equally spaced ring platforms, parents by
    nearest node one layer in.  Even layers are rotated half a step so rings
    do not line up radially."""
    haps_alt = config.radio.altitude_m(PlatformKind.HAPS)
    nodes = [IabNode("mbs", 0, (0.0, 0.0, config.mbs_height_m), None)]
    if config.include_haps:
        for layer, (count, radius_km) in enumerate(zip(config.ring_counts, config.ring_radii_km), start=1):
            step = 2.0 * math.pi / count
            offset = step / 2.0 if layer % 2 == 0 else 0.0
            inner = [n for n in nodes if n.layer == layer - 1]
            for i in range(count):
                angle = offset + i * step
                pos = (radius_km * 1e3 * math.cos(angle), radius_km * 1e3 * math.sin(angle), haps_alt)
                parent = min(
                    inner,
                    key=lambda p: math.dist(pos, p.position),
                )
                nodes.append(IabNode(f"l{layer}-{i}", layer, pos, parent.node_id))
    return IabTopology(tuple(nodes))


@dataclass(frozen=True)
class IabDemand:
    """Per-node load summary from one draw of active users."""

    users_per_node: tuple[int, ...]
    access_se_dl: tuple[float, ...]  # mean bits/s/Hz toward served users
    user_rates_se_dl: tuple[tuple[float, ...], ...]  # per served user
    user_rates_se_ul: tuple[tuple[float, ...], ...]

    @property
    def total_users(self) -> int:
        return sum(self.users_per_node)


@dataclass(frozen=True)
class IabAllocation:
    """Closed-form pool split hitting one per-user target rate.

    ``access_share``/``backhaul_share`` are fractions of the full band;
    access shares sum to at most the access pool, backhaul shares to at most
    the rest.  ``saturated`` flags the backhaul pool binding first.
    """

    target_rate_bps: float
    access_share: tuple[float, ...]
    backhaul_share: tuple[float, ...]
    saturated: bool

    def node_share(self, i: int) -> float:
        return self.access_share[i] + self.backhaul_share[i]


def _access_radios(config: IabConfig):
    """Node->user and user->node access links; donor uses platform-grade
    power and gain on its mast."""
    table = config.radio
    down = table.link(PlatformKind.HAPS, PlatformKind.USER, "mmwave")
    up = table.link(PlatformKind.USER, PlatformKind.HAPS, "mmwave")
    return down, up


def _mean_rx_dbm(config: IabConfig, topology: IabTopology, points: np.ndarray) -> np.ndarray:
    """(n_points, n_nodes) mean access rx power, blockage averaged in.

    Platform links are line-of-sight; the donor's links fold the
    elevation-sigmoid LoS probability and the NLoS excess into the mean.
    """
    down, _ = _access_radios(config)
    positions = topology.positions()
    diff = points[:, None, :] - positions[None, :, :]
    dist = np.sqrt(np.einsum("pnk,pnk->pn", diff, diff))
    rx = rx_power_dbm(down, np.maximum(dist, 1.0))
    blockage = BlockageModel.elevation_sigmoid(
        config.sigmoid_a, config.sigmoid_b, config.nlos_excess_db
    )
    for i, node in enumerate(topology.nodes):
        if node.layer != 0:
            continue
        horiz = np.hypot(points[:, 0] - node.position[0], points[:, 1] - node.position[1])
        elev = np.degrees(np.arctan2(node.position[2], horiz))
        p_los = los_probability(blockage, elevation_deg=elev)
        mean_att = p_los + (1.0 - p_los) * 10.0 ** (-config.nlos_excess_db / 10.0)
        rx[:, i] += linear_to_db(mean_att)
    return rx


def demand_from_users(
    config: IabConfig,
    topology: IabTopology,
    users: np.ndarray,
    rng: np.random.Generator,
) -> IabDemand:
    """Associate drawn users by strongest mean power and fix their spectral
    efficiencies; donor-served users get one blockage draw each, reused for
    both directions."""
    down, up = _access_radios(config)
    table = config.radio
    n_nodes = len(topology.nodes)
    if len(users) == 0:
        empty = tuple(() for _ in range(n_nodes))
        return IabDemand((0,) * n_nodes, (0.0,) * n_nodes, empty, empty)

    positions = topology.positions()
    mean_rx = _mean_rx_dbm(config, topology, users)
    serving = np.argmax(mean_rx, axis=1)
    diff = users - positions[serving]
    dist = np.sqrt(np.einsum("uk,uk->u", diff, diff))

    blockage = BlockageModel.elevation_sigmoid(
        config.sigmoid_a, config.sigmoid_b, config.nlos_excess_db
    )
    donor_layers = np.array([n.layer for n in topology.nodes])[serving] == 0
    horiz = np.hypot(users[:, 0] - positions[serving, 0], users[:, 1] - positions[serving, 1])
    elev = np.degrees(np.arctan2(positions[serving, 2], np.maximum(horiz, 1e-9)))
    los = rng.uniform(size=len(users)) < los_probability(blockage, elevation_deg=elev)
    excess = np.where(donor_layers & ~los, config.nlos_excess_db, 0.0)

    snr_dl = rx_power_dbm(down, dist, excess) - noise_power_dbm(down)
    snr_ul = rx_power_dbm(up, dist, excess) - noise_power_dbm(up)
    se_dl = np.empty(len(users))
    se_ul = np.empty(len(users))
    for fading, mask in (
        (table.nakagami(), donor_layers),
        (table.shadowed_rician(), ~donor_layers),
    ):
        if np.any(mask):
            se_dl[mask] = ergodic_capacity_bps(down, fading, snr_dl[mask]) / down.bandwidth_hz
            se_ul[mask] = ergodic_capacity_bps(up, fading, snr_ul[mask]) / up.bandwidth_hz

    users_per_node = []
    mean_se = []
    per_dl = []
    per_ul = []
    for i in range(n_nodes):
        mine = np.flatnonzero(serving == i)
        users_per_node.append(int(mine.size))
        mean_se.append(float(np.mean(se_dl[mine])) if mine.size else 0.0)
        per_dl.append(tuple(float(v) for v in se_dl[mine]))
        per_ul.append(tuple(float(v) for v in se_ul[mine]))
    return IabDemand(tuple(users_per_node), tuple(mean_se), tuple(per_dl), tuple(per_ul))


def _backhaul_se(config: IabConfig, topology: IabTopology) -> np.ndarray:
    """Ergodic bits/s/Hz of each node's feeder link from its parent (0 for
    the fiber-fed root)."""
    table = config.radio
    radio = table.link(PlatformKind.HAPS, PlatformKind.HAPS, "mmwave")
    positions = topology.positions()
    parents = topology.parent_indices()
    se = np.zeros(len(topology.nodes))
    fading = table.shadowed_rician()
    for i, p in enumerate(parents):
        if p < 0:
            continue
        d = float(np.linalg.norm(positions[i] - positions[p]))
        snr = rx_power_dbm(radio, d) - noise_power_dbm(radio)
        se[i] = ergodic_capacity_bps(radio, fading, snr) / radio.bandwidth_hz
    return se


def allocate_resources(config: IabConfig, topology: IabTopology, demand: IabDemand) -> IabAllocation:
    """One common per-user rate, access slices proportional to served load
    over node spectral efficiency, feeder slices sized for each subtree."""
    _, bandwidth_hz = config.radio.band("mmwave")
    access_hz = config.access_fraction * bandwidth_hz
    backhaul_hz = (1.0 - config.access_fraction) * bandwidth_hz
    n_nodes = len(topology.nodes)

    users = np.array(demand.users_per_node, dtype=float)
    se_acc = np.array(demand.access_se_dl)
    subtree = topology.subtree_matrix()
    subtree_users = subtree @ users
    se_bh = _backhaul_se(config, topology)

    served = users > 0
    access_cost = np.where(served & (se_acc > 0), users / np.where(se_acc > 0, se_acc, 1.0), 0.0)
    feeder = se_bh > 0
    backhaul_cost = np.where(feeder, subtree_users / np.where(feeder, se_bh, 1.0), 0.0)

    if access_cost.sum() == 0:
        return IabAllocation(0.0, (0.0,) * n_nodes, (0.0,) * n_nodes, False)
    target_access = access_hz / access_cost.sum()
    target_backhaul = backhaul_hz / backhaul_cost.sum() if backhaul_cost.sum() > 0 else math.inf
    target = min(target_access, target_backhaul)
    saturated = target_backhaul < target_access

    access_share = target * access_cost / bandwidth_hz
    backhaul_share = target * backhaul_cost / bandwidth_hz
    return IabAllocation(
        float(target),
        tuple(float(a) for a in access_share),
        tuple(float(b) for b in backhaul_share),
        bool(saturated),
    )


def _grid_points(config: IabConfig) -> np.ndarray:
    radius_m = config.disc_radius_km * 1e3
    step_m = config.grid_step_km * 1e3
    axis = np.arange(-radius_m, radius_m + step_m / 2.0, step_m)
    xg, yg = np.meshgrid(axis, axis)
    inside = xg**2 + yg**2 <= radius_m**2
    return np.column_stack([xg[inside], yg[inside], np.zeros(int(inside.sum()))])


def downlink_heatmap(
    config: IabConfig,
    topology: IabTopology,
    allocation: IabAllocation,
    demand: IabDemand,
) -> ResultTable:
    """Per-grid-point capacity under the allocation.

    Each point associates to the strongest mean-power node and would get
    that node's per-user access slice, capped at the allocation's common
    target rate: platform feeders are sized for exactly that rate per user,
    and the equal-capacity scheduler never hands out more than the target
    even where the donor's fiber could.  Donor points use the
    blockage-averaged mean channel.
    """
    down, _ = _access_radios(config)
    table = config.radio
    points = _grid_points(config)
    mean_rx = _mean_rx_dbm(config, topology, points)
    serving = np.argmax(mean_rx, axis=1)
    snr = mean_rx[np.arange(len(points)), serving] - noise_power_dbm(down)

    layers = np.array([n.layer for n in topology.nodes])
    se = np.empty(len(points))
    donor_pts = layers[serving] == 0
    if np.any(donor_pts):
        se[donor_pts] = ergodic_capacity_bps(down, table.nakagami(), snr[donor_pts]) / down.bandwidth_hz
    if np.any(~donor_pts):
        se[~donor_pts] = (
            ergodic_capacity_bps(down, table.shadowed_rician(), snr[~donor_pts]) / down.bandwidth_hz
        )

    _, bandwidth_hz = table.band("mmwave")
    users = np.array(demand.users_per_node, dtype=float)
    share = np.array(allocation.access_share)
    per_user_hz = np.where(users > 0, share * bandwidth_hz / np.maximum(users, 1.0), 0.0)
    capacity = np.minimum(se * per_user_hz[serving], allocation.target_rate_bps)

    result = ResultTable(
        columns=("x_km", "y_km", "capacity_mbps", "serving_node"),
        metadata={
            "scenario": "iab",
            "grid_step_km": config.grid_step_km,
            "disc_radius_km": config.disc_radius_km,
            "include_haps": config.include_haps,
            "n_nodes": len(topology.nodes),
            "n_users": demand.total_users,
            "target_rate_mbps": allocation.target_rate_bps / 1e6,
            "saturated": allocation.saturated,
        },
    )
    node_ids = [n.node_id for n in topology.nodes]
    for p, cap, s in zip(points, capacity, serving):
        result.append(p[0] / 1e3, p[1] / 1e3, cap / 1e6, node_ids[int(s)])
    return result


def uplink_aggregate(
    config: IabConfig,
    topology: IabTopology,
    allocation: IabAllocation,
    demand: IabDemand,
) -> ResultTable:
    """Per-node uplink throughput aggregated over the node's whole subtree,
    capped by its feeder capacity; the root's fiber is uncapped."""
    _, bandwidth_hz = config.radio.band("mmwave")
    users = np.array(demand.users_per_node, dtype=float)
    share = np.array(allocation.access_share)
    per_user_hz = np.where(users > 0, share * bandwidth_hz / np.maximum(users, 1.0), 0.0)

    own_ul = np.array(
        [per_user_hz[i] * sum(demand.user_rates_se_ul[i]) for i in range(len(topology.nodes))]
    )
    subtree = topology.subtree_matrix()
    aggregate = subtree @ own_ul
    se_bh = _backhaul_se(config, topology)
    feeder_cap = np.array(allocation.backhaul_share) * bandwidth_hz * se_bh
    parents = topology.parent_indices()
    limited = np.where(parents >= 0, np.minimum(aggregate, feeder_cap), aggregate)

    result = ResultTable(
        columns=("node_id", "layer", "uplink_mbps", "downlink_share", "x_km", "y_km"),
        metadata={
            "scenario": "iab",
            "include_haps": config.include_haps,
            "n_nodes": len(topology.nodes),
            "n_users": demand.total_users,
            "target_rate_mbps": allocation.target_rate_bps / 1e6,
            "total_downlink_mbps": allocation.target_rate_bps * demand.total_users / 1e6,
            "saturated": allocation.saturated,
        },
    )
    for i, node in enumerate(topology.nodes):
        result.append(
            node.node_id,
            node.layer,
            limited[i] / 1e6,
            allocation.node_share(i),
            node.position[0] / 1e3,
            node.position[1] / 1e3,
        )
    return result


def simulate(config: IabConfig, *, seed: int = 0) -> tuple[ResultTable, ResultTable]:
    """Build the tree, draw the active users once, allocate, and emit the
    heat map plus the per-node table."""
    topology = build_topology(config)
    rng = trial_rng(seed, 0)
    users = sample_ppp_disc(
        config.user_density_per_km2 * config.active_fraction,
        config.disc_radius_km * 1e3,
        0.0,
        rng,
        PlatformKind.USER,
    ).positions
    demand = demand_from_users(config, topology, users, rng)
    allocation = allocate_resources(config, topology, demand)
    heatmap = downlink_heatmap(config, topology, allocation, demand)
    heatmap.metadata["seed"] = seed
    nodes = uplink_aggregate(config, topology, allocation, demand)
    nodes.metadata["seed"] = seed
    return heatmap, nodes

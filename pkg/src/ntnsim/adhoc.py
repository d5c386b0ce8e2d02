"""Multi-hop routing latency over a UAV swarm with an optional overhead relay.

A transmitter and receiver sit on opposite sides of the deployment centre and
a packet is forwarded hop by hop through a binomial point process of relay
nodes.  Two next-hop rules are modelled: a greedy rule that jumps as close to
the receiver as the communication range allows, and a conservative rule that
takes the nearest neighbour inside a forward-pointing cone.  Each chosen hop
draws a line-of-sight state; a blocked hop either proceeds with heavy excess
loss, or, when the high-altitude platform is available, is abandoned in
favour of a two-hop detour current node -> platform -> receiver.  A third
mechanism skips the swarm entirely and always relays through the platform.

Latency is store-and-forward: per-hop propagation times and per-hop
transmission times (packet size over the fading-averaged capacity) add up.
Links are noise limited.

``route`` samples the line-of-sight state of each hop.  The sweep does not:
the next-hop rules look only at geometry, so the relay sequence is a
deterministic function of the deployment, and the sweep averages the
blockage states along it in closed form instead.  That removes all
blockage-draw variance from the reported means (only the deployment is
Monte Carlo) and both availability arms of a strategy share the walk
exactly.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from enum import Enum
from functools import partial

import numpy as np

from .channel import (
    FadingModel,
    RadioParams,
    ergodic_capacity_bps,
    noise_power_dbm,
    rx_power_dbm,
)
from .constants import SPEED_OF_LIGHT
from .geometry import Deployment, PlatformKind, sample_bpp_disc
from .harness import ResultTable, run_trials
from .radio import RadioTable


class RouteStrategy(str, Enum):
    LONG_HOP = "long_hop"
    SHORT_HOP = "short_hop"
    DIRECT_HAPS = "direct_haps"


class RouteStuck(RuntimeError):
    """No admissible next hop from the current node."""


class RouteLoop(RuntimeError):
    """Hop-count cap exceeded before reaching the receiver."""


@dataclass(frozen=True)
class AdhocConfig:
    radio: RadioTable = RadioTable()
    n_uav: int = 1000
    disc_radius_km: float = 20.0
    comm_range_km: float = 10.0
    short_hop_half_angle_deg: float = 30.0
    blockage_beta_per_km: float = 0.08
    olos_penalty_db: float = 35.0
    max_hops: int = 200
    strategy: RouteStrategy = RouteStrategy.LONG_HOP
    haps_available: bool = True
    distances_km: tuple[float, ...] = (
        2.0, 4.0, 6.0, 8.0, 10.0, 12.0, 14.0, 16.0,
        18.0, 20.0, 22.0, 24.0, 26.0, 28.0, 30.0,
    )

    def __post_init__(self) -> None:
        if self.n_uav < 1:
            raise ValueError("n_uav must be at least 1")
        if self.disc_radius_km <= 0 or self.comm_range_km <= 0:
            raise ValueError("disc_radius_km and comm_range_km must be positive")
        if self.comm_range_km > 2 * self.disc_radius_km:
            raise ValueError("comm_range_km must not exceed the disc diameter")
        if not 0 < self.short_hop_half_angle_deg <= 180:
            raise ValueError("short_hop_half_angle_deg must be in (0, 180]")
        if self.max_hops < 1:
            raise ValueError("max_hops must be at least 1")
        for d in self.distances_km:
            if not 0 < d <= 2 * self.disc_radius_km:
                raise ValueError("each distance must be in (0, disc diameter]")


@dataclass(frozen=True)
class Hop:
    start: tuple[float, float, float]
    end: tuple[float, float, float]
    distance_m: float
    los: bool
    capacity_bps: float


@dataclass(frozen=True)
class RouteResult:
    hops: tuple[Hop, ...]
    propagation_s: float
    transmission_s: float
    used_haps: bool

    @property
    def total_s(self) -> float:
        return self.propagation_s + self.transmission_s

    @property
    def n_hops(self) -> int:
        return len(self.hops)


# Sentinel index meaning "the receiver itself is the next hop".
RECEIVER = -1


def next_hop_long(
    current: np.ndarray,
    receiver: np.ndarray,
    candidates: np.ndarray,
    comm_range_m: float,
) -> int:
    """Next-hop index under the greedy rule.

    Returns RECEIVER as soon as the receiver is in range, else the index of
    the in-range candidate closest to the receiver.  Raises RouteStuck when
    nothing is reachable.
    """
    if float(np.linalg.norm(receiver - current)) <= comm_range_m:
        return RECEIVER
    if len(candidates):
        d_current = np.linalg.norm(candidates - current, axis=1)
        in_range = np.flatnonzero(d_current <= comm_range_m)
        if in_range.size:
            d_receiver = np.linalg.norm(candidates[in_range] - receiver, axis=1)
            return int(in_range[np.argmin(d_receiver)])
    raise RouteStuck("no relay within communication range")


def next_hop_short(
    current: np.ndarray,
    receiver: np.ndarray,
    candidates: np.ndarray,
    comm_range_m: float,
    half_angle_deg: float,
) -> int:
    """Next-hop index under the nearest-in-cone rule.

    The cone opens around the current -> receiver direction.  The receiver
    competes like any other candidate (it sits on the cone axis) and wins
    when it is the nearest reachable node, in which case RECEIVER is
    returned.  Raises RouteStuck when the cone is empty.
    """
    to_rx = receiver - current
    d_rx = float(np.linalg.norm(to_rx))
    cos_limit = np.cos(np.radians(half_angle_deg))

    best_index = RECEIVER if d_rx <= comm_range_m else None
    best_distance = d_rx if d_rx <= comm_range_m else np.inf
    if len(candidates):
        offsets = candidates - current
        d_current = np.linalg.norm(offsets, axis=1)
        with np.errstate(invalid="ignore", divide="ignore"):
            cos_angle = (offsets @ to_rx) / (d_current * d_rx)
        admissible = (d_current <= comm_range_m) & (d_current > 0) & (cos_angle >= cos_limit)
        idx = np.flatnonzero(admissible)
        if idx.size:
            nearest = idx[np.argmin(d_current[idx])]
            if d_current[nearest] < best_distance:
                best_index = int(nearest)
                best_distance = float(d_current[nearest])
    if best_index is None:
        raise RouteStuck("no relay inside the forward cone")
    return best_index


@dataclass(frozen=True)
class _LinkSet:
    """Per-link radio parameters and fading models resolved from the table."""

    uav: RadioParams
    uav_noise_dbm: float
    up: RadioParams
    up_noise_dbm: float
    down: RadioParams
    down_noise_dbm: float
    nakagami: FadingModel
    shadowed: FadingModel
    packet_bits: float
    haps_position: np.ndarray


def _links(config: AdhocConfig) -> _LinkSet:
    table = config.radio
    uav = table.link(PlatformKind.UAV, PlatformKind.UAV, "rf")
    up = table.link(PlatformKind.UAV, PlatformKind.HAPS, "rf")
    down = table.link(PlatformKind.HAPS, PlatformKind.UAV, "rf")
    return _LinkSet(
        uav=uav,
        uav_noise_dbm=noise_power_dbm(uav),
        up=up,
        up_noise_dbm=noise_power_dbm(up),
        down=down,
        down_noise_dbm=noise_power_dbm(down),
        nakagami=table.nakagami(),
        shadowed=table.shadowed_rician(),
        packet_bits=table.packet_size_bits,
        haps_position=np.array([0.0, 0.0, table.altitude_m(PlatformKind.HAPS)]),
    )


def _capacity(
    radio: RadioParams,
    noise_dbm: float,
    fading: FadingModel,
    distance_m: float,
    excess_db: float = 0.0,
) -> float:
    snr_db = rx_power_dbm(radio, distance_m, excess_db=excess_db) - noise_dbm
    return ergodic_capacity_bps(radio, fading, snr_db)


def _relay_hops(links: _LinkSet, current: np.ndarray, receiver: np.ndarray) -> tuple[Hop, Hop]:
    """The two always-LoS hops current -> platform -> receiver."""
    haps = links.haps_position
    d_up = float(np.linalg.norm(haps - current))
    d_down = float(np.linalg.norm(receiver - haps))
    cap_up = _capacity(links.up, links.up_noise_dbm, links.shadowed, d_up)
    cap_down = _capacity(links.down, links.down_noise_dbm, links.shadowed, d_down)
    return (
        Hop(tuple(current), tuple(haps), d_up, True, cap_up),
        Hop(tuple(haps), tuple(receiver), d_down, True, cap_down),
    )


def route(
    config: AdhocConfig,
    tx: np.ndarray,
    rx: np.ndarray,
    deployment: Deployment | np.ndarray,
    rng: np.random.Generator,
) -> RouteResult:
    """Forward one packet from tx to rx and account its latency.

    The configured strategy picks each next hop among unvisited relays; the
    chosen hop then draws its line-of-sight state with probability
    exp(-beta * distance).  A blocked hop either carries the olos penalty
    (platform unavailable) or is replaced by the terminal two-hop detour via
    the platform.  Blockage draws are consumed strictly in hop order, so two
    identically seeded calls differing only in haps_available share every
    draw up to the first blocked hop.
    """
    relays = deployment.positions if isinstance(deployment, Deployment) else np.asarray(deployment, dtype=float)
    tx = np.asarray(tx, dtype=float)
    rx = np.asarray(rx, dtype=float)
    links = _links(config)
    comm_range_m = config.comm_range_km * 1e3

    if float(np.linalg.norm(rx - tx)) == 0.0:
        return RouteResult((), 0.0, 0.0, False)

    if config.strategy is RouteStrategy.DIRECT_HAPS:
        hops = _relay_hops(links, tx, rx)
        prop = sum(h.distance_m for h in hops) / SPEED_OF_LIGHT
        tx_time = sum(links.packet_bits / h.capacity_bps for h in hops)
        return RouteResult(hops, prop, tx_time, True)

    visited = np.zeros(len(relays), dtype=bool)
    current = tx
    hops: list[Hop] = []
    prop = 0.0
    tx_time = 0.0

    for _ in range(config.max_hops):
        alive = np.flatnonzero(~visited)
        candidates = relays[alive]
        if config.strategy is RouteStrategy.LONG_HOP:
            choice = next_hop_long(current, rx, candidates, comm_range_m)
        else:
            choice = next_hop_short(
                current, rx, candidates, comm_range_m, config.short_hop_half_angle_deg
            )
        nxt = rx if choice == RECEIVER else relays[alive[choice]]
        hop_distance = float(np.linalg.norm(nxt - current))
        p_los = float(np.exp(-config.blockage_beta_per_km * hop_distance / 1e3))
        los = bool(rng.random() < p_los)

        if not los and config.haps_available:
            relay = _relay_hops(links, current, rx)
            hops.extend(relay)
            prop += sum(h.distance_m for h in relay) / SPEED_OF_LIGHT
            tx_time += sum(links.packet_bits / h.capacity_bps for h in relay)
            return RouteResult(tuple(hops), prop, tx_time, True)

        excess = 0.0 if los else config.olos_penalty_db
        cap = _capacity(links.uav, links.uav_noise_dbm, links.nakagami, hop_distance, excess)
        hops.append(Hop(tuple(current), tuple(nxt), hop_distance, los, cap))
        prop += hop_distance / SPEED_OF_LIGHT
        tx_time += links.packet_bits / cap

        if choice == RECEIVER:
            return RouteResult(tuple(hops), prop, tx_time, False)
        visited[alive[choice]] = True
        current = nxt

    raise RouteLoop(f"no route within {config.max_hops} hops")


# Curves reported by the sweep: strategy plus platform availability.  The
# direct mechanism only exists with the platform present.
SWEEP_ARMS: tuple[tuple[RouteStrategy, bool], ...] = (
    (RouteStrategy.LONG_HOP, False),
    (RouteStrategy.LONG_HOP, True),
    (RouteStrategy.SHORT_HOP, False),
    (RouteStrategy.SHORT_HOP, True),
    (RouteStrategy.DIRECT_HAPS, True),
)


def _endpoints(config: AdhocConfig, distance_km: float) -> tuple[np.ndarray, np.ndarray]:
    """Tx and rx symmetric about the centre at swarm altitude."""
    half = distance_km * 1e3 / 2.0
    alt = config.radio.altitude_m(PlatformKind.UAV)
    return np.array([-half, 0.0, alt]), np.array([half, 0.0, alt])


def _walk_path(
    config: AdhocConfig,
    strategy: RouteStrategy,
    tx: np.ndarray,
    rx: np.ndarray,
    relays: np.ndarray,
) -> list[np.ndarray] | None:
    """Relay sequence [tx, ..., rx] under a next-hop rule, None when stuck.

    The rules look only at geometry, never at blockage, so the walk is a
    deterministic function of the deployment and the endpoints.
    """
    comm_range_m = config.comm_range_km * 1e3
    visited = np.zeros(len(relays), dtype=bool)
    current = tx
    points = [tx]
    for _ in range(config.max_hops):
        alive = np.flatnonzero(~visited)
        candidates = relays[alive]
        try:
            if strategy is RouteStrategy.LONG_HOP:
                choice = next_hop_long(current, rx, candidates, comm_range_m)
            else:
                choice = next_hop_short(
                    current, rx, candidates, comm_range_m, config.short_hop_half_angle_deg
                )
        except RouteStuck:
            return None
        if choice == RECEIVER:
            points.append(rx)
            return points
        current = relays[alive[choice]]
        points.append(current)
        visited[alive[choice]] = True
    return None


def _arm_expectations(
    config: AdhocConfig,
    links: _LinkSet,
    points: list[np.ndarray],
) -> tuple[tuple[float, float], tuple[float, float]]:
    """Expected (propagation, transmission) of both availability arms.

    Without the platform every hop of the walk is traversed and pays the
    LoS-probability mix of clear and penalised capacity.  With it, hop k is
    attempted only when every earlier hop was clear, and a blocked hop k is
    replaced by the terminal detour from its start; the expectation
    telescopes over that survival structure.
    """
    bits = links.packet_bits
    rx = points[-1]
    prop_off = tx_off = 0.0
    prop_on = tx_on = 0.0
    reach = 1.0
    for start, end in zip(points[:-1], points[1:]):
        d = float(np.linalg.norm(end - start))
        p_los = float(np.exp(-config.blockage_beta_per_km * d / 1e3))
        hop_prop = d / SPEED_OF_LIGHT
        t_los = bits / _capacity(links.uav, links.uav_noise_dbm, links.nakagami, d)
        t_olos = bits / _capacity(
            links.uav, links.uav_noise_dbm, links.nakagami, d, config.olos_penalty_db
        )
        prop_off += hop_prop
        tx_off += p_los * t_los + (1.0 - p_los) * t_olos

        up, down = _relay_hops(links, start, rx)
        detour_prop = (up.distance_m + down.distance_m) / SPEED_OF_LIGHT
        detour_tx = bits / up.capacity_bps + bits / down.capacity_bps
        prop_on += reach * (p_los * hop_prop + (1.0 - p_los) * detour_prop)
        tx_on += reach * (p_los * t_los + (1.0 - p_los) * detour_tx)
        reach *= p_los
    return (prop_off, tx_off), (prop_on, tx_on)


def _sweep_trial(
    config: AdhocConfig,
    distances_km: tuple[float, ...],
    index: int,
    rng: np.random.Generator,
) -> np.ndarray:
    """One deployment, every (distance, arm) point.

    Returns an array of shape (n_distances, n_arms, 3) holding expected
    propagation seconds, expected transmission seconds and a success flag.
    The walk is shared by the two availability arms of a strategy and the
    blockage states along it are averaged analytically, so the deployment is
    the only sampled quantity.  A trial counts for a strategy only when its
    walk reaches the receiver; both arms are excluded together otherwise.
    """
    del index
    deployment = sample_bpp_disc(
        config.n_uav,
        config.disc_radius_km * 1e3,
        config.radio.altitude_m(PlatformKind.UAV),
        rng,
    )
    relays = deployment.positions
    links = _links(config)
    out = np.zeros((len(distances_km), len(SWEEP_ARMS), 3))
    for i, distance_km in enumerate(distances_km):
        tx, rx = _endpoints(config, distance_km)
        for strategy in (RouteStrategy.LONG_HOP, RouteStrategy.SHORT_HOP):
            points = _walk_path(config, strategy, tx, rx, relays)
            if points is None:
                continue
            off_arm, on_arm = _arm_expectations(config, links, points)
            out[i, SWEEP_ARMS.index((strategy, False))] = (*off_arm, 1.0)
            out[i, SWEEP_ARMS.index((strategy, True))] = (*on_arm, 1.0)
        direct_cfg = dataclasses.replace(
            config, strategy=RouteStrategy.DIRECT_HAPS, haps_available=True
        )
        r = route(direct_cfg, tx, rx, deployment, rng)
        out[i, SWEEP_ARMS.index((RouteStrategy.DIRECT_HAPS, True))] = (
            r.propagation_s,
            r.transmission_s,
            1.0,
        )
    return out


def sweep_latency(
    config: AdhocConfig,
    distances_km: tuple[float, ...] | None = None,
    *,
    trials: int = 2000,
    seed: int = 0,
    workers: int = 1,
) -> ResultTable:
    """Mean latency decomposition per (strategy, availability, distance)."""
    distances = tuple(float(d) for d in (distances_km or config.distances_km))
    trial_fn = partial(_sweep_trial, config, distances)
    payloads, failures = run_trials(trials, trial_fn, seed, workers=workers)
    kept = [p for p in payloads if p is not None]
    if not kept:
        raise RuntimeError(f"all trials failed; first: {failures[0].error}")
    stacked = np.stack(kept)  # (kept trials, n_dist, n_arms, 3)

    table = ResultTable(
        columns=(
            "strategy",
            "haps_available",
            "distance_km",
            "mean_total_s",
            "mean_prop_s",
            "mean_tx_s",
            "stuck_rate",
            "trials",
        ),
        metadata={
            "scenario": "adhoc",
            "n_uav": config.n_uav,
            "disc_radius_km": config.disc_radius_km,
            "comm_range_km": config.comm_range_km,
            "short_hop_half_angle_deg": config.short_hop_half_angle_deg,
            "blockage_beta_per_km": config.blockage_beta_per_km,
            "olos_penalty_db": config.olos_penalty_db,
            "packet_size_mbits": config.radio.packet_size_mbits,
            "trials": trials,
            "seed": seed,
        },
    )
    for j, (strategy, haps) in enumerate(SWEEP_ARMS):
        for i, distance_km in enumerate(distances):
            ok = stacked[:, i, j, 2] > 0
            n_ok = int(np.count_nonzero(ok))
            if n_ok:
                prop = float(np.mean(stacked[ok, i, j, 0]))
                tx_time = float(np.mean(stacked[ok, i, j, 1]))
            else:
                prop = float("nan")
                tx_time = float("nan")
            table.append(
                strategy.value,
                haps,
                distance_km,
                prop + tx_time,
                prop,
                tx_time,
                1.0 - n_ok / len(stacked),
                n_ok,
            )
    return table

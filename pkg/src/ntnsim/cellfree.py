"""End-to-end energy efficiency of UAV access plus platform backhaul.

Active ground users associate with a UAV access point under one of two
rules: the nearest UAV regardless of its blockage state, or the UAV whose
long-term received power (blockage and beam gain included, fading averaged
out) is strongest.  The serving UAV points a cosine-pattern beam at its
user; every other co-sub-band beam in the region leaks interference through
its off-axis rolloff.  Each serving UAV backhauls to its nearest platform
over an always-LoS shadowed-Rician link.

Energy efficiency of a link is its average capacity per transmit watt; the
end-to-end figure composes access and backhaul as product over sum, so the
weaker stage dominates.  The platform deployments are sampled as nested
prefixes, so growing the platform count can only shorten each backhaul and
every per-sample efficiency is monotone in the deployment size.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from functools import partial

import numpy as np

from .channel import (
    AntennaPattern,
    FadingModel,
    RadioParams,
    antenna_gain_dbi,
    dbm_to_watts,
    ergodic_capacity_bps,
    fspl_db,
    linear_to_db,
    noise_power_dbm,
)
from .geometry import PlatformKind
from .harness import ResultTable, run_trials
from .radio import RadioTable


class AssociationMode(str, Enum):
    CELLULAR = "cellular"
    CELL_FREE = "cell_free"


@dataclass(frozen=True)
class CellfreeConfig:
    radio: RadioTable = RadioTable()
    disc_radius_km: float = 50.0
    n_uav: int = 5000
    user_density_per_km2: float = 1.0
    active_fraction: float = 0.1
    sub_bands: int = 10
    haps_counts: tuple[int, ...] = (4, 8, 16)
    sigmoid_a: float = 9.61
    sigmoid_b: float = 0.16
    nlos_excess_db: float = 35.0
    ee_threshold_mbj: float = 40.0
    ee_grid_max_mbj: float = 500.0
    ee_grid_step_mbj: float = 5.0

    def __post_init__(self) -> None:
        if self.n_uav < 1:
            raise ValueError("n_uav must be at least 1")
        if not 0 < self.active_fraction <= 1:
            raise ValueError("active_fraction must be in (0, 1]")
        if self.sub_bands < 1:
            raise ValueError("sub_bands must be at least 1")
        if not self.haps_counts or any(k < 1 for k in self.haps_counts):
            raise ValueError("haps_counts must be non-empty positive counts")
        if list(self.haps_counts) != sorted(set(self.haps_counts)):
            raise ValueError("haps_counts must be strictly increasing")
        if self.user_density_per_km2 <= 0 or self.disc_radius_km <= 0:
            raise ValueError("user_density_per_km2 and disc_radius_km must be positive")


@dataclass(frozen=True)
class EnergyRecord:
    ee_access_mbj: float
    ee_backhaul_mbj: float

    @property
    def ee_total_mbj(self) -> float:
        return ee_total(self.ee_access_mbj, self.ee_backhaul_mbj)


def ee_total(ee_access: float, ee_backhaul: float) -> float:
    """Compose two stage efficiencies; the weaker one dominates."""
    if ee_access < 0 or ee_backhaul < 0:
        raise ValueError("stage efficiencies must be non-negative")
    s = ee_access + ee_backhaul
    if s == 0.0:
        return 0.0
    return ee_access * ee_backhaul / s


def energy_efficiency(capacity_bps: float, tx_power_dbm: float) -> float:
    """Average capacity per transmit watt, in Mb/J."""
    return capacity_bps / 1e6 / dbm_to_watts(tx_power_dbm)


def associate(mode: AssociationMode, distances_m: np.ndarray, mean_rx_dbm: np.ndarray) -> int:
    """Serving-UAV index: nearest for CELLULAR, strongest long-term power
    (blockage included, fading averaged out) for CELL_FREE."""
    if distances_m.size == 0:
        raise ValueError("association requires at least one UAV")
    if mode is AssociationMode.CELLULAR:
        return int(np.argmin(distances_m))
    return int(np.argmax(mean_rx_dbm))


def los_probability_sigmoid(elevation_deg: np.ndarray, a: float, b: float) -> np.ndarray:
    return 1.0 / (1.0 + a * np.exp(-b * (elevation_deg - a)))


@dataclass(frozen=True)
class _Radios:
    access: RadioParams
    access_noise_dbm: float
    backhaul: RadioParams
    backhaul_noise_dbm: float
    beam: AntennaPattern
    nakagami: FadingModel
    shadowed: FadingModel


def _radios(config: CellfreeConfig) -> _Radios:
    table = config.radio
    beam = AntennaPattern.cosine_array(table.antenna_elements)
    # Access: UAV beam toward the user, user element flat.  Backhaul: the
    # UAV's fixed upward element toward the platform, flat gains both ends.
    access = table.link(
        PlatformKind.UAV,
        PlatformKind.USER,
        "mmwave",
        tx_gain_dbi=float(antenna_gain_dbi(beam, 0.0)),
    )
    backhaul = table.link(PlatformKind.UAV, PlatformKind.HAPS, "mmwave")
    return _Radios(
        access=access,
        access_noise_dbm=noise_power_dbm(access),
        backhaul=backhaul,
        backhaul_noise_dbm=noise_power_dbm(backhaul),
        beam=beam,
        nakagami=table.nakagami(),
        shadowed=table.shadowed_rician(),
    )


def _sample_disc(rng: np.random.Generator, n: int, radius_m: float) -> np.ndarray:
    """(n, 2) uniform points on the disc."""
    r = radius_m * np.sqrt(rng.random(n))
    phi = rng.uniform(0.0, 2.0 * np.pi, n)
    return np.column_stack([r * np.cos(phi), r * np.sin(phi)])


def _ee_trial(config: CellfreeConfig, index: int, rng: np.random.Generator) -> dict:
    """One deployment: end-to-end efficiency samples per (mode, platform count).

    Returns {"n": active-user count, (mode value, k): ee_total array}.
    """
    del index
    table = config.radio
    radios = _radios(config)
    radius_m = config.disc_radius_km * 1e3
    area_km2 = np.pi * config.disc_radius_km**2

    n_users = rng.poisson(config.user_density_per_km2 * area_km2)
    users = _sample_disc(rng, n_users, radius_m)
    active = users[rng.random(n_users) < config.active_fraction]
    n_active = len(active)
    uavs = _sample_disc(rng, config.n_uav, radius_m)
    uav_alt = table.altitude_m(PlatformKind.UAV)
    haps_all = _sample_disc(rng, max(config.haps_counts), radius_m)
    haps_alt = table.altitude_m(PlatformKind.HAPS)
    bands = rng.integers(0, config.sub_bands, n_active)

    out: dict = {"n": n_active}
    if n_active == 0:
        for mode in AssociationMode:
            for k in config.haps_counts:
                out[(mode.value, k)] = np.empty(0)
        return out

    # Long-term access picture, one row per active user: distance, drawn
    # blockage state and mean received power toward every UAV.
    dx = active[:, 0:1] - uavs[None, :, 0]
    dy = active[:, 1:2] - uavs[None, :, 1]
    horiz = np.hypot(dx, dy)
    dist = np.hypot(horiz, uav_alt)
    elev = np.degrees(np.arctan2(uav_alt, horiz))
    p_los = los_probability_sigmoid(elev, config.sigmoid_a, config.sigmoid_b)
    los = rng.random((n_active, config.n_uav)) < p_los
    excess_db = np.where(los, 0.0, config.nlos_excess_db)
    mean_rx_dbm = (
        radios.access.tx_power_dbm
        + radios.access.tx_gain_dbi
        + radios.access.rx_gain_dbi
        - fspl_db(dist, radios.access.frequency_hz)
        - excess_db
    )

    # Backhaul efficiency per UAV and platform count; nested prefixes make
    # it non-decreasing in k for every UAV.
    ee_back_by_k: dict[int, np.ndarray] = {}
    for k in config.haps_counts:
        duav = np.hypot(
            uavs[:, 0:1] - haps_all[None, :k, 0], uavs[:, 1:2] - haps_all[None, :k, 1]
        )
        slant = np.hypot(duav.min(axis=1), haps_alt - uav_alt)
        snr_db = (
            radios.backhaul.tx_power_dbm
            + radios.backhaul.tx_gain_dbi
            + radios.backhaul.rx_gain_dbi
            - fspl_db(slant, radios.backhaul.frequency_hz)
            - radios.backhaul_noise_dbm
        )
        caps = np.array(
            [ergodic_capacity_bps(radios.backhaul, radios.shadowed, s) for s in snr_db]
        )
        ee_back_by_k[k] = np.array(
            [energy_efficiency(c, radios.backhaul.tx_power_dbm) for c in caps]
        )

    noise_w = dbm_to_watts(radios.access_noise_dbm)
    for mode in AssociationMode:
        if mode is AssociationMode.CELLULAR:
            serving = np.argmin(dist, axis=1)
        else:
            serving = np.argmax(mean_rx_dbm, axis=1)
        rows = np.arange(n_active)
        signal_w = dbm_to_watts(mean_rx_dbm[rows, serving])

        # Co-sub-band interference: every other active beam leaks through
        # the cosine pattern's off-axis gain at its own UAV.
        interference_w = np.zeros(n_active)
        for band in range(config.sub_bands):
            group = np.flatnonzero(bands == band)
            if group.size < 2:
                continue
            w = serving[group]  # transmitting UAV of each in-band beam
            wx, wy = uavs[w, 0], uavs[w, 1]
            # Beam direction of link j: from its UAV down to its own user.
            bx = active[group, 0] - wx
            by = active[group, 1] - wy
            # Direction from each link's UAV to every other in-band user.
            vx = active[group, 0][:, None] - wx[None, :]
            vy = active[group, 1][:, None] - wy[None, :]
            norm_b = np.sqrt(bx**2 + by**2 + uav_alt**2)
            norm_v = np.sqrt(vx**2 + vy**2 + uav_alt**2)
            cos_angle = (bx[None, :] * vx + by[None, :] * vy + uav_alt**2) / (
                norm_b[None, :] * norm_v
            )
            angle = np.degrees(np.arccos(np.clip(cos_angle, -1.0, 1.0)))
            gain = antenna_gain_dbi(radios.beam, angle)  # (victim u, beam j)
            rx_dbm = (
                radios.access.tx_power_dbm
                + gain
                + radios.access.rx_gain_dbi
                - fspl_db(dist[np.ix_(group, w)], radios.access.frequency_hz)
                - excess_db[np.ix_(group, w)]
            )
            rx_w = np.where(np.isfinite(rx_dbm), dbm_to_watts(rx_dbm), 0.0)
            np.fill_diagonal(rx_w, 0.0)
            interference_w[group] = rx_w.sum(axis=1)

        sinr_db = linear_to_db(signal_w / (noise_w + interference_w))
        access_caps = np.array(
            [ergodic_capacity_bps(radios.access, radios.nakagami, s) for s in sinr_db]
        )
        ee_access = np.array(
            [energy_efficiency(c, radios.access.tx_power_dbm) for c in access_caps]
        )
        for k in config.haps_counts:
            ee_back = ee_back_by_k[k][serving]
            out[(mode.value, k)] = np.array(
                [ee_total(a, b) for a, b in zip(ee_access, ee_back)]
            )
    return out


def simulate_ee_cdf(
    config: CellfreeConfig,
    *,
    trials: int = 15,
    seed: int = 0,
    workers: int = 1,
) -> ResultTable:
    """Empirical efficiency distribution per (association mode, platform count).

    Rows carry a ``statistic`` tag: "cdf" rows trace the distribution on a
    fixed efficiency grid, "mean" rows put the sample mean in the ee column,
    and "frac_ge" rows report the fraction of samples at or above the
    configured threshold in the cdf column.
    """
    trial_fn = partial(_ee_trial, config)
    payloads, failures = run_trials(trials, trial_fn, seed, workers=workers)
    kept = [p for p in payloads if p is not None]
    if not kept:
        raise RuntimeError(f"all trials failed; first: {failures[0].error}")

    grid = np.arange(0.0, config.ee_grid_max_mbj + config.ee_grid_step_mbj / 2, config.ee_grid_step_mbj)
    table = ResultTable(
        columns=("mode", "n_haps", "ee_mbj", "cdf_value", "statistic"),
        metadata={
            "scenario": "cellfree-energy",
            "n_uav": config.n_uav,
            "disc_radius_km": config.disc_radius_km,
            "user_density_per_km2": config.user_density_per_km2,
            "active_fraction": config.active_fraction,
            "sub_bands": config.sub_bands,
            "nlos_excess_db": config.nlos_excess_db,
            "n_samples": int(sum(p["n"] for p in kept)),
            "trials": trials,
            "seed": seed,
        },
    )
    for mode in AssociationMode:
        for k in config.haps_counts:
            samples = np.concatenate([p[(mode.value, k)] for p in kept])
            samples.sort()
            n = samples.size
            for x in grid:
                cdf = float(np.searchsorted(samples, x, side="right")) / n
                table.append(mode.value, k, float(x), cdf, "cdf")
            table.append(mode.value, k, float(np.mean(samples)), float("nan"), "mean")
            frac = float(np.count_nonzero(samples >= config.ee_threshold_mbj)) / n
            table.append(mode.value, k, config.ee_threshold_mbj, frac, "frac_ge")
    return table

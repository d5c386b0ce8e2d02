"""Satellite coverage probability with and without a platform relay tier.

A probe user on a wide disc tries to close an uplink either directly to its
nearest visible satellite or through the strongest platform overhead, which
forwards to its own nearest visible satellite.  Satellites form a binomial
point process over the whole orbital shell, so a share of trials simply has
nothing above the elevation mask; those count as outage.  The relayed path
is covered only when both of its links clear the threshold.

Receiving stations (satellite or platform) point their peak gain at the
transmitter they serve; co-sub-band uplinks from other active users leak in
through a normalized cosine-array rolloff around that boresight.  The
user-side links carry shadowed-Rician fading; the platform-satellite hop is
pure free-space.  One fading draw per trial is tested against every
threshold, so each empirical curve is non-increasing by construction, and
platform/satellite deployments grow by prefix so the count sweeps share
their randomness too.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from functools import partial

import numpy as np

from .channel import (
    cosine_rolloff_db,
    dbm_to_watts,
    fspl_db,
    linear_to_db,
    noise_power_dbm,
    sample_fading_power,
)
from .geometry import (
    PlatformKind,
    Point3,
    sample_bpp_disc,
    sample_bpp_sphere,
    sample_ppp_disc,
    satellite_elevation_angles_deg,
)
from .harness import ResultTable, run_trials, wilson_interval
from .radio import RadioTable


class CoverageMode(str, Enum):
    DIRECT = "direct"
    RELAYED = "relayed"


@dataclass(frozen=True)
class CoverageConfig:
    radio: RadioTable = RadioTable()
    disc_radius_km: float = 50.0
    satellite_counts: tuple[int, ...] = (100, 200)
    haps_counts: tuple[int, ...] = (8, 16)
    user_density_per_km2: float = 1.0
    active_fraction: float = 0.1
    sub_bands: int = 10
    min_elevation_deg: float = 10.0
    thresholds_db: tuple[float, ...] = (
        -30.0, -25.0, -20.0, -15.0, -10.0, -5.0, 0.0, 5.0, 10.0,
    )
    mode: CoverageMode | None = None  # None sweeps both modes

    def __post_init__(self) -> None:
        for counts, name in (
            (self.satellite_counts, "satellite_counts"),
            (self.haps_counts, "haps_counts"),
        ):
            if not counts or any(k < 1 for k in counts):
                raise ValueError(f"{name} must be non-empty positive counts")
            if list(counts) != sorted(set(counts)):
                raise ValueError(f"{name} must be strictly increasing")
        if not self.thresholds_db or any(not np.isfinite(t) for t in self.thresholds_db):
            raise ValueError("thresholds_db must be finite and non-empty")
        if self.disc_radius_km <= 0:
            raise ValueError("disc_radius_km must be positive")
        if self.sub_bands < 1:
            raise ValueError("sub_bands must be at least 1")
        if not 0 <= self.min_elevation_deg < 90:
            raise ValueError("min_elevation_deg must be in [0, 90)")
        if not 0 < self.active_fraction <= 1:
            raise ValueError("active_fraction must be in (0, 1]")


def _as_point(station: np.ndarray) -> Point3:
    return Point3(float(station[0]), float(station[1]), float(station[2]))


def nearest_visible_satellite(
    station: np.ndarray, satellites: np.ndarray, min_elevation_deg: float
) -> int | None:
    """Index of the closest satellite above the station's elevation mask.

    Ties in slant range break toward higher elevation; None when the mask
    leaves nothing visible.
    """
    if len(satellites) == 0:
        return None
    elev = satellite_elevation_angles_deg(_as_point(station), satellites)
    visible = np.flatnonzero(elev >= min_elevation_deg)
    if visible.size == 0:
        return None
    slant = np.linalg.norm(satellites[visible] - station, axis=1)
    best = np.flatnonzero(slant == slant.min())
    if best.size > 1:
        best = best[np.argmax(elev[visible[best]])]
    return int(visible[int(np.atleast_1d(best)[0])])


def _off_boresight_deg(station: np.ndarray, target: np.ndarray, others: np.ndarray) -> np.ndarray:
    """Angles at the station between its boresight (toward target) and others."""
    a = target - station
    b = others - station
    na = np.linalg.norm(a)
    nb = np.linalg.norm(b, axis=1)
    cos_angle = (b @ a) / (na * nb)
    return np.degrees(np.arccos(np.clip(cos_angle, -1.0, 1.0)))


def station_interference_w(
    *,
    station: np.ndarray,
    boresight_target: np.ndarray,
    transmitters: np.ndarray,
    tx_power_dbm: float,
    tx_gain_dbi: float,
    rx_peak_gain_dbi: float,
    n_elements: int,
    frequency_hz: float,
) -> float:
    """Aggregate co-band power at a station whose beam serves the target.

    Every interferer is received through the station's peak gain reduced by
    the normalized cosine-array rolloff at its off-boresight angle; fading
    is averaged out (unit mean).
    """
    if len(transmitters) == 0:
        return 0.0
    angles = _off_boresight_deg(station, boresight_target, transmitters)
    rolloff = cosine_rolloff_db(n_elements, angles)
    dist = np.linalg.norm(transmitters - station, axis=1)
    rx_dbm = (
        tx_power_dbm
        + tx_gain_dbi
        + rx_peak_gain_dbi
        + rolloff
        - fspl_db(dist, frequency_hz)
    )
    return float(np.sum(np.where(np.isfinite(rx_dbm), dbm_to_watts(rx_dbm), 0.0)))


def _uplink_sinr_db(
    config: CoverageConfig,
    rx_kind: PlatformKind,
    user: np.ndarray,
    station: np.ndarray,
    co_band_users: np.ndarray,
    fading_power: float,
) -> float:
    """SINR of the user's uplink into a beam-steered receiving station."""
    table = config.radio
    radio = table.link(PlatformKind.USER, rx_kind, "mmwave")
    noise_w = dbm_to_watts(noise_power_dbm(radio))
    slant = float(np.linalg.norm(station - user))
    signal_dbm = (
        radio.tx_power_dbm
        + radio.tx_gain_dbi
        + radio.rx_gain_dbi
        - fspl_db(slant, radio.frequency_hz)
        + linear_to_db(fading_power)
    )
    interference = station_interference_w(
        station=station,
        boresight_target=user,
        transmitters=co_band_users,
        tx_power_dbm=radio.tx_power_dbm,
        tx_gain_dbi=radio.tx_gain_dbi,
        rx_peak_gain_dbi=radio.rx_gain_dbi,
        n_elements=table.antenna_elements,
        frequency_hz=radio.frequency_hz,
    )
    return float(linear_to_db(dbm_to_watts(signal_dbm) / (noise_w + interference)))


def link_sinr_satellite_user(
    config: CoverageConfig,
    user: np.ndarray,
    satellite: np.ndarray,
    co_band_users: np.ndarray,
    fading_power: float,
) -> float:
    """Uplink SINR (dB) of user -> satellite with co-band uplink interference."""
    return _uplink_sinr_db(config, PlatformKind.SATELLITE, user, satellite, co_band_users, fading_power)


def link_sinr_user_haps(
    config: CoverageConfig,
    user: np.ndarray,
    haps: np.ndarray,
    co_band_users: np.ndarray,
    fading_power: float,
) -> float:
    """Uplink SINR (dB) of user -> platform with co-band uplink interference."""
    return _uplink_sinr_db(config, PlatformKind.HAPS, user, haps, co_band_users, fading_power)


def link_snr_haps_satellite(config: CoverageConfig, haps: np.ndarray, satellite: np.ndarray) -> float:
    """Free-space platform -> satellite SNR in dB; no fading, no interference."""
    radio = config.radio.link(PlatformKind.HAPS, PlatformKind.SATELLITE, "mmwave")
    slant = float(np.linalg.norm(satellite - haps))
    return float(
        radio.tx_power_dbm
        + radio.tx_gain_dbi
        + radio.rx_gain_dbi
        - fspl_db(slant, radio.frequency_hz)
        - noise_power_dbm(radio)
    )


def relayed_coverage(
    config: CoverageConfig,
    user: np.ndarray,
    haps_positions: np.ndarray,
    satellites: np.ndarray,
    threshold_db: float,
    co_band_users: np.ndarray,
    fading_power: float,
) -> bool:
    """Both-links rule: user -> strongest platform -> its nearest visible
    satellite; covered iff the weaker of the two links clears the threshold."""
    if len(haps_positions) == 0:
        return False
    slants = np.linalg.norm(haps_positions - user, axis=1)
    serving = haps_positions[int(np.argmin(slants))]  # equal gains: strongest mean power
    sat = nearest_visible_satellite(serving, satellites, config.min_elevation_deg)
    if sat is None:
        return False
    sinr_up = link_sinr_user_haps(config, user, serving, co_band_users, fading_power)
    snr_fwd = link_snr_haps_satellite(config, serving, satellites[sat])
    return bool(min(sinr_up, snr_fwd) > threshold_db)


def _row_keys(config: CoverageConfig) -> list[tuple[str, int, int]]:
    """(mode, n_haps, n_sats) identity of each sweep curve, fixed order."""
    modes = [config.mode] if config.mode is not None else list(CoverageMode)
    keys: list[tuple[str, int, int]] = []
    for mode in modes:
        if mode is CoverageMode.DIRECT:
            for ks in config.satellite_counts:
                keys.append((mode.value, 0, ks))
        else:
            for kh in config.haps_counts:
                for ks in config.satellite_counts:
                    keys.append((mode.value, kh, ks))
    return keys


def _coverage_trial(config: CoverageConfig, index: int, rng: np.random.Generator) -> np.ndarray:
    """Covered flags of shape (n_curves, n_thresholds) for one trial.

    Draw order is fixed: probe user, probe sub-band, satellite shell,
    platform disc, interfering users and their sub-bands, then the two
    serving-link fading gains.  Every curve and threshold reuses these
    draws; deployments sized by count sweep are prefixes of one sample.
    """
    del index
    table = config.radio
    radius_m = config.disc_radius_km * 1e3
    thresholds = np.asarray(config.thresholds_db)

    r = radius_m * np.sqrt(rng.random())
    phi = rng.uniform(0.0, 2.0 * np.pi)
    user = np.array([r * np.cos(phi), r * np.sin(phi), 0.0])
    probe_band = int(rng.integers(0, config.sub_bands))

    sats_all = sample_bpp_sphere(
        max(config.satellite_counts), table.altitude_m(PlatformKind.SATELLITE), rng
    ).positions
    haps_all = sample_bpp_disc(
        max(config.haps_counts), radius_m, table.altitude_m(PlatformKind.HAPS), rng, PlatformKind.HAPS
    ).positions
    others = sample_ppp_disc(
        config.user_density_per_km2 * config.active_fraction, radius_m, 0.0, rng, PlatformKind.USER
    ).positions
    co_band = others[rng.integers(0, config.sub_bands, len(others)) == probe_band]

    shadowed = table.shadowed_rician()
    g_direct = float(sample_fading_power(shadowed, rng))
    g_relay = float(sample_fading_power(shadowed, rng))

    out = np.zeros((len(_row_keys(config)), thresholds.size), dtype=np.uint8)
    row = 0
    modes = [config.mode] if config.mode is not None else list(CoverageMode)
    for mode in modes:
        if mode is CoverageMode.DIRECT:
            for ks in config.satellite_counts:
                sats = sats_all[:ks]
                serving = nearest_visible_satellite(user, sats, config.min_elevation_deg)
                if serving is not None:
                    sinr = link_sinr_satellite_user(config, user, sats[serving], co_band, g_direct)
                    out[row] = sinr > thresholds
                row += 1
        else:
            for kh in config.haps_counts:
                haps = haps_all[:kh]
                slants = np.linalg.norm(haps - user, axis=1)
                serving_haps = haps[int(np.argmin(slants))]
                sinr_up = link_sinr_user_haps(config, user, serving_haps, co_band, g_relay)
                for ks in config.satellite_counts:
                    sat = nearest_visible_satellite(serving_haps, sats_all[:ks], config.min_elevation_deg)
                    if sat is not None:
                        snr_fwd = link_snr_haps_satellite(config, serving_haps, sats_all[sat])
                        out[row] = min(sinr_up, snr_fwd) > thresholds
                    row += 1
    return out


def sweep_coverage(
    config: CoverageConfig,
    *,
    trials: int = 10_000,
    seed: int = 0,
    workers: int = 1,
) -> ResultTable:
    """Coverage probability per curve and threshold with Wilson 95% bounds."""
    trial_fn = partial(_coverage_trial, config)
    payloads, failures = run_trials(trials, trial_fn, seed, workers=workers)
    kept = [p for p in payloads if p is not None]
    if not kept:
        raise RuntimeError(f"all trials failed; first: {failures[0].error}")
    counts = np.sum(kept, axis=0)  # (n_curves, n_thresholds)
    n = len(kept)

    table = ResultTable(
        columns=("mode", "n_haps", "n_sats", "threshold_db", "coverage", "ci_low", "ci_high", "trials"),
        metadata={
            "scenario": "coverage",
            "disc_radius_km": config.disc_radius_km,
            "min_elevation_deg": config.min_elevation_deg,
            "user_density_per_km2": config.user_density_per_km2,
            "active_fraction": config.active_fraction,
            "sub_bands": config.sub_bands,
            "trials": trials,
            "seed": seed,
        },
    )
    for row, (mode, kh, ks) in enumerate(_row_keys(config)):
        for j, threshold in enumerate(config.thresholds_db):
            successes = int(counts[row, j])
            low, high = wilson_interval(successes, n)
            table.append(mode, kh, ks, float(threshold), successes / n, low, high, n)
    return table

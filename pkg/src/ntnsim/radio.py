"""Shared radio-parameter table covering every platform and band.

One flat record mirrors the simulation-parameter table row by row: per
platform altitude, antenna gain, and transmit power, plus the RF and mmWave
carrier/bandwidth pairs, fading constants, and packet size.  Every scenario
builds its per-link RadioParams through this table, so overriding one value
in a config file shifts all scenarios consistently.
"""

from __future__ import annotations

from dataclasses import dataclass

from .channel import FadingModel, RadioParams
from .constants import NOISE_PSD_DBM_HZ
from .geometry import PlatformKind


@dataclass(frozen=True)
class RadioTable:
    user_altitude_km: float = 0.0
    uav_altitude_km: float = 0.05
    haps_altitude_km: float = 20.0
    satellite_altitude_km: float = 550.0

    user_antenna_gain_dbi: float = 3.0
    uav_antenna_gain_dbi: float = 10.0
    haps_antenna_gain_dbi: float = 30.0
    satellite_antenna_gain_dbi: float = 50.0

    user_tx_power_dbm: float = 20.0
    uav_tx_power_dbm: float = 30.0
    haps_tx_power_dbm: float = 36.0
    satellite_tx_power_dbm: float = 45.0

    rf_frequency_ghz: float = 2.0
    rf_bandwidth_mhz: float = 40.0
    mmwave_frequency_ghz: float = 28.0
    mmwave_bandwidth_mhz: float = 100.0

    shadowed_rician_omega: float = 1.29
    shadowed_rician_b0: float = 0.158
    shadowed_rician_m: float = 19.4
    nakagami_m: float = 2.0

    antenna_elements: int = 32
    noise_psd_dbm_hz: float = NOISE_PSD_DBM_HZ
    packet_size_mbits: float = 5.0

    # ---- accessors -------------------------------------------------------

    def altitude_m(self, kind: PlatformKind) -> float:
        return {
            PlatformKind.USER: self.user_altitude_km,
            PlatformKind.UAV: self.uav_altitude_km,
            PlatformKind.HAPS: self.haps_altitude_km,
            PlatformKind.SATELLITE: self.satellite_altitude_km,
        }[kind] * 1e3

    def antenna_gain_dbi(self, kind: PlatformKind) -> float:
        return {
            PlatformKind.USER: self.user_antenna_gain_dbi,
            PlatformKind.UAV: self.uav_antenna_gain_dbi,
            PlatformKind.HAPS: self.haps_antenna_gain_dbi,
            PlatformKind.SATELLITE: self.satellite_antenna_gain_dbi,
        }[kind]

    def tx_power_dbm(self, kind: PlatformKind) -> float:
        return {
            PlatformKind.USER: self.user_tx_power_dbm,
            PlatformKind.UAV: self.uav_tx_power_dbm,
            PlatformKind.HAPS: self.haps_tx_power_dbm,
            PlatformKind.SATELLITE: self.satellite_tx_power_dbm,
        }[kind]

    def band(self, name: str) -> tuple[float, float]:
        """(carrier frequency Hz, bandwidth Hz) for 'rf' or 'mmwave'."""
        if name == "rf":
            return self.rf_frequency_ghz * 1e9, self.rf_bandwidth_mhz * 1e6
        if name == "mmwave":
            return self.mmwave_frequency_ghz * 1e9, self.mmwave_bandwidth_mhz * 1e6
        raise ValueError(f"unknown band {name!r}, expected 'rf' or 'mmwave'")

    def link(
        self,
        tx: PlatformKind,
        rx: PlatformKind,
        band: str,
        *,
        tx_gain_dbi: float | None = None,
        rx_gain_dbi: float | None = None,
    ) -> RadioParams:
        """Per-link radio

        parameters with the table's nominal flat gains; either end's gain can
        be replaced, e.g. by an array boresight gain.
        """
        freq, bw = self.band(band)
        return RadioParams(
            tx_power_dbm=self.tx_power_dbm(tx),
            tx_gain_dbi=self.antenna_gain_dbi(tx) if tx_gain_dbi is None else tx_gain_dbi,
            rx_gain_dbi=self.antenna_gain_dbi(rx) if rx_gain_dbi is None else rx_gain_dbi,
            frequency_hz=freq,
            bandwidth_hz=bw,
            noise_psd_dbm_hz=self.noise_psd_dbm_hz,
        )

    def nakagami(self) -> FadingModel:
        return FadingModel.nakagami(self.nakagami_m)

    def shadowed_rician(self) -> FadingModel:
        return FadingModel.shadowed_rician(
            self.shadowed_rician_omega, self.shadowed_rician_b0, self.shadowed_rician_m
        )

    @property
    def packet_size_bits(self) -> float:
        return self.packet_size_mbits * 1e6

"""Link-level channel models: path loss, blockage, fading, antennas, capacity.

All large-scale quantities are handled in dB / dBm, small-scale fading as a
linear power gain with the model's own mean.  Free-space path loss is the
only distance law; blockage states add a fixed excess on top of it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache

import numpy as np
from numpy.random import Generator
from scipy import integrate, special

from .constants import NOISE_PSD_DBM_HZ, SPEED_OF_LIGHT


def db_to_linear(db):
    return np.power(10.0, np.asarray(db, dtype=float) / 10.0)


def linear_to_db(x):
    with np.errstate(divide="ignore"):
        return 10.0 * np.log10(np.asarray(x, dtype=float))


def dbm_to_watts(dbm: float) -> float:
    return 10.0 ** (dbm / 10.0) / 1e3


# ---------------------------------------------------------------------------
# path loss
# ---------------------------------------------------------------------------

def fspl_db(distance_m, frequency_hz):
    """Free-space path loss, 20*log10(4*pi*d*f/c) dB.

    Accepts scalars or arrays; every distance and the frequency must be
    strictly positive.
    """
    d = np.asarray(distance_m, dtype=float)
    if np.any(d <= 0.0):
        raise ValueError("distance_m must be > 0")
    if np.any(np.asarray(frequency_hz, dtype=float) <= 0.0):
        raise ValueError("frequency_hz must be > 0")
    out = 20.0 * np.log10(4.0 * np.pi * d * frequency_hz / SPEED_OF_LIGHT)
    return float(out) if np.isscalar(distance_m) else out


# ---------------------------------------------------------------------------
# blockage
# ---------------------------------------------------------------------------

class LosState(str, Enum):
    LOS = "los"
    OLOS = "olos"
    NLOS = "nlos"


class BlockageKind(str, Enum):
    ALWAYS_LOS = "always_los"
    EXP_DISTANCE = "exp_distance"
    ELEVATION_SIGMOID = "elevation_sigmoid"


@dataclass(frozen=True)
class BlockageModel:
    """Bernoulli line-of-sight model plus the excess loss of the bad state.

    EXP_DISTANCE: P(LoS) = exp(-beta * d_km), the miss state is OLOS.
    ELEVATION_SIGMOID: P(LoS) = 1 / (1 + a*exp(-b*(theta_deg - a))), the miss
    state is NLOS.  Constants a, b default to the urban fit.
    """

    kind: BlockageKind
    beta_per_km: float = 0.08
    sigmoid_a: float = 9.61
    sigmoid_b: float = 0.16
    olos_excess_db: float = 20.0
    nlos_excess_db: float = 35.0

    @staticmethod
    def always_los() -> "BlockageModel":
        return BlockageModel(BlockageKind.ALWAYS_LOS)

    @staticmethod
    def exp_distance(beta_per_km: float = 0.08, olos_excess_db: float = 20.0) -> "BlockageModel":
        return BlockageModel(
            BlockageKind.EXP_DISTANCE, beta_per_km=beta_per_km, olos_excess_db=olos_excess_db
        )

    @staticmethod
    def elevation_sigmoid(
        a: float = 9.61, b: float = 0.16, nlos_excess_db: float = 35.0
    ) -> "BlockageModel":
        return BlockageModel(
            BlockageKind.ELEVATION_SIGMOID, sigmoid_a=a, sigmoid_b=b, nlos_excess_db=nlos_excess_db
        )

    def miss_state(self) -> LosState:
        return LosState.OLOS if self.kind is BlockageKind.EXP_DISTANCE else LosState.NLOS

    def excess_db(self, state: LosState) -> float:
        if state is LosState.LOS:
            return 0.0
        if state is LosState.OLOS:
            return self.olos_excess_db
        return self.nlos_excess_db


def los_probability(model: BlockageModel, *, distance_m=None, elevation_deg=None):
    """Probability of the LoS state under ``model`` for the given geometry."""
    if model.kind is BlockageKind.ALWAYS_LOS:
        return 1.0
    if model.kind is BlockageKind.EXP_DISTANCE:
        if distance_m is None:
            raise ValueError("EXP_DISTANCE blockage needs distance_m")
        d_km = np.asarray(distance_m, dtype=float) / 1e3
        if np.any(d_km < 0):
            raise ValueError("distance_m must be >= 0")
        p = np.exp(-model.beta_per_km * d_km)
    else:
        if elevation_deg is None:
            raise ValueError("ELEVATION_SIGMOID blockage needs elevation_deg")
        theta = np.asarray(elevation_deg, dtype=float)
        p = 1.0 / (1.0 + model.sigmoid_a * np.exp(-model.sigmoid_b * (theta - model.sigmoid_a)))
    return float(p) if p.ndim == 0 else p


def sample_los_states(
    model: BlockageModel,
    rng: Generator,
    *,
    distance_m=None,
    elevation_deg=None,
) -> np.ndarray:
    """Vector of booleans, True where the link came up LoS."""
    p = los_probability(model, distance_m=distance_m, elevation_deg=elevation_deg)
    p = np.atleast_1d(np.asarray(p, dtype=float))
    return rng.uniform(size=p.shape) < p


def sample_los_state(
    model: BlockageModel,
    rng: Generator,
    *,
    distance_m=None,
    elevation_deg=None,
) -> LosState:
    los = sample_los_states(model, rng, distance_m=distance_m, elevation_deg=elevation_deg)
    return LosState.LOS if bool(los[0]) else model.miss_state()


# ---------------------------------------------------------------------------
# small-scale fading
# ---------------------------------------------------------------------------

class FadingKind(str, Enum):
    NONE = "none"
    NAKAGAMI = "nakagami"
    SHADOWED_RICIAN = "shadowed_rician"


@dataclass(frozen=True)
class FadingModel:
    """Small-scale fading as a linear power gain.

    NAKAGAMI draws Gamma(m, 1/m) power with unit mean.  SHADOWED_RICIAN
    composes a Rayleigh scattered component of average power 2*b0 with a
    line-of-sight amplitude of power omega whose magnitude is Nakagami-m
    shadowed; its mean power is omega + 2*b0.
    """

    kind: FadingKind
    nakagami_m: float = 2.0
    sr_omega: float = 1.29
    sr_b0: float = 0.158
    sr_m: float = 19.4

    def __post_init__(self):
        if self.kind is FadingKind.NAKAGAMI and self.nakagami_m < 0.5:
            raise ValueError(f"nakagami_m must be >= 0.5, got {self.nakagami_m}")
        if self.kind is FadingKind.SHADOWED_RICIAN:
            if self.sr_omega <= 0 or self.sr_b0 <= 0:
                raise ValueError("shadowed-Rician omega and b0 must be > 0")
            if self.sr_m < 0.5:
                raise ValueError(f"shadowed-Rician m must be >= 0.5, got {self.sr_m}")

    @staticmethod
    def none() -> "FadingModel":
        return FadingModel(FadingKind.NONE)

    @staticmethod
    def nakagami(m: float = 2.0) -> "FadingModel":
        return FadingModel(FadingKind.NAKAGAMI, nakagami_m=m)

    @staticmethod
    def shadowed_rician(
        omega: float = 1.29, b0: float = 0.158, m: float = 19.4
    ) -> "FadingModel":
        return FadingModel(FadingKind.SHADOWED_RICIAN, sr_omega=omega, sr_b0=b0, sr_m=m)

    @property
    def mean_power(self) -> float:
        if self.kind is FadingKind.SHADOWED_RICIAN:
            return self.sr_omega + 2.0 * self.sr_b0
        return 1.0


def sample_fading_power(model: FadingModel, rng: Generator, size=None):
    """Draw linear fading power gains; scalar when ``size`` is None."""
    shape = () if size is None else size
    if model.kind is FadingKind.NONE:
        out = np.ones(shape, dtype=float)
    elif model.kind is FadingKind.NAKAGAMI:
        out = rng.gamma(model.nakagami_m, 1.0 / model.nakagami_m, size=shape)
    else:
        # scattered part: complex Gaussian with power 2*b0
        scatter_re = math.sqrt(model.sr_b0) * rng.standard_normal(shape)
        scatter_im = math.sqrt(model.sr_b0) * rng.standard_normal(shape)
        # LoS amplitude: Nakagami-shadowed, E[xi^2] = omega
        xi = np.sqrt(rng.gamma(model.sr_m, model.sr_omega / model.sr_m, size=shape))
        phase = rng.uniform(0.0, 2.0 * np.pi, size=shape)
        re = scatter_re + xi * np.cos(phase)
        im = scatter_im + xi * np.sin(phase)
        out = re * re + im * im
    return float(out) if size is None else out


def shadowed_rician_power_pdf(x, model: FadingModel):
    """Density of the shadowed-Rician power gain (for oracles and checks).

    Evaluated in log space; the confluent hypergeometric factor switches to
    its large-argument asymptote where a direct evaluation overflows, so the
    density stays finite over the whole tail.
    """
    if model.kind is not FadingKind.SHADOWED_RICIAN:
        raise ValueError("density defined for SHADOWED_RICIAN only")
    x = np.asarray(x, dtype=float)
    two_b0 = 2.0 * model.sr_b0
    m = model.sr_m
    omega = model.sr_omega
    log_c = m * math.log(two_b0 * m / (two_b0 * m + omega)) - math.log(two_b0)
    kappa = omega / (two_b0 * (two_b0 * m + omega))
    z = kappa * np.maximum(x, 0.0)
    with np.errstate(over="ignore"):
        h = special.hyp1f1(m, 1.0, z)
    asymptote = z + (m - 1.0) * np.log(np.maximum(z, np.finfo(float).tiny)) - special.gammaln(m)
    log_h = np.where(np.isfinite(h), np.log(np.maximum(h, np.finfo(float).tiny)), asymptote)
    out = np.where(x >= 0, np.exp(log_c + log_h - np.maximum(x, 0.0) / two_b0), 0.0)
    return float(out) if np.ndim(x) == 0 else out


# ---------------------------------------------------------------------------
# antenna patterns
# ---------------------------------------------------------------------------

class PatternKind(str, Enum):
    FLAT = "flat"
    COSINE_ARRAY = "cosine_array"


@dataclass(frozen=True)
class AntennaPattern:
    """Either an isotropic-with-gain element or a cosine-shaped array beam.

    The cosine array uses G(theta) = G_max * cos(theta)^p on the front
    hemisphere with p = n_elements/2 - 1 and zero gain behind, and G_max is
    fixed by total-power normalization: the pattern integrates to 4*pi over
    the sphere, which lands G_max at exactly n_elements.
    """

    kind: PatternKind
    gain_dbi: float = 0.0
    n_elements: int = 32

    def __post_init__(self):
        if self.kind is PatternKind.COSINE_ARRAY and self.n_elements < 2:
            raise ValueError(f"n_elements must be >= 2, got {self.n_elements}")

    @staticmethod
    def flat(gain_dbi: float) -> "AntennaPattern":
        return AntennaPattern(PatternKind.FLAT, gain_dbi=gain_dbi)

    @staticmethod
    def cosine_array(n_elements: int = 32) -> "AntennaPattern":
        return AntennaPattern(PatternKind.COSINE_ARRAY, n_elements=n_elements)

    @property
    def exponent(self) -> float:
        return self.n_elements / 2.0 - 1.0


def antenna_gain_dbi(pattern: AntennaPattern, off_boresight_deg):
    """Gain toward a direction ``off_boresight_deg`` away from boresight, dBi."""
    theta = np.asarray(off_boresight_deg, dtype=float)
    if np.any(theta < 0.0) or np.any(theta > 180.0):
        raise ValueError("off_boresight_deg must be in [0, 180]")
    if pattern.kind is PatternKind.FLAT:
        out = np.full(theta.shape, pattern.gain_dbi, dtype=float)
    else:
        p = pattern.exponent
        g_max = 2.0 * (p + 1.0)  # normalization: integral over the sphere = 4*pi
        cos_t = np.cos(np.radians(theta))
        with np.errstate(divide="ignore"):
            out = np.where(
                theta < 90.0,
                10.0 * np.log10(g_max * np.clip(cos_t, 0.0, None) ** p),
                -np.inf,
            )
    return float(out) if np.isscalar(off_boresight_deg) else out


def cosine_rolloff_db(n_elements: int, off_boresight_deg):
    """Beam-shape attenuation relative to boresight, 0 dB at the beam center.

    This is the normalized cosine-array shape; scenarios that keep their
    platform's nominal peak gain apply it to interfering directions.
    """
    pattern = AntennaPattern.cosine_array(n_elements)
    boresight = antenna_gain_dbi(pattern, 0.0)
    return antenna_gain_dbi(pattern, off_boresight_deg) - boresight


# ---------------------------------------------------------------------------
# radio parameters and link budget
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RadioParams:
    """Per-link radio configuration: powers in dBm, gains in dBi, Hz units."""

    tx_power_dbm: float
    tx_gain_dbi: float
    rx_gain_dbi: float
    frequency_hz: float
    bandwidth_hz: float
    noise_psd_dbm_hz: float = NOISE_PSD_DBM_HZ

    def __post_init__(self):
        if self.frequency_hz <= 0:
            raise ValueError(f"frequency_hz must be > 0, got {self.frequency_hz}")
        if self.bandwidth_hz <= 0:
            raise ValueError(f"bandwidth_hz must be > 0, got {self.bandwidth_hz}")


def noise_power_dbm(radio: RadioParams) -> float:
    return radio.noise_psd_dbm_hz + 10.0 * math.log10(radio.bandwidth_hz)


def rx_power_dbm(radio: RadioParams, distance_m, excess_db=0.0, fading_power=1.0):
    """Received power over a free-space link with extra loss and fading."""
    pl = fspl_db(distance_m, radio.frequency_hz)
    fading_db = linear_to_db(fading_power)
    out = radio.tx_power_dbm + radio.tx_gain_dbi + radio.rx_gain_dbi - pl - excess_db + fading_db
    return float(out) if np.ndim(out) == 0 else out


@dataclass(frozen=True)
class LinkSample:
    """One realization of a point-to-point link."""

    distance_m: float
    los_state: LosState
    path_loss_db: float
    fading_power: float
    rx_power_dbm: float


def sample_link(
    radio: RadioParams,
    blockage: BlockageModel,
    fading: FadingModel,
    rng: Generator,
    *,
    distance_m: float,
    elevation_deg: float | None = None,
    los_state: LosState | None = None,
) -> LinkSample:
    """Draw blockage state and fading for a fixed geometry."""
    if los_state is None:
        los_state = sample_los_state(
            blockage, rng, distance_m=distance_m, elevation_deg=elevation_deg
        )
    h = sample_fading_power(fading, rng)
    power = rx_power_dbm(radio, distance_m, blockage.excess_db(los_state), h)
    return LinkSample(
        distance_m=float(distance_m),
        los_state=los_state,
        path_loss_db=float(fspl_db(distance_m, radio.frequency_hz)),
        fading_power=float(h),
        rx_power_dbm=float(power),
    )


# ---------------------------------------------------------------------------
# SINR and capacity
# ---------------------------------------------------------------------------

def sinr_db(serving_rx_dbm: float, interferer_rx_dbm, noise_dbm: float) -> float:
    """SINR of one serving sample against co-band interferers plus noise."""
    interferers = np.asarray(interferer_rx_dbm, dtype=float).ravel()
    denom = db_to_linear(noise_dbm)
    if interferers.size:
        finite = interferers[np.isfinite(interferers)]
        denom = denom + np.sum(db_to_linear(finite))
    return float(linear_to_db(db_to_linear(serving_rx_dbm) / denom))


def shannon_capacity_bps(bandwidth_hz: float, sinr_value_db: float) -> float:
    """Shannon rate B*log2(1 + sinr); zero-signal links give exactly zero."""
    if bandwidth_hz <= 0:
        raise ValueError(f"bandwidth_hz must be > 0, got {bandwidth_hz}")
    if sinr_value_db == -np.inf:
        return 0.0
    return bandwidth_hz * math.log2(1.0 + 10.0 ** (sinr_value_db / 10.0))


@dataclass(frozen=True)
class CapacityEstimate:
    mean_bps: float
    std_error_bps: float
    n_draws: int


def average_capacity(
    radio: RadioParams,
    fading: FadingModel,
    rng: Generator,
    *,
    distance_m: float,
    blockage: BlockageModel | None = None,
    elevation_deg: float | None = None,
    los_state: LosState | None = None,
    n_draws: int = 10_000,
) -> CapacityEstimate:
    """Monte Carlo fading-averaged Shannon capacity of a noise-limited link.

    Geometry stays fixed; fading (and the blockage state, unless pinned via
    ``los_state`` or left ALWAYS_LOS) is redrawn each draw.  Returns the mean
    and its standard error.
    """
    if n_draws < 1:
        raise ValueError(f"n_draws must be >= 1, got {n_draws}")
    if blockage is None:
        blockage = BlockageModel.always_los()

    if los_state is not None:
        excess = np.full(n_draws, blockage.excess_db(los_state))
    elif blockage.kind is BlockageKind.ALWAYS_LOS:
        excess = np.zeros(n_draws)
    else:
        los = sample_los_states(
            blockage,
            rng,
            distance_m=np.full(n_draws, distance_m),
            elevation_deg=None if elevation_deg is None else np.full(n_draws, elevation_deg),
        )
        excess = np.where(los, 0.0, blockage.excess_db(blockage.miss_state()))

    h = sample_fading_power(fading, rng, size=n_draws)
    snr_db_draws = rx_power_dbm(radio, distance_m, excess, h) - noise_power_dbm(radio)
    caps = radio.bandwidth_hz * np.log2(1.0 + db_to_linear(snr_db_draws))
    mean = float(np.mean(caps))
    se = float(np.std(caps, ddof=1) / math.sqrt(n_draws)) if n_draws > 1 else 0.0
    return CapacityEstimate(mean_bps=mean, std_error_bps=se, n_draws=n_draws)


# ---------------------------------------------------------------------------
# deterministic ergodic-capacity tables (quadrature over the fading law)
# ---------------------------------------------------------------------------

_TABLE_SNR_DB = np.arange(-60.0, 100.0 + 0.25, 0.25)


def _ergodic_se_bits(snr_linear: float, fading: FadingModel) -> float:
    """E[log2(1 + snr*h)] by quadrature over the fading power density."""
    if fading.kind is FadingKind.NONE:
        return math.log2(1.0 + snr_linear)
    if fading.kind is FadingKind.NAKAGAMI:
        m = fading.nakagami_m
        nodes, weights = special.roots_genlaguerre(96, m - 1.0)
        vals = np.log2(1.0 + snr_linear * nodes / m)
        return float(np.sum(weights * vals) / special.gamma(m))
    # shadowed-Rician: integrate against the closed-form power density over
    # a finite window holding all non-negligible mass (the tail decays like
    # exp(-(1/2b0 - kappa) x) with kappa < 1/2b0 for any valid parameters)
    two_b0 = 2.0 * fading.sr_b0
    kappa = fading.sr_omega / (two_b0 * (two_b0 * fading.sr_m + fading.sr_omega))
    x_max = 400.0 / (1.0 / two_b0 - kappa)
    val, _ = integrate.quad(
        lambda x: math.log2(1.0 + snr_linear * x) * shadowed_rician_power_pdf(x, fading),
        0.0,
        x_max,
        limit=200,
    )
    return float(val)


@lru_cache(maxsize=8)
def _ergodic_table(fading: FadingModel) -> np.ndarray:
    gamma = db_to_linear(_TABLE_SNR_DB)
    return np.array([_ergodic_se_bits(g, fading) for g in gamma])


def ergodic_capacity_bps(radio: RadioParams, fading: FadingModel, snr_db) -> float:
    """Fading-averaged capacity from a cached quadrature table.

    ``snr_db`` is the mean SNR with unit fading gain (the table applies the
    model's own mean internally).  Deterministic, so routing latencies do not
    wobble with Monte Carlo noise.
    """
    table = _ergodic_table(fading)
    snr = np.clip(np.asarray(snr_db, dtype=float), _TABLE_SNR_DB[0], _TABLE_SNR_DB[-1])
    se = np.interp(snr, _TABLE_SNR_DB, table)
    out = radio.bandwidth_hz * se
    return float(out) if np.ndim(snr_db) == 0 else out

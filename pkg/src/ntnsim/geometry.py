"""Point processes and geometric primitives for aerial network layouts.

Disc deployments (users, UAVs, HAPS) live in a local tangent frame: x/y on
the ground plane, z pointing up, all in meters.  Satellite shells are sampled
on a full Earth-centered sphere and reported in the same tangent frame, so a
satellite on the far side of the planet carries a negative z.  Flat-frame
math is used for everything inside the disc scenarios; Earth curvature only
enters through satellite elevation and visibility.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np
from numpy.random import Generator, default_rng

from .constants import EARTH_RADIUS_M


class PlatformKind(str, Enum):
    USER = "user"
    UAV = "uav"
    HAPS = "haps"
    SATELLITE = "satellite"


@dataclass(frozen=True)
class Point3:
    """Position in the local tangent frame, meters."""

    x: float
    y: float
    z: float

    def __post_init__(self):
        if not (math.isfinite(self.x) and math.isfinite(self.y) and math.isfinite(self.z)):
            raise ValueError("Point3 components must be finite")

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z], dtype=float)


# ---------------------------------------------------------------------------
# process descriptors
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BPPDisc:
    """Fixed number of points uniform on a horizontal disc."""

    n: int
    radius_m: float
    altitude_m: float


@dataclass(frozen=True)
class PPPDisc:
    """Poisson point process on a horizontal disc, intensity in km^-2."""

    density_per_km2: float
    radius_m: float
    altitude_m: float


@dataclass(frozen=True)
class BPPSphere:
    """Fixed number of points uniform on a full orbital shell."""

    n: int
    shell_altitude_m: float


@dataclass(frozen=True)
class Deployment:
    """Sampled node positions plus the process that generated them.

    ``positions`` is an (n, 3) float array in tangent-frame meters.  The row
    order is the sampling order and is deterministic for a fixed seed.
    """

    positions: np.ndarray
    kind: PlatformKind
    process: BPPDisc | PPPDisc | BPPSphere
    seed: int | None = None

    def __post_init__(self):
        pos = np.asarray(self.positions, dtype=float)
        if pos.ndim != 2 or pos.shape[1] != 3:
            raise ValueError(f"positions must be (n, 3), got {pos.shape}")
        object.__setattr__(self, "positions", pos)

    @property
    def count(self) -> int:
        return self.positions.shape[0]

    def point(self, i: int) -> Point3:
        x, y, z = self.positions[i]
        return Point3(x, y, z)


def _as_rng(rng: Generator | int | None) -> Generator:
    if isinstance(rng, Generator):
        return rng
    return default_rng(rng)


# ---------------------------------------------------------------------------
# samplers
# ---------------------------------------------------------------------------

def _uniform_disc(n: int, radius_m: float, altitude_m: float, rng: Generator) -> np.ndarray:
    # inverse-CDF radial draw: area-uniform needs r = R * sqrt(u)
    r = radius_m * np.sqrt(rng.uniform(0.0, 1.0, size=n))
    theta = rng.uniform(0.0, 2.0 * np.pi, size=n)
    out = np.empty((n, 3), dtype=float)
    out[:, 0] = r * np.cos(theta)
    out[:, 1] = r * np.sin(theta)
    out[:, 2] = altitude_m
    return out


def sample_bpp_disc(
    n: int,
    radius_m: float,
    altitude_m: float,
    rng: Generator | int | None = None,
    kind: PlatformKind = PlatformKind.UAV,
) -> Deployment:
    """Sample exactly ``n`` points uniformly on a disc at a fixed altitude."""
    if n < 0:
        raise ValueError(f"n must be >= 0, got {n}")
    if radius_m <= 0:
        raise ValueError(f"radius_m must be > 0, got {radius_m}")
    seed = rng if isinstance(rng, int) else None
    gen = _as_rng(rng)
    pos = _uniform_disc(n, radius_m, altitude_m, gen)
    return Deployment(pos, kind, BPPDisc(n, radius_m, altitude_m), seed)


def sample_ppp_disc(
    density_per_km2: float,
    radius_m: float,
    altitude_m: float,
    rng: Generator | int | None = None,
    kind: PlatformKind = PlatformKind.USER,
) -> Deployment:
    """Sample a Poisson process on a disc; the count itself is random."""
    if density_per_km2 < 0:
        raise ValueError(f"density_per_km2 must be >= 0, got {density_per_km2}")
    if radius_m <= 0:
        raise ValueError(f"radius_m must be > 0, got {radius_m}")
    seed = rng if isinstance(rng, int) else None
    gen = _as_rng(rng)
    area_km2 = math.pi * (radius_m / 1e3) ** 2
    n = int(gen.poisson(density_per_km2 * area_km2))
    pos = _uniform_disc(n, radius_m, altitude_m, gen)
    return Deployment(pos, kind, PPPDisc(density_per_km2, radius_m, altitude_m), seed)


def sample_bpp_sphere(
    n: int,
    shell_altitude_m: float,
    rng: Generator | int | None = None,
    kind: PlatformKind = PlatformKind.SATELLITE,
) -> Deployment:
    """Sample ``n`` points uniformly on the full orbital shell.

    Uniformity on the sphere comes from drawing the Earth-centered z
    coordinate uniformly and the longitude uniformly.  Positions are shifted
    into the tangent frame of the disc origin (z = Earth-centered z minus the
    Earth radius), so sub-horizon satellites have z < 0.
    """
    if n < 0:
        raise ValueError(f"n must be >= 0, got {n}")
    if shell_altitude_m <= 0:
        raise ValueError(f"shell_altitude_m must be > 0, got {shell_altitude_m}")
    seed = rng if isinstance(rng, int) else None
    gen = _as_rng(rng)
    shell_r = EARTH_RADIUS_M + shell_altitude_m
    u = gen.uniform(-1.0, 1.0, size=n)  # cos(polar angle), uniform on the sphere
    phi = gen.uniform(0.0, 2.0 * np.pi, size=n)
    rho = shell_r * np.sqrt(np.clip(1.0 - u * u, 0.0, None))
    pos = np.empty((n, 3), dtype=float)
    pos[:, 0] = rho * np.cos(phi)
    pos[:, 1] = rho * np.sin(phi)
    pos[:, 2] = shell_r * u - EARTH_RADIUS_M
    return Deployment(pos, kind, BPPSphere(n, shell_altitude_m), seed)


# ---------------------------------------------------------------------------
# metric helpers
# ---------------------------------------------------------------------------

def distance(a: Point3, b: Point3) -> float:
    """Euclidean distance between two points, meters."""
    return math.dist((a.x, a.y, a.z), (b.x, b.y, b.z))


def distances_to(point: Point3, positions: np.ndarray) -> np.ndarray:
    """Distances from one point to every row of an (n, 3) array."""
    diff = np.asarray(positions, dtype=float) - point.as_array()
    return np.sqrt(np.einsum("ij,ij->i", diff, diff))


def pairwise_distances(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """All distances between rows of (n, 3) and (m, 3) arrays, shape (n, m)."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    diff = a[:, None, :] - b[None, :, :]
    return np.sqrt(np.einsum("nmk,nmk->nm", diff, diff))


def elevation_angle_deg(ground: Point3, target: Point3) -> float:
    """Flat-frame elevation of ``target`` seen from ``ground``, degrees.

    Valid for links inside a disc scenario where curvature is negligible.
    The target must sit strictly above the observer.
    """
    dz = target.z - ground.z
    horiz = math.hypot(target.x - ground.x, target.y - ground.y)
    if dz <= 0.0 and horiz == 0.0:
        raise ValueError("coincident points have no elevation angle")
    if dz <= 0.0:
        raise ValueError(f"target must be above observer, got dz={dz}")
    return math.degrees(math.atan2(dz, horiz))


def _earth_centered(positions: np.ndarray) -> np.ndarray:
    ec = np.array(positions, dtype=float, copy=True)
    if ec.ndim == 1:
        ec[2] += EARTH_RADIUS_M
    else:
        ec[:, 2] += EARTH_RADIUS_M
    return ec


def satellite_elevation_angles_deg(ground: Point3, positions: np.ndarray) -> np.ndarray:
    """Curved-Earth elevation of each satellite seen from a ground point.

    The local vertical is the Earth-center direction through the observer,
    which is what makes the horizon fall away for distant satellites.
    """
    g = _earth_centered(ground.as_array())
    up = g / np.linalg.norm(g)
    d = _earth_centered(np.atleast_2d(positions)) - g
    rng_norm = np.linalg.norm(d, axis=1)
    if np.any(rng_norm == 0.0):
        raise ValueError("satellite coincides with ground point")
    sin_elev = (d @ up) / rng_norm
    return np.degrees(np.arcsin(np.clip(sin_elev, -1.0, 1.0)))


def satellite_elevation_angle_deg(ground: Point3, sat: Point3) -> float:
    return float(satellite_elevation_angles_deg(ground, sat.as_array())[0])


def visible_satellite_indices(
    ground: Point3,
    deployment: Deployment,
    min_elevation_deg: float = 10.0,
) -> np.ndarray:
    """Indices of satellites at or above the elevation mask, sampling order."""
    if deployment.count == 0:
        return np.empty(0, dtype=int)
    elev = satellite_elevation_angles_deg(ground, deployment.positions)
    return np.flatnonzero(elev >= min_elevation_deg)

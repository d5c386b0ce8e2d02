"""Physical constants shared across the simulator."""

SPEED_OF_LIGHT = 299_792_458.0  # m/s

# Spherical-Earth radius used for satellite visibility and ranges.
EARTH_RADIUS_M = 6_371_000.0

# Thermal noise power spectral density at the receiver front end.
NOISE_PSD_DBM_HZ = -174.0

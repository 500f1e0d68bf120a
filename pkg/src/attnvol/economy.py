"""Per-country static covariates: trade openness and distance to Moscow."""

import numpy as np

MOSCOW_LAT = 55.7558
MOSCOW_LON = 37.6173

# IUGG mean Earth radius, km
EARTH_RADIUS_KM = 6371.0088


def degree_of_openness(exports, imports, gdp):
    """Trade openness vis-a-vis the partner: (exports + imports) / GDP.

    All three amounts must share the same currency unit; the result is a
    dimensionless ratio.
    """
    if gdp <= 0:
        raise ValueError(f"gdp must be positive, got {gdp}")
    if exports < 0 or imports < 0:
        raise ValueError("exports and imports must be nonnegative")
    return (exports + imports) / gdp


def haversine_km(lat1, lon1, lat2, lon2):
    """Great-circle distance in km between two (lat, lon) points in degrees."""
    for lat in (lat1, lat2):
        if not -90.0 <= lat <= 90.0:
            raise ValueError(f"latitude out of range: {lat}")
    for lon in (lon1, lon2):
        if not -180.0 <= lon <= 180.0:
            raise ValueError(f"longitude out of range: {lon}")
    p1, p2 = np.radians(lat1), np.radians(lat2)
    dphi = np.radians(lat2 - lat1)
    dlam = np.radians(lon2 - lon1)
    a = np.sin(dphi / 2.0) ** 2 + np.cos(p1) * np.cos(p2) * np.sin(dlam / 2.0) ** 2
    return 2.0 * EARTH_RADIUS_KM * np.arcsin(np.sqrt(np.clip(a, 0.0, 1.0)))


def distance_to_moscow(lat, lon):
    """Great-circle distance from a capital to Moscow, in thousands of km."""
    return haversine_km(lat, lon, MOSCOW_LAT, MOSCOW_LON) / 1000.0

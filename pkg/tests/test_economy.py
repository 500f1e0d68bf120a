import pytest

from attnvol.economy import (
    EARTH_RADIUS_KM,
    degree_of_openness,
    distance_to_moscow,
    haversine_km,
)


class TestDegreeOfOpenness:
    def test_basic_ratio(self):
        assert degree_of_openness(30, 20, 1000) == pytest.approx(0.05)

    def test_zero_trade(self):
        assert degree_of_openness(0, 0, 500) == 0.0

    def test_nonpositive_gdp_rejected(self):
        with pytest.raises(ValueError):
            degree_of_openness(1, 1, 0)

    def test_negative_flow_rejected(self):
        with pytest.raises(ValueError):
            degree_of_openness(-1, 1, 100)


class TestHaversine:
    def test_zero_distance(self):
        assert haversine_km(55.7558, 37.6173, 55.7558, 37.6173) == 0.0

    def test_symmetric(self):
        d1 = haversine_km(50.45, 30.52, 55.7558, 37.6173)
        d2 = haversine_km(55.7558, 37.6173, 50.45, 30.52)
        assert d1 == pytest.approx(d2, abs=1e-12)

    def test_quarter_circumference(self):
        import numpy as np

        d = haversine_km(0.0, 0.0, 90.0, 0.0)
        assert d == pytest.approx(np.pi / 2 * EARTH_RADIUS_KM, rel=1e-12)

    def test_latitude_out_of_range(self):
        with pytest.raises(ValueError):
            haversine_km(91.0, 0.0, 0.0, 0.0)

    def test_longitude_out_of_range(self):
        with pytest.raises(ValueError):
            haversine_km(0.0, 181.0, 0.0, 0.0)


class TestDistanceToMoscow:
    def test_kyiv(self):
        # Kyiv sits about 756 km from Moscow
        assert distance_to_moscow(50.4501, 30.5234) == pytest.approx(0.756, abs=0.002)

    def test_antipode_near_half_circumference(self):
        d = distance_to_moscow(-55.7558, 37.6173 - 180.0)
        assert d == pytest.approx(20.015, abs=0.01)

    def test_units_are_thousands_of_km(self):
        km = haversine_km(48.8566, 2.3522, 55.7558, 37.6173)
        assert distance_to_moscow(48.8566, 2.3522) == pytest.approx(km / 1000.0)

#!/usr/bin/env python3
"""
Test Script for SI / geometric unit conversion
"""

import pytest
from astropy import constants as const
from astropy import units as u

from desitter_gravity.exceptions import ConfigError
from desitter_gravity.units import from_geometric, parse_quantity, solar_mass_geometric, to_geometric


def test_solar_mass_in_metres():
    assert solar_mass_geometric() == pytest.approx(1476.6, rel=1e-4)


def test_parse_strings_and_quantities():
    assert parse_quantity("1.4 solMass", "mass").to_value(u.solMass) == pytest.approx(1.4)
    assert parse_quantity(3.0 * u.km, "length").to_value(u.m) == pytest.approx(3000.0)
    assert parse_quantity(0.5, "dimensionless").value == 0.5


@pytest.mark.parametrize("value, physical_type", [
    (1.0, "mass"),
    ("not a number", "mass"),
    ("5", "mass"),
    ("1 kg", "time"),
    ("1 m", "dimensionless"),
    ("1 C", "charge"),
])
def test_parse_rejects_bad_input(value, physical_type):
    with pytest.raises(ConfigError):
        parse_quantity(value, physical_type)


def test_to_geometric():
    assert to_geometric("1 s", "time") == pytest.approx(const.c.value)
    assert to_geometric("2 km", "length") == pytest.approx(2000.0)
    assert to_geometric(0.1 * const.c, "speed") == pytest.approx(0.1)
    assert to_geometric(0.25, "dimensionless") == 0.25


def test_from_geometric_inverts():
    metres = to_geometric("2.5 solMass", "mass")
    assert from_geometric(metres, "solMass", "mass").value == pytest.approx(2.5, rel=1e-12)
    assert from_geometric(const.c.value, u.s, "time").value == pytest.approx(1.0)
    with pytest.raises(ConfigError):
        from_geometric(1.0, u.m, "charge")

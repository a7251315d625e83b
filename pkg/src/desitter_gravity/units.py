"""
Units - Conversion between SI quantities and geometric units (G = c = 1)

Every physical input passes through here exactly once. Geometric values
are plain floats in metres (lengths, masses via GM/c^2, times via ct) or
dimensionless (speeds as fractions of c).
"""

from typing import Union

import numpy as np
from astropy import constants as const
from astropy import units as u

from .exceptions import ConfigError

QuantityLike = Union[str, u.Quantity]

_GEOMETRIC_FACTORS = {
    "mass": const.G / const.c**2,
    "time": const.c,
    "length": 1.0,
    "speed": 1.0 / const.c,
}


def parse_quantity(value: QuantityLike, physical_type: str) -> u.Quantity:
    """
    Parse a unit-carrying value such as "1.4 solMass" or "27906.98 s"

    Args:
        value: string with number and unit, or an astropy Quantity
        physical_type: one of mass, time, length, speed, dimensionless

    Returns:
        astropy Quantity of the requested physical type
    """
    if isinstance(value, (int, float, np.floating)) and not isinstance(value, bool):
        if physical_type == "dimensionless":
            return u.Quantity(float(value), u.dimensionless_unscaled)
        raise ConfigError(f"{value!r} has no unit; expected a {physical_type}")
    try:
        quantity = u.Quantity(value)
    except (TypeError, ValueError) as e:
        raise ConfigError(f"cannot parse {value!r} as a quantity: {e}")

    if physical_type == "dimensionless":
        if not quantity.unit.is_equivalent(u.dimensionless_unscaled):
            raise ConfigError(f"{value!r} should be dimensionless")
        return quantity
    if physical_type not in _GEOMETRIC_FACTORS:
        raise ConfigError(f"unknown physical type {physical_type!r}")
    if quantity.unit == u.dimensionless_unscaled:
        raise ConfigError(f"{value!r} has no unit; expected a {physical_type}")
    target = {"mass": u.kg, "time": u.s, "length": u.m, "speed": u.m / u.s}[physical_type]
    if not quantity.unit.is_equivalent(target):
        raise ConfigError(f"{value!r} is not a {physical_type} (unit {quantity.unit})")
    return quantity


def to_geometric(quantity: QuantityLike, physical_type: str) -> float:
    """Convert a quantity to its geometric-unit float"""
    q = parse_quantity(quantity, physical_type)
    if physical_type == "dimensionless":
        value = float(q.to_value(u.dimensionless_unscaled))
    else:
        factor = _GEOMETRIC_FACTORS[physical_type]
        geometric = (q * factor).decompose()
        unit = u.dimensionless_unscaled if physical_type == "speed" else u.m
        value = float(geometric.to_value(unit))
    if not np.isfinite(value):
        raise ConfigError(f"{quantity!r} overflows in geometric units")
    return value


def from_geometric(value: float, unit: Union[str, u.UnitBase], physical_type: str) -> u.Quantity:
    """Convert a geometric-unit float back to an SI-style quantity in `unit`"""
    if physical_type == "dimensionless":
        return u.Quantity(value, u.dimensionless_unscaled).to(unit)
    if physical_type not in _GEOMETRIC_FACTORS:
        raise ConfigError(f"unknown physical type {physical_type!r}")
    base = u.dimensionless_unscaled if physical_type == "speed" else u.m
    return (u.Quantity(value, base) / _GEOMETRIC_FACTORS[physical_type]).to(unit)


def solar_mass_geometric() -> float:
    """GM_sun/c^2 in metres"""
    return to_geometric(1.0 * u.solMass, "mass")

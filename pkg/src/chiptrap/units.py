"""Unit handling for scenario files.

Internally everything is SI (m, s, T, V, J, K, A).  Config files may give
quantities either as bare SI numbers or as strings "<number> <unit>" with
one of the accepted units below.
"""

from .constants import GAUSS, k_B


class UnitError(ValueError):
    """A quantity string uses an unknown or dimensionally wrong unit."""


# unit -> (dimension, factor to SI)
_UNITS = {
    "A": ("current", 1.0),
    "G": ("field", GAUSS),
    "T": ("field", 1.0),
    "V": ("voltage", 1.0),
    "um": ("length", 1e-6),
    "mm": ("length", 1e-3),
    "m": ("length", 1.0),
    "uK": ("temperature", 1e-6),
    "K": ("temperature", 1.0),
    "ms": ("time", 1e-3),
    "us": ("time", 1e-6),
    "s": ("time", 1.0),
}

# SI unit name per dimension, for error messages
_SI_NAME = {
    "current": "A",
    "field": "T",
    "voltage": "V",
    "length": "m",
    "temperature": "K",
    "time": "s",
}


def to_si(value, dimension, field=""):
    """Convert a config quantity to SI.

    `value` is a bare number (already SI) or a string "<number> <unit>".
    `dimension` names the expected physical dimension; `field` is the config
    path used in error messages.
    """
    if isinstance(value, bool):
        raise UnitError(f"{field}: expected a quantity, got a boolean")
    if isinstance(value, (int, float)):
        return float(value)
    if not isinstance(value, str):
        raise UnitError(f"{field}: expected a number or '<number> <unit>' string, "
                        f"got {type(value).__name__}")
    parts = value.split()
    if len(parts) == 1:
        try:
            return float(parts[0])
        except ValueError:
            raise UnitError(f"{field}: cannot parse quantity {value!r}") from None
    if len(parts) != 2:
        raise UnitError(f"{field}: cannot parse quantity {value!r}")
    try:
        number = float(parts[0])
    except ValueError:
        raise UnitError(f"{field}: cannot parse number in {value!r}") from None
    unit = parts[1]
    if unit not in _UNITS:
        raise UnitError(f"{field}: unknown unit {unit!r} in {value!r}")
    dim, factor = _UNITS[unit]
    if dim != dimension:
        raise UnitError(f"{field}: unit {unit!r} is a {dim}, expected {dimension} "
                        f"({_SI_NAME[dimension]})")
    return number * factor


def from_si(value, unit):
    """Convert an SI value into the given display unit."""
    if unit not in _UNITS:
        raise UnitError(f"unknown unit {unit!r}")
    return value / _UNITS[unit][1]


def thermal_energy(temperature_si):
    """k_B * T, joule."""
    return k_B * temperature_si


def energy_to_uK(energy_si):
    """Energy expressed as a temperature in microkelvin (E / k_B)."""
    return energy_si / k_B * 1e6

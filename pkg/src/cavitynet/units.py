"""Physical constants and frequency-unit conversion.

All rates and Rabi frequencies are stored internally as angular frequencies
(rad/s). Times are in seconds and lengths in meters.
"""

import math

from scipy import constants as _c

TWO_PI = 2.0 * math.pi

SPEED_OF_LIGHT = _c.c
BOLTZMANN = _c.k
ELEMENTARY_CHARGE = _c.e
VACUUM_PERMITTIVITY = _c.epsilon_0
AMU = _c.atomic_mass

FREQUENCY_UNITS = ("rad_per_s", "Hz", "MHz_times_2pi")


def to_angular(value, unit="rad_per_s"):
    """Convert a frequency given in ``unit`` to rad/s."""
    if unit == "rad_per_s":
        return float(value)
    if unit == "Hz":
        return TWO_PI * float(value)
    if unit == "MHz_times_2pi":
        return TWO_PI * 1e6 * float(value)
    raise ValueError(f"unknown frequency unit {unit!r}; expected one of {FREQUENCY_UNITS}")


def mhz2pi(value):
    """Shorthand: ``2*pi*value*1e6`` rad/s."""
    return TWO_PI * 1e6 * value


def khz2pi(value):
    return TWO_PI * 1e3 * value

"""Angle normalization helpers.

Every angle that leaves this package lies in the half-open interval
(-pi, pi]; +pi is representable, -pi is not.
"""

import numpy as np

TWO_PI = 2.0 * np.pi


def wrap_angle(theta):
    """Wrap an angle (scalar or array) into (-pi, pi].

    Implemented as ``pi - mod(pi - theta, 2*pi)`` so that exact +pi is kept
    and -pi maps to +pi.
    """
    return np.pi - np.mod(np.pi - np.asarray(theta, dtype=float), TWO_PI)


def angle_diff(a, b):
    """Shortest signed difference a - b, wrapped into (-pi, pi]."""
    return wrap_angle(np.asarray(a, dtype=float) - np.asarray(b, dtype=float))

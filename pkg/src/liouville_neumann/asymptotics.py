"""Regression fits of a log-density along a ray into the origin.

Each helper takes a callable ``logdens(z)`` returning v(z) (vectorized)
and samples it on ``z = r e^{i angle}`` for log-spaced radii.
"""

from __future__ import annotations

import numpy as np

DEFAULT_ANGLE = np.pi / 4


def _ray(r_min, r_max, n, angle):
    r = np.logspace(np.log10(r_min), np.log10(r_max), n)
    return r, r * np.exp(1j * angle)


def conical_slope(logdens, r_min=1e-8, r_max=1e-3, n=41, angle=DEFAULT_ANGLE) -> float:
    """Slope of log e^v against log r; equals 2*alpha for a cone of order alpha."""
    r, z = _ray(r_min, r_max, n, angle)
    v = np.asarray(logdens(z), dtype=float)
    return float(np.polyfit(np.log(r), v, 1)[0])


def log_profile(logdens, power, r_min=1e-8, r_max=1e-4, n=41, angle=DEFAULT_ANGLE):
    """Samples of |z|^2 |ln|z||^power e^v along the ray."""
    r, z = _ray(r_min, r_max, n, angle)
    v = np.asarray(logdens(z), dtype=float)
    return r, np.exp(v + 2.0 * np.log(r) + power * np.log(np.abs(np.log(r))))


def relative_spread(values) -> float:
    """(max - min)/max of a positive sample."""
    values = np.asarray(values, dtype=float)
    return float((values.max() - values.min()) / values.max())


def log_exponent(logdens, r_min=1e-8, r_max=1e-4, n=41, angle=DEFAULT_ANGLE) -> float:
    """Exponent p in |z|^2 e^v ~ |ln|z||^p (-4 for LogFour, -2 for LogTwo)."""
    r, z = _ray(r_min, r_max, n, angle)
    v = np.asarray(logdens(z), dtype=float)
    y = v + 2.0 * np.log(r)
    return float(np.polyfit(np.log(np.abs(np.log(r))), y, 1)[0])

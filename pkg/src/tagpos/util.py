"""Small circular-arithmetic helpers shared across modules."""

from __future__ import annotations

import numpy as np

TWO_PI = 2.0 * np.pi


def wrap_pi(x):
    """Wrap an angle (scalar or array) into (-pi, pi]."""
    y = np.asarray(x) % TWO_PI
    y = np.where(y > np.pi, y - TWO_PI, y)
    if np.ndim(x) == 0:
        return float(y)
    return y


def circ_dist(a, b):
    """Shortest angular distance |a - b| on the circle."""
    return np.abs(wrap_pi(np.asarray(a) - np.asarray(b)))


def circ_mean(angles):
    """Circular mean of a sequence of angles (radians)."""
    a = np.asarray(angles, dtype=float)
    if a.size == 0:
        raise ValueError("circ_mean of empty sequence")
    return float(np.arctan2(np.mean(np.sin(a)), np.mean(np.cos(a))))

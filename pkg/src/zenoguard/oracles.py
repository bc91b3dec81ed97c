"""Closed-form populations of |0> used as references for the integrators."""

from __future__ import annotations

import numpy as np


def p0_two_level(xi, t):
    """Unprotected Rabi law ``cos^2(xi t)``."""
    return np.cos(np.multiply(xi, t)) ** 2


def p0_three_level_exact(xi, omega, t):
    """Exact coherent three-level chain, with ``mu^2 = omega^2 + xi^2``."""
    mu2 = omega**2 + xi**2
    if mu2 == 0:
        raise ValueError("xi and omega cannot both vanish")
    mu = np.sqrt(mu2)
    mu4 = mu2**2
    t = np.asarray(t, dtype=float)
    return (
        (2 * omega**4 + xi**4) / (2 * mu4)
        + (2 * omega**2 * xi**2 / mu4) * np.cos(mu * t)
        + (xi**4 / (2 * mu4)) * np.cos(2 * mu * t)
    )


def p0_three_level_first_order(xi, omega, t):
    """Leading order in ``(xi/omega)^2`` of :func:`p0_three_level_exact`."""
    if omega <= 0:
        raise ValueError("omega must be positive")
    return 1.0 - (2 * xi**2 / omega**2) * (1.0 - np.cos(omega * np.asarray(t, dtype=float)))


def p0_three_level_min(xi, omega):
    """Minimum over time of the exact law, reached at ``mu t = pi`` when omega >= xi."""
    return ((omega**2 - xi**2) / (omega**2 + xi**2)) ** 2


def steady_state_two_level(xi, gamma):
    """Fixed point of the damped two-level rate equations.

    Solving ``-(g/2) s2 - 2 xi s3 = 0`` and ``2 xi s2 - g s3 + g = 0`` gives
    ``<s3> = g^2 / (g^2 + 8 xi^2)`` and ``P0 = (1 + <s3>) / 2``.
    """
    if gamma <= 0:
        raise ValueError("gamma must be positive: no steady state without decay")
    return (gamma**2 + 4 * xi**2) / (gamma**2 + 8 * xi**2)


def dark_period_mean(xi, omega, gamma):
    """Mean emission-free time out of |0> for the damped three-level chain."""
    return omega**2 / (gamma * xi**2)

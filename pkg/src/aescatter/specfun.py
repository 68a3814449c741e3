"""Bessel and Hankel functions of orders 0 and 1.

Thin, validated wrappers around scipy.special. The Wronskian identity
J1(x) Y0(x) - J0(x) Y1(x) = 2/(pi x) is enforced by the test suite as the
accuracy gate for the whole Nystrom pipeline. Accuracy is guaranteed on
(0, 100], which covers kappa * diameter for all configurations used here.
"""

from __future__ import annotations

import numpy as np
from scipy import special

__all__ = [
    "EULER_GAMMA",
    "bessel_j0",
    "bessel_j1",
    "bessel_y0",
    "bessel_y1",
    "hankel1_0",
    "hankel1_1",
]

EULER_GAMMA = 0.5772156649015329


def _check_real(x, name):
    x = np.asarray(x, dtype=float)
    if np.any(np.isnan(x)):
        raise ValueError(f"{name} expects finite input, got NaN")
    return x


def bessel_j0(x):
    """J0(x) for x >= 0."""
    x = _check_real(x, "bessel_j0")
    if np.any(x < 0.0):
        raise ValueError("bessel_j0 expects x >= 0")
    return special.j0(x)


def bessel_j1(x):
    """J1(x) for x >= 0."""
    x = _check_real(x, "bessel_j1")
    if np.any(x < 0.0):
        raise ValueError("bessel_j1 expects x >= 0")
    return special.j1(x)


def bessel_y0(x):
    x = _check_real(x, "bessel_y0")
    if np.any(x <= 0.0):
        raise ValueError("bessel_y0 expects x > 0 (logarithmic singularity)")
    return special.y0(x)


def bessel_y1(x):
    x = _check_real(x, "bessel_y1")
    if np.any(x <= 0.0):
        raise ValueError("bessel_y1 expects x > 0")
    return special.y1(x)


def hankel1_0(x):
    """H0^(1)(x) = J0(x) + i Y0(x) for x > 0."""
    x = _check_real(x, "hankel1_0")
    if np.any(x <= 0.0):
        raise ValueError("hankel1_0 expects x > 0 (logarithmic singularity)")
    return special.j0(x) + 1j * special.y0(x)


def hankel1_1(x):
    """H1^(1)(x) = J1(x) + i Y1(x) for x > 0."""
    x = _check_real(x, "hankel1_1")
    if np.any(x <= 0.0):
        raise ValueError("hankel1_1 expects x > 0")
    return special.j1(x) + 1j * special.y1(x)

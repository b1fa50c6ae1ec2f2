"""
Closed-form reference values for y'' = phi y with phi = z, z^2 and (z^2 - 1) / hbar^2.

y = D_{-1/2}(sqrt(2) z) is the solution of y'' = z^2 y decaying along the
positive real axis; Ai(z) plays the same part for y'' = z y.
"""

import cmath
import math
from typing import Tuple

import numpy as np
from scipy import special
from scipy.integrate import quad

WEBER_ORDER = -0.5


def weber_log_derivative() -> float:
    """y'(0) / y(0) = -2 Gamma(3/4) / Gamma(1/4)."""
    return -2.0 * special.gamma(0.75) / special.gamma(0.25)


def weber_recessive(x: float) -> Tuple[float, float]:
    """(y, y') at real x from scipy's parabolic cylinder function."""
    d, dp = special.pbdv(WEBER_ORDER, math.sqrt(2.0) * x)
    return float(d), float(math.sqrt(2.0) * dp)


def weber_recessive_quadrature(x: float) -> Tuple[float, float]:
    """Same values from the integral representation of D_nu with nu = -1/2.

    D_nu(s) = exp(-s^2/4) / Gamma(-nu) * int_0^inf t^(-nu-1) exp(-s t - t^2/2) dt,
    written with t = u^2 to remove the endpoint singularity.
    """
    s = math.sqrt(2.0) * x
    norm = math.exp(-s * s / 4) / special.gamma(-WEBER_ORDER)
    base = quad(lambda u: 2.0 * math.exp(-s * u * u - u ** 4 / 2), 0.0, np.inf)[0]
    moment = quad(lambda u: 2.0 * u * u * math.exp(-s * u * u - u ** 4 / 2), 0.0, np.inf)[0]
    d = norm * base
    dp = -s / 2 * d - norm * moment
    return d, math.sqrt(2.0) * dp


def airy_log_derivative() -> float:
    """Ai'(0) / Ai(0) = -3^(1/3) Gamma(2/3) / Gamma(1/3)."""
    return -(3.0 ** (1.0 / 3.0)) * special.gamma(2.0 / 3.0) / special.gamma(1.0 / 3.0)


def airy_recessive(z: complex) -> Tuple[complex, complex]:
    ai, aip, _, _ = special.airy(z)
    return complex(ai), complex(aip)


def weber_cross_ratio() -> complex:
    """The single coordinate of z^2 dz^2: the four subdominant lines form a square."""
    return 1.0 + 0j


def harmonic_cross_ratio(hbar: float) -> complex:
    """The single coordinate of (z^2 - 1) / hbar^2 dz^2; hbar log X is the period i pi."""
    return cmath.exp(1j * math.pi / hbar)


def harmonic_period() -> complex:
    """2 * int_{-1}^{1} sqrt(z^2 - 1) dz on the branch i sqrt(1 - z^2)."""
    half = quad(lambda x: math.sqrt(1.0 - x * x), -1.0, 1.0)[0]
    return 2j * half


def eigenvalue_pair(a: complex) -> Tuple[complex, complex]:
    """-exp(+-r/2) with r = 2 pi i sqrt(1 + 4a): monodromy eigenvalues at a regular pole."""
    r = 2j * math.pi * cmath.sqrt(1 + 4 * a)
    return -cmath.exp(r / 2), -cmath.exp(-r / 2)

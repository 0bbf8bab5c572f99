"""Ratio-oriented modified Bessel function helpers for complex arguments.

Skin-effect problems push ``|gamma*a|`` into the hundreds, where ``I_n``
overflows long before the quantities we need (logarithmic derivatives and
ratios between two radii) stop being well defined.  Nothing here ever forms
a raw ``I_n`` or ``K_n`` at large argument.
"""

from __future__ import annotations

import math

import numpy as np
from scipy import special

from .errors import EvalError

_CF_TOL = 1e-16
_CF_MAXITER = 20000
_TINY = 1e-300
SMALL_ARG = 1e-3


def _cf_ratio(nu: int, z: complex) -> complex:
    """I_{nu+1}(z)/I_nu(z) by modified Lentz evaluation of the continued fraction."""
    if z == 0:
        return 0j
    # I_{nu+1}/I_nu = 1/(2(nu+1)/z + 1/(2(nu+2)/z + ...))
    b = 2.0 * (nu + 1) / z
    f = b if b != 0 else _TINY
    c = f
    d = 0j
    for i in range(1, _CF_MAXITER):
        b = 2.0 * (nu + 1 + i) / z
        d = b + d
        d = _TINY if d == 0 else d
        c = b + 1.0 / c
        c = _TINY if c == 0 else c
        d = 1.0 / d
        delta = c * d
        f *= delta
        if abs(delta - 1.0) < _CF_TOL:
            return 1.0 / f
    raise EvalError(f"continued fraction for I_{nu + 1}/I_{nu} did not converge at z={z!r}")


def i_ratios(nmax: int, z: complex) -> np.ndarray:
    """r[n] = I_{n+1}(z)/I_n(z) for n = 0..nmax.

    One continued fraction at the top order, then the (stable) downward
    recurrence ``r[n-1] = 1/(2n/z + r[n])``.
    """
    z = complex(z)
    r = np.zeros(nmax + 1, dtype=complex)
    if z == 0:
        return r
    if abs(z) < SMALL_ARG:
        n = np.arange(nmax + 1)
        return z / (2 * (n + 1)) - z**3 / (8 * (n + 1) ** 2 * (n + 2))
    r[nmax] = _cf_ratio(nmax, z)
    for n in range(nmax, 0, -1):
        r[n - 1] = 1.0 / (2.0 * n / z + r[n])
    if not np.all(np.isfinite(r)):
        raise EvalError(f"non-finite Bessel ratio at z={z!r}")
    return r


def log_derivative_excess(nmax: int, z: complex) -> np.ndarray:
    """``z I_n'(z)/I_n(z) - n`` for n = 0..nmax.

    The leading ``n`` is removed analytically: at low frequency it cancels
    between conductor and hole media and would otherwise swamp the result.
    """
    z = complex(z)
    return z * i_ratios(nmax, z)


def i_radius_ratio(n: np.ndarray, g: complex, r1: float, r2: float) -> np.ndarray:
    """I_n(g r1)/I_n(g r2) without overflow (Re g >= 0)."""
    z1, z2 = g * r1, g * r2
    num = special.ive(n, z1)
    den = special.ive(n, z2)
    out = num / den * np.exp(abs(z1.real) - abs(z2.real))
    return _checked(out, "I", n, z1)


def k_radius_ratio(n: np.ndarray, g: complex, r1: float, r2: float) -> np.ndarray:
    """K_n(g r1)/K_n(g r2) without overflow (Re g >= 0)."""
    z1, z2 = g * r1, g * r2
    out = special.kve(n, z1) / special.kve(n, z2) * np.exp(z2 - z1)
    return _checked(out, "K", n, z1)


def k_log_derivative(n: np.ndarray, z: complex) -> np.ndarray:
    """z K_n'(z)/K_n(z)."""
    n = np.asarray(n)
    out = n - z * special.kve(n + 1, z) / special.kve(n, z)
    return _checked(out, "K'", n, z)


def i_log_derivative(n: np.ndarray, z: complex) -> np.ndarray:
    """z I_n'(z)/I_n(z) for non-negative integer orders."""
    n = np.asarray(n)
    ex = log_derivative_excess(int(n.max()), z)
    return n + ex[n]


def _checked(values, name, n, z):
    if not np.all(np.isfinite(values)):
        raise EvalError(f"{name}_n evaluation failed for n={np.asarray(n).tolist()} at z={z!r}")
    return values


def i_over_power_series(n: int, w: np.ndarray, terms: int = 0) -> np.ndarray:
    """sum_k w**k / (k! (n+k)!) evaluated elementwise.

    This is ``I_n(2 sqrt(w)) / w**(n/2)``, an entire function of ``w`` with no
    branch ambiguity.
    """
    w = np.asarray(w, dtype=complex)
    term = np.full(w.shape, 1.0 / math.factorial(n), dtype=complex)
    total = term.copy()
    limit = terms or 200
    for k in range(1, limit):
        term = term * w / (k * (n + k))
        total += term
        if terms == 0 and np.all(np.abs(term) <= 1e-17 * np.abs(total)):
            break
    return total

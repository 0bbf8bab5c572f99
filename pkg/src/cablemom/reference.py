"""Classical closed-form cable constants used as an independent baseline.

Nothing here touches the MoM-SO machinery; only scipy Bessel functions are
shared, so these formulas remain useful as test oracles.
"""

from __future__ import annotations

import math
import warnings

import numpy as np
from scipy import integrate, special

from .errors import EvalError, RangeWarning, UnsupportedGeometryError
from .model import MU0, CableSystem

SAAD_RANGE = 0.25


def _finite(value, what):
    if not np.all(np.isfinite(value)):
        raise EvalError(f"{what} evaluation failed")
    return value


def _m(sigma, mu, omega):
    return np.sqrt(1j * omega * mu * sigma)


def schelkunoff_solid(a: float, sigma: float, mu: float, omega: float) -> complex:
    """Internal impedance of a round wire (Ohm/m); ``mu`` is absolute."""
    if a <= 0 or sigma <= 0:
        raise ValueError("radius and conductivity must be positive")
    m = _m(sigma, mu, omega)
    z = m * a
    # I0/I1 via exponentially scaled functions (the scale factors cancel)
    ratio = special.ive(0, z) / special.ive(1, z)
    return complex(_finite(m / (2 * math.pi * a * sigma) * ratio, "solid wire impedance"))


def schelkunoff_tube(a: float, b: float, sigma: float, mu: float, omega: float):
    """(inner, outer, transfer) surface impedances of a tube, outer radius a, inner b."""
    if not 0 < b < a:
        raise ValueError("tube needs 0 < b < a")
    m = _m(sigma, mu, omega)
    rho = 1.0 / sigma
    za, zb = m * a, m * b
    # scaled products: I(x) K(y) = ive(x) kve(y) exp(Re x - y)
    def ik(n1, x, n2, y):
        return special.ive(n1, x) * special.kve(n2, y) * np.exp(x.real - y)

    D = ik(1, za, 1, zb) - ik(1, zb, 1, za)
    z_in = rho * m / (2 * math.pi * b * D) * (ik(0, zb, 1, za) + ik(1, za, 0, zb))
    z_out = rho * m / (2 * math.pi * a * D) * (ik(0, za, 1, zb) + ik(1, zb, 0, za))
    z_m = rho / (2 * math.pi * a * b * D)
    return tuple(complex(_finite(v, "tube impedance")) for v in (z_in, z_out, z_m))


def coaxial_gap(r_out: float, r_in: float, mu: float, omega: float) -> complex:
    return 1j * omega * mu / (2 * math.pi) * math.log(r_out / r_in)


def pollaczek(h_i, h_j, x_ij, sigma, mu, omega, rtol=1e-10) -> complex:
    """Earth-return impedance of buried conductors by direct quadrature.

    ``x_ij`` is the horizontal spacing (the conductor radius for a self term).
    """
    m = _m(sigma, mu, omega)
    d = math.hypot(x_ij, h_i - h_j)
    Dp = math.hypot(x_ij, h_i + h_j)
    ell = h_i + h_j

    def f(beta, part):
        s = np.sqrt(beta * beta + m * m)
        v = np.exp(-ell * s) / (beta + s) * math.cos(beta * x_ij)
        return v.real if part == 0 else v.imag

    upper = 60.0 / ell + 10 * abs(m)
    pts = sorted({abs(m), 1.0 / ell, min(upper / 2, 20.0 / ell)})
    tail = []
    for part in (0, 1):
        val, _ = integrate.quad(f, 0.0, upper, args=(part,), epsabs=0.0, epsrel=rtol, limit=500, points=pts)
        tail.append(val)
    integral = complex(tail[0], tail[1])
    return complex(1j * omega * mu / (2 * math.pi) * (special.kv(0, m * d) - special.kv(0, m * Dp) + 2 * integral))


def saad(h_i, h_j, x_ij, sigma, mu, omega) -> complex:
    m = _m(sigma, mu, omega)
    d = math.hypot(x_ij, h_i - h_j)
    if abs(m * d) >= SAAD_RANGE:
        warnings.warn(f"|m d| = {abs(m * d):.3g} outside the closed-form accuracy range", RangeWarning, stacklevel=3)
    ell = h_i + h_j
    return complex(
        1j * omega * mu / (2 * math.pi) * (special.kv(0, m * d) + 2.0 / (4.0 + (m * x_ij) ** 2) * np.exp(-ell * m))
    )


def ground_return_uniform(h_i, h_j, x_ij, sigma, mu, omega, method: str = "saad") -> complex:
    """Earth-return impedance for conductors buried in a half-space under air.

    ``method`` selects the closed-form approximation ("saad") or direct
    quadrature of the underlying integral ("pollaczek").
    """
    if h_i <= 0 or h_j <= 0:
        raise ValueError("burial depths must be positive")
    if math.isinf(sigma):
        return 0j
    if sigma <= 0:
        raise ValueError("ground conductivity must be positive")
    if method == "saad":
        return saad(h_i, h_j, x_ij, sigma, mu, omega)
    if method == "pollaczek":
        return pollaczek(h_i, h_j, x_ij, sigma, mu, omega)
    raise ValueError(f"unknown method {method!r}")


def _cables(sys: CableSystem):
    """Group conductors into (core, sheath-or-None) per hole, checking coaxiality."""
    groups = {}
    for p, c in enumerate(sys.conductors):
        groups.setdefault(c.hole, []).append(p)
    cables = []
    for h, members in sorted(groups.items()):
        hole = sys.holes[h]
        conds = [sys.conductors[p] for p in members]
        if any(abs(c.center - hole.center) > 1e-9 for c in conds):
            raise UnsupportedGeometryError(f"hole {h}: conductors are not concentric with the hole")
        solids = [p for p in members if not sys.conductors[p].is_tubular]
        tubes = [p for p in members if sys.conductors[p].is_tubular]
        if len(solids) != 1 or len(tubes) > 1:
            raise UnsupportedGeometryError(f"hole {h}: expected one core and at most one sheath")
        if tubes and sys.conductors[tubes[0]].inner_radius < sys.conductors[solids[0]].outer_radius:
            raise UnsupportedGeometryError(f"hole {h}: sheath does not enclose the core")
        cables.append((h, solids[0], tubes[0] if tubes else None))
    return cables


def analytic_cable_Z(sys: CableSystem, frequency: float, method: str = "saad") -> np.ndarray:
    """Cable-constants impedance matrix in conductor order (no proximity effect).

    The ground is the host layer of the holes taken as a half-space below a
    lossless upper region; burial depth is measured to its upper interface.
    """
    omega = 2 * math.pi * frequency
    hosts = {h.layer for h in sys.holes}
    if len(hosts) != 1:
        raise UnsupportedGeometryError("all cables must share one host layer")
    host = hosts.pop()
    layer = sys.layers[host]
    if host == 0:
        raise UnsupportedGeometryError("cables must lie below an interface")
    surface = sys.layers[host - 1].bottom
    mu_g = layer.mu_r * MU0
    cables = _cables(sys)

    P = len(sys.conductors)
    Z = np.zeros((P, P), dtype=complex)
    for h, core, sheath in cables:
        hole = sys.holes[h]
        c = sys.conductors[core]
        depth = surface - hole.y
        zg = ground_return_uniform(depth, depth, hole.radius, layer.conductivity, mu_g, omega, method)
        zc = schelkunoff_solid(c.outer_radius, c.conductivity, c.mu_r * MU0, omega)
        mu_h = hole.mu_r * MU0
        if sheath is None:
            Z[core, core] = zc + coaxial_gap(hole.radius, c.outer_radius, mu_h, omega) + zg
            continue
        s = sys.conductors[sheath]
        z_in, z_out, z_m = schelkunoff_tube(s.outer_radius, s.inner_radius, s.conductivity, s.mu_r * MU0, omega)
        outer = z_out + coaxial_gap(hole.radius, s.outer_radius, mu_h, omega) + zg
        Z[sheath, sheath] = outer
        Z[core, sheath] = Z[sheath, core] = outer - z_m
        Z[core, core] = zc + coaxial_gap(s.inner_radius, c.outer_radius, mu_h, omega) + z_in - 2 * z_m + outer
    for i, (hi, ci, si) in enumerate(cables):
        for j, (hj, cj, sj) in enumerate(cables):
            if i == j:
                continue
            a, b = sys.holes[hi], sys.holes[hj]
            zm = ground_return_uniform(surface - a.y, surface - b.y, abs(a.x - b.x), layer.conductivity, mu_g, omega, method)
            for p in (ci, si):
                for q in (cj, sj):
                    if p is not None and q is not None:
                        Z[p, q] = zm
    return Z

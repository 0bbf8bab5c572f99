"""Surface admittance operators for round conductors and empty holes.

A surface admittance maps the harmonics of a boundary field onto the
harmonics ``J_n`` of the equivalent current that lets the interior be
replaced by the surrounding medium.  Current harmonics are normalised so
that ``J_0`` is the total current through the boundary.
"""

from __future__ import annotations

import math
import warnings

import numpy as np
import scipy.linalg

from .bessel import SMALL_ARG, i_radius_ratio, k_log_derivative, k_radius_ratio, log_derivative_excess
from .errors import ThinWallWarning
from .model import MU0, BoundaryIndex, CableSystem, Medium, propagation_constant

THIN_WALL = 1e-4


def _excess(order: int, medium, radius: float, omega: float) -> np.ndarray:
    g = propagation_constant(medium, omega)
    z = g * radius
    if abs(z) < SMALL_ARG:
        n = np.arange(order + 1)
        return z * z / (2 * (n + 1)) - z**4 / (8 * (n + 1) ** 2 * (n + 2))
    return log_derivative_excess(order, z)


def _mirror(half: np.ndarray) -> np.ndarray:
    """Values for n = 0..N -> values for n = -N..N (even in n)."""
    return np.concatenate([half[:0:-1], half])


def solid_admittance(radius: float, conductor, hole, order: int, omega: float) -> np.ndarray:
    """Diagonal admittance of a solid round conductor, n = -order..order.

    y_n = 2*pi/(j*omega) * [z I_n'(z)/(mu I_n(z)) - z^ I_n'(z^)/(mu^ I_n(z^))]
    with z = gamma*a inside the conductor and z^ in the hole medium.
    """
    mu, mu_h = conductor.mu_r * MU0, hole.mu_r * MU0
    n = np.arange(order + 1)
    inner = _excess(order, conductor, radius, omega)
    outer = _excess(order, hole, radius, omega)
    half = 2 * math.pi / (1j * omega) * (inner / mu - outer / mu_h + n * (1 / mu - 1 / mu_h))
    return _mirror(half)


def hole_admittance(radius: float, hole, layer, order: int, omega: float) -> np.ndarray:
    """Diagonal operator of an empty hole acting on vector-potential harmonics.

    Returns ``Y_n`` with ``J^_n = Y_n A^_n``: the equivalent hole current that
    replaces the lossless hole interior by the host-layer medium.
    """
    mu_s, mu_h = layer.mu_r * MU0, hole.mu_r * MU0
    n = np.arange(order + 1)
    host = _excess(order, layer, radius, omega)
    inner = _excess(order, hole, radius, omega)
    half = 2 * math.pi * (host / mu_s - inner / mu_h + n * (1 / mu_s - 1 / mu_h))
    return _mirror(half)


def tubular_admittance(outer: float, inner: float, conductor, hole, order: int, omega: float) -> np.ndarray:
    """Admittance of a tubular conductor.

    Slot order is (outer n=-N..N, inner n=-N..N); each harmonic couples only
    the outer and inner slots of the same n.
    """
    if (outer - inner) / outer < THIN_WALL:
        warnings.warn(f"tube wall ratio {(outer - inner) / outer:.2e} below {THIN_WALL}", ThinWallWarning, stacklevel=2)
    mu, mu_h = conductor.mu_r * MU0, hole.mu_r * MU0
    g = propagation_constant(conductor, omega)
    a, b = outer, inner
    n = np.arange(order + 1)

    # wall: basis I_n(g r)/I_n(g a) and K_n(g r)/K_n(g b)
    r_i = i_radius_ratio(n, g, b, a)
    r_k = k_radius_ratio(n, g, a, b)
    di_a = n + log_derivative_excess(order, g * a)
    di_b = n + log_derivative_excess(order, g * b)
    dk_a = k_log_derivative(n, g * a)
    dk_b = k_log_derivative(n, g * b)
    wall = _annulus_dtn(r_i, r_k, di_a, di_b * r_i, dk_a * r_k, dk_b)

    # hole medium filling the wall region (quasi-static)
    ln_ab = math.log(a / b)
    nz = np.where(n == 0, 1, n)
    s = (b / a) ** nz
    hole_map = _annulus_dtn(s, s, nz, nz * s, -nz * s, -nz)
    hole_map[0] = np.array([[1.0, -1.0], [1.0, -1.0]]) / ln_ab

    # rows: (rho dE/drho at a, at b); columns: (E at a, E at b)
    coef = 2 * math.pi / (1j * omega)
    blocks = np.empty((order + 1, 2, 2), dtype=complex)
    blocks[:, 0, :] = coef * (wall[:, 0, :] / mu - hole_map[:, 0, :] / mu_h)
    blocks[:, 1, :] = coef * (hole_map[:, 1, :] / mu_h - wall[:, 1, :] / mu)

    size = 2 * order + 1
    out = np.zeros((2 * size, 2 * size), dtype=complex)
    for k in range(-order, order + 1):
        blk = blocks[abs(k)]
        io, ii = k + order, size + k + order
        out[io, io], out[io, ii] = blk[0, 0], blk[0, 1]
        out[ii, io], out[ii, ii] = blk[1, 0], blk[1, 1]
    return out


def _annulus_dtn(f1_b, f2_a, f1d_a, f1d_b, f2d_a, f2d_b):
    """Dirichlet-to-Neumann map of an annulus from a two-function basis.

    f1 equals 1 at the outer radius a and f1_b at b; f2 equals 1 at b and
    f2_a at a.  ``f*d_*`` are the rho-scaled radial derivatives.  Returns
    per-harmonic 2x2 matrices mapping (E(a), E(b)) to rho*dE/drho at (a, b).
    """
    det = 1.0 - f1_b * f2_a
    # alpha = (Ea - f2_a Eb)/det, beta = (Eb - f1_b Ea)/det
    out = np.empty((len(det), 2, 2), dtype=complex)
    out[:, 0, 0] = (f1d_a - f2d_a * f1_b) / det
    out[:, 0, 1] = (-f1d_a * f2_a + f2d_a) / det
    out[:, 1, 0] = (f1d_b - f2d_b * f1_b) / det
    out[:, 1, 1] = (-f1d_b * f2_a + f2d_b) / det
    return out


def conductor_admittance(sys: CableSystem, index: BoundaryIndex, omega: float) -> np.ndarray:
    """Block-diagonal Y_s over all conductor boundary slots."""
    blocks = []
    for c in sys.conductors:
        hole = sys.holes[c.hole].medium
        if c.is_tubular:
            blocks.append(tubular_admittance(c.outer_radius, c.inner_radius, c.medium, hole, c.harmonics, omega))
        else:
            blocks.append(np.diag(solid_admittance(c.outer_radius, c.medium, hole, c.harmonics, omega)))
    out = scipy.linalg.block_diag(*blocks).astype(complex)
    assert out.shape[0] == index.size
    return out


def holes_admittance(sys: CableSystem, omega: float) -> np.ndarray:
    """Diagonal hat-Y_s over all hole slots."""
    vals = [
        hole_admittance(h.radius, h.medium, sys.layers[h.layer], h.harmonics, omega) for h in sys.holes
    ]
    return np.diag(np.concatenate(vals)) if vals else np.zeros((0, 0), dtype=complex)

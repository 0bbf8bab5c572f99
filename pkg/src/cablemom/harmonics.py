"""Geometry-only harmonic maps for the interior of a hole.

Every map here lives in the lossless hole medium and uses the quasi-static
kernel ``-ln|r - r'| / (2 pi)``.  Current harmonics on a circle of radius
``a`` carry density ``exp(j m theta)/(2 pi a)``; potentials are tested with
``exp(-j n theta)/(2 pi)``.  All maps depend on geometry only and are built
once per system.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from math import comb

import numpy as np

from .errors import TruncationWarning
from .model import GEOM_TOL, Boundary, BoundaryIndex, CableSystem

INV4PI = 1.0 / (4.0 * math.pi)
INV2PI = 1.0 / (2.0 * math.pi)


@dataclass
class MomentMatrices:
    T: np.ndarray  # hole slots x conductor slots
    G0: np.ndarray  # hole x hole
    Gc: np.ndarray  # conductor x conductor
    M_in: np.ndarray  # conductor x hole


def self_block(radius: float, order: int, gauge: float = 0.0) -> np.ndarray:
    n = np.arange(-order, order + 1)
    diag = np.where(n == 0, 0.0, INV4PI / np.maximum(np.abs(n), 1))
    diag = diag.astype(complex)
    diag[order] = -INV2PI * math.log(radius) + gauge
    return np.diag(diag)


def circle_coupling(obs: Boundary, src: Boundary, gauge: float = 0.0) -> np.ndarray:
    """Log-kernel coupling between harmonic currents on ``src`` and potentials on ``obs``.

    Handles coincident, disjoint and nested circles with closed forms.
    """
    d = obs.center - src.center
    ap, aq = obs.radius, src.radius
    No, Ns = obs.order, src.order
    out = np.zeros((2 * No + 1, 2 * Ns + 1), dtype=complex)
    dist = abs(d)

    if dist <= GEOM_TOL and abs(ap - aq) <= GEOM_TOL:
        if No != Ns:
            blk = self_block(ap, max(No, Ns), gauge)
            c = max(No, Ns)
            return blk[c - No : c + No + 1, c - Ns : c + Ns + 1]
        return self_block(ap, No, gauge)

    def put(n, m, val):
        if abs(n) <= No and abs(m) <= Ns:
            out[n + No, m + Ns] += val

    if dist >= ap + aq - GEOM_TOL:
        dc = d.conjugate()
        put(0, 0, -INV2PI * math.log(dist) + gauge)
        for k in range(1, No + 1):
            sgn = (-1) ** (k + 1) / k
            put(k, 0, -INV4PI * sgn * (ap / d) ** k)
            put(-k, 0, -INV4PI * sgn * (ap / dc) ** k)
        for m in range(1, Ns + 1):
            pre = aq**m / (4 * math.pi * m)
            for l in range(0, No + 1):
                c = (-1) ** l * comb(m + l - 1, l) * ap**l
                put(-l, m, pre * c / dc ** (m + l))
                put(l, -m, pre * c / d ** (m + l))
    elif dist + ap <= aq + GEOM_TOL:
        # observation circle inside the source circle: interior field
        put(0, 0, -INV2PI * math.log(aq) + gauge)
        dc = d.conjugate()
        for m in range(1, Ns + 1):
            pre = 1.0 / (4 * math.pi * m * aq**m)
            for k in range(0, min(m, No) + 1):
                put(k, m, pre * comb(m, k) * d ** (m - k) * ap**k)
                put(-k, -m, pre * comb(m, k) * dc ** (m - k) * ap**k)
    elif dist + aq <= ap + GEOM_TOL:
        # source circle inside the observation circle
        put(0, 0, -INV2PI * math.log(ap) + gauge)
        dc = d.conjugate()
        for k in range(1, No + 1):
            sgn = (-1) ** (k + 1) / k
            put(-k, 0, -INV4PI * sgn * (d / ap) ** k)
            put(k, 0, -INV4PI * sgn * (dc / ap) ** k)
        for m in range(1, Ns + 1):
            pre = aq**m / (4 * math.pi * m * ap**m)
            for l in range(0, No - m + 1):
                c = (-1) ** l * comb(m + l - 1, l)
                put(m + l, m, pre * c * (dc / ap) ** l)
                put(-(m + l), -m, pre * c * (d / ap) ** l)
    else:
        raise ValueError("circles intersect; the log-kernel expansions do not apply")
    return out


def hole_to_conductor(hole: Boundary, bnd: Boundary) -> np.ndarray:
    """Continuation of a source-free hole field onto one conductor boundary.

    Column n is the harmonic content on ``bnd`` of ``(rho/a^)^|n| e^{jn theta}``.
    """
    d = bnd.center - hole.center
    dc = d.conjugate()
    A, a = hole.radius, bnd.radius
    Nh, Nb = hole.order, bnd.order
    out = np.zeros((2 * Nb + 1, 2 * Nh + 1), dtype=complex)
    for n in range(0, Nh + 1):
        for k in range(0, min(n, Nb) + 1):
            c = comb(n, k) * a**k / A**n
            out[k + Nb, n + Nh] = c * d ** (n - k)
            out[-k + Nb, -n + Nh] = c * dc ** (n - k)
    return out


def conductor_to_hole(hole: Boundary, bnd: Boundary) -> np.ndarray:
    """Equivalent hole-boundary current reproducing the exterior field of ``bnd``."""
    d = bnd.center - hole.center
    dc = d.conjugate()
    A, a = hole.radius, bnd.radius
    Nh, Nb = hole.order, bnd.order
    out = np.zeros((2 * Nh + 1, 2 * Nb + 1), dtype=complex)
    for n in range(0, Nh + 1):
        for m in range(0, min(n, Nb) + 1):
            c = comb(n, m) * a**m / A**n
            out[n + Nh, m + Nb] = c * dc ** (n - m)
            out[-n + Nh, -m + Nb] = c * d ** (n - m)
    return out


def _check_truncation(hole: Boundary, bnd: Boundary):
    gap = hole.radius - abs(bnd.center - hole.center) - bnd.radius
    if gap < 0.05 * hole.radius and hole.order < 3 * bnd.order:
        warnings.warn(
            f"conductor boundary within {gap:.3g} m of hole boundary; hole order {hole.order} "
            f"< 3 x {bnd.order} may converge slowly",
            TruncationWarning,
            stacklevel=3,
        )


def build_T(index: BoundaryIndex, warn: bool = True) -> np.ndarray:
    out = np.zeros((index.hole_size, index.size), dtype=complex)
    for i, hole in enumerate(index.hole_boundaries):
        rs = index.hole_slices()[i]
        for b in index.boundaries_in_hole(i):
            bnd = index.conductor_boundaries[b]
            if warn:
                _check_truncation(hole, bnd)
            out[rs, index.slices()[b]] = conductor_to_hole(hole, bnd)
    return out


def build_inward_map(index: BoundaryIndex, warn: bool = True) -> np.ndarray:
    out = np.zeros((index.size, index.hole_size), dtype=complex)
    for i, hole in enumerate(index.hole_boundaries):
        cs = index.hole_slices()[i]
        for b in index.boundaries_in_hole(i):
            bnd = index.conductor_boundaries[b]
            if warn:
                _check_truncation(hole, bnd)
            out[index.slices()[b], cs] = hole_to_conductor(hole, bnd)
    return out


def build_Gc(index: BoundaryIndex, gauge: float = 0.0) -> np.ndarray:
    """Conductor-to-conductor interior kernel; zero between different holes."""
    out = np.zeros((index.size, index.size), dtype=complex)
    sl = index.slices()
    bnds = index.conductor_boundaries
    for p, bp in enumerate(bnds):
        for q, bq in enumerate(bnds):
            if bp.hole != bq.hole:
                continue
            out[sl[p], sl[q]] = circle_coupling(bp, bq, gauge)
    return out


def build_G0(index: BoundaryIndex, gauge: float = 0.0) -> np.ndarray:
    blocks = [self_block(h.radius, h.order, gauge) for h in index.hole_boundaries]
    out = np.zeros((index.hole_size, index.hole_size), dtype=complex)
    for s, blk in zip(index.hole_slices(), blocks):
        out[s, s] = blk
    return out


def moment_matrices(sys: CableSystem, index: BoundaryIndex | None = None, gauge: float = 0.0) -> MomentMatrices:
    index = index or BoundaryIndex.from_system(sys)
    return MomentMatrices(
        T=build_T(index),
        G0=build_G0(index, gauge),
        Gc=build_Gc(index, gauge),
        M_in=build_inward_map(index, warn=False),
    )

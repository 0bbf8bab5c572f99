"""Green's function of a horizontally layered medium.

The layered medium is solved in the spectral domain (Fourier transform along
x) as a cascade of transmission-line sections, one per layer.  Line voltage
is the spectral Green's function, so the solution inside the host layer is a
direct wave plus the four image families produced by the two equivalent
terminations above and below it.

The Green's function is normalised so that in an unbounded medium it equals
``K0(gamma*rho)/(2 pi)``; the vector potential of a current density J in the
host layer is ``mu_s * integral(G J)``.  Interfaces enforce continuity of G
and of ``(1/mu) dG/dy``, which is why each section's characteristic impedance
carries the factor ``mu_l/mu_s``.
"""

from __future__ import annotations

import math

import numpy as np
from scipy import integrate, special

from .bessel import i_over_power_series
from .errors import ConvergenceError, DomainError
from .kernels import reflected_block_sum
from .model import CableSystem, layer_bounds, wavenumber

BETA_CAP = 1e9


def spectral_gamma(k: complex, beta):
    """sqrt(beta^2 - k^2) with Re >= 0 (ties broken towards Im >= 0)."""
    beta = np.asarray(beta, dtype=complex)
    g = np.sqrt(beta * beta - k * k)
    flip = (g.real < 0) | ((g.real == 0) & (g.imag < 0))
    return np.where(flip, -g, g)


class LayeredMedium:
    """Spectral transmission-line model of a layer stack at one frequency."""

    def __init__(self, layers, host: int, omega: float):
        self.layers = tuple(layers)
        self.host = host
        self.omega = omega
        self.k = [wavenumber(l, omega) for l in layers]
        self.mu = [l.mu_r for l in layers]
        self.bottom, self.top = layer_bounds(self.layers, host)
        self.height = self.top - self.bottom

    def gamma(self, l: int, beta):
        return spectral_gamma(self.k[l], beta)

    def impedance(self, l: int, beta):
        return (self.mu[l] / self.mu[self.host]) / self.gamma(l, beta)

    def equivalent_impedance(self, side: str, beta):
        """Input impedance seen from the host layer looking up or down.

        With nothing on that side the host layer terminates itself and the
        reflection coefficient is zero.
        """
        if side == "below":
            stack = list(range(self.host + 1, len(self.layers)))
        elif side == "above":
            stack = list(range(self.host - 1, -1, -1))
        else:
            raise ValueError(f"side must be 'above' or 'below', not {side!r}")
        if not stack:
            return self.impedance(self.host, beta)
        z = self.impedance(stack[-1], beta)
        for l in reversed(stack[:-1]):
            lo, hi = layer_bounds(self.layers, l)
            zl = self.impedance(l, beta)
            e = np.exp(-2.0 * self.gamma(l, beta) * (hi - lo))
            t = (1.0 - e) / (1.0 + e)
            z = zl * (z + zl * t) / (zl + z * t)
        return z

    def reflections(self, beta):
        """(gamma_s, Z_s, Gamma_below, Gamma_above) at the host layer."""
        gs = self.gamma(self.host, beta)
        zs = 1.0 / gs
        zb = self.equivalent_impedance("below", beta)
        za = self.equivalent_impedance("above", beta)
        return gs, zs, (zb - zs) / (zs + zb), (za - zs) / (zs + za)

    def image_matrix(self, beta):
        """Coefficients C[a, b] of the reflected field in the host layer.

        The reflected spectral Green's function equals
        sum_ab C[a, b] * e_a(y) * e_b(y'), with e_0(y) = exp(-gamma (y - y_bottom))
        and e_1(y) = exp(-gamma (y_top - y)).
        """
        gs, zs, gl, gr = self.reflections(beta)
        h = self.height
        if math.isinf(h):
            coupling = np.zeros_like(gs)
            den = np.ones_like(gs)
        else:
            eh = np.exp(-gs * h)
            coupling = gr * gl * eh
            den = 1.0 - gr * gl * eh * eh
        pre = zs / (2.0 * den)
        if math.isinf(self.bottom):
            gl = np.zeros_like(gl)
        if math.isinf(self.top):
            gr = np.zeros_like(gr)
        C = np.empty(np.shape(gs) + (2, 2), dtype=complex)
        C[..., 0, 0] = pre * gl
        C[..., 1, 1] = pre * gr
        C[..., 0, 1] = pre * coupling
        C[..., 1, 0] = pre * coupling
        return gs, C

    def check_inside(self, *ys):
        for y in ys:
            if not (self.bottom < y < self.top):
                raise DomainError(f"ordinate {y} lies outside host layer {self.host}")


def equivalent_impedance(layers, host: int, side: str, omega: float, beta):
    return LayeredMedium(layers, host, omega).equivalent_impedance(side, beta)


def spectral_green(omega, beta, y, y_src, x_src, layers, host):
    """Spectral Green's function for source and observation in the host layer."""
    med = LayeredMedium(layers, host, omega)
    med.check_inside(y, y_src)
    return _spectral_total(med, beta, y, y_src) * np.exp(1j * np.asarray(beta) * x_src)


def _spectral_total(med: LayeredMedium, beta, y, y_src):
    gs, C = med.image_matrix(beta)
    direct = np.exp(-gs * abs(y - y_src)) / (2.0 * gs)
    e = [_image_factor(med, gs, y, 0), _image_factor(med, gs, y, 1)]
    f = [_image_factor(med, gs, y_src, 0), _image_factor(med, gs, y_src, 1)]
    refl = sum(C[..., a, b] * e[a] * f[b] for a in range(2) for b in range(2))
    return direct + refl


def _image_factor(med, gs, y, side):
    dist = (y - med.bottom) if side == 0 else (med.top - y)
    if math.isinf(dist):
        return np.zeros_like(gs)
    return np.exp(-gs * dist)


# --------------------------------------------------------------------------
# inverse Fourier transform of point values


def _breakpoints(med: LayeredMedium, scale_len: float) -> list:
    pts = set()
    for k in med.k:
        if abs(k) > 0:
            pts.add(abs(k))
            pts.add(abs(k) * 0.1)
            pts.add(abs(k) * 10.0)
    pts.add(1.0 / scale_len)
    pts.add(10.0 / scale_len)
    return sorted(p for p in pts if 0 < p < BETA_CAP)


def inverse_transform(omega, dx, y, y_src, layers, host, rtol=1e-12):
    """G(x - x', y; y') = (1/pi) * int_0^inf G~(beta) cos(beta (x - x')) dbeta."""
    med = LayeredMedium(layers, host, omega)
    med.check_inside(y, y_src)
    dx = abs(float(dx))
    dy = abs(y - y_src)
    if dx == 0 and dy == 0:
        raise DomainError("source and observation coincide")
    if dx == 0 and med.layers[host].conductivity == 0 and dy == 0:
        raise DomainError("lossless host requires separated points")

    scale = math.hypot(dx, dy)
    pts = _breakpoints(med, scale)
    total = 0j
    if dx == 0 or dy > 5 * dx:
        # exponential decay dominates; truncate where the tail bound is met
        def fr(b):
            return _spectral_total(med, b, y, y_src).real * math.cos(b * dx)

        def fi(b):
            return _spectral_total(med, b, y, y_src).imag * math.cos(b * dx)

        upper = _decay_cap(med, dy, rtol)
        edges = [0.0] + [p for p in pts if p < upper] + [upper]
        for lo, hi in zip(edges[:-1], edges[1:]):
            total += _quad_pair(fr, fi, lo, hi, rtol, None)
    else:
        # subtract 1/(2 sqrt(beta^2 + alpha^2)), whose cosine transform is
        # K0(alpha dx)/2, so the oscillatory tail decays like beta^-3
        alpha = 1.0 / scale

        def fr(b):
            return _spectral_total(med, b, y, y_src).real - 0.5 / math.sqrt(b * b + alpha * alpha)

        def fi(b):
            return _spectral_total(med, b, y, y_src).imag

        total += 0.5 * special.k0(alpha * dx)
        cut = max(pts[-1], 50.0 / dx)
        edges = [0.0] + [p for p in pts if p < cut] + [cut]
        for lo, hi in zip(edges[:-1], edges[1:]):
            total += _quad_pair(fr, fi, lo, hi, rtol, dx)
        floor = max(abs(total) * rtol * 1e-2, 1e-300)
        total += _quad_pair(fr, fi, cut, np.inf, rtol, dx, floor)
    return total / math.pi


def _decay_cap(med, dy, rtol):
    if dy == 0:
        raise DomainError("purely vertical transform needs dy > 0")
    kmax = max(abs(k) for k in med.k)
    upper = max(-math.log(rtol * 1e-3) / dy, 10 * kmax)
    if upper > BETA_CAP:
        raise ConvergenceError(f"spectral tail needs beta beyond {BETA_CAP:g} (dy={dy:g} m, f={med.omega / 2 / math.pi:g} Hz)")
    return upper


def _quad_pair(fr, fi, lo, hi, rtol, wvar, epsabs=0.0):
    out = []
    for f in (fr, fi):
        kw = {} if wvar is None else {"weight": "cos", "wvar": wvar}
        if wvar is not None and math.isinf(hi):
            kw["limlst"] = 200
        out.append(_quad(f, lo, hi, rtol, epsabs, **kw))
    return complex(out[0], out[1])


def _quad(f, lo, hi, rtol, epsabs, **kw):
    res = integrate.quad(f, lo, hi, epsabs=epsabs, epsrel=rtol, limit=400, full_output=1, **kw)
    val, err = res[0], res[1]
    if len(res) > 3 and err > max(1e-9 * abs(val), 10 * epsabs, 1e-300):
        raise ConvergenceError(f"spectral quadrature on [{lo:g}, {hi:g}] stalled: {res[3]}")
    return val


# --------------------------------------------------------------------------
# Galerkin matrix over hole-boundary harmonics


def _circle_coefficients(order: int, radius: float, u, v):
    """Harmonic coefficients of exp(radius (u cos t + v sin t)), n = -order..order.

    Columns follow n; rows follow the spectral nodes.
    """
    p = radius * (u - 1j * v) / 2.0
    q = radius * (u + 1j * v) / 2.0
    w = p * q
    out = np.empty(np.shape(u) + (2 * order + 1,), dtype=complex)
    for n in range(order + 1):
        s = i_over_power_series(n, w)
        out[..., order + n] = p**n * s
        out[..., order - n] = q**n * s
    return out


def free_block(gamma: complex, hi, hj) -> np.ndarray:
    """Unbounded-medium K0 kernel between hole harmonics, in closed form."""
    Ni, Nj = hi.harmonics, hj.harmonics
    n = np.arange(-Ni, Ni + 1)
    m = np.arange(-Nj, Nj + 1)
    if hi is hj or (hi.center == hj.center and hi.radius == hj.radius):
        vals = special.iv(n, gamma * hi.radius) * special.kv(n, gamma * hi.radius)
        out = np.zeros((len(n), len(m)), dtype=complex)
        idx = np.arange(-min(Ni, Nj), min(Ni, Nj) + 1)
        out[idx + Ni, idx + Nj] = vals[idx + Ni]
        return out / (2 * math.pi)
    D = hi.center - hj.center
    ph = np.angle(D)
    In = special.iv(n, gamma * hi.radius)
    Im = special.iv(m, gamma * hj.radius)
    diff = m[None, :] - n[:, None]
    K = special.kv(diff, gamma * abs(D))
    sign = (-1.0) ** n
    return (sign * In)[:, None] * Im[None, :] * K * np.exp(1j * diff * ph) / (2 * math.pi)


_GK_X, _GK_WK, _GK_WG = None, None, None


def _gk15():
    global _GK_X, _GK_WK, _GK_WG
    if _GK_X is None:
        xk = np.array([0.991455371120812639, 0.949107912342758525, 0.864864423359769073,
                       0.741531185599394440, 0.586087235467691130, 0.405845151377397167,
                       0.207784955007898468, 0.0])
        wk = np.array([0.022935322010529225, 0.063092092629978553, 0.104790010322250184,
                       0.140653259715525919, 0.169004726639267903, 0.190350578064785410,
                       0.204432940075298892, 0.209482141084727828])
        wg = np.array([0.129484966168869693, 0.279705391489276668, 0.381830050505118945,
                       0.417959183673469388])
        _GK_X = np.concatenate([-xk, xk[-2::-1]])
        _GK_WK = np.concatenate([wk, wk[-2::-1]])
        g = np.zeros(15)
        g[1::2] = np.concatenate([wg, wg[-2::-1]])
        _GK_WG = g
    return _GK_X, _GK_WK, _GK_WG


def adaptive_gk(f, edges, rtol, max_rounds=60):
    """Globally adaptive Gauss-Kronrod (7/15) quadrature of a matrix-valued f.

    ``f`` maps an array of nodes to an array of shape (nodes, ...).  All
    panels that still need refinement are evaluated in one call, which keeps
    per-node overhead low.  Convergence is judged on the largest entry.
    """
    x, wk, wg = _gk15()
    todo = [(float(a), float(b)) for a, b in zip(edges[:-1], edges[1:]) if b > a]
    done = None
    for _ in range(max_rounds):
        a = np.array([p[0] for p in todo])
        b = np.array([p[1] for p in todo])
        mid, half = (a + b) / 2, (b - a) / 2
        nodes = (mid[:, None] + half[:, None] * x[None, :]).ravel()
        vals = f(nodes)
        vals = vals.reshape((len(todo), 15) + vals.shape[1:])
        ik = np.einsum("pk...,k->p...", vals, wk) * half.reshape((-1,) + (1,) * (vals.ndim - 2))
        ig = np.einsum("pk...,k->p...", vals, wg) * half.reshape((-1,) + (1,) * (vals.ndim - 2))
        err = np.abs(ik - ig).reshape(len(todo), -1).max(axis=1)
        total = ik.sum(axis=0) + (0 if done is None else done)
        scale = np.abs(total).max()
        tol = rtol * max(scale, 1e-300)
        # a panel is accepted when its error is small against its share of the budget
        share = (b - a) / (b - a).sum()
        good = err <= np.maximum(tol * share, tol * 1e-3)
        acc = ik[good].sum(axis=0)
        done = acc if done is None else done + acc
        if good.all() or err.sum() <= 0.1 * tol:
            if not good.all():
                done = done + ik[~good].sum(axis=0)
            return done
        todo = []
        for lo, hi in zip(a[~good], b[~good]):
            m = 0.5 * (lo + hi)
            todo += [(lo, m), (m, hi)]
    raise ConvergenceError("spectral quadrature did not converge")


class GreenAssembler:
    """Builds G_g over all hole slots of a system at one frequency."""

    def __init__(self, sys: CableSystem, omega: float, rtol: float = 1e-10):
        hosts = {h.layer for h in sys.holes}
        if len(hosts) != 1:
            raise DomainError("all holes must share one host layer")
        self.sys = sys
        self.host = hosts.pop()
        self.omega = omega
        self.rtol = rtol
        self.med = LayeredMedium(sys.layers, self.host, omega)
        self.holes = sys.holes
        for h in self.holes:
            self.med.check_inside(h.y - h.radius, h.y + h.radius)
        self.sizes = [2 * h.harmonics + 1 for h in self.holes]
        self.offsets = np.concatenate([[0], np.cumsum(self.sizes)]).astype(int)

    @property
    def size(self):
        return int(self.offsets[-1])

    def free_part(self) -> np.ndarray:
        g = complex(np.sqrt(-(self.med.k[self.host] ** 2)))
        if g.real < 0:
            g = -g
        out = np.zeros((self.size, self.size), dtype=complex)
        for i, hi in enumerate(self.holes):
            for j, hj in enumerate(self.holes):
                si = slice(self.offsets[i], self.offsets[i + 1])
                sj = slice(self.offsets[j], self.offsets[j + 1])
                out[si, sj] = free_block(g, hi, hj)
        return out

    def _factors(self, beta):
        """Per-hole observation and source factors at the nodes ``beta``.

        Returns arrays of shape (nodes, 2, slots): index 0 holds the factor
        attached to the lower image family, index 1 the upper one.
        """
        med = self.med
        gs, C = med.image_matrix(beta)
        nb = len(beta)
        obs = np.zeros((nb, 2, self.size), dtype=complex)
        src = np.zeros((nb, 2, self.size), dtype=complex)
        for i, h in enumerate(self.holes):
            sl = slice(self.offsets[i], self.offsets[i + 1])
            N = h.harmonics
            for side, sgn in ((0, -1.0), (1, 1.0)):
                dist = (h.y - med.bottom) if side == 0 else (med.top - h.y)
                if math.isinf(dist):
                    continue
                base = np.exp(-gs * dist)
                co = _circle_coefficients(N, h.radius, -1j * beta, sgn * gs)
                cs = _circle_coefficients(N, h.radius, 1j * beta, sgn * gs)
                obs[:, side, sl] = (base * np.exp(-1j * beta * h.x))[:, None] * co
                # source weight exp(j m t) picks the coefficient of harmonic -m
                src[:, side, sl] = (base * np.exp(1j * beta * h.x))[:, None] * cs[:, ::-1]
        return C, obs, src

    def integrand(self, beta) -> np.ndarray:
        """Reflected-part integrand at nodes ``beta`` (both signs folded in)."""
        beta = np.asarray(beta, dtype=float)
        both = np.concatenate([beta, -beta])
        C, obs, src = self._factors(both)
        vals = reflected_block_sum(C, obs, src)
        nb = len(beta)
        return (vals[:nb] + vals[nb:]) / (2 * math.pi)

    def clearance(self) -> float:
        med = self.med
        gaps = []
        for h in self.holes:
            gaps.append(h.y - h.radius - med.bottom)
            gaps.append(med.top - h.y - h.radius)
        return min(gaps)

    def reflected_part(self) -> np.ndarray:
        med = self.med
        if math.isinf(med.bottom) and math.isinf(med.top):
            return np.zeros((self.size, self.size), dtype=complex)
        delta = self.clearance()
        kmax = max(abs(k) for k in med.k)
        upper = max(40.0 / delta, 20.0 * kmax)
        if upper > BETA_CAP:
            raise ConvergenceError(
                f"hole clearance {delta:g} m needs beta beyond {BETA_CAP:g} at f={self.omega / 2 / math.pi:g} Hz"
            )
        pts = sorted({p for p in _breakpoints(med, delta) if p < upper} | {1.0 / delta, 5.0 / delta})
        pts = [p for p in pts if p < upper]
        n = self.size
        val = adaptive_gk(self.integrand, [0.0] + pts + [upper], self.rtol)
        if not np.all(np.isfinite(val)):
            raise ConvergenceError(f"non-finite spectral integral at f={self.omega / 2 / math.pi:g} Hz")
        return val.reshape(n, n)

    def matrix(self) -> np.ndarray:
        return self.free_part() + self.reflected_part()


def assemble_Gg(sys: CableSystem, omega: float, rtol: float = 1e-10) -> np.ndarray:
    """MoM matrix of the layered-medium Green's function over hole harmonics."""
    return GreenAssembler(sys, omega, rtol).matrix()


def spectral_samples(sys: CableSystem, omega: float, betas, y=None, y_src=None, dx=0.0):
    """(beta, G~) samples at one observation/source pair, for diagnostics."""
    host = sys.holes[0].layer
    med = LayeredMedium(sys.layers, host, omega)
    h = sys.holes[0]
    y = h.y if y is None else y
    y_src = h.y + h.radius if y_src is None else y_src
    betas = np.asarray(betas, dtype=float)
    return betas, _spectral_total(med, betas, y, y_src) * np.exp(1j * betas * dx)

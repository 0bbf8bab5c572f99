"""Assembly of the MoM-SO system and extraction of R(omega), L(omega).

Current harmonics on conductor boundaries are the unknowns.  ``Psi`` maps
them onto the vector-potential harmonics seen on the same boundaries and
``Y_s`` maps the boundary field back onto current, so that with a per-unit
length voltage drop ``v`` applied to each conductor

    (1 + j omega Y_s Psi) J = Y_s U v,    I = U^T J,

which gives ``Z = (U^T (1 + j omega Y_s Psi)^-1 Y_s U)^-1``.
"""

from __future__ import annotations

import math
import os
import time
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .admittance import conductor_admittance, holes_admittance
from .errors import CableModelError, DomainError, PassivityWarning, SingularSystemError
from .green import assemble_Gg
from .harmonics import MomentMatrices, moment_matrices
from .model import MU0, BoundaryIndex, CableSystem, require_grid, validate_system

COND_LIMIT = 1e12
SYMMETRY_TOL = 1e-6


@dataclass
class ImpedanceResult:
    frequency: float
    Z: np.ndarray
    metadata: dict = field(default_factory=dict)

    @property
    def omega(self) -> float:
        return 2 * math.pi * self.frequency

    @property
    def R(self) -> np.ndarray:
        return self.Z.real.copy()

    @property
    def L(self) -> np.ndarray:
        return self.Z.imag / self.omega


@dataclass(frozen=True)
class ReductionSpec:
    """Per-conductor roles ("core" or "screen") and the screen treatment."""

    roles: tuple
    screens: str = "open"  # "none", "open" or "grounded"

    def __post_init__(self):
        if "core" not in self.roles:
            raise ValueError("at least one core conductor must remain after reduction")
        if self.screens not in ("none", "open", "grounded"):
            raise ValueError(f"unknown screen treatment {self.screens!r}")


def _solve(A: np.ndarray, B: np.ndarray, what: str) -> np.ndarray:
    if A.size == 0:
        return B.copy()
    with warnings.catch_warnings():
        # exact singularity is reported below through the condition estimate
        warnings.simplefilter("ignore", scipy.linalg.LinAlgWarning)
        lu, piv = scipy.linalg.lu_factor(A, check_finite=True)
    cond = _condition(A, lu, piv)
    if not np.isfinite(cond) or cond > COND_LIMIT:
        raise SingularSystemError(f"{what} is numerically singular (condition ~ {cond:.3e})", cond)
    return scipy.linalg.lu_solve((lu, piv), B)


def _condition(A, lu, piv) -> float:
    norm = np.linalg.norm(A, 1)
    if norm == 0:
        return math.inf
    rcond = scipy.linalg.lapack.zgecon(lu.astype(complex), norm, norm="1")[0]
    return math.inf if rcond == 0 else 1.0 / rcond


def solve_hole_potential(Gg, Yh, T, mu_s, J) -> np.ndarray:
    """Vector-potential harmonics on the hole boundaries for conductor currents ``J``.

    ``Yh`` may be the diagonal matrix or its diagonal.
    """
    Gg = np.asarray(Gg, dtype=complex)
    Yh = np.asarray(Yh, dtype=complex)
    Yh = np.diag(Yh) if Yh.ndim == 1 else Yh
    n = Gg.shape[0]
    A = np.eye(n) - mu_s * Gg @ Yh
    return mu_s * _solve(A, Gg @ (np.asarray(T) @ np.asarray(J, dtype=complex)), "hole system")


def build_Psi(M_in, Gg, Yh, T, G0, Gc, mu_s, mu_h) -> np.ndarray:
    """Conductor-current to boundary vector-potential map.

    Psi = M_in [mu_s (1 - mu_s Gg Yh)^-1 Gg T - mu_h G0 T] + mu_h Gc
    """
    outside = solve_hole_potential(Gg, Yh, T, mu_s, np.eye(T.shape[1]))
    return M_in @ (outside - mu_h * (G0 @ T)) + mu_h * Gc


def selection_matrix(sys: CableSystem, index: BoundaryIndex) -> np.ndarray:
    U = np.zeros((index.size, len(sys.conductors)))
    for b, bnd in enumerate(index.conductor_boundaries):
        U[index.slot(b, 0), bnd.owner] = 1.0
    return U


def compute_Z(Ys, Psi, U, omega, frequency=None, metadata=None) -> ImpedanceResult:
    n = Ys.shape[0]
    K = np.eye(n) + 1j * omega * Ys @ Psi
    X = _solve(K, Ys @ U, "conductor system")
    Zinv = U.T @ X
    P = Zinv.shape[0]
    Z = _solve(Zinv, np.eye(P), "current-to-voltage map")
    asym = np.linalg.norm(Z - Z.T) / np.linalg.norm(Z)
    f = omega / (2 * math.pi) if frequency is None else frequency
    if asym > SYMMETRY_TOL:
        raise SingularSystemError(f"impedance matrix asymmetric ({asym:.2e}) at f={f:g} Hz", math.nan)
    Z = 0.5 * (Z + Z.T)
    eig = np.linalg.eigvalsh(Z.real)
    if eig.min() < 0:
        warnings.warn(f"resistance matrix has eigenvalue {eig.min():.3e} at f={f:g} Hz", PassivityWarning, stacklevel=2)
    meta = dict(metadata or {})
    meta["asymmetry"] = float(asym)
    return ImpedanceResult(f, Z, meta)


class Solver:
    """Holds the frequency-independent matrices of one cable system."""

    def __init__(self, sys: CableSystem, gauge: float = 0.0, rtol: float = 1e-10, validate: bool = True):
        if validate:
            validate_system(sys)
        hosts = {h.layer for h in sys.holes}
        if len(hosts) != 1:
            raise DomainError("all holes must lie in one host layer")
        self.sys = sys
        self.rtol = rtol
        self.index = BoundaryIndex.from_system(sys)
        self.mm: MomentMatrices = moment_matrices(sys, self.index, gauge)
        self.U = selection_matrix(sys, self.index)
        host = sys.layers[hosts.pop()]
        self.mu_s = host.mu_r * MU0
        # hole permeability of the hole owning each conductor slot
        self._mu_h = np.concatenate(
            [np.full(b.size, sys.holes[b.hole].mu_r * MU0) for b in self.index.conductor_boundaries]
        )

    def Psi(self, omega: float, Gg=None) -> np.ndarray:
        mm = self.mm
        if Gg is None:
            Gg = assemble_Gg(self.sys, omega, self.rtol)
        Yh = holes_admittance(self.sys, omega)
        outside = solve_hole_potential(Gg, Yh, mm.T, self.mu_s, np.eye(mm.T.shape[1]))
        mu = self._mu_h
        # rows belong to one hole each, so scaling rows applies that hole's permeability
        inner = mm.M_in @ outside - mu[:, None] * (mm.M_in @ (mm.G0 @ mm.T))
        return inner + mu[:, None] * mm.Gc

    def at(self, frequency: float) -> ImpedanceResult:
        t0 = time.perf_counter()
        omega = 2 * math.pi * frequency
        Gg = assemble_Gg(self.sys, omega, self.rtol)
        Psi = self.Psi(omega, Gg)
        Ys = conductor_admittance(self.sys, self.index, omega)
        meta = {
            "conductor_harmonics": [c.harmonics for c in self.sys.conductors],
            "hole_harmonics": [h.harmonics for h in self.sys.holes],
        }
        res = compute_Z(Ys, Psi, self.U, omega, frequency, meta)
        res.metadata["seconds"] = time.perf_counter() - t0
        return res


@dataclass
class SweepOutcome:
    results: list
    failures: list  # (frequency, message)

    @property
    def ok(self) -> bool:
        return not self.failures


def frequency_sweep(sys: CableSystem, frequencies=None, threads: int | None = None, strict: bool = False,
                    gauge: float = 0.0, rtol: float = 1e-10) -> SweepOutcome:
    """Evaluate every frequency; results come back sorted by frequency."""
    freqs = sorted(require_grid(sys.frequencies if frequencies is None else frequencies))
    solver = Solver(sys, gauge=gauge, rtol=rtol)
    threads = threads or int(os.environ.get("CABLEMOM_THREADS", "1") or 1)

    def one(f):
        try:
            return f, solver.at(f), None
        except CableModelError as exc:
            if strict:
                raise
            return f, None, f"{type(exc).__name__}: {exc}"

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            out = list(pool.map(one, freqs))
    else:
        out = [one(f) for f in freqs]
    results = [r for _, r, err in out if r is not None]
    failures = [(f, err) for f, _, err in out if err is not None]
    return SweepOutcome(results, failures)


def impedance(sys: CableSystem, frequency: float, **kw) -> ImpedanceResult:
    return Solver(sys, **kw).at(frequency)


# --------------------------------------------------------------------------
# reductions


def reduce_screens(Z: np.ndarray, spec: ReductionSpec) -> np.ndarray:
    roles = np.asarray(spec.roles)
    if len(roles) != Z.shape[0]:
        raise ValueError("reduction roles do not match the impedance matrix")
    if spec.screens == "none":
        return Z.copy()
    c = np.flatnonzero(roles == "core")
    s = np.flatnonzero(roles == "screen")
    Zcc = Z[np.ix_(c, c)]
    if spec.screens == "open" or len(s) == 0:
        return Zcc.copy()
    Zss = Z[np.ix_(s, s)]
    corr = Z[np.ix_(c, s)] @ _solve(Zss, Z[np.ix_(s, c)], "screen block")
    return Zcc - corr


_A = np.exp(2j * math.pi / 3)
SEQ_INV = np.array([[1, 1, 1], [1, _A, _A**2], [1, _A**2, _A]]) / 3.0
SEQ = np.array([[1, 1, 1], [1, _A**2, _A], [1, _A, _A**2]])


@dataclass
class SequenceImpedances:
    zero: complex
    positive: complex
    leakage: float


def sequence_components(Z: np.ndarray) -> SequenceImpedances:
    Z = np.asarray(Z, dtype=complex)
    if Z.shape != (3, 3):
        raise ValueError("sequence components need a 3x3 matrix")
    Zs = SEQ_INV @ Z @ SEQ
    off = Zs - np.diag(np.diag(Zs))
    return SequenceImpedances(complex(Zs[0, 0]), complex(Zs[1, 1]), float(np.abs(off).max()))

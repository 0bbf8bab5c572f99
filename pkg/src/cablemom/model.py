"""Geometry and material data model for layered-medium cable systems.

Conventions used throughout the package:

* strict SI units; material parameters are stored relative to vacuum and
  multiplied by ``MU0``/``EPS0`` when a solver needs absolute values;
* time dependence ``exp(+j*omega*t)``;
* ``y`` grows upwards, layer 0 is the top (semi-infinite) layer and each
  layer stores the ordinate of its lower interface.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import GridError, HoleBreachError, OverlapError, TopologyError, ValidationError

MU0 = 4e-7 * math.pi
EPS0 = 8.8541878128e-12

GEOM_TOL = 1e-12


@dataclass(frozen=True)
class Medium:
    conductivity: float = 0.0
    eps_r: float = 1.0
    mu_r: float = 1.0

    @property
    def mu(self) -> float:
        return self.mu_r * MU0

    @property
    def eps(self) -> float:
        return self.eps_r * EPS0


@dataclass(frozen=True)
class Layer(Medium):
    # ordinate of the lower interface, None for the bottom layer
    bottom: Optional[float] = None
    name: str = ""


@dataclass(frozen=True)
class Hole:
    x: float
    y: float
    radius: float
    eps_r: float = 1.0
    mu_r: float = 1.0
    layer: int = 0
    harmonics: int = 4

    conductivity = 0.0

    @property
    def center(self) -> complex:
        return complex(self.x, self.y)

    @property
    def medium(self) -> Medium:
        return Medium(0.0, self.eps_r, self.mu_r)


@dataclass(frozen=True)
class Conductor:
    kind: str
    x: float
    y: float
    outer_radius: float
    conductivity: float
    hole: int = 0
    inner_radius: float = 0.0
    eps_r: float = 1.0
    mu_r: float = 1.0
    harmonics: int = 4
    name: str = ""

    @property
    def center(self) -> complex:
        return complex(self.x, self.y)

    @property
    def is_tubular(self) -> bool:
        return self.kind == "tubular"

    @property
    def medium(self) -> Medium:
        return Medium(self.conductivity, self.eps_r, self.mu_r)


@dataclass(frozen=True)
class CableSystem:
    layers: tuple
    holes: tuple
    conductors: tuple
    frequencies: tuple = ()

    def __post_init__(self):
        for name in ("layers", "holes", "conductors", "frequencies"):
            object.__setattr__(self, name, tuple(getattr(self, name)))

    def host_layer(self, hole: int = 0) -> Layer:
        return self.layers[self.holes[hole].layer]

    def with_frequencies(self, frequencies: Sequence[float]) -> "CableSystem":
        return CableSystem(self.layers, self.holes, self.conductors, tuple(frequencies))

    def with_harmonics(self, conductor: int, hole: int) -> "CableSystem":
        from dataclasses import replace

        return CableSystem(
            self.layers,
            tuple(replace(h, harmonics=hole) for h in self.holes),
            tuple(replace(c, harmonics=conductor) for c in self.conductors),
            self.frequencies,
        )


def layer_bounds(layers: Sequence[Layer], index: int) -> tuple[float, float]:
    """Return (bottom, top) ordinates of a layer; infinities for half-spaces."""
    top = math.inf if index == 0 else layers[index - 1].bottom
    bottom = -math.inf if index == len(layers) - 1 else layers[index].bottom
    return bottom, top


def wavenumber(medium, omega: float) -> complex:
    """Complex wavenumber with ``k**2 = omega*mu*(omega*eps - j*sigma)``.

    The principal root is taken, so ``Im(k) <= 0`` for lossy media and ``k``
    is real and positive for lossless ones.
    """
    mu = medium.mu_r * MU0
    eps = medium.eps_r * EPS0
    k2 = omega * mu * complex(omega * eps, -medium.conductivity)
    return complex(np.sqrt(k2))


def propagation_constant(medium, omega: float) -> complex:
    """``sqrt(-k**2)`` on the branch with non-negative real part."""
    k = wavenumber(medium, omega)
    return _decaying_root(-(k * k))


def _decaying_root(z: complex) -> complex:
    g = complex(np.sqrt(z))
    if g.real < 0 or (g.real == 0 and g.imag < 0):
        g = -g
    return g


# --------------------------------------------------------------------------
# boundary bookkeeping


@dataclass(frozen=True)
class Boundary:
    center: complex
    radius: float
    order: int
    kind: str  # "outer", "inner" or "hole"
    owner: int  # conductor index, or hole index for kind == "hole"
    hole: int

    @property
    def size(self) -> int:
        return 2 * self.order + 1


@dataclass
class BoundaryIndex:
    """Flattened harmonic slot ordering.

    Conductor boundaries come in conductor order, outer boundary first and
    then the inner one for tubes; hole boundaries are indexed separately.
    Inside a boundary the slots run over ``n = -N..N``.
    """

    conductor_boundaries: list
    hole_boundaries: list
    offsets: list = field(init=False)
    hole_offsets: list = field(init=False)

    def __post_init__(self):
        self.offsets = _offsets(self.conductor_boundaries)
        self.hole_offsets = _offsets(self.hole_boundaries)

    @classmethod
    def from_system(cls, sys: CableSystem) -> "BoundaryIndex":
        cond = []
        for p, c in enumerate(sys.conductors):
            cond.append(Boundary(c.center, c.outer_radius, c.harmonics, "outer", p, c.hole))
            if c.is_tubular:
                cond.append(Boundary(c.center, c.inner_radius, c.harmonics, "inner", p, c.hole))
        holes = [Boundary(h.center, h.radius, h.harmonics, "hole", i, i) for i, h in enumerate(sys.holes)]
        return cls(cond, holes)

    @property
    def size(self) -> int:
        return self.offsets[-1]

    @property
    def hole_size(self) -> int:
        return self.hole_offsets[-1]

    def slot(self, boundary: int, n: int) -> int:
        b = self.conductor_boundaries[boundary]
        if abs(n) > b.order:
            raise IndexError(f"harmonic {n} outside order {b.order}")
        return self.offsets[boundary] + n + b.order

    def hole_slot(self, hole: int, n: int) -> int:
        b = self.hole_boundaries[hole]
        if abs(n) > b.order:
            raise IndexError(f"harmonic {n} outside order {b.order}")
        return self.hole_offsets[hole] + n + b.order

    def locate(self, index: int) -> tuple[int, int]:
        """Inverse of :meth:`slot`: map a flat index to (boundary, n)."""
        b = int(np.searchsorted(self.offsets, index, side="right")) - 1
        if not 0 <= b < len(self.conductor_boundaries) or index >= self.size:
            raise IndexError(index)
        return b, index - self.offsets[b] - self.conductor_boundaries[b].order

    def slices(self):
        return [slice(self.offsets[i], self.offsets[i + 1]) for i in range(len(self.conductor_boundaries))]

    def hole_slices(self):
        return [slice(self.hole_offsets[i], self.hole_offsets[i + 1]) for i in range(len(self.hole_boundaries))]

    def boundaries_in_hole(self, hole: int) -> list[int]:
        return [i for i, b in enumerate(self.conductor_boundaries) if b.hole == hole]

    def flip(self) -> np.ndarray:
        """Permutation sending slot (b, n) to (b, -n).

        Reciprocity of every harmonic kernel reads ``K == P @ K.T @ P``.
        """
        perm = np.empty(self.size, dtype=int)
        for i, b in enumerate(self.conductor_boundaries):
            o = self.offsets[i]
            perm[o : o + b.size] = o + np.arange(b.size)[::-1]
        return perm


def _offsets(boundaries) -> list:
    out = [0]
    for b in boundaries:
        out.append(out[-1] + b.size)
    return out


# --------------------------------------------------------------------------
# validation


def containment(sys: CableSystem) -> list[Optional[int]]:
    """Parent tube of each conductor (innermost bore containing it), or None."""
    parents: list[Optional[int]] = []
    for q, c in enumerate(sys.conductors):
        best = None
        for t, tube in enumerate(sys.conductors):
            if t == q or not tube.is_tubular:
                continue
            d = abs(c.center - tube.center)
            if d + c.outer_radius <= tube.inner_radius + GEOM_TOL:
                if best is None or tube.inner_radius < sys.conductors[best].inner_radius:
                    best = t
        parents.append(best)
    return parents


def validate_system(sys: CableSystem) -> CableSystem:
    """Check every geometric and material invariant; return ``sys`` unchanged."""
    _validate_layers(sys.layers)
    _validate_grid(sys.frequencies)
    for i, h in enumerate(sys.holes):
        if not h.radius > 0:
            raise ValidationError(f"hole {i}: radius must be positive")
        if not 0 <= h.layer < len(sys.layers):
            raise ValidationError(f"hole {i}: host layer {h.layer} does not exist")
        if h.harmonics < 0:
            raise ValidationError(f"hole {i}: negative harmonic order")
        bottom, top = layer_bounds(sys.layers, h.layer)
        if not (h.y + h.radius < top - GEOM_TOL and h.y - h.radius > bottom + GEOM_TOL):
            raise HoleBreachError(f"hole {i} crosses or touches an interface of layer {h.layer}")
    for i in range(len(sys.holes)):
        for j in range(i):
            hi, hj = sys.holes[i], sys.holes[j]
            if abs(hi.center - hj.center) < hi.radius + hj.radius - GEOM_TOL:
                raise OverlapError(f"holes {j} and {i} overlap")

    for p, c in enumerate(sys.conductors):
        if c.kind not in ("solid", "tubular"):
            raise ValidationError(f"conductor {p}: unknown kind {c.kind!r}")
        if not (c.outer_radius > 0 and c.conductivity > 0 and c.mu_r > 0):
            raise ValidationError(f"conductor {p}: radius, conductivity and mu_r must be positive")
        if c.is_tubular and not 0 < c.inner_radius < c.outer_radius:
            raise ValidationError(f"conductor {p}: tubular conductor needs 0 < inner < outer radius")
        if c.harmonics < 0:
            raise ValidationError(f"conductor {p}: negative harmonic order")
        if not 0 <= c.hole < len(sys.holes):
            raise TopologyError(f"conductor {p} references missing hole {c.hole}")
        h = sys.holes[c.hole]
        if abs(c.center - h.center) + c.outer_radius >= h.radius - GEOM_TOL:
            raise HoleBreachError(f"conductor {p} is not strictly inside hole {c.hole}")

    parents = containment(sys)
    for q, t in enumerate(parents):
        if t is not None and sys.conductors[t].hole != sys.conductors[q].hole:
            raise TopologyError(f"conductor {q} sits in the bore of conductor {t} from another hole")
    # walking up the parent chain must terminate
    for q in range(len(parents)):
        seen = set()
        node = q
        while parents[node] is not None:
            if node in seen:
                raise TopologyError("conductor containment is cyclic")
            seen.add(node)
            node = parents[node]

    for p in range(len(sys.conductors)):
        for q in range(p):
            if parents[p] == q or parents[q] == p:
                continue
            if _nested_below(parents, p, q) or _nested_below(parents, q, p):
                continue
            cp, cq = sys.conductors[p], sys.conductors[q]
            if cp.hole != cq.hole:
                continue
            if abs(cp.center - cq.center) < cp.outer_radius + cq.outer_radius - GEOM_TOL:
                raise OverlapError(f"conductors {q} and {p} overlap")
    return sys


def _nested_below(parents, inner, outer) -> bool:
    node = parents[inner]
    while node is not None:
        if node == outer:
            return True
        node = parents[node]
    return False


def _validate_layers(layers):
    if not layers:
        raise ValidationError("at least one layer is required")
    for l, layer in enumerate(layers):
        if layer.conductivity < 0:
            raise ValidationError(f"layer {l}: negative conductivity")
        if layer.eps_r < 1:
            raise ValidationError(f"layer {l}: eps_r must be >= 1")
        if layer.mu_r <= 0:
            raise ValidationError(f"layer {l}: mu_r must be positive")
        last = l == len(layers) - 1
        if not last and layer.bottom is None:
            raise ValidationError(f"layer {l}: lower interface ordinate missing")
    bottoms = [layer.bottom for layer in layers[:-1]]
    if any(b2 >= b1 for b1, b2 in zip(bottoms, bottoms[1:])):
        raise ValidationError("layer interfaces must strictly decrease downwards")


def _validate_grid(freqs):
    f = np.asarray(freqs, dtype=float)
    if f.size == 0:
        return
    if np.any(~np.isfinite(f)) or np.any(f <= 0):
        raise GridError("frequencies must be finite and strictly positive")
    if np.any(np.diff(f) <= 0):
        raise GridError("frequencies must be strictly ascending")


def require_grid(freqs):
    if len(freqs) == 0:
        raise GridError("empty frequency sweep")
    _validate_grid(freqs)
    return tuple(float(f) for f in freqs)

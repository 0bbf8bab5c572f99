"""JSON description files for cable systems.

Cables are described layer by layer from the core outwards (core radius,
then insulation, sheath and jacket thicknesses).  Each cable sits in its own
hole whose radius is the jacket's outer radius.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import ParseError
from .model import CableSystem, Conductor, Hole, Layer, validate_system

LENGTH_UNITS = {"m": 1.0, "mm": 1e-3}


@dataclass
class RunConfig:
    input: Path | None = None
    outdir: Path = Path("out")
    mode: str = "momso"
    screens: str = "none"
    sequence: bool = False
    convergence_check: bool = False
    strict: bool = False
    threads: int = 1
    dump_spectral: bool = False
    roles: tuple = ()
    meta: dict = field(default_factory=dict)


def _get(obj: dict, key: str, where: str, kind=float, default=None, required=True):
    if key not in obj:
        if required and default is None:
            raise ParseError(f"{where}: missing field '{key}'", f"{where}.{key}")
        return default
    try:
        return kind(obj[key])
    except (TypeError, ValueError) as exc:
        raise ParseError(f"{where}.{key}: {exc}", f"{where}.{key}") from None


def frequency_grid(spec) -> tuple:
    """A list of frequencies or a {start, stop, points_per_decade} log range."""
    if isinstance(spec, list):
        return tuple(float(f) for f in spec)
    if not isinstance(spec, dict):
        raise ParseError("frequencies must be a list or a log-range object", "frequencies")
    start = _get(spec, "start", "frequencies")
    stop = _get(spec, "stop", "frequencies")
    ppd = _get(spec, "points_per_decade", "frequencies", int)
    if start <= 0 or stop < start or ppd <= 0:
        raise ParseError("frequencies: need 0 < start <= stop and points_per_decade > 0", "frequencies")
    n = int(round(math.log10(stop / start) * ppd)) + 1
    return tuple(float(f) for f in np.logspace(math.log10(start), math.log10(stop), n))


def parse_system(doc: dict) -> CableSystem:
    units = doc.get("units", {})
    length = units.get("length", "m")
    if length not in LENGTH_UNITS:
        raise ParseError(f"units.length must be one of {sorted(LENGTH_UNITS)}", "units.length")
    if units.get("resistivity", "ohm_m") != "ohm_m":
        raise ParseError("units.resistivity must be 'ohm_m'", "units.resistivity")
    scale = LENGTH_UNITS[length]

    layers = []
    raw_layers = doc.get("layers")
    if not isinstance(raw_layers, list) or not raw_layers:
        raise ParseError("at least one entry in 'layers' is required", "layers")
    for i, L in enumerate(raw_layers):
        where = f"layers[{i}]"
        last = i == len(raw_layers) - 1
        bottom = None if last else _get(L, "bottom", where) * scale
        layers.append(
            Layer(
                conductivity=_get(L, "conductivity", where),
                eps_r=_get(L, "eps_r", where, default=1.0),
                mu_r=_get(L, "mu_r", where, default=1.0),
                bottom=bottom,
                name=str(L.get("name", f"layer{i}")),
            )
        )

    harm = doc.get("harmonics", {})
    n_cond = int(harm.get("conductor", 4))
    n_hole = int(harm.get("hole", 4))

    holes, conductors = [], []
    for i, cab in enumerate(doc.get("cables", [])):
        where = f"cables[{i}]"
        x = _get(cab, "x", where) * scale
        y = _get(cab, "y", where) * scale
        name = str(cab.get("name", f"cable{i}"))
        core = cab.get("core")
        if core is None:
            raise ParseError(f"{where}: missing field 'core'", f"{where}.core")
        r = _get(core, "radius", f"{where}.core") * scale
        r_in = _get(core, "inner_radius", f"{where}.core", default=0.0) * scale
        ins = cab.get("insulation", {})
        eps_hole = _get(ins, "eps_r", f"{where}.insulation", default=1.0)
        outer = r + _get(ins, "thickness", f"{where}.insulation") * scale
        hole_idx = len(holes)
        conductors.append(_conductor(core, f"{where}.core", x, y, r, r_in, hole_idx, n_cond, f"{name}.core"))
        if "sheath" in cab:
            sh = cab["sheath"]
            t = _get(sh, "thickness", f"{where}.sheath") * scale
            conductors.append(_conductor(sh, f"{where}.sheath", x, y, outer + t, outer, hole_idx, n_cond, f"{name}.sheath"))
            outer += t
        if "jacket" in cab:
            outer += _get(cab["jacket"], "thickness", f"{where}.jacket") * scale
        hole_r = _get(cab, "hole_radius", where, default=outer / scale) * scale
        holes.append(Hole(x, y, hole_r, eps_hole, 1.0, _host_layer(layers, y), n_hole))

    freqs = frequency_grid(doc["frequencies"]) if "frequencies" in doc else ()
    return CableSystem(tuple(layers), tuple(holes), tuple(conductors), freqs)


def _conductor(obj, where, x, y, outer, inner, hole, order, name):
    rho = _get(obj, "resistivity", where)
    if rho <= 0:
        raise ParseError(f"{where}.resistivity must be positive", f"{where}.resistivity")
    kind = "tubular" if inner > 0 else "solid"
    return Conductor(kind, x, y, outer, 1.0 / rho, hole, inner, 1.0, _get(obj, "mu_r", where, default=1.0), order, name)


def _host_layer(layers, y) -> int:
    for i, L in enumerate(layers):
        if L.bottom is None or y > L.bottom:
            return i
    return len(layers) - 1


def load_config(path) -> tuple[CableSystem, RunConfig]:
    path = Path(path)
    text = path.read_text()
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}", None) from None
    sys = parse_system(doc)
    validate_system(sys)
    roles = tuple("screen" if c.name.endswith(".sheath") else "core" for c in sys.conductors)
    return sys, RunConfig(input=path, roles=roles, meta={"description": doc.get("description", "")})

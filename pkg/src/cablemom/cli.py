"""Command-line front end."""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
import warnings
from pathlib import Path

import numpy as np

from .config import RunConfig, load_config
from .errors import CableModelError, UnsupportedGeometryError
from .green import spectral_samples
from .model import require_grid
from .reference import analytic_cable_Z
from .solver import ImpedanceResult, ReductionSpec, frequency_sweep, reduce_screens, sequence_components

FMT = "%.17e"
SEQUENCE_NOTE = "# symmetrical components: Z_seq = Ainv Z A, Ainv = (1/3)[[1,1,1],[1,a,a^2],[1,a^2,a]], a = exp(j 2 pi/3)"


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="cablemom", description="Series impedance of cables in layered media (MoM-SO).")
    p.add_argument("--input", required=True, type=Path, help="JSON system description")
    p.add_argument("--outdir", type=Path, default=Path("out"))
    p.add_argument("--mode", choices=("momso", "analytic", "compare"), default="momso")
    p.add_argument("--screens", choices=("none", "open", "grounded"), default="none")
    p.add_argument("--sequence", action="store_true", help="also report zero/positive-sequence impedances")
    p.add_argument("--convergence-check", action="store_true", help="re-run with doubled harmonic orders")
    p.add_argument("--threads", type=int, default=None, help="worker threads (default: $CABLEMOM_THREADS or 1)")
    p.add_argument("--strict", action="store_true", help="stop with exit status 2 on the first failed frequency")
    p.add_argument("--dump-spectral", action="store_true", help="write spectral integrand samples to spectral.csv")
    return p


def _threads(arg):
    if arg is not None:
        return max(1, arg)
    env = os.environ.get("CABLEMOM_THREADS", "")
    return max(1, int(env)) if env.strip() else 1


def _upper(n):
    return [(i, j) for i in range(n) for j in range(i, n)]


def write_impedance_csv(path: Path, freqs, mats, omega_scale=True):
    n = mats[0].shape[0]
    pairs = _upper(n)
    header = ["freq_hz"] + [f"R_{i + 1}_{j + 1}" for i, j in pairs] + [f"L_{i + 1}_{j + 1}" for i, j in pairs]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for f, Z in zip(freqs, mats):
            om = 2 * math.pi * f
            row = [FMT % f] + [FMT % Z[i, j].real for i, j in pairs] + [FMT % (Z[i, j].imag / om) for i, j in pairs]
            w.writerow(row)


def write_impedance_json(path: Path, freqs, mats, names, metadata):
    doc = {
        "frequencies_hz": [float(f) for f in freqs],
        "conductors": list(names),
        "R": [Z.real.tolist() for Z in mats],
        "L": [(Z.imag / (2 * math.pi * f)).tolist() for f, Z in zip(freqs, mats)],
        "metadata": metadata,
    }
    path.write_text(json.dumps(doc, indent=1))


def load_impedance_json(path) -> tuple[np.ndarray, list]:
    """Frequencies and complex Z matrices from an ``impedance.json`` file."""
    doc = json.loads(Path(path).read_text())
    freqs = np.array(doc["frequencies_hz"])
    mats = [np.array(R) + 1j * 2 * math.pi * f * np.array(L) for f, R, L in zip(freqs, doc["R"], doc["L"])]
    return freqs, mats


def _reduce(Z, cfg: RunConfig):
    if cfg.screens == "none":
        return Z
    return reduce_screens(Z, ReductionSpec(cfg.roles, cfg.screens))


def _names(sys_, cfg):
    names = [c.name or f"c{p}" for p, c in enumerate(sys_.conductors)]
    if cfg.screens == "none":
        return names
    return [n for n, r in zip(names, cfg.roles) if r == "core"]


def _sequence_rows(freqs, mats):
    rows = []
    for f, Z in zip(freqs, mats):
        s = sequence_components(Z)
        om = 2 * math.pi * f
        rows.append((f, s.zero.real, s.zero.imag / om, s.positive.real, s.positive.imag / om, s.leakage))
    return rows


def write_sequence_csv(path: Path, engines: dict):
    with open(path, "w", newline="") as fh:
        fh.write(SEQUENCE_NOTE + "\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["engine", "freq_hz", "R0", "L0", "R1", "L1", "leakage"])
        for name, rows in engines.items():
            for r in rows:
                w.writerow([name] + [FMT % v for v in r])


def run(sys_, cfg: RunConfig, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    freqs = require_grid(sys_.frequencies)
    outdir = Path(cfg.outdir)
    outdir.mkdir(parents=True, exist_ok=True)

    if cfg.dump_spectral:
        betas = np.logspace(-4, 4, 400)
        _, g = spectral_samples(sys_, 2 * math.pi * freqs[0], betas)
        with open(outdir / "spectral.csv", "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["beta", "re_G", "im_G"])
            for b, v in zip(betas, g):
                w.writerow([FMT % b, FMT % v.real, FMT % v.imag])

    failures = []
    engines = {}
    if cfg.mode in ("momso", "compare"):
        try:
            sweep = frequency_sweep(sys_, freqs, threads=cfg.threads, strict=cfg.strict)
        except CableModelError as exc:
            print(f"error: {type(exc).__name__}: {exc}", file=err)
            return 2
        failures = sweep.failures
        engines["momso"] = {r.frequency: r for r in sweep.results}
    if cfg.mode in ("analytic", "compare"):
        try:
            engines["analytic"] = {
                f: ImpedanceResult(f, analytic_cable_Z(sys_, f), {"engine": "analytic"}) for f in freqs
            }
        except UnsupportedGeometryError as exc:
            print(f"error: {exc}", file=err)
            return 1

    for f, msg in failures:
        print(f"failed at {f:g} Hz: {msg}", file=err)

    primary = "momso" if "momso" in engines else "analytic"
    done = [f for f in freqs if all(f in e for e in engines.values())]
    if not done:
        print("error: no frequency point succeeded", file=err)
        return 2
    mats = {k: [_reduce(e[f].Z, cfg) for f in done] for k, e in engines.items()}
    names = _names(sys_, cfg)
    meta = {
        "mode": cfg.mode,
        "screens": cfg.screens,
        "engine": primary,
        "failures": [[f, m] for f, m in failures],
    }
    if primary == "momso":
        meta["harmonics"] = {
            "conductor": [c.harmonics for c in sys_.conductors],
            "hole": [h.harmonics for h in sys_.holes],
        }
    write_impedance_csv(outdir / "impedance.csv", done, mats[primary])
    write_impedance_json(outdir / "impedance.json", done, mats[primary], names, meta)

    if cfg.mode == "compare":
        a, m = mats["analytic"], mats["momso"]
        n = a[0].shape[0]
        pairs = _upper(n)
        with open(outdir / "comparison.csv", "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["freq_hz"] + [f"dZ_{i + 1}_{j + 1}" for i, j in pairs] + ["max_dev"])
            for f, za, zm in zip(done, a, m):
                dev = [abs(zm[i, j] - za[i, j]) / abs(za[i, j]) for i, j in pairs]
                w.writerow([FMT % f] + [FMT % d for d in dev] + [FMT % max(dev)])

    if cfg.sequence:
        if mats[primary][0].shape != (3, 3):
            print("error: --sequence needs a 3x3 matrix; use --screens open or grounded", file=err)
            return 1
        write_sequence_csv(outdir / "sequence.csv", {k: _sequence_rows(done, v) for k, v in mats.items()})

    if cfg.convergence_check and "momso" in engines:
        hi = sys_.with_harmonics(
            2 * max(c.harmonics for c in sys_.conductors), 2 * max(h.harmonics for h in sys_.holes)
        )
        ref = frequency_sweep(hi, done, threads=cfg.threads, strict=cfg.strict)
        worst = 0.0
        with open(outdir / "convergence.csv", "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["freq_hz", "max_rel_change_R", "max_rel_change_L"])
            for r in ref.results:
                base = _reduce(engines["momso"][r.frequency].Z, cfg)
                fine = _reduce(r.Z, cfg)
                om = 2 * math.pi * r.frequency
                dR = np.max(np.abs(base.real - fine.real) / np.abs(fine.real))
                dL = np.max(np.abs(base.imag - fine.imag) / np.abs(fine.imag))
                worst = max(worst, dR, dL)
                w.writerow([FMT % r.frequency, FMT % dR, FMT % dL])
        print(f"convergence check: max relative change {worst:.3e} with doubled harmonic orders", file=out)

    print(f"wrote {len(done)} frequency points to {outdir}", file=out)
    if failures and cfg.strict:
        return 2
    return 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    warnings.simplefilter("default")
    try:
        sys_, cfg = load_config(args.input)
    except CableModelError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    cfg.outdir = args.outdir
    cfg.mode = args.mode
    cfg.screens = args.screens
    cfg.sequence = args.sequence
    cfg.convergence_check = args.convergence_check
    cfg.strict = args.strict
    cfg.threads = _threads(args.threads)
    cfg.dump_spectral = args.dump_spectral
    try:
        return run(sys_, cfg)
    except CableModelError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import special

from cablemom.errors import PassivityWarning, SingularSystemError, ValidationError
from cablemom.green import assemble_Gg
from cablemom.model import MU0, BoundaryIndex, CableSystem, Conductor, Hole, Layer
from cablemom.solver import (
    ReductionSpec,
    Solver,
    build_Psi,
    compute_Z,
    frequency_sweep,
    impedance,
    reduce_screens,
    selection_matrix,
    sequence_components,
    solve_hole_potential,
)
from cablemom import solver as solver_mod
from cablemom.admittance import holes_admittance

from conftest import SEABED, coax, example, gamma_of

VACUUM = Layer(0.0, 1.0, 1.0, None, "vacuum")


def test_hole_potential_without_contrast():
    rng = np.random.default_rng(0)
    G = rng.standard_normal((5, 5)) + 1j * rng.standard_normal((5, 5))
    T = rng.standard_normal((5, 3))
    J = rng.standard_normal(3) + 0j
    out = solve_hole_potential(G, np.zeros(5), T, MU0, J)
    assert np.allclose(out, MU0 * G @ T @ J, rtol=1e-14)
    assert np.all(solve_hole_potential(G, np.ones(5), T, MU0, np.zeros(3)) == 0)


def test_hole_potential_singular():
    G = np.eye(2)
    with pytest.raises(SingularSystemError) as info:
        solve_hole_potential(G, np.array([1 / MU0, 1 / MU0]), np.eye(2), MU0, np.ones(2))
    assert info.value.condition is not None


def test_concentric_unit_current_potential():
    sys_ = CableSystem((SEABED,), (Hole(0, 0, 0.0425, 1.0, 1.0, 0, 4),), (Conductor("solid", 0, 0, 0.02, 5.8e7, 0),))
    w = 2 * math.pi * 50
    s = Solver(sys_)
    G = assemble_Gg(sys_, w)
    J = np.zeros(9, dtype=complex)
    J[4] = 1.0
    A = solve_hole_potential(G, np.diag(holes_admittance(sys_, w)), s.mm.T, MU0, J)
    g = gamma_of(SEABED, w)
    # the hole medium differs from the layer, so only the n = 0 entry survives
    assert np.count_nonzero(np.abs(A) > 1e-15 * abs(A[4])) == 1
    ref = MU0 * special.kv(0, g * 0.0425) / (2 * math.pi * g * 0.0425 * special.kv(1, g * 0.0425))
    assert abs(A[4] - ref) <= 1e-10 * abs(ref)


def _two_wire(layer=VACUUM, hole_mu=1.0):
    return CableSystem(
        (layer,),
        (Hole(0.0, 0.0, 0.1, layer.eps_r, hole_mu, 0, 8),),
        (
            Conductor("solid", -0.04, 0.01, 0.02, 5.8e7, 0, harmonics=3),
            Conductor("solid", 0.035, -0.02, 0.025, 5.8e7, 0, harmonics=3),
        ),
    )


def test_psi_reduces_to_free_space_kernel():
    """Lossless host matching the hole: Psi is the K0 kernel, up to a monopole constant.

    In a lossless medium the branch of log(gamma) is a convention; it shifts
    every monopole-monopole entry by the same amount.
    """
    sys_ = _two_wire()
    w = 2 * math.pi * 50
    s = Solver(sys_)
    Psi = s.Psi(w)
    g = gamma_of(VACUUM, w)
    NQ = 128
    t = 2 * math.pi * np.arange(NQ) / NQ
    idx = s.index
    shift = None
    for p, bp in enumerate(idx.conductor_boundaries):
        for q, bq in enumerate(idx.conductor_boundaries):
            if p == q:
                n = np.arange(-3, 4)
                ref = np.diag(special.iv(n, g * bp.radius) * special.kv(n, g * bp.radius)) / (2 * math.pi)
            else:
                P = bp.center + bp.radius * np.exp(1j * t)
                Q = bq.center + bq.radius * np.exp(1j * t)
                K = special.kv(0, g * np.abs(P[:, None] - Q[None, :])) / (2 * math.pi)
                F = np.fft.fft(np.fft.ifft(K, axis=1), axis=0) / NQ
                n = np.arange(-3, 4) % NQ
                ref = F[np.ix_(n, n)]
            got = Psi[idx.slices()[p], idx.slices()[q]].copy()
            if shift is None:
                shift = got[3, 3] - MU0 * ref[3, 3]
                assert abs(abs(shift) / MU0 - 0.5) < 1e-9 or abs(shift) < 1e-12 * MU0
            got[3, 3] -= shift
            assert np.abs(got - MU0 * ref).max() <= 1e-6 * np.abs(MU0 * ref).max()


def test_build_psi_matches_solver():
    sys_ = _two_wire(SEABED)
    w = 2 * math.pi * 1e3
    s = Solver(sys_)
    G = assemble_Gg(sys_, w)
    Yh = holes_admittance(sys_, w)
    mm = s.mm
    ref = build_Psi(mm.M_in, G, Yh, mm.T, mm.G0, mm.Gc, MU0, MU0)
    assert np.linalg.norm(s.Psi(w, G) - ref) <= 1e-12 * np.linalg.norm(ref)


def test_hole_permeability_enters_interior_terms():
    w = 2 * math.pi * 50
    a = impedance(_two_wire(SEABED, 1.0), 50.0).Z
    b = impedance(_two_wire(SEABED, 2.0), 50.0).Z
    assert np.all(b.imag > a.imag)


def _mirror_pair():
    layers = (Layer(0.0, 1.0, 1.0, 0.0), SEABED)
    holes = (Hole(-0.5, -1.0, 0.05, 2.0, 1.0, 1), Hole(0.5, -1.0, 0.05, 2.0, 1.0, 1))
    conds = (Conductor("solid", -0.51, -1.0, 0.02, 3e7, 0), Conductor("solid", 0.51, -1.0, 0.02, 3e7, 1))
    return CableSystem(layers, holes, conds)


def test_mirror_symmetry():
    s = Solver(_mirror_pair())
    for f in (1.0, 1e3, 1e5):
        Z = s.at(f).Z
        assert abs(Z[0, 0] - Z[1, 1]) <= 1e-12 * abs(Z[0, 0])
        Psi = s.Psi(2 * math.pi * f)
        perm = s.index.flip()
        assert np.linalg.norm(Psi - Psi.T[perm][:, perm]) <= 1e-6 * np.linalg.norm(Psi)


def test_gauge_invariance_coax():
    a, b = Solver(coax()), Solver(coax(), gauge=-7.0)
    for f in (1.0, 1e4):
        za, zb = a.at(f).Z, b.at(f).Z
        assert np.abs(za - zb).max() <= 1e-9 * np.abs(za).max()


def test_compute_z_scalar():
    r = compute_Z(np.array([[2.0 + 0j]]), np.zeros((1, 1)), np.ones((1, 1)), 1.0, 1.0)
    assert r.Z[0, 0] == 0.5 and r.R[0, 0] == 0.5 and r.L[0, 0] == 0.0


def test_compute_z_passivity_warning():
    with pytest.warns(PassivityWarning):
        compute_Z(np.array([[-2.0 + 0j]]), np.zeros((1, 1)), np.ones((1, 1)), 1.0)


def test_compute_z_rejects_asymmetry():
    Y = np.array([[1.0, 0.5], [0.0, 1.0]], dtype=complex)
    with pytest.raises(SingularSystemError):
        compute_Z(Y, np.zeros((2, 2)), np.eye(2), 1.0)


def test_compute_z_singular():
    with pytest.raises(SingularSystemError):
        compute_Z(np.zeros((2, 2), dtype=complex), np.zeros((2, 2)), np.eye(2), 1.0)


def test_selection_matrix_sums_tube_surfaces():
    sys_ = coax()
    idx = BoundaryIndex.from_system(sys_)
    U = selection_matrix(sys_, idx)
    assert U.shape == (27, 2)
    assert U[:, 0].sum() == 1 and U[:, 1].sum() == 2
    assert U[idx.slot(1, 0), 1] == 1 and U[idx.slot(2, 0), 1] == 1


def test_result_views():
    r = impedance(coax(), 50.0)
    assert np.allclose(r.R + 1j * r.omega * r.L, r.Z)
    assert r.metadata["conductor_harmonics"] == [4, 4]


# reductions -------------------------------------------------------------


def test_kron_hand_example():
    Z = np.array([[2.0, 1.0], [1.0, 2.0]])
    assert reduce_screens(Z, ReductionSpec(("core", "screen"), "grounded"))[0, 0] == 1.5


def test_open_screens_keep_core_block():
    rng = np.random.default_rng(1)
    Z = rng.standard_normal((4, 4))
    Z = Z + Z.T
    spec = ReductionSpec(("core", "screen", "core", "screen"), "open")
    assert np.array_equal(reduce_screens(Z, spec), Z[np.ix_([0, 2], [0, 2])])
    assert np.array_equal(reduce_screens(Z, ReductionSpec(spec.roles, "none")), Z)


def test_grounded_block_diagonal_unchanged():
    Z = np.diag([1.0, 2.0, 3.0]) + 0j
    Z[0, 2] = Z[2, 0] = 0.5
    spec = ReductionSpec(("core", "screen", "core"), "grounded")
    assert np.array_equal(reduce_screens(Z, spec), Z[np.ix_([0, 2], [0, 2])])


def test_reduction_spec_validation():
    with pytest.raises(ValueError):
        ReductionSpec(("screen", "screen"))
    with pytest.raises(ValueError):
        ReductionSpec(("core",), "shorted")
    with pytest.raises(ValueError):
        reduce_screens(np.eye(3), ReductionSpec(("core", "screen")))


def test_grounded_singular_screen_block():
    Z = np.array([[1.0, 0.0], [0.0, 0.0]])
    with pytest.raises(SingularSystemError):
        reduce_screens(Z, ReductionSpec(("core", "screen"), "grounded"))


@settings(max_examples=50, deadline=None)
@given(zs=st.complex_numbers(max_magnitude=1e3), zm=st.complex_numbers(max_magnitude=1e3))
def test_balanced_sequence_identities(zs, zm):
    Z = np.full((3, 3), zm, dtype=complex) + np.eye(3) * (zs - zm)
    s = sequence_components(Z)
    scale = max(abs(zs), abs(zm), 1.0)
    assert abs(s.zero - (zs + 2 * zm)) <= 1e-12 * scale
    assert abs(s.positive - (zs - zm)) <= 1e-12 * scale
    assert s.leakage <= 1e-12 * scale


def test_identity_sequences():
    s = sequence_components(np.eye(3))
    assert s.zero == pytest.approx(1) and s.positive == pytest.approx(1)


def test_flat_formation_leakage():
    Z = np.array([[2.0, 0.8, 0.5], [0.8, 2.1, 0.8], [0.5, 0.8, 2.0]]) + 1j * np.eye(3)
    s = sequence_components(Z)
    assert s.leakage > 1e-3
    P = np.roll(np.eye(3), 1, axis=0)
    circ = sum(np.linalg.matrix_power(P, k) @ Z @ np.linalg.matrix_power(P, k).T for k in range(3)) / 3
    eig = np.linalg.eigvals(circ)
    for v in (s.zero, s.positive):
        assert np.min(np.abs(eig - v)) <= 1e-12
    with pytest.raises(ValueError):
        sequence_components(np.eye(2))


# sweeps -------------------------------------------------------------------


def test_one_point_sweep_matches_single_shot():
    sys_ = coax()
    sweep = frequency_sweep(sys_, [50.0])
    assert np.array_equal(sweep.results[0].Z, Solver(sys_).at(50.0).Z)


def test_sweep_is_sorted_and_collects_failures(monkeypatch):
    sys_ = coax()
    real = Solver.at

    def flaky(self, f):
        if f == 100.0:
            raise SingularSystemError("forced", 1e20)
        return real(self, f)

    monkeypatch.setattr(Solver, "at", flaky)
    sweep = frequency_sweep(sys_, [10.0, 100.0, 1000.0], threads=3)
    assert [r.frequency for r in sweep.results] == [10.0, 1000.0]
    assert sweep.failures[0][0] == 100.0 and "forced" in sweep.failures[0][1]
    assert not sweep.ok
    with pytest.raises(SingularSystemError):
        frequency_sweep(sys_, [10.0, 100.0], strict=True)


def test_sweep_thread_env(monkeypatch):
    monkeypatch.setenv("CABLEMOM_THREADS", "3")
    sweep = frequency_sweep(coax(), [1.0, 10.0, 100.0])
    ref = frequency_sweep(coax(), [1.0, 10.0, 100.0], threads=1)
    assert all(np.array_equal(a.Z, b.Z) for a, b in zip(sweep.results, ref.results))


def test_sweep_rejects_empty_grid():
    with pytest.raises(ValidationError):
        frequency_sweep(coax(), [])


@pytest.mark.parametrize("name", ["three_sc_submarine", "three_sc_submarine_2m"])
def test_skin_effect_monotone(name):
    sys_, _ = example(name)
    s = Solver(sys_)
    R = np.array([np.diag(s.at(f).R) for f in np.logspace(3, 6, 16)])
    assert np.all(np.diff(R, axis=0) >= 0)


def test_zero_sequence_exceeds_positive(example2):
    sys_, cfg = example2
    Z = reduce_screens(Solver(sys_).at(50.0).Z, ReductionSpec(cfg.roles, "open"))
    s = sequence_components(Z)
    assert s.zero.imag >= s.positive.imag

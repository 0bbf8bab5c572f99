import math
import warnings

import numpy as np
import pytest

from cablemom.errors import RangeWarning, UnsupportedGeometryError
from cablemom.model import MU0, CableSystem, Conductor, Hole, Layer
from cablemom.reference import (
    analytic_cable_Z,
    coaxial_gap,
    ground_return_uniform,
    pollaczek,
    saad,
    schelkunoff_solid,
    schelkunoff_tube,
)

from conftest import CORE_R, CORE_SIGMA, SEABED, SHEATH_IN, SHEATH_OUT, SHEATH_SIGMA, coax, single_conductor

W50 = 2 * math.pi * 50


def test_solid_dc_limit():
    z = schelkunoff_solid(CORE_R, CORE_SIGMA, MU0, 2 * math.pi * 0.01)
    dc = 1 / (CORE_SIGMA * math.pi * CORE_R**2)
    assert abs(z.real - dc) <= 1e-4 * dc
    # internal inductance mu/(8 pi)
    assert z.imag / (2 * math.pi * 0.01) == pytest.approx(MU0 / (8 * math.pi), rel=1e-4)


def test_solid_high_frequency_asymptote():
    w = 2 * math.pi * 1e7
    delta = math.sqrt(2 / (w * MU0 * CORE_SIGMA))
    ref = (1 + 1j) / (2 * math.pi * CORE_R * CORE_SIGMA * delta)
    z = schelkunoff_solid(CORE_R, CORE_SIGMA, MU0, w)
    assert abs(z - ref) <= 0.01 * abs(ref)


def test_solid_rejects_bad_input():
    with pytest.raises(ValueError):
        schelkunoff_solid(0.0, 1.0, MU0, 1.0)


def test_tube_dc_limit():
    w = 2 * math.pi * 0.01
    dc = 1 / (SHEATH_SIGMA * math.pi * (SHEATH_OUT**2 - SHEATH_IN**2))
    for z in schelkunoff_tube(SHEATH_OUT, SHEATH_IN, SHEATH_SIGMA, MU0, w):
        assert abs(z.real - dc) <= 1e-4 * dc


def test_thin_tube_transfer():
    a, t = 0.05, 1e-5
    z_in, z_out, z_m = schelkunoff_tube(a, a - t, 1e7, MU0, W50)
    ref = 1 / (2 * math.pi * a * 1e7 * t)
    assert abs(z_m - ref) <= 1e-3 * ref
    assert abs(z_in - z_out) <= 1e-3 * abs(z_m)


def test_tube_transfer_decays_through_wall():
    zs = [abs(schelkunoff_tube(SHEATH_OUT, SHEATH_OUT - 0.005, SHEATH_SIGMA, MU0, 2 * math.pi * f)[2]) for f in (1e2, 1e4, 1e6)]
    assert zs[0] > zs[1] > zs[2]


def test_tube_rejects_bad_radii():
    with pytest.raises(ValueError):
        schelkunoff_tube(0.01, 0.02, 1e7, MU0, W50)


def test_coaxial_gap():
    assert coaxial_gap(math.e, 1.0, MU0, W50) == pytest.approx(1j * W50 * 2e-7)


@pytest.mark.parametrize("x", [0.02, 0.5, 5.0])
def test_saad_tracks_pollaczek(x):
    a = pollaczek(1.0, 1.0, x, 0.05, MU0, W50)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        b = saad(1.0, 1.0, x, 0.05, MU0, W50)
    assert abs(a - b) <= 0.01 * abs(a)


def test_ground_return_symmetric():
    a = ground_return_uniform(1.0, 2.0, 0.3, 0.05, MU0, W50, "pollaczek")
    b = ground_return_uniform(2.0, 1.0, 0.3, 0.05, MU0, W50, "pollaczek")
    assert abs(a - b) <= 1e-10 * abs(a)
    assert ground_return_uniform(1.0, 2.0, 0.3, 0.05, MU0, W50) == ground_return_uniform(2.0, 1.0, 0.3, 0.05, MU0, W50)


def test_ground_return_edge_cases():
    assert ground_return_uniform(1.0, 1.0, 0.1, math.inf, MU0, W50) == 0
    with pytest.raises(ValueError):
        ground_return_uniform(-1.0, 1.0, 0.1, 0.05, MU0, W50)
    with pytest.raises(ValueError):
        ground_return_uniform(1.0, 1.0, 0.1, 0.0, MU0, W50)
    with pytest.raises(ValueError):
        ground_return_uniform(1.0, 1.0, 0.1, 0.05, MU0, W50, "carson")


def test_saad_range_warning():
    with pytest.warns(RangeWarning):
        saad(1.0, 1.0, 100.0, 5.0, MU0, 2 * math.pi * 1e4)


def _buried(sys_):
    air = Layer(0.0, 1.0, 1.0, 0.0, "air")
    return CableSystem((air, SEABED), tuple(h.__class__(h.x, -1.0, h.radius, h.eps_r, h.mu_r, 1, h.harmonics) for h in sys_.holes),
                       tuple(c.__class__(c.kind, c.x, -1.0, c.outer_radius, c.conductivity, 0, c.inner_radius, c.eps_r, c.mu_r, c.harmonics, c.name) for c in sys_.conductors))


def test_single_core_identity():
    sys_ = _buried(single_conductor())
    Z = analytic_cable_Z(sys_, 50.0)
    hole = sys_.holes[0]
    ref = (
        schelkunoff_solid(CORE_R, CORE_SIGMA, MU0, W50)
        + coaxial_gap(hole.radius, CORE_R, MU0, W50)
        + ground_return_uniform(1.0, 1.0, hole.radius, SEABED.conductivity, MU0, W50)
    )
    assert Z.shape == (1, 1) and abs(Z[0, 0] - ref) <= 1e-14 * abs(ref)


def test_coax_loop_impedance():
    sys_ = _buried(coax())
    Z = analytic_cable_Z(sys_, 50.0)
    z_in, _, z_m = schelkunoff_tube(SHEATH_OUT, SHEATH_IN, SHEATH_SIGMA, MU0, W50)
    loop = Z[0, 0] - 2 * Z[0, 1] + Z[1, 1]
    ref = schelkunoff_solid(CORE_R, CORE_SIGMA, MU0, W50) + coaxial_gap(SHEATH_IN, CORE_R, MU0, W50) + z_in
    assert abs(loop - ref) <= 1e-12 * abs(ref)
    assert Z[0, 1] == Z[1, 0]


def test_example_matrix_structure(example1):
    sys_, _ = example1
    Z = analytic_cable_Z(sys_, 50.0)
    assert Z.shape == (6, 6)
    assert np.array_equal(Z, Z.T)
    # mutual terms between cables do not depend on core or sheath
    assert Z[0, 2] == Z[1, 3] == Z[0, 3]


def test_pollaczek_method_close_to_saad(example2):
    sys_, _ = example2
    a = analytic_cable_Z(sys_, 50.0, "saad")
    b = analytic_cable_Z(sys_, 50.0, "pollaczek")
    assert np.abs(a - b).max() <= 0.01 * np.abs(b).max()


def test_unsupported_geometries():
    off = CableSystem(
        (Layer(0.0, 1.0, 1.0, 0.0), SEABED),
        (Hole(0.0, -1.0, 0.05, 2.0, 1.0, 1),),
        (Conductor("solid", 0.01, -1.0, 0.02, 3e7, 0),),
    )
    with pytest.raises(UnsupportedGeometryError):
        analytic_cable_Z(off, 50.0)
    with pytest.raises(UnsupportedGeometryError):
        analytic_cable_Z(single_conductor(), 50.0)

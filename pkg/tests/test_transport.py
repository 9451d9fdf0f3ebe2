import mpmath as mp
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from gcflux.cases import LAMBDA_ILL, LAMBDA_TC3, VELOCITY_TC123
from gcflux.errors import SingularTensor
from gcflux.mesh import build_mesh
from gcflux.transport import (
    a_sg,
    advective_flux_coeffs,
    expm1mx,
    lambda_sigma,
    lambda_sigma_edge,
    local_advective_coeffs,
    local_peclet,
    peclet_eigen,
    peclet_grid,
)

mp.mp.dps = 50


def a_sg_ref(t):
    t = mp.mpf(t)
    if t == 0:
        return mp.mpf(0)
    return -t / (mp.exp(-t) - 1) - 1


def test_a_sg_values():
    assert a_sg(0.0) == 0.0
    assert np.isclose(a_sg(1.0), 0.581976706869326, rtol=1e-14)
    assert np.isclose(a_sg(3.7) - a_sg(-3.7), 3.7, rtol=1e-15)


@pytest.mark.parametrize(
    "t", [1e-12, -1e-12, 3e-5, -9.9e-5, 1.01e-4, 1e-3, -0.05, 0.099, 0.11, 1.0, -1.0, 7.3, -20.0, 35.0, 499.0, -499.0, 501.0, -501.0, 1e4, -1e4]
)
def test_a_sg_extended_precision(t):
    ref = a_sg_ref(t)
    got = a_sg(t)
    if ref == 0:
        assert got == 0
    else:
        assert abs(got - float(ref)) <= 1e-12 * abs(float(ref))


def test_expm1mx_small_and_large():
    for x in (1e-9, -3e-4, 0.05, -0.09, 0.5, -3.0, 20.0):
        ref = float(mp.expm1(x) - x)
        assert abs(expm1mx(x) - ref) <= 1e-14 * abs(ref)


@given(st.floats(-700, 700, allow_nan=False))
def test_a_sg_identity(t):
    assert abs((a_sg(t) - a_sg(-t)) - t) <= 1e-9 * max(1.0, abs(t))


def test_a_sg_monotone_and_bounded():
    t = np.linspace(-50, 50, 10_000)
    a = a_sg(t)
    # non-decreasing; -1 + t exp(t) saturates to -1 in double precision near t = -50
    assert np.all(np.diff(a) >= 0)
    assert np.all(np.diff(a)[t[1:] > -30] > 0)
    assert np.all(a >= -1)
    # A_sg takes the sign of its argument
    assert np.all(np.sign(a) == np.sign(t))


def test_advective_constant_state():
    c = 1.7
    for v in (-3.0, 0.0, 0.2, 40.0):
        co = advective_flux_coeffs(0.5, 0.25, v, 0.3)
        assert np.isclose(co.coeff_cell * c + co.coeff_edge * c, 0.5 * v * c, rtol=1e-14, atol=1e-15)
    co = advective_flux_coeffs(1.0, 1.0, 0.0, 1.0)
    assert co.coeff_cell == 0.0 and co.coeff_edge == 0.0


def test_advective_upwind_limit():
    v = 1e6
    co = advective_flux_coeffs(1.0, 1.0, v, 1.0)
    # F^A = V c_K + (lambda / d)(c_sigma - c_K): upwind plus an O(lambda / d) term
    assert np.isclose(co.coeff_cell, v - 1.0, rtol=1e-12)
    assert co.coeff_edge == 1.0
    co = advective_flux_coeffs(1.0, 1.0, -v, 1.0)
    assert np.isclose(co.coeff_cell, -1.0) and np.isclose(co.coeff_edge, -(v - 1.0), rtol=1e-12)


@given(st.floats(-1e3, 1e3), st.floats(0.01, 1.0), st.floats(-5.0, 5.0))
def test_advective_conservative(v, lam, c):
    """Opposite sides of an edge see mirrored coefficients.

    ``F^A_K + F^A_L`` then vanishes for any shared state; for general
    states the edge row of the hybrid system enforces conservation.
    """
    a = advective_flux_coeffs(0.1, 0.05, v, lam)
    b = advective_flux_coeffs(0.1, 0.05, -v, lam)
    assert a.coeff_edge == -b.coeff_cell
    assert b.coeff_edge == -a.coeff_cell
    fk = a.coeff_cell * c + a.coeff_edge * c
    fl = b.coeff_cell * c + b.coeff_edge * c
    assert abs(fk + fl) <= 1e-13 * max(abs(fk), abs(c), 1e-300)


def test_lambda_sigma_variants():
    assert np.isclose(lambda_sigma_edge(LAMBDA_ILL, LAMBDA_ILL, (1, 0), "eigenvalue"), 1e-8, rtol=1e-7)
    assert np.isclose(lambda_sigma_edge(LAMBDA_ILL, LAMBDA_ILL, (1, 0), "grid"), (1 + 1e-8) / 2)
    for variant in ("grid", "eigenvalue"):
        assert lambda_sigma_edge(np.eye(2), np.eye(2), (0, 1), variant) == 1.0
        assert lambda_sigma_edge(5 * np.eye(2), None, (0, 1), variant) == 1.0
    m = build_mesh(3, 3)
    T = np.broadcast_to(LAMBDA_TC3, (9, 2, 2))
    lam = lambda_sigma(m, T, "grid")
    assert np.allclose(lam[m.edge_axis == 0], 1.0)
    assert np.allclose(lam[m.edge_axis == 1], 1e-8)
    with pytest.raises(ValueError):
        lambda_sigma(m, T, "bogus")


def test_peclet_ill_example():
    v = VELOCITY_TC123
    ex = peclet_eigen(1.0, v, (1, 0), LAMBDA_ILL).value
    ey = peclet_eigen(1.0, v, (0, 1), LAMBDA_ILL).value
    assert np.isclose(ex, -5e7, rtol=1e-6) and np.isclose(ey, 5e7, rtol=1e-6)
    gx = peclet_grid(1.0, v, (1, 0), LAMBDA_ILL, LAMBDA_ILL).value
    gy = peclet_grid(1.0, v, (0, 1), LAMBDA_ILL, LAMBDA_ILL).value
    assert np.isclose(gx, 2.0, rtol=1e-7) and np.isclose(gy, 4.0, rtol=1e-7)


def test_peclet_tc3_magnitudes():
    v = VELOCITY_TC123
    ex = peclet_eigen(1.0, v, (1, 0), LAMBDA_TC3).value
    ey = peclet_eigen(1.0, v, (0, 1), LAMBDA_TC3).value
    # Lambda^{-1} V = (-39998, 599980000); the quoted 3.99e4 and 5.99e8 are truncations
    assert np.isclose(ex, -39998.0, rtol=1e-10) and int(abs(ex) // 100) == 399
    assert np.isclose(ey, 5.9998e8, rtol=1e-10) and int(abs(ey) // 1e6) == 599
    gx = peclet_grid(1.0, v, (1, 0), LAMBDA_TC3, LAMBDA_TC3).value
    gy = peclet_grid(1.0, v, (0, 1), LAMBDA_TC3, LAMBDA_TC3).value
    assert np.isclose(gx, 0.666, rtol=2e-3) and np.isclose(gy, 2e8, rtol=1e-12)


def test_peclet_scalar_tensor_agree():
    T = 0.3 * np.eye(2)
    v = np.array([1.3, -0.4])
    for n in ((1, 0), (0, 1), (-1, 0)):
        assert peclet_grid(0.1, v, n, T, T).value == pytest.approx(peclet_eigen(0.1, v, n, T).value, rel=1e-15)


def test_peclet_eigen_singular():
    with pytest.raises(SingularTensor):
        peclet_eigen(1.0, [1.0, 1.0], (1, 0), np.diag([1.0, 1e-17]))


@pytest.mark.parametrize("variant", ["grid", "eigen"])
def test_local_peclet_antisymmetric_constant_tensor(variant, rng):
    m = build_mesh(4, 4)
    T = np.broadcast_to(LAMBDA_TC3, (16, 2, 2)).copy()
    v = rng.normal(size=(m.n_edges, 2))
    P = local_peclet(m, T, v, variant)
    nb = m.neighbors
    for k in range(m.n_cells):
        for s in range(4):
            L = nb[k, s]
            if L < 0:
                assert np.isnan(P[k, s])
            else:
                e = m.cell_edges[k, s]
                s_l = int(np.flatnonzero(m.cell_edges[L] == e)[0])
                assert P[k, s] == -P[L, s_l]


def test_local_peclet_grid_heterogeneous_sign(rng):
    m = build_mesh(4, 4)
    T = np.array([np.diag(rng.uniform(0.01, 2, 2)) for _ in range(16)])
    v = rng.normal(size=(m.n_edges, 2))
    P = local_peclet(m, T, v, "grid")
    vn = np.einsum("kse,se->ks", v[m.cell_edges], np.array([[-1, 0], [1, 0], [0, -1], [0, 1]]))
    ok = m.neighbors >= 0
    assert np.all(np.sign(P[ok]) == np.sign(vn[ok]))


def test_local_advective_coeffs_shape():
    m = build_mesh(3, 2)
    cc, ce = local_advective_coeffs(m, np.zeros((m.n_cells, 4)), np.ones(m.n_edges))
    assert cc.shape == (6, 4) and np.all(cc == 0) and np.all(ce == 0)

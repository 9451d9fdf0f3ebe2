import mpmath as mp
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import random_spd
from gcflux.assembly import homogeneous_forms
from gcflux.cf1d import inhomogeneous_flux_1d
from gcflux.cflux import (
    alpha_coordinate,
    cross_flux,
    inhomogeneous_contributions,
    source_flux,
    z_function,
)
from gcflux.errors import DegenerateSegment, DomainError
from gcflux.mesh import OPPOSITE, build_mesh
from gcflux.transport import local_peclet

mp.mp.dps = 60


def z_ref(P, a):
    P, a = mp.mpf(P), mp.mpf(a)
    if P == 0:
        return a * a / 2
    return (mp.exp(a * P) - 1 - a * P) / (P * (mp.exp(P) - 1))


P_GRID = [0.0, 1e-12, -1e-12, 1e-9, -3e-6, 5e-5, -9e-5, 1.2e-4, -0.3, 0.5, 1.0, -1.0, 2.5, -7.0, 30.0, -45.0, 499.0, -499.0, 650.0, -800.0, 1e5, -1e5]
A_GRID = [0.0, 1e-3, 0.1, 1 / 3, 0.5, 0.77, 0.999, 1.0]


@pytest.mark.parametrize("P", P_GRID)
def test_z_extended_precision(P):
    for a in A_GRID:
        ref = float(z_ref(P, a))
        got = float(z_function(P, a))
        assert abs(got - ref) <= 1e-10 * abs(ref) + 1e-300, (P, a, got, ref)


def test_z_examples():
    assert z_function(0.0, 0.5) == 0.125
    assert np.isclose(z_function(1e-14, 0.5), 0.125, rtol=1e-12)
    assert np.isclose(z_function(1.0, 0.5), 0.0865523154, rtol=1e-9)
    assert np.all(z_function(np.array([-50.0, -1.0, 0.0, 3.0, 900.0]), 0.0) == 0.0)


def test_z_limits_sampled():
    a = np.linspace(0, 1, 41)
    assert np.allclose(z_function(1e-13, a), a**2 / 2, rtol=0, atol=1e-9)
    assert np.allclose(z_function(1e9, a), 0.0, rtol=0, atol=1e-9)
    assert np.allclose(z_function(-1e12, a), a, rtol=0, atol=1e-9)


@given(st.floats(-1e4, 1e4), st.floats(0, 1))
def test_z_bounds(P, a):
    z = z_function(P, a)
    assert -1e-300 <= z <= a * (1 + 1e-12)


@given(st.floats(0, 1), st.floats(-200, 200), st.floats(0.01, 50))
def test_z_monotone_decreasing(a, P, dP):
    assert z_function(P + dP, a) <= z_function(P, a) * (1 + 1e-12) + 1e-300


def test_z_domain():
    with pytest.raises(DomainError):
        z_function(1.0, 1.5)
    with pytest.raises(DomainError):
        z_function(1.0, -0.1)


def test_alpha_coordinate():
    assert alpha_coordinate((0, 0), (1, 0), (0.5, 0.3)) == 0.5
    assert np.isclose(alpha_coordinate((0, 0), (3, 0), (1, 0)), 1 / 3)
    a = alpha_coordinate((0.2, 0.1), (0.2, 0.9), (0.2, 0.4))
    b = alpha_coordinate((0.2, 0.9), (0.2, 0.1), (0.2, 0.4))
    assert np.isclose(a + b, 1.0)
    with pytest.raises(DegenerateSegment):
        alpha_coordinate((1, 1), (1, 1), (1, 1))


def test_source_flux_examples():
    assert source_flux(0.1, 0.1, 3.0, 0.5, 0.0, 0.0) == 0.0
    h, s = 0.25, 1.7
    # P = 0, alpha = 1/2: the two halves cancel
    assert source_flux(h, h, 0.0, 0.5, s, s) == 0.0


@given(
    st.floats(0.01, 0.99), st.floats(-300, 300), st.floats(1e-3, 2.0), st.floats(-5, 5), st.floats(-5, 5)
)
def test_source_flux_matches_1d_bitwise(alpha, P, dx, s_k, s_l):
    two_d = source_flux(dx, 1.0, P, alpha, s_k, s_l)
    one_d = inhomogeneous_flux_1d(s_k, s_l, P, alpha, dx)
    assert two_d == one_d


@given(st.floats(0.01, 0.99), st.floats(-300, 300), st.floats(-5, 5), st.floats(-5, 5))
def test_source_flux_antisymmetric(alpha, P, s_k, s_l):
    fk = source_flux(0.3, 0.2, P, alpha, s_k, s_l)
    fl = source_flux(0.3, 0.2, -P, 1.0 - alpha, s_l, s_k, one_minus_alpha=alpha)
    assert fk == -fl


def test_cross_flux_uniform_zero_peclet():
    h = 0.1
    fk = [{1: 1.0}, {2: 1.0}]
    fl = [{3: 1.0}, {4: 1.0}]
    form = cross_flux(h, 0.0, 0.5, fk, fl, [h, h], [h, h])
    assert form == pytest.approx({1: 0.125, 2: 0.125, 3: -0.125, 4: -0.125}, rel=1e-15)
    assert cross_flux(h, 3.0, 0.5, [{}, {}], [{}, {}], [h, h], [h, h]) == {}


def test_cross_flux_antisymmetric():
    fk = [{1: 0.3, 7: -1.0}, {2: 2.0}]
    fl = [{3: 1.1}, {4: -0.4, 7: 0.5}]
    a = cross_flux(0.2, 4.2, 0.3, fk, fl, [0.1, 0.1], [0.1, 0.1])
    b = cross_flux(0.2, -4.2, 0.7, fl, fk, [0.1, 0.1], [0.1, 0.1])
    assert set(a) == set(b)
    for dof in a:
        assert a[dof] == pytest.approx(-b[dof], rel=1e-14, abs=1e-15)


def _random_setup(rng, variant):
    m = build_mesh(4, 4, bounds=(0.0, 1.0, 0.0, 0.8))
    if variant == "grid":
        T = np.array([random_spd(rng) for _ in range(m.n_cells)])
    else:
        # the eigenvector-based number uses Lambda_K only: antisymmetric for constant Lambda
        T = np.broadcast_to(random_spd(rng), (m.n_cells, 2, 2)).copy()
    v = rng.normal(scale=10, size=(m.n_edges, 2))
    s = rng.normal(size=m.n_cells)
    P = local_peclet(m, T, v, variant)
    forms = homogeneous_forms(m, T, v)
    return m, forms, inhomogeneous_contributions(m, s, P)


@pytest.mark.parametrize("variant", ["grid", "eigen"])
def test_inhomogeneous_conservative_coefficients(variant, rng):
    for _ in range(5):
        m, forms, inh = _random_setup(rng, variant)
        nb = m.neighbors
        for k in range(m.n_cells):
            for s in range(4):
                L = nb[k, s]
                if L < 0:
                    assert inh.source[k, s] == 0 and inh.linear_form(m, forms.H, k, s) == (0.0, {})
                    continue
                ck, fk = inh.linear_form(m, forms.H, k, s)
                cl, fl = inh.linear_form(m, forms.H, L, OPPOSITE[s])
                assert abs(ck + cl) <= 1e-13 * max(abs(ck), 1e-300)
                scale = max(abs(v) for v in fk.values())
                for dof in set(fk) | set(fl):
                    assert abs(fk.get(dof, 0.0) + fl.get(dof, 0.0)) <= 1e-13 * scale


def test_inhomogeneous_evaluate_matches_forms(rng):
    m, forms, inh = _random_setup(rng, "grid")
    x = rng.normal(size=m.n_dofs)
    vals = inh.evaluate(m, forms.H, x)
    for k in range(m.n_cells):
        for s in range(4):
            c, f = inh.linear_form(m, forms.H, k, s)
            assert np.isclose(vals[k, s], c + sum(v * x[d] for d, v in f.items()), rtol=1e-12, atol=1e-14)


def test_two_cell_hand_evaluation():
    """2x1 mesh, constant source, V = 0, Lambda = I."""
    m = build_mesh(2, 1, bounds=(0.0, 2.0, 0.0, 1.0))
    T = np.broadcast_to(np.eye(2), (2, 2, 2)).copy()
    v = np.zeros((m.n_edges, 2))
    s = np.array([3.0, 3.0])
    inh = inhomogeneous_contributions(m, s, local_peclet(m, T, v))
    forms = homogeneous_forms(m, T, v)
    # east edge of cell 0: |sigma| = 1, |x_K - x_L| = 1, Z(0, 1/2) = 1/8
    assert inh.source[0, 1] == 1.0 * 1.0 * (0.125 * 3.0 - 0.125 * 3.0)
    assert np.allclose(inh.wk[0, 1], [1 / 8, 1 / 8]) and np.allclose(inh.wl[0, 1], [1 / 8, 1 / 8])
    const, form = inh.linear_form(m, forms.H, 0, 1)
    x = np.ones(m.n_dofs)  # constant state: zero diffusive flux, no advection
    assert const + sum(c * x[d] for d, c in form.items()) == pytest.approx(0.0, abs=1e-15)


def test_zero_source_gives_no_rhs():
    m = build_mesh(3, 3)
    T = np.broadcast_to(np.eye(2), (9, 2, 2)).copy()
    v = np.ones((m.n_edges, 2))
    inh = inhomogeneous_contributions(m, np.zeros(9), local_peclet(m, T, v))
    assert np.all(inh.source == 0)
    assert np.any(inh.wk != 0)

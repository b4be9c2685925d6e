"""Hermitian metrics: star, adjoints, Laplacians, Lefschetz."""
from math import factorial

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ddbar.algebra import Form, _wedge_raw, power
from ddbar.errors import DegreeMismatch, NotPositive, NotReal
from ddbar.metric import HermitianMetric, dV_check

from conftest import catalog

seeds = st.integers(min_value=0, max_value=2**31 - 1)
ENTRIES = ["torus2", "torus3", "iwasawa", "kodaira_thurston", "nakamura", "fou"]


def random_metric(model, rng):
    n = model.n
    A = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    return HermitianMetric(model, A @ A.conj().T + n * np.eye(n))


def _bidegrees(n):
    return [(p, q) for p in range(n + 1) for q in range(n + 1)]


def test_metric_validation(torus2):
    m = torus2.model()
    with pytest.raises(NotPositive):
        HermitianMetric(m, np.diag([1.0, -1.0]))
    with pytest.raises(NotReal):
        HermitianMetric(m, Form(2, {(1, 1): [1, 0, 0, 1]}))
    with pytest.raises(DegreeMismatch):
        HermitianMetric(m, Form.monomial(2, (1, 2), ()))


def test_volume_is_positive_multiple_of_top_form(entry):
    g = entry.hermitian_metric()
    n = g.n
    # dV = omega^n / n! = det(H) * i^{n^2} phi^{1..n} ^ conj(phi)^{1..n} up to ordering
    vol = complex(g.raw_volume) / (1j ** (n * n))
    assert abs(vol.imag) < 1e-12
    assert np.isclose(vol.real, np.linalg.det(g.H).real)
    assert np.isclose(g.integrate(g.volume_form), 1.0)


@settings(max_examples=20, deadline=None)
@given(seeds, st.sampled_from(ENTRIES))
def test_star_squares_to_sign(seed, name):
    model = catalog(name).model()
    rng = np.random.default_rng(seed)
    g = random_metric(model, rng)
    n = model.n
    p, q = int(rng.integers(0, n + 1)), int(rng.integers(0, n + 1))
    a = Form.random(n, (p, q), rng)
    assert g.star(g.star(a)).allclose((-1) ** (p + q) * a, 1e-9 * max(1, a.norm()))
    assert g.star(a).bidegree == (n - q, n - p)


@settings(max_examples=20, deadline=None)
@given(seeds, st.sampled_from(ENTRIES))
def test_inner_product_is_wedge_with_star(seed, name):
    model = catalog(name).model()
    rng = np.random.default_rng(seed)
    g = random_metric(model, rng)
    n = model.n
    bd = (int(rng.integers(0, n + 1)), int(rng.integers(0, n + 1)))
    a, b = Form.random(n, bd, rng), Form.random(n, bd, rng)
    assert abs(dV_check(g, a, b)) < 1e-9 * max(1.0, a.norm() * b.norm())
    assert g.inner(a, a).real > 0


@pytest.mark.parametrize("tag", ["del", "delbar", "deldelbar"])
def test_adjoint_by_gram_equals_adjoint_by_star(entry, tag):
    g = entry.hermitian_metric()
    A = g.adjoint_matrix(tag, "gram")
    B = g.adjoint_matrix(tag, "star")
    assert np.abs(A - B).max() < 1e-10


def test_adjoint_defining_identity(fou, rng):
    model = fou.model()
    g = random_metric(model, rng)
    D = model.matrix("delbar")
    Ds = g.adjoint_matrix("delbar")
    x = rng.standard_normal(model.layout.dim) + 1j * rng.standard_normal(model.layout.dim)
    y = rng.standard_normal(model.layout.dim) + 1j * rng.standard_normal(model.layout.dim)
    lhs = np.vdot(y, g.gram @ (D @ x))
    rhs = np.vdot(Ds @ y, g.gram @ x)
    assert abs(lhs - rhs) < 1e-9 * np.linalg.norm(x) * np.linalg.norm(y)


@pytest.mark.parametrize("name", ENTRIES)
def test_primitive_star_formula(name):
    g = catalog(name).hermitian_metric()
    n = g.n
    for p in range(n + 1):
        for q in range(n + 1 - p):
            k = p + q
            for col in g.primitive_basis(p, q).T:
                a = Form(n, {(p, q): col})
                assert g.is_primitive(a)
                rhs = g.primitive_star_coefficient(p, q) * _wedge_raw(power(g.omega, n - k), a) / factorial(n - k)
                assert (g.star(a) - rhs).norm() <= 1e-10


@pytest.mark.parametrize("name", ENTRIES)
def test_primitive_middle_star_is_scalar(name):
    g = catalog(name).hermitian_metric()
    n = g.n
    c = 1j ** (n * n + 2 * n - 2)
    B = g.primitive_basis(n - 1, 1)
    assert B.shape[1] > 0
    for col in B.T:
        a = Form(n, {(n - 1, 1): col})
        assert (g.star(a) - c * a).norm() <= 1e-10


def test_primitive_dimension_on_torus3(torus3):
    g = torus3.hermitian_metric()
    # dim P^{p,q} = C(3,p)C(3,q) - C(3,p-1)C(3,q-1)
    assert g.primitive_basis(1, 1).shape[1] == 9 - 1
    assert g.primitive_basis(2, 1).shape[1] == 9 - 3
    assert g.primitive_basis(0, 2).shape[1] == 3
    with pytest.raises(DegreeMismatch):
        g.primitive_basis(2, 2)


def test_lefschetz_split(fou, rng):
    g = fou.hermitian_metric()
    n = g.n
    a = Form.random(n, (n - 1, 1), rng)
    prim, zeta = g.lefschetz_split(a)
    assert g.is_primitive(prim)
    recon = prim + _wedge_raw(g.omega, zeta)
    assert recon.allclose(a, 1e-10)
    with pytest.raises(DegreeMismatch):
        g.lefschetz_split(Form.random(n, (1, 1), rng))


@pytest.mark.parametrize("name", ENTRIES)
def test_laplacian_kernel_duality(name):
    g = catalog(name).hermitian_metric()
    n = g.n
    for p, q in _bidegrees(n):
        HA = g.harmonic_basis("aeppli", (p, q))
        HBC = g.harmonic_basis("bottchern", (n - q, n - p))
        assert HA.shape[1] == HBC.shape[1]
        S = g.star_matrix
        for col in HA.T:
            img = g.model.restrict((n - q, n - p), g.star(Form(n, {(p, q): col})))
            L = g.laplacian_block("bottchern", (n - q, n - p))
            assert np.linalg.norm(L @ img) <= 1e-10 * max(1, np.linalg.norm(img))
        assert S is g.star_matrix


@pytest.mark.parametrize("flavor", ["aeppli", "bottchern", "dolbeault"])
def test_harmonic_kernel_matches_first_order_description(entry, flavor):
    g = entry.hermitian_metric()
    for bd in _bidegrees(g.n):
        assert g.harmonic_basis(flavor, bd).shape[1] == g.triple_kernel(flavor, bd).shape[1]


@pytest.mark.parametrize("flavor", ["aeppli", "bottchern"])
@pytest.mark.parametrize("name", ["iwasawa", "fou", "kodaira_thurston"])
def test_three_space_decomposition(name, flavor):
    model = catalog(name).model()
    rng = np.random.default_rng(7)
    g = random_metric(model, rng)
    n = model.n
    for _ in range(10):
        bd = (int(rng.integers(0, n + 1)), int(rng.integers(0, n + 1)))
        a = Form.random(n, bd, rng)
        parts = g.three_space_decompose(flavor, a)
        assert (sum(parts[1:], parts[0]) - a).norm() <= 1e-10 * max(1, a.norm())
        for i in range(3):
            for j in range(i + 1, 3):
                assert abs(g.inner(parts[i], parts[j])) <= 1e-10 * max(1, a.norm() ** 2)
    with pytest.raises(ValueError):
        g.three_space_decompose("dolbeault", a)

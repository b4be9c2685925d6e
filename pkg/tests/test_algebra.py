"""Exterior algebra, presentations and operator matrices."""
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ddbar.algebra import (
    Form,
    LieAlgebraPresentation,
    VectorValuedForm,
    apply_diff,
    build_model,
    check_jacobi,
    contract,
    layout,
    power,
    presentation_from_complex,
    wedge,
)
from ddbar.errors import DegreeMismatch, DegreeOverflow, JacobiViolation, NonIntegrable, NotAlmostComplex

from conftest import catalog

seeds = st.integers(min_value=0, max_value=2**31 - 1)


def _bidegree(n, rng):
    return int(rng.integers(0, n + 1)), int(rng.integers(0, n + 1))


def test_layout_sizes():
    lay = layout(3)
    assert lay.dim == 2 ** 6
    assert lay.block_size(1, 2) == 9
    assert sum(lay.block_size(p, q) for p in range(4) for q in range(4)) == 64


def test_monomial_sign_from_sorting():
    a = Form.monomial(3, (2, 1), ())
    b = Form.monomial(3, (1, 2), ())
    assert a.allclose(-b)
    assert Form.monomial(3, (1, 1), ()).norm() == 0


def test_wedge_of_one_forms_anticommutes():
    x = Form.monomial(2, (1,), ())
    y = Form.monomial(2, (), (2,))
    assert wedge(x, y).allclose(-wedge(y, x))
    assert wedge(x, x).norm() == 0


def test_wedge_past_top_degree():
    n = 2
    a = Form.monomial(n, (1, 2), (1,))
    b = Form.monomial(n, (1,), (2,))
    with pytest.raises(DegreeOverflow):
        wedge(a, b)


@settings(max_examples=40, deadline=None)
@given(seeds, st.integers(2, 3))
def test_graded_commutativity(seed, n):
    rng = np.random.default_rng(seed)
    a = Form.random(n, _bidegree(n, rng), rng)
    b = Form.random(n, _bidegree(n, rng), rng)
    if a.degree + b.degree > 2 * n:
        return
    sign = (-1) ** (a.degree * b.degree)
    assert wedge(a, b).allclose(sign * wedge(b, a), 1e-10)


@settings(max_examples=40, deadline=None)
@given(seeds, st.integers(2, 3))
def test_conjugation_is_an_involution(seed, n):
    rng = np.random.default_rng(seed)
    a = Form.random(n, _bidegree(n, rng), rng)
    assert a.conj().conj().allclose(a, 1e-12)
    p, q = a.bidegree
    assert a.conj().bidegree == (q, p)
    assert (a + a.conj()).is_real()


@settings(max_examples=25, deadline=None)
@given(seeds, st.sampled_from(["iwasawa", "fou", "kodaira_thurston", "nakamura"]))
def test_leibniz_rule(seed, name):
    model = catalog(name).model()
    n = model.n
    rng = np.random.default_rng(seed)
    a = Form.random(n, (1, 0), rng) + Form.random(n, (0, 1), rng)
    b = Form.random(n, _bidegree(n, rng), rng)
    if b.degree + 2 > 2 * n:
        return
    lhs = apply_diff(model, "d", wedge(a, b))
    rhs = wedge(apply_diff(model, "d", a), b) - wedge(a, apply_diff(model, "d", b))
    assert lhs.allclose(rhs, 1e-10)


def test_d_splits_into_del_and_delbar(entry):
    m = entry.model()
    assert np.abs(m.D - m.Del - m.Delbar).max() == 0


@settings(max_examples=30, deadline=None)
@given(seeds)
def test_vector_field_contraction_is_antiderivation(seed):
    n = 3
    rng = np.random.default_rng(seed)
    v = VectorValuedForm.vector_field(rng.standard_normal(n) + 1j * rng.standard_normal(n))
    a = Form.random(n, (1, int(rng.integers(0, 3))), rng)
    b = Form.random(n, (1, int(rng.integers(0, 2))), rng)
    lhs = contract(v, wedge(a, b))
    rhs = wedge(contract(v, a), b) + (-1) ** a.degree * wedge(a, contract(v, b))
    assert lhs.allclose(rhs, 1e-10)


def test_contraction_lowers_holomorphic_degree():
    rng = np.random.default_rng(0)
    v = VectorValuedForm.random(3, 1, rng)
    a = Form.random(3, (2, 1), rng)
    assert contract(v, a).bidegrees == [(1, 2)]


def test_power_of_kahler_form_gives_volume_multiple():
    n = 3
    omega = sum((1j * Form.monomial(n, (k,), (k,)) for k in range(1, n + 1)), Form.zero(n, (1, 1)))
    top = power(omega, n)
    # omega^n = n! i^n prod phi^k ^ conj(phi^k), reordered to phi^{123} ^ conj(phi)^{123}
    sign = (-1) ** (n * (n - 1) // 2)
    assert np.isclose(top.top(), 6 * 1j ** n * sign)


def test_pure_type_accessors():
    a = Form.monomial(2, (1,), (1,)) + Form.monomial(2, (1, 2), ())
    with pytest.raises(DegreeMismatch):
        a.bidegree
    assert a.degree == 2
    with pytest.raises(DegreeMismatch):
        Form(2, {(3, 0): np.zeros(1)})


def test_form_is_immutable():
    a = Form.one(2)
    with pytest.raises(AttributeError):
        a.n = 3
    with pytest.raises(ValueError):
        a.coeffs[(0, 0)][0] = 2


def test_jacobi_violation_detected():
    c = np.zeros((4, 4, 4))
    # de^4 = e^12 and de^1 = e^34 give d(de^4) = e^234 != 0
    c[3, 0, 1], c[3, 1, 0] = 1, -1
    c[0, 2, 3], c[0, 3, 2] = 1, -1
    worst, exact = check_jacobi(c)
    assert exact and worst > 0
    pres = LieAlgebraPresentation(4, c, coframe=np.array([[1, 1j, 0, 0], [0, 0, 1, 1j]]))
    with pytest.raises(JacobiViolation):
        build_model(pres)


def test_non_integrable_structure_rejected():
    # d phi^3 = conj(phi^1) ^ conj(phi^2) satisfies Jacobi but has a (0,2) part
    pres = presentation_from_complex(3, {3: [(1, "1b", "2b")]})
    with pytest.raises(NonIntegrable):
        build_model(pres)


def test_bad_complex_structure_rejected():
    c = np.zeros((4, 4, 4))
    with pytest.raises(NotAlmostComplex):
        build_model(LieAlgebraPresentation(4, c, J=np.eye(4)))
    with pytest.raises(NotAlmostComplex):
        build_model(LieAlgebraPresentation(4, c, coframe=np.array([[1, 0, 0, 0], [0, 1, 0, 0]])))
    with pytest.raises(NotAlmostComplex):
        build_model(LieAlgebraPresentation(4, c))


def test_J_and_coframe_presentations_agree():
    J = np.zeros((4, 4))
    J[0, 1], J[1, 0], J[2, 3], J[3, 2] = -1, 1, -1, 1
    m = build_model(LieAlgebraPresentation(4, np.zeros((4, 4, 4)), J=J))
    assert max(m.operator_identity_residuals().values()) == 0
    assert np.abs(m.D).max() == 0


def test_iwasawa_structure_equation():
    m = catalog("iwasawa").model()
    d3 = apply_diff(m, "d", Form.monomial(3, (3,), ()))
    assert d3.allclose(-Form.monomial(3, (1, 2), ()), 1e-12)
    # holomorphically parallelizable: d phi^k has no conj(phi) part
    for k in (1, 2, 3):
        dk = apply_diff(m, "d", Form.monomial(3, (k,), ()))
        assert np.abs(dk.block(1, 1)).max() == 0


def test_real_change_of_basis_round_trip(fou):
    m = fou.model()
    assert np.allclose(m.from_real @ m.to_real, np.eye(m.layout.dim), atol=1e-12)


def test_fingerprint_stable_and_distinct():
    a = catalog("fou").model().fingerprint()
    b = catalog("fou", a=0.6).model().fingerprint()
    assert a == catalog("fou").model().fingerprint()
    assert a != b

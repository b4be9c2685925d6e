"""Exact chart computations and the dbar/contraction commutation rule."""
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ddbar.errors import DegreeOverflow
from ddbar.local import (
    PolyForm,
    PolyVectorForm,
    chart_apply,
    chart_ring,
    random_form,
    random_poly,
    verify_lemma_contraction,
)

seeds = st.integers(min_value=0, max_value=2**31 - 1)


def test_dbar_of_zbar_is_dzbar():
    R, (z1, z2, zb1, zb2) = chart_ring(2)
    f = PolyForm.function(2, zb1 * z2)
    assert f.dbar() == PolyForm.monomial(2, (), (1,), z2)
    assert f.dl() == PolyForm.monomial(2, (2,), (), zb1)


def test_monomial_ordering_sign():
    assert PolyForm.monomial(2, (2, 1)) == -PolyForm.monomial(2, (1, 2))
    assert PolyForm.monomial(2, (), (1, 1)).is_zero


@settings(max_examples=30, deadline=None)
@given(seeds, st.integers(1, 3))
def test_del_and_dbar_square_to_zero_and_anticommute(seed, n):
    rng = np.random.default_rng(seed)
    a = random_form(n, (int(rng.integers(0, n)), int(rng.integers(0, n))), 3, rng)
    assert a.dl().dl().is_zero
    assert a.dbar().dbar().is_zero
    assert (a.dl().dbar() + a.dbar().dl()).is_zero


@settings(max_examples=30, deadline=None)
@given(seeds)
def test_dbar_leibniz(seed):
    rng = np.random.default_rng(seed)
    n = 2
    a = random_form(n, (1, 0), 2, rng)
    b = random_form(n, (0, 1), 2, rng)
    lhs = (a ^ b).dbar()
    rhs = (a.dbar() ^ b) - (a ^ b.dbar())
    assert lhs == rhs


def test_contraction_with_coordinate_field():
    n = 2
    dz12 = PolyForm.monomial(n, (1, 2))
    e1 = PolyVectorForm.vector_field(n, [1, 0])
    e2 = PolyVectorForm.vector_field(n, [0, 1])
    assert e1.contract(dz12) == PolyForm.monomial(n, (2,))
    assert e2.contract(dz12) == -PolyForm.monomial(n, (1,))


def test_diagonal_field_contraction():
    n = 2
    v = PolyVectorForm.diagonal(n, [1, 1])
    out = v.contract(PolyForm.monomial(n, (1, 2)))
    # dzb1 ^ dz2 - dzb2 ^ dz1
    expected = PolyForm.monomial(n, (), (1,)) ^ PolyForm.monomial(n, (2,))
    expected = expected - (PolyForm.monomial(n, (), (2,)) ^ PolyForm.monomial(n, (1,)))
    assert out == expected


def test_chart_apply_limits():
    R, gens = chart_ring(2)
    big = PolyForm.function(2, gens[0] ** 5)
    with pytest.raises(DegreeOverflow):
        chart_apply("del", big)
    with pytest.raises(ValueError):
        chart_apply("contract", PolyForm.function(2, 1))
    with pytest.raises(ValueError):
        chart_apply("nabla", PolyForm.function(2, 1))
    with pytest.raises(DegreeOverflow):
        verify_lemma_contraction(trials=1, n=5)


def test_random_poly_is_deterministic():
    a = random_poly(2, 2, np.random.default_rng(3))
    b = random_poly(2, 2, np.random.default_rng(3))
    assert a == b


@pytest.mark.parametrize("n", [2, 3])
def test_commutation_rule_variants(n):
    rep = verify_lemma_contraction(trials=30, seed=1, n=n)
    held = {c.name for c in rep.candidates if c.holds}
    assert held == {"a-proof-", "b-proof+"}
    assert rep.verified == {"a": "a-proof-", "b": "b-proof+"}
    for c in rep.candidates:
        if not c.holds:
            assert c.failures > 0 and c.first_residual


def test_report_serializes():
    d = verify_lemma_contraction(trials=3, seed=0, n=2).to_dict()
    assert d["trials"] == 3
    assert len(d["candidates"]) == 8
    assert {"name", "passes", "failures", "holds", "formula"} <= set(d["candidates"][0])

"""Special Hermitian structures: positivity, certificates, searches, audit."""
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ddbar.algebra import Form, power
from ddbar.errors import DegreeMismatch, NotPositive, NotReal, ZeroH
from ddbar.metric import omega_from_matrix
from ddbar.structures import (
    HPHS,
    HSG,
    PHS,
    PSKT,
    SG,
    Balanced,
    Gauduchon,
    HGauduchon,
    StructureKind,
    audit_equivalences,
    check_structure,
    find_structure,
    is_strictly_positive,
    michelsohn_root,
    positivity_matrix,
)

from conftest import catalog

seeds = st.integers(min_value=0, max_value=2**31 - 1)


def _random_H(n, rng):
    A = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    return A @ A.conj().T + 0.5 * np.eye(n)


def test_kind_validation():
    with pytest.raises(ZeroH):
        HSG(0)
    with pytest.raises(ValueError):
        StructureKind("Kahler")
    with pytest.raises(ValueError):
        PSKT(-1)
    with pytest.raises(DegreeMismatch):
        PSKT(4).degree_p(3)
    assert str(HPHS(2, 0.5)) == "HPHS(p=2, h=0.5)"
    assert str(HSG(2, "unit")) == "HSG(h=2, unit)"


@settings(max_examples=25, deadline=None)
@given(seeds, st.integers(2, 3))
def test_positivity_of_metric_powers(seed, n):
    rng = np.random.default_rng(seed)
    H = _random_H(n, rng)
    om = omega_from_matrix(n, H)
    for p in (1, n - 1):
        ok, ev, exact = is_strictly_positive(n, p, power(om, p).block(p, p))
        assert ok and exact
    ok, _, _ = is_strictly_positive(n, 1, (-1 * om).block(1, 1))
    assert not ok


@settings(max_examples=25, deadline=None)
@given(seeds)
def test_michelsohn_root_inverts_power(seed):
    n = 3
    H = _random_H(n, np.random.default_rng(seed))
    om = omega_from_matrix(n, H)
    root = michelsohn_root(power(om, n - 1))
    assert root.allclose(om, 1e-8 * max(1, om.norm()))


def test_pairing_matrix_of_metric_power():
    n = 3
    H = np.diag([1.0, 2.0, 3.0])
    Q = positivity_matrix(n, n - 1, power(omega_from_matrix(n, H), n - 1).block(2, 2))
    # (n-1)! det(H) H^{-1}
    assert np.allclose(Q, 2 * 6 * np.diag([1, 1 / 2, 1 / 3]))


def test_michelsohn_root_rejects_bad_input():
    n = 3
    om = omega_from_matrix(n, np.eye(n))
    with pytest.raises(NotPositive):
        michelsohn_root(-1 * power(om, 2))
    with pytest.raises(DegreeMismatch):
        michelsohn_root(om)
    with pytest.raises(NotReal):
        michelsohn_root(1j * power(om, 2))


def test_standard_metrics(torus2, iwasawa, kodaira):
    for kind in (Gauduchon(), Balanced(), SG(), HSG(2.0), HGauduchon(-0.5)):
        assert check_structure(torus2.model(), torus2.hermitian_metric(), kind).holds
    m = iwasawa.model()
    g = iwasawa.hermitian_metric()
    assert check_structure(m, g, Balanced()).holds
    assert not check_structure(m, g.omega, PSKT(1)).holds
    m = kodaira.model()
    g = kodaira.hermitian_metric()
    assert check_structure(m, g, Gauduchon()).holds
    assert check_structure(m, g.omega, PSKT(1)).holds
    cert = check_structure(m, g, Balanced())
    assert not cert.holds and cert.reason


def test_candidate_validation(iwasawa):
    m = iwasawa.model()
    with pytest.raises(DegreeMismatch):
        check_structure(m, Form.monomial(3, (1,), (1,)) * 1j, PSKT(2))
    with pytest.raises(NotReal):
        check_structure(m, Form.monomial(3, (1,), (2,)), PSKT(1))
    with pytest.raises(NotPositive):
        check_structure(m, -1j * Form.monomial(3, (1,), (1,)), PSKT(1))


EXPECTED = {
    "torus2": {"Gauduchon": True, "Balanced": True, "SG": True, "PSKT(p=1)": True, "PHS(p=1)": True},
    "iwasawa": {"Gauduchon": True, "Balanced": True, "SG": True, "PSKT(p=1)": False, "PHS(p=1)": False,
                "PSKT(p=2)": True, "HPHS(p=2, h=2)": True},
    "kodaira_thurston": {"Gauduchon": True, "Balanced": False, "SG": False, "PSKT(p=1)": True,
                         "HPHS(p=1, h=2)": False},
    "fou": {"Balanced": True, "SG": True, "PSKT(p=1)": False, "PSKT(p=2)": True, "HPHS(p=2, h=2)": True},
}
KINDS = {"Gauduchon": Gauduchon(), "Balanced": Balanced(), "SG": SG(), "PSKT(p=1)": PSKT(1),
         "PSKT(p=2)": PSKT(2), "PHS(p=1)": PHS(1), "HPHS(p=2, h=2)": HPHS(2, 2.0),
         "HPHS(p=1, h=2)": HPHS(1, 2.0)}


@pytest.mark.parametrize("name", list(EXPECTED))
def test_search_verdicts(name):
    m = catalog(name).model()
    for label, found in EXPECTED[name].items():
        res = find_structure(m, KINDS[label])
        assert res.found is found, label
        if found:
            cert = res.certificate
            cand = cert.witness["omega"] if KINDS[label].is_metric else cert.witness["Omega"]
            assert check_structure(m, cand, KINDS[label]).holds
        else:
            assert res.status in ("conclusive", "inconclusive")
        assert res.to_dict()["found"] is found


def test_sampled_positivity_in_middle_degree():
    # p = 2 at n = 4 has no eigenvalue criterion, so positivity is sampled
    n = 4
    om = omega_from_matrix(n, _random_H(n, np.random.default_rng(0)))
    ok, evidence, exact = is_strictly_positive(n, 2, power(om, 2).block(2, 2))
    assert ok and not exact and evidence[0] > 0
    ok, _, exact = is_strictly_positive(n, 2, -power(om, 2).block(2, 2))
    assert not ok and not exact


@pytest.mark.parametrize("name", ["torus2", "kodaira_thurston"])
def test_audit_agrees(name):
    rep = audit_equivalences(catalog(name).model(), hs=(0.5, 1.0, -2.0))
    assert rep.all_agree
    assert any(e.skipped for e in rep.entries) == (name == "kodaira_thurston")
    assert rep.to_dict()["entries"]

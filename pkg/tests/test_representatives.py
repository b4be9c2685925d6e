"""Metric-minimal d-closed representatives of Aeppli classes."""
import numpy as np
import pytest
from scipy.linalg import null_space

from ddbar.algebra import Form, power
from ddbar.cohomology import Aeppli, Dh, HAeppli, compute_group
from ddbar.errors import LemmaRequired
from ddbar.metric import HermitianMetric
from ddbar.representatives import closed_rep, minimal_d_closed_rep

from conftest import catalog


def _metric_for(name, seed):
    model = catalog(name).model()
    rng = np.random.default_rng(seed)
    n = model.n
    A = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    return HermitianMetric(model, A @ A.conj().T + n * np.eye(n))


@pytest.mark.parametrize("bd", [(2, 2), (2, 1), (1, 1), (1, 2)])
def test_minimal_rep_on_fou(fou, bd):
    g = fou.hermitian_metric()
    m = g.model
    G = compute_group(m, Aeppli(*bd), g)
    rng = np.random.default_rng(sum(bd))
    p, q = bd
    K_phi = null_space(m.block("deldelbar", (p - 1, q), (p, q + 1)))
    K_psi = null_space(m.block("deldelbar", (p, q - 1), (p + 1, q)))
    for _ in range(5):
        c = G.random_class(rng)
        rep = minimal_d_closed_rep(g, c)
        assert rep.d_residual() <= 1e-10
        # same Aeppli class, checked by rank of [B | difference]
        diff = m.restrict(bd, rep.chi_min) - c.rep_vector
        assert G.is_coboundary(diff)
        phi_n, psi_n = rep.corrector_norms()
        for _ in range(20):
            if K_phi.shape[1]:
                dphi = Form(3, {(p - 1, q): K_phi @ rng.standard_normal(K_phi.shape[1])})
                assert g.norm(rep.phi_min + 1e-3 * dphi) >= phi_n - 1e-12
            if K_psi.shape[1]:
                dpsi = Form(3, {(p, q - 1): K_psi @ rng.standard_normal(K_psi.shape[1])})
                assert g.norm(rep.psi_min + 1e-3 * dpsi) >= psi_n - 1e-12


def test_correctors_orthogonal_to_kernel():
    g = _metric_for("fou", 3)
    m = g.model
    G = compute_group(m, Aeppli(2, 2), g)
    rep = minimal_d_closed_rep(g, G.random_class(np.random.default_rng(0)))
    K = null_space(m.block("deldelbar", (1, 2), (2, 3)))
    M = g.block_gram((1, 2))
    assert np.abs(K.conj().T @ M @ rep.phi_min.block(1, 2)).max() < 1e-10


@pytest.mark.parametrize("name", ["torus2", "torus3"])
def test_kahler_correctors_vanish(name):
    g = catalog(name).hermitian_metric()
    n = g.n
    rng = np.random.default_rng(1)
    for p in range(n + 1):
        for q in range(n + 1):
            G = compute_group(g.model, Aeppli(p, q), g)
            rep = minimal_d_closed_rep(g, G.random_class(rng))
            assert rep.corrector_norms() == (0.0, 0.0)
            assert np.array_equal(rep.chi_min.vector(), rep.chi.vector())


def test_form_input_and_lemma_requirement(fou, iwasawa):
    g = fou.hermitian_metric()
    W = power(g.omega, 2)
    rep = minimal_d_closed_rep(g, W)
    assert rep.d_residual() <= 1e-10
    assert rep.cls.group.is_coboundary(rep.cls.group.model.restrict((2, 2), rep.chi_min - W))
    with pytest.raises(LemmaRequired):
        minimal_d_closed_rep(iwasawa.hermitian_metric(), compute_group(iwasawa.model(), Aeppli(1, 1)).element(np.eye(8)[0]))


def test_closed_rep_kinds(fou):
    m = fou.model()
    rng = np.random.default_rng(2)
    c = compute_group(m, Aeppli(1, 1)).random_class(rng)
    y = closed_rep(c, "aeppli_to_d")
    assert np.linalg.norm(m.matrix("d") @ y.vector()) < 1e-9
    c = compute_group(m, Dh(2, 2.0)).random_class(rng)
    y = closed_rep(c, "dh_to_d")
    assert np.linalg.norm(m.matrix("d") @ y.vector()) < 1e-9
    c = compute_group(m, HAeppli(3, -0.5)).random_class(rng)
    y = closed_rep(c, "hA_to_dh")
    assert np.linalg.norm(m.matrix("d_h", -0.5) @ y.vector()) < 1e-9
    with pytest.raises(ValueError):
        closed_rep(c, "aeppli_to_d")

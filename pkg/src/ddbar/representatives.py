"""Distinguished representatives of Aeppli, d_h and h-Aeppli classes."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _linalg as la
from .algebra import Form
from .cohomology import (
    Aeppli,
    CohomologyClass,
    compute_group,
    d_closed_rep_aeppli,
    d_closed_rep_dh,
    dh_closed_rep_ha,
    flavor_name,
    require_lemma,
)
from .errors import InconsistentSystem, ZeroH

__all__ = ["MinimalRepresentative", "minimal_d_closed_rep", "closed_rep"]

SOLVE_TOL = 1e-8


@dataclass
class MinimalRepresentative:
    """d-closed representative chi + del phi + delbar psi with minimal correctors.

    Attributes:
        chi_min: the d-closed (p,q)-form.
        phi_min: (p-1,q) corrector of least L2 norm.
        psi_min: (p,q-1) corrector of least L2 norm.
        chi: Aeppli-harmonic representative the construction starts from.
    """

    chi_min: Form
    phi_min: Form
    psi_min: Form
    chi: Form
    cls: CohomologyClass
    metric: object

    def d_residual(self):
        d = self.metric.model.matrix("d")
        return float(np.linalg.norm(d @ self.chi_min.vector()))

    def corrector_norms(self):
        return self.metric.norm(self.phi_min), self.metric.norm(self.psi_min)


def _weighted_solve(A, b, M, what):
    if A.shape[1] == 0:
        if np.linalg.norm(b) > SOLVE_TOL * max(1.0, np.linalg.norm(b)):
            raise InconsistentSystem(f"no solution for {what}")
        return np.zeros(0, dtype=complex)
    y = la.weighted_min_norm(A, b, M)
    if np.linalg.norm(A @ y - b) > SOLVE_TOL * max(1.0, np.linalg.norm(b)):
        raise InconsistentSystem(f"no solution for {what}")
    return y


def minimal_d_closed_rep(metric, cls):
    """The metric-minimal d-closed representative of an Aeppli class.

    Starting from the Aeppli-harmonic representative chi, the correctors solve
    ddbar phi = delbar chi and ddbar psi = -del chi with least L2 norm, which
    puts them in the orthogonal complement of ker ddbar.

    Args:
        metric: HermitianMetric on the model.
        cls: Aeppli CohomologyClass, or a ddbar-closed pure-type Form.

    Raises:
        LemmaRequired: the model fails the ddbar-lemma.
    """
    model = metric.model
    require_lemma(model, "ddbar")
    if isinstance(cls, Form):
        p, q = cls.bidegree
        group = compute_group(model, Aeppli(p, q), metric)
        cls = group.class_of(cls)
    if flavor_name(cls.flavor) != "Aeppli":
        raise ValueError("minimal representatives are defined for Aeppli classes")
    p, q = cls.flavor.space
    group = cls.group if cls.group.metric is metric else compute_group(model, Aeppli(p, q), metric)
    coords = group.coordinates(cls.rep_vector)
    x = group.reps @ coords if group.dim else np.zeros(group.dim_space, dtype=complex)

    bd = (p, q)
    A_phi = model.block("deldelbar", (p - 1, q), (p, q + 1))
    A_psi = model.block("deldelbar", (p, q - 1), (p + 1, q))
    rhs_phi = model.block("delbar", bd, (p, q + 1)) @ x
    rhs_psi = -model.block("del", bd, (p + 1, q)) @ x
    phi = _weighted_solve(A_phi, rhs_phi, metric.block_gram((p - 1, q)), "ddbar phi = delbar chi")
    psi = _weighted_solve(A_psi, rhs_psi, metric.block_gram((p, q - 1)), "ddbar psi = -del chi")
    y = x.copy()
    if phi.size:
        y = y + model.block("del", (p - 1, q), bd) @ phi
    if psi.size:
        y = y + model.block("delbar", (p, q - 1), bd) @ psi

    n = model.n

    def form(bdeg, v):
        if v.size == 0:
            return Form.zero(n, bdeg) if model.layout.valid(*bdeg) else Form(n, {})
        return Form(n, {bdeg: v})

    return MinimalRepresentative(
        chi_min=form(bd, y),
        phi_min=form((p - 1, q), phi),
        psi_min=form((p, q - 1), psi),
        chi=form(bd, x),
        cls=cls,
        metric=metric,
    )


def closed_rep(cls, kind, h=None):
    """Representative of ``cls`` closed for a stronger differential.

    Args:
        cls: CohomologyClass whose flavor matches ``kind``.
        kind: "aeppli_to_d" (Aeppli class, d-closed output), "dh_to_d"
            (d_h class, d-closed output) or "hA_to_dh" (h-Aeppli class,
            d_h-closed output).
        h: twist parameter; defaults to the one stored in the class flavor.

    Returns:
        Form in the same class as ``cls``.
    """
    model = cls.group.model
    fl = cls.flavor
    name = flavor_name(fl)
    x = cls.rep_vector
    if kind == "aeppli_to_d":
        if name != "Aeppli":
            raise ValueError("aeppli_to_d needs an Aeppli class")
        require_lemma(model, "ddbar")
        p, q = fl.space
        return Form(model.n, {(p, q): d_closed_rep_aeppli(model, p, q, x)})

    expected = {"dh_to_d": "Dh", "hA_to_dh": "HAeppli"}
    if kind not in expected:
        raise ValueError(f"unknown representative kind {kind!r}")
    if name != expected[kind]:
        raise ValueError(f"{kind} needs a {expected[kind]} class")
    if h is None:
        h = fl.h
    if not h:
        raise ZeroH("h must be a nonzero real number")
    if h != fl.h:
        raise ValueError(f"h={h} does not match the class parameter {fl.h}")
    require_lemma(model, "h_ddbar", h)
    if kind == "dh_to_d":
        y = d_closed_rep_dh(model, h, fl.k, x)
    else:
        y = dh_closed_rep_ha(model, h, fl.k, x)
    return model.embed(fl.k, y)

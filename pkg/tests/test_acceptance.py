"""Acceptance criteria, one test each.

Every test records a PASS/FAIL line; the lines are printed together at the end
of the pytest run (see ``conftest.pytest_terminal_summary``) and when this file
is executed directly.
"""
import json
import time
from math import comb, factorial

import numpy as np
import pytest
from scipy.linalg import null_space

from ddbar import _linalg as la
from ddbar.algebra import Form, _wedge_raw, build_model, power
from ddbar.catalog import balanced_solvmanifold, entry_names, load
from ddbar.cohomology import (
    Aeppli,
    DeRham,
    Dh,
    HAeppli,
    check_lemma,
    compute_group,
    dimension_table,
    transfer_class,
)
from ddbar.deformation import (
    copolarised_subspace,
    deform_family,
    moduli_metrics,
    parameter_family,
)
from ddbar.io import canonical_json
from ddbar.local import verify_lemma_contraction
from ddbar.metric import HermitianMetric
from ddbar.representatives import closed_rep, minimal_d_closed_rep
from ddbar.structures import HPHS, PSKT, Balanced, Gauduchon, audit_equivalences

RESULTS = {}
TOL = 1e-10
HS = (-2.0, -1.0, -0.5, 0.5, 1.0, 2.0)
SESSION_LIMIT = 300.0


def record(num, ok, detail):
    RESULTS[num] = (bool(ok), detail)
    assert ok, f"criterion {num}: {detail}"


def summary_lines():
    return [f"acceptance {k:2d}: {'PASS' if ok else 'FAIL'}  {detail}"
            for k, (ok, detail) in sorted(RESULTS.items())]


_MODELS = {}


def entry(name, **params):
    key = (name, tuple(params.items()))
    if key not in _MODELS:
        e = load(name, **params)
        _MODELS[key] = (e, e.model(), e.hermitian_metric())
    return _MODELS[key]


def _random_metric(model, rng):
    n = model.n
    A = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    return HermitianMetric(model, A @ A.conj().T + np.eye(n))


def _lemma_entries():
    return [name for name in entry_names() if check_lemma(entry(name)[1]).holds]


# ---------------------------------------------------------------------------


def test_01_operator_identities():
    t0 = time.perf_counter()
    worst = 0.0
    for name in entry_names():
        model = build_model(load(name, check=False).presentation)
        res = model.operator_identity_residuals(HS)
        worst = max(worst, max(res.values()))
    elapsed = time.perf_counter() - t0
    record(1, worst <= 1e-12 and elapsed < 10,
           f"max identity residual {worst:.2e} over {len(entry_names())} entries, h in {HS}; {elapsed:.1f}s")


def test_02_torus_ground_truth():
    _, model, _ = entry("torus2")
    t = dimension_table(model, HS)
    bad = []
    for p in range(3):
        for q in range(3):
            for fl in ("Dolbeault", "BottChern", "Aeppli"):
                if t[f"{fl}({p},{q})"] != comb(2, p) * comb(2, q):
                    bad.append(f"{fl}({p},{q})")
    for k in range(5):
        if t[f"DeRham({k})"] != comb(4, k):
            bad.append(f"b_{k}")
        bad += [f"Dh({k},{h:g})" for h in HS if t[f"Dh({k},{h:g})"] != comb(4, k)]
    lemmas = check_lemma(model).holds and all(check_lemma(model, "h_ddbar", h).holds for h in HS)
    record(2, not bad and lemmas, f"mismatches {bad or 'none'}; ddbar and h-ddbar lemmas hold: {lemmas}")


def test_03_iwasawa_negative_control():
    e, model, _ = entry("iwasawa")
    v = check_lemma(model)
    serial = canonical_json({"location": str(v.location), "witness": v.witness.vector()})
    restored = np.array([complex(*z) for z in json.loads(serial)["witness"]])
    # kernel-rank oracle straight from the structure constants
    c = e.presentation.structure_constants
    b1_oracle = c.shape[0] - np.linalg.matrix_rank(c.reshape(c.shape[0], -1))
    b1 = compute_group(model, DeRham(1)).dim
    witness_closed = np.linalg.norm(model.matrix("d") @ restored) <= TOL
    ok = (not v.holds) and witness_closed and b1 == b1_oracle == 4
    record(3, ok, f"lemma false at {v.location} with closed serialized witness; b1 = {b1} (oracle {b1_oracle})")


def test_04_contraction_lemma():
    t0 = time.perf_counter()
    parts = []
    ok = True
    for n in (2, 3):
        rep = verify_lemma_contraction(trials=100, seed=0, n=n)
        held = sorted(c.name for c in rep.candidates if c.holds)
        exact = all(c.passes == 100 for c in rep.candidates if c.holds)
        ok &= held == ["a-proof-", "b-proof+"] and exact
        parts.append(f"n={n}: {rep.verified}")
    elapsed = time.perf_counter() - t0
    record(4, ok and elapsed < 60, "; ".join(parts) + f" (100 exact trials each, {elapsed:.1f}s)")


def test_05_primitive_star_formulas():
    worst9 = worst10 = 0.0
    for name in ("torus2", "torus3", "fou", "iwasawa"):
        _, model, g0 = entry(name)
        for g in (g0, _random_metric(model, np.random.default_rng(5))):
            n = model.n
            for p in range(n + 1):
                for q in range(n + 1 - p):
                    k = p + q
                    c = (-1) ** (k * (k + 1) // 2) * 1j ** (p - q)
                    for col in g.primitive_basis(p, q).T:
                        a = Form(n, {(p, q): col})
                        rhs = c * _wedge_raw(power(g.omega, n - k), a) / factorial(n - k)
                        worst9 = max(worst9, (g.star(a) - rhs).norm())
            factor = 1j ** (n * n + 2 * n - 2)
            for col in g.primitive_basis(n - 1, 1).T:
                a = Form(n, {(n - 1, 1): col})
                worst10 = max(worst10, (g.star(a) - factor * a).norm())
    record(5, worst9 <= TOL and worst10 <= TOL,
           f"general primitive formula residual {worst9:.2e}; (n-1,1) scalar i^(n^2+2n-2) residual {worst10:.2e}")


def test_06_laplacian_duality():
    worst = 0.0
    dims_ok = True
    for name in entry_names():
        _, model, g = entry(name)
        n = model.n
        LBC = g.laplacian_matrix("bottchern")
        for p in range(n + 1):
            for q in range(n + 1):
                HA = g.harmonic_basis("aeppli", (p, q))
                HBC = g.harmonic_basis("bottchern", (n - q, n - p))
                dims_ok &= HA.shape[1] == HBC.shape[1]
                for col in HA.T:
                    s = g.star(Form(n, {(p, q): col})).vector()
                    worst = max(worst, np.linalg.norm(LBC @ s) / max(1.0, np.linalg.norm(s)))
    record(6, dims_ok and worst <= TOL, f"kernel dimensions match: {dims_ok}; star membership residual {worst:.2e}")


def test_07_three_space_decompositions():
    rec = orth = 0.0
    rng = np.random.default_rng(7)
    for name in entry_names():
        _, model, g = entry(name)
        n = model.n
        for flavor in ("aeppli", "bottchern"):
            for _ in range(50):
                bd = (int(rng.integers(0, n + 1)), int(rng.integers(0, n + 1)))
                a = Form.random(n, bd, rng)
                parts = g.three_space_decompose(flavor, a)
                scale = max(1.0, g.norm(a))
                rec = max(rec, g.norm(parts[0] + parts[1] + parts[2] - a) / scale)
                for i in range(3):
                    for j in range(i + 1, 3):
                        orth = max(orth, abs(g.inner(parts[i], parts[j])) / scale ** 2)
    record(7, rec <= TOL and orth <= TOL, f"reconstruction {rec:.2e}, orthogonality {orth:.2e} (50 forms/entry/flavor)")


def test_08_minimal_representative():
    _, model, g = entry("fou")
    rng = np.random.default_rng(8)
    n = model.n
    dres = 0.0
    in_class = minimal = True
    for p in range(n + 1):
        for q in range(n + 1):
            G = compute_group(model, Aeppli(p, q), g)
            if G.dim == 0:
                continue
            Kphi = null_space(model.block("deldelbar", (p - 1, q), (p, q + 1))) if p else np.zeros((0, 0))
            Kpsi = null_space(model.block("deldelbar", (p, q - 1), (p + 1, q))) if q else np.zeros((0, 0))
            rep = minimal_d_closed_rep(g, G.random_class(rng))
            dres = max(dres, rep.d_residual())
            diff = model.restrict((p, q), rep.chi_min) - rep.cls.rep_vector
            # rank test: adding the difference must not enlarge the coboundary span
            in_class &= la.numerical_rank(np.column_stack([G.B, diff])) == la.numerical_rank(G.B) \
                if G.B.shape[1] else np.linalg.norm(diff) <= TOL
            n_phi, n_psi = rep.corrector_norms()
            for _ in range(20):
                if Kphi.size:
                    alt = rep.phi_min + Form(n, {(p - 1, q): Kphi @ (rng.standard_normal(Kphi.shape[1]) * 0.1)})
                    minimal &= g.norm(alt) >= n_phi - 1e-12
                if Kpsi.size:
                    alt = rep.psi_min + Form(n, {(p, q - 1): Kpsi @ (rng.standard_normal(Kpsi.shape[1]) * 0.1)})
                    minimal &= g.norm(alt) >= n_psi - 1e-12
    kahler_zero = True
    for name in ("torus2", "torus3"):
        _, tm, tg = entry(name)
        for p in range(tm.n + 1):
            for q in range(tm.n + 1):
                r = minimal_d_closed_rep(tg, compute_group(tm, Aeppli(p, q), tg).random_class(rng))
                kahler_zero &= r.corrector_norms() == (0.0, 0.0)
    ok = dres <= TOL and in_class and minimal and kahler_zero
    record(8, ok, f"d-residual {dres:.2e}; in class: {in_class}; beats 20 perturbations: {minimal}; "
                  f"Kahler correctors exactly zero: {kahler_zero}")


def test_09_gauge_and_representative_invariance():
    worst_g = worst_r = 0.0
    for name in _lemma_entries():
        _, model, g = entry(name)
        cop = copolarised_subspace(model, g, gauge_trials=20, seed=9)
        worst_g = max(worst_g, cop.gauge_residual)
        worst_r = max(worst_r, cop.representative_residual)
    record(9, worst_g <= TOL and worst_r <= TOL,
           f"20 gauge shifts: {worst_g:.2e}; 20 d-closed Aeppli-exact shifts: {worst_r:.2e} on {_lemma_entries()}")


def test_10_comparison_of_conditions():
    _, model, g = entry("fou")
    cop = copolarised_subspace(model, g, gauge_trials=0)
    rng = np.random.default_rng(10)
    agree = 0
    for i in range(20):
        c = cop.random_element(rng) if i % 2 == 0 else cop.tangent.random_class(rng)
        a = cop.contains(c)
        d = la.in_span(cop.dolbeault_basis, c.coords) if cop.dolbeault_dim else False
        agree += a == d
    fou_ok = cop.dim == cop.dolbeault_dim and agree == 20
    _, tm, tg = entry("torus2")
    tc = copolarised_subspace(tm, tg, gauge_trials=0)
    torus_ok = tc.dolbeault_agrees() and tc.omega_agrees()
    record(10, fou_ok and torus_ok, f"fou: dims {cop.dim}/{cop.dolbeault_dim}, verdicts agree {agree}/20; "
                                    f"torus: both equal the omega-polarised space ({tc.dim}): {torus_ok}")


def test_11_F_and_G_isomorphisms():
    rng = np.random.default_rng(11)
    problems = []
    checked = 0
    for name in entry_names():
        _, model, g = entry(name)
        n = model.n
        for h in (0.5, 2.0, -1.0):
            if not check_lemma(model, "h_ddbar", h).holds:
                continue
            t = dimension_table(model, (h,))
            for k in range(2 * n + 1):
                a_sum = sum(t[f"Aeppli({p},{k - p})"] for p in range(max(0, k - n), min(k, n) + 1))
                if t[f"Dh({k},{h:g})"] != t[f"DeRham({k})"] or t[f"HAeppli({k},{h:g})"] != a_sum:
                    problems.append(f"{name} k={k} h={h}")
                Gd = compute_group(model, Dh(k, h), g)
                Ga = compute_group(model, HAeppli(k, h), g)
                for _ in range(20 if Gd.dim else 0):
                    y = closed_rep(Gd.random_class(rng), "dh_to_d")
                    if np.linalg.norm(model.matrix("d") @ y.vector()) > 1e-9:
                        problems.append(f"F {name} k={k}")
                for _ in range(20 if Ga.dim else 0):
                    y = closed_rep(Ga.random_class(rng), "hA_to_dh")
                    if np.linalg.norm(model.matrix("d_h", h) @ y.vector()) > 1e-9:
                        problems.append(f"G {name} k={k}")
                if Gd.dim:
                    img = transfer_class(Gd.random_class(rng), DeRham(k), verify_shifts=3)
                    if img.group.dim != Gd.dim:
                        problems.append(f"dim {name} k={k}")
                checked += 1
    record(11, not problems and checked > 0, f"{checked} (entry, h, k) cases; problems: {problems[:3] or 'none'}")


def test_12_equivalence_audit():
    bad = []
    dichotomy = 0
    for name in entry_names():
        _, model, g = entry(name)
        rep = audit_equivalences(model, hs=HS, metrics=(g,))
        for e in rep.entries:
            if e.informational:
                continue
            if e.statement.startswith("hp-HS with p=n-1"):
                dichotomy += 1
            if not e.skipped and not e.agree:
                bad.append(f"{name}: {e.statement} h={e.h} p={e.p}")
    record(12, not bad and dichotomy > 0,
           f"disagreements: {bad[:3] or 'none'}; dichotomy confirmed on {dichotomy} hp-HS witnesses")


def test_13_moduli_metrics():
    worst_diag = worst_neg = worst_torus = 0.0
    names = _lemma_entries()
    for name in names:
        _, model, g = entry(name)
        mm = moduli_metrics(model, g)
        diff = np.diag(mm.g2 - mm.gamma)
        pred = np.array([4 * z2 / mm.density for _, z2 in mm.lefschetz])
        worst_diag = max(worst_diag, float(np.abs(diff - pred).max(initial=0)))
        worst_neg = min(worst_neg, float(diff.real.min(initial=0)))
        if name.startswith("torus"):
            worst_torus = max(worst_torus, float(np.abs(mm.g2 - mm.gamma).max(initial=0)))
    ok = worst_diag <= 1e-9 and worst_neg >= -1e-10 and worst_torus <= 1e-10
    record(13, ok, f"on {names}: diagonal formula {worst_diag:.2e}, min diagonal {worst_neg:.2e}, "
                   f"torus |g2-gamma| {worst_torus:.2e}")


def test_14_openness():
    grid = np.linspace(0.3, 0.7, 9)
    fam = parameter_family(lambda a: balanced_solvmanifold(a).model(), grid,
                           kinds=[Balanced(), Gauduchon(), PSKT(2)], hs=(2.0,))
    lines = [f"fou a-grid lost {fam.retained() or 'nothing'}"]
    ok = fam.open and all(f.checks["Balanced"] and f.checks["calabi_yau"] and f.checks["ddbar"] for f in fam.fibres)
    rng = np.random.default_rng(14)
    for name in ("fou", "torus2"):
        _, model, g = entry(name)
        n = model.n
        cop = copolarised_subspace(model, g, gauge_trials=0)
        tangent = cop.random_element(rng)
        mc = deform_family(model, tangent, order=2, metric=g, kinds=[PSKT(n - 1), HPHS(n - 1, 2.0)], hs=(2.0,))
        gm = mc.gauss_manin
        base_ok = mc.base.checks[f"PSKT(p={n - 1})"] and mc.base.checks["h_ddbar(2)"]
        ok &= mc.open and base_ok and gm["within"]
        lines.append(f"{name} order-2 family lost {mc.retained() or 'nothing'}, "
                     f"Gauss-Manin |{gm['slope']:.3g} - {gm['predicted']:.3g}| within 10 t_step")
    # first-order check along a direction that leaves the co-polarised subspace,
    # where the projection grows linearly and the slope is not trivially zero
    _, model, g = entry("fou")
    cop = copolarised_subspace(model, g, gauge_trials=0)
    off = cop.tangent.random_class(rng)
    gm = deform_family(model, off, grid=[-0.02, 0.0, 0.02], metric=g).gauss_manin
    ok &= (not cop.contains(off)) and gm["predicted"] > 1e-3 and gm["within"]
    lines.append(f"fou transverse direction: slope {gm['slope']:.4g} vs [v _| W]_A norm {gm['predicted']:.4g} "
                 f"at t_step {gm['t_step']:g}")
    record(14, ok, "; ".join(lines))


def test_15_runtime(request):
    start = getattr(request.config, "_ddbar_start", None)
    elapsed = time.perf_counter() - start if start else 0.0
    record(15, elapsed < SESSION_LIMIT, f"{elapsed:.1f}s elapsed when reached (limit {SESSION_LIMIT:.0f}s)")


if __name__ == "__main__":
    import sys

    sys.exit(pytest.main([__file__, "-q"]))

"""Tangent directions that keep the class of omega^{n-1} of type (n-1,n-1).

Tangent classes are identified with Dolbeault (n-1,1)-classes through the
trivializing form u = phi^1 ^ ... ^ phi^n.  The co-polarised ones annihilate
the Aeppli class of omega^{n-1}; on them we compare three metrics.
"""
import numpy as np

from ddbar import copolarised_subspace, gprim_space, load, moduli_metrics, primitivity_report

np.set_printoptions(precision=4, suppress=True)

for name in ("torus2", "fou"):
    e = load(name)
    model = e.model()
    g = e.hermitian_metric(model)
    cop = copolarised_subspace(model, g)
    print(f"== {name}")
    print(f"tangent space dim {cop.tangent.dim}, co-polarised dim {cop.dim}")
    print(f"Dolbeault version agrees: {cop.dolbeault_agrees()}, omega version agrees: {cop.omega_agrees()}")
    print(f"gauge residual {cop.gauge_residual:.1e}, representative residual {cop.representative_residual:.1e}")

    gp = gprim_space(model, g)
    agree, trials = gp.audit()
    print(f"image in Aeppli H^(n-1,1): dim {gp.dim}; membership test vs definition {agree}/{trials}")

    rep = primitivity_report(model, g, cop.random_element(np.random.default_rng(0)), cop=cop)
    print(f"harmonic representative primitive: {rep.harmonic_primitive}")

    mm = moduli_metrics(model, g)
    print("g2 =\n", mm.g2)
    print("gamma =\n", mm.gamma)
    print("diag(g2 - gamma) =", np.real(np.diag(mm.g2 - mm.gamma)))
    print()

# On both models the harmonic representatives are primitive, so the
# Lefschetz part vanishes and g2 agrees with gamma.

"""Small invariant deformations and what survives them.

First a parameter family: the solvmanifold for a in [0.3, 0.7].  Then genuine
complex-structure deformations solved from the Maurer-Cartan equation to
second order and corrected to integrability by Newton's method.
"""
import numpy as np

from ddbar import (
    HPHS,
    PSKT,
    Balanced,
    copolarised_subspace,
    deform_family,
    load,
    parameter_family,
    tangent_cohomology,
)
from ddbar.catalog import balanced_solvmanifold

fam = parameter_family(lambda a: balanced_solvmanifold(a).model(), np.linspace(0.3, 0.7, 5),
                       kinds=[Balanced()], hs=(2.0,))
for f in fam.fibres:
    print(f"a = {f.values['parameter']:.2f}:", f.checks)
print("lost along the family:", fam.retained() or "nothing")

# co-polarised direction on fou
e = load("fou")
model = e.model()
g = e.hermitian_metric(model)
cop = copolarised_subspace(model, g, gauge_trials=0)
rng = np.random.default_rng(1)
mc = deform_family(model, cop.random_element(rng), metric=g, kinds=[PSKT(2), HPHS(2, 2.0)], hs=(2.0,))
print("\nfou, co-polarised direction")
for f in mc.fibres:
    print(f"  t={f.t:+.2f}  projection={f.values['copolarisation_projection']:.1e}  "
          f"newton steps={f.values['newton_steps']}  all checks: {all(f.checks.values())}")

# a transverse direction: the class of omega^{n-1} picks up a (n-2,n) part
mc = deform_family(model, cop.tangent.random_class(rng), grid=[-0.02, 0.0, 0.02], metric=g)
gm = mc.gauss_manin
print(f"\ntransverse direction: slope {gm['slope']:.4f}, first-order prediction {gm['predicted']:.4f}")

# the Iwasawa manifold is not a ddbar-manifold, and it shows
iw = load("iwasawa").model()
mc = deform_family(iw, tangent_cohomology(iw).random_class(rng), kinds=[HPHS(2, 2.0)], hs=(2.0,))
lost = {k: [round(t, 2) for t in ts] for k, ts in mc.retained().items()}
print("\niwasawa: lost along a random direction:", lost or "nothing")

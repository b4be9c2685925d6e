"""Searching for special Hermitian metrics.

Each search is a small semidefinite program: a positive (p,p)-form subject to
linear closedness conditions.  A found form comes back with a certificate that
was re-checked from scratch.
"""
from ddbar import (
    HPHS,
    HSG,
    PSKT,
    SG,
    Balanced,
    Gauduchon,
    audit_equivalences,
    find_structure,
    load,
    michelsohn_root,
)

for name in ("kodaira_thurston", "iwasawa", "fou"):
    model = load(name).model()
    n = model.n
    kinds = [Gauduchon(), Balanced(), SG(), HSG(2.0), PSKT(1), PSKT(n - 1), HPHS(n - 1, 2.0)]
    found = {str(k): find_structure(model, k).found for k in kinds}
    print(f"{name:>17}:", ", ".join(f"{k}={'yes' if v else 'no'}" for k, v in found.items()))

# a balanced metric on the solvmanifold, recovered from its (n-1)-st power
model = load("fou").model()
res = find_structure(model, Balanced())
Omega = res.certificate.witness["Omega"]
omega = michelsohn_root(Omega)
print("\nbalanced omega on fou, Hermitian matrix:")
print((-1j * omega.block(1, 1).reshape(3, 3)).round(4))

# both directions of the structure equivalences, with witnesses cross-checked
rep = audit_equivalences(model, hs=(0.5, 1.0, 2.0))
checked = [e for e in rep.entries if not (e.skipped or e.informational)]
print(f"\naudit on fou: {sum(e.agree for e in checked)}/{len(checked)} statements agree")
for e in checked[:6]:
    print(f"  h={e.h:g} p={e.p}  {e.statement}: {e.left} / {e.right}")

"""Tangent cohomology through a trivializing (n,0)-form, co-polarised and
primitive class spaces, moduli metrics, and invariant deformation families.

Everything lives in the invariant model: vector-valued forms have constant
coefficients in the frame Z_1..Z_n dual to phi^1..phi^n, and a deformation
of the complex structure is a new (1,0)-coframe phi_t = phi - V(t)^T phi-bar.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from functools import cached_property
import numpy as np

from . import _linalg as la
from .algebra import (
    Form,
    VectorValuedForm,
    _contraction_basis,
    build_model,
    contraction_operator,
    layout,
    power,
)
from .cohomology import Aeppli, Dolbeault, check_lemma, compute_group, require_lemma
from .errors import (
    HypothesisFailed,
    MCObstructed,
    NoConvergence,
    NotInSubspace,
    NotPositive,
    NoTrivializer,
)
from .metric import HermitianMetric
from .representatives import minimal_d_closed_rep

__all__ = [
    "TrivializingForm",
    "TangentClass",
    "TangentCohomology",
    "tangent_cohomology",
    "tensor_inner",
    "CopolarisedSubspace",
    "copolarised_subspace",
    "GprimSpace",
    "gprim_space",
    "PrimitivityReport",
    "primitivity_report",
    "ModuliMetrics",
    "moduli_metrics",
    "mc_defect",
    "solve_mc",
    "transport_form",
    "FibreReport",
    "DeformationFamily",
    "deform_family",
    "parameter_family",
]

TOL = 1e-10
DEFAULT_GRID = np.linspace(-0.2, 0.2, 9)


def _scale(x):
    return max(1.0, float(np.linalg.norm(x)))


# ---------------------------------------------------------------------------
# Trivializing form and the pairing v -> v _| u


class TrivializingForm:
    """Closed nowhere-zero (n,0)-form u together with the pairing T_u.

    ``pairing(q)`` is the matrix of VectorValuedForm(0,q) -> Lambda^{n-1,q},
    v -> v _| u, on flattened coefficients.  It is invertible for every q
    as soon as u is nonzero.

    Raises:
        NoTrivializer: u is missing, not of type (n,0), zero, or not closed.
    """

    def __init__(self, model, u=None):
        n = model.n
        if u is None:
            u = Form.monomial(n, tuple(range(1, n + 1)), ())
        if not isinstance(u, Form):
            raise NoTrivializer("u must be an (n,0) Form")
        if u.bidegrees != [(n, 0)] or u.norm() <= TOL:
            raise NoTrivializer(f"u must be a nonzero ({n},0)-form")
        du = np.linalg.norm(model.matrix("d") @ u.vector())
        if du > TOL * _scale(u.vector()):
            raise NoTrivializer(f"u is not closed (|du| = {du:.3g})")
        self.model = model
        self.u = u
        if abs((u ^ u.conj()).top()) <= TOL:
            raise NoTrivializer("u ^ conj(u) vanishes")

    @property
    def n(self):
        return self.model.n

    def pairing(self, q=1):
        n = self.n
        idx = self.model._indices((n - 1, q))
        return (_contraction_basis(n, q) @ self.u.vector())[:, idx].T

    @cached_property
    def T(self):
        return self.pairing(1)

    def pair(self, v):
        return Form(self.n, {(self.n - 1, v.q): self.pairing(v.q) @ v.flat()})

    def pull(self, x, q=1):
        """Inverse of the pairing on an (n-1,q) block or Form."""
        if isinstance(x, Form):
            q = x.bidegree[1]
            x = x.block(self.n - 1, q)
        return VectorValuedForm.from_flat(self.n, q, np.linalg.solve(self.pairing(q), x))

    def delbar(self, v):
        """delbar on T^{1,0}-valued (0,q)-forms, transported through T_u."""
        n = self.n
        y = self.model.block("delbar", (n - 1, v.q), (n - 1, v.q + 1)) @ (self.pairing(v.q) @ v.flat())
        if v.q + 1 > n:
            return VectorValuedForm.zero(n, n)
        return self.pull(y, v.q + 1)

    def scaled(self, c):
        return TrivializingForm(self.model, self.u * c)

    def density(self, metric):
        """i^{n^2} int u ^ conj(u), real and positive."""
        n = self.n
        return float((1j ** (n * n) * metric.integrate(self.u ^ self.u.conj())).real)


def tensor_inner(metric, v, w):
    """Pointwise pairing of T^{1,0}-valued (0,1)-forms from omega alone."""
    H = metric.H
    Hinv = np.linalg.inv(H)
    return complex(np.trace(v.coeffs @ H @ w.coeffs.conj().T @ Hinv.conj()))


# ---------------------------------------------------------------------------
# H^{0,1}(T^{1,0})


@dataclass
class TangentClass:
    """Class in H^{0,1}(T^{1,0}) with its designated representative."""

    group: "TangentCohomology"
    coords: np.ndarray
    v: VectorValuedForm

    def delbar_residual(self):
        return float(np.linalg.norm(self.group.u.delbar(self.v).flat()))

    def paired(self):
        return self.group.u.pair(self.v)


class TangentCohomology:
    """H^{0,1}(T^{1,0}) as the T_u-pullback of Dolbeault H^{n-1,1}."""

    def __init__(self, model, u, metric=None):
        n = model.n
        self.model = model
        self.u = u
        self.metric = metric
        self.dolbeault = compute_group(model, Dolbeault(n - 1, 1), metric)
        self.reps = np.linalg.solve(u.T, self.dolbeault.reps)
        self.dim = self.dolbeault.dim

    def __repr__(self):
        return f"TangentCohomology(dim={self.dim})"

    def coordinates(self, v):
        return self.dolbeault.coordinates(self.u.T @ v.flat())

    def class_of(self, v):
        return TangentClass(self, self.coordinates(v), v)

    def element(self, coords):
        coords = np.asarray(coords, dtype=complex)
        v = VectorValuedForm.from_flat(self.model.n, 1, self.reps @ coords)
        return TangentClass(self, coords, v)

    def random_class(self, rng):
        c = rng.standard_normal(self.dim) + 1j * rng.standard_normal(self.dim)
        return self.element(c)

    def gauge(self, zeta):
        """delbar of a (1,0) vector field, as a (0,1)-valued form."""
        if not isinstance(zeta, VectorValuedForm):
            zeta = VectorValuedForm.vector_field(zeta)
        return self.u.delbar(zeta)

    def random_gauge(self, rng):
        n = self.model.n
        return self.gauge(rng.standard_normal(n) + 1j * rng.standard_normal(n))


def tangent_cohomology(model, u=None, metric=None):
    if not isinstance(u, TrivializingForm):
        u = TrivializingForm(model, u)
    return TangentCohomology(model, u, metric)


# ---------------------------------------------------------------------------
# Co-polarised subspace


def _omega_power_class(metric, cls):
    model = metric.model
    n = model.n
    if cls is not None:
        return cls
    W = power(metric.omega, n - 1)
    ddb = model.block("deldelbar", (n - 1, n - 1), (n, n)) @ W.block(n - 1, n - 1)
    if np.linalg.norm(ddb) > TOL * _scale(W.vector()):
        raise HypothesisFailed("omega^{n-1} is not ddbar-closed: the metric is not Gauduchon")
    return W


def _d_closed_aeppli_exact(model, bd):
    """Basis of d-closed forms in Im del + Im delbar of bidegree bd."""
    B = compute_group(model, Aeppli(*bd)).B
    if B.shape[1] == 0:
        return B
    D = model.matrix("d")[:, model._indices(bd)]
    K = la.null_space(D @ B)
    return B @ K


@dataclass
class CopolarisedSubspace:
    """Tangent classes [v] with [v _| W]_A = 0, W the minimal d-closed omega^{n-1}.

    ``basis`` holds tangent coordinates as columns.  ``dolbeault_basis`` is
    the same construction with the Dolbeault class of v _| W, and
    ``omega_basis`` the condition [v _| omega] = 0 in H^{0,2} (None when
    v _| omega is not delbar-closed on every representative).
    """

    tangent: TangentCohomology
    W: Form
    condition: np.ndarray
    basis: np.ndarray
    dolbeault_basis: np.ndarray
    omega_basis: np.ndarray | None
    gauge_residual: float
    representative_residual: float

    @property
    def dim(self):
        return self.basis.shape[1]

    @property
    def dolbeault_dim(self):
        return self.dolbeault_basis.shape[1]

    def contains(self, cls):
        coords = cls.coords if isinstance(cls, TangentClass) else np.asarray(cls)
        return la.in_span(self.basis, coords) if self.dim else np.linalg.norm(coords) <= TOL

    def dolbeault_agrees(self):
        return _same_span(self.basis, self.dolbeault_basis)

    def omega_agrees(self):
        return self.omega_basis is not None and _same_span(self.basis, self.omega_basis)

    def element(self, c):
        return self.tangent.element(self.basis @ np.asarray(c, dtype=complex))

    def random_element(self, rng):
        c = rng.standard_normal(self.dim) + 1j * rng.standard_normal(self.dim)
        return self.element(c)


def _same_span(A, B):
    if A.shape[1] != B.shape[1]:
        return False
    if A.shape[1] == 0:
        return True
    return all(la.in_span(A, b) for b in B.T)


def _condition_matrix(tangent, W, group):
    n = tangent.model.n
    cols = []
    for r in tangent.reps.T:
        v = VectorValuedForm.from_flat(n, 1, r)
        cols.append(group.coordinates(_contract_block(v, W, group.space)))
    return np.array(cols).T.reshape(group.dim, tangent.dim)


def _contract_block(v, W, bd):
    """Block ``bd`` of v _| W."""
    return (contraction_operator(v) @ W.vector())[layout(v.n).blocks[bd]]


def copolarised_subspace(model, metric, u=None, cls=None, gauge_trials=20, seed=0):
    """Tangent classes annihilating the Aeppli class of omega^{n-1}.

    Args:
        model: InvariantModel satisfying the ddbar-lemma.
        metric: HermitianMetric; omega^{n-1} must be ddbar-closed unless an
            explicit class is passed.
        u: TrivializingForm or (n,0) Form; the standard volume form if None.
        cls: Aeppli class or ddbar-closed (n-1,n-1)-form replacing omega^{n-1}.
        gauge_trials: number of random (v, zeta) pairs for the gauge check and
            of random d-closed exact shifts for the representative check.

    Raises:
        LemmaRequired: the ddbar-lemma fails.
    """
    require_lemma(model, "ddbar")
    n = model.n
    if not isinstance(u, TrivializingForm):
        u = TrivializingForm(model, u)
    tangent = TangentCohomology(model, u, metric)
    W = minimal_d_closed_rep(metric, _omega_power_class(metric, cls)).chi_min
    bd = (n - 2, n)
    aeppli = compute_group(model, Aeppli(*bd), metric)
    dolb = compute_group(model, Dolbeault(*bd), metric)
    C = _condition_matrix(tangent, W, aeppli)
    basis = la.null_space(C) if tangent.dim else np.zeros((0, 0))
    Cd = _condition_matrix(tangent, W, dolb)
    dbasis = la.null_space(Cd) if tangent.dim else np.zeros((0, 0))

    # omega-polarised condition, defined when every v _| omega is delbar-closed
    g02 = compute_group(model, Dolbeault(0, 2), metric)
    omega_basis = None
    vals = [_contract_block(VectorValuedForm.from_flat(n, 1, r), metric.omega, (0, 2))
            for r in tangent.reps.T]
    if all(g02.is_cocycle(x) for x in vals):
        Co = np.array([g02.coordinates(x) for x in vals]).T.reshape(g02.dim, tangent.dim)
        omega_basis = la.null_space(Co) if tangent.dim else np.zeros((0, 0))

    rng = np.random.default_rng(seed)
    gauge_res = 0.0
    rep_res = 0.0
    shifts = _d_closed_aeppli_exact(model, (n - 1, n - 1))
    for _ in range(gauge_trials if tangent.dim else 0):
        cls_v = tangent.random_class(rng)
        v = cls_v.v
        base = aeppli.coordinates(_contract_block(v, W, bd))
        moved = aeppli.coordinates(_contract_block(v + tangent.random_gauge(rng), W, bd))
        gauge_res = max(gauge_res, float(np.linalg.norm(moved - base)) / _scale(base))
        if shifts.shape[1]:
            c = rng.standard_normal(shifts.shape[1]) + 1j * rng.standard_normal(shifts.shape[1])
            W2 = W + model.embed((n - 1, n - 1), shifts @ c)
            other = aeppli.coordinates(_contract_block(v, W2, bd))
            rep_res = max(rep_res, float(np.linalg.norm(other - base)) / _scale(base))
    return CopolarisedSubspace(tangent, W, C, basis, dbasis, omega_basis, gauge_res, rep_res)


# ---------------------------------------------------------------------------
# Gprim


@dataclass
class GprimSpace:
    """Image of the co-polarised subspace in Aeppli H^{n-1,1} (columns = coordinates)."""

    copolarised: CopolarisedSubspace
    aeppli: object
    basis: np.ndarray

    @property
    def dim(self):
        return self.basis.shape[1]

    def aeppli_coords(self, v):
        n = v.n
        x = self.copolarised.tangent.u.pair(v).block(n - 1, 1)
        return self.aeppli.coordinates(x)

    def contains(self, v):
        """[v _| u]_A in the image, for a delbar-closed representative v."""
        c = self.aeppli_coords(v)
        if self.dim == 0:
            return bool(np.linalg.norm(c) <= TOL * _scale(c))
        return la.in_span(self.basis, c)

    def criterion(self, v):
        """The defining condition [v _| W]_A = 0."""
        n = v.n
        grp = compute_group(self.aeppli.model, Aeppli(n - 2, n), self.aeppli.metric)
        c = grp.coordinates(_contract_block(v, self.copolarised.W, (n - 2, n)))
        return bool(np.linalg.norm(c) <= 1e-8 * _scale(c) if grp.dim else True)

    def audit(self, trials=20, seed=0):
        """(agreements, trials): membership test vs. defining condition on mixed samples."""
        rng = np.random.default_rng(seed)
        cop = self.copolarised
        tg = cop.tangent
        agree = 0
        for i in range(trials):
            if i % 2 == 0 and cop.dim:
                cls = cop.random_element(rng)
            else:
                cls = tg.random_class(rng)
            v = cls.v + tg.random_gauge(rng)
            agree += self.contains(v) == self.criterion(v)
        return agree, trials


def gprim_space(model, metric, u=None, cls=None):
    cop = copolarised_subspace(model, metric, u, cls, gauge_trials=0)
    n = model.n
    aeppli = compute_group(model, Aeppli(n - 1, 1), metric)
    cols = [aeppli.coordinates(cop.tangent.u.T @ (cop.tangent.reps @ b)) for b in cop.basis.T]
    basis = np.array(cols).T.reshape(aeppli.dim, cop.dim) if cols else np.zeros((aeppli.dim, 0))
    return GprimSpace(cop, aeppli, basis)


def primitive_class_space(model, metric):
    """Aeppli classes in H^{n-1,1} carried by d-closed primitive forms."""
    n = model.n
    bd = (n - 1, 1)
    D = model.matrix("d")[:, model._indices(bd)]
    L = metric.lefschetz_matrix(bd)
    K = la.null_space(np.vstack([D, L]))
    aeppli = compute_group(model, Aeppli(*bd), metric)
    if K.shape[1] == 0:
        return np.zeros((aeppli.dim, 0))
    coords = np.array([aeppli.coordinates(k) for k in K.T]).T
    return la.col_space(coords.reshape(aeppli.dim, K.shape[1]))


# ---------------------------------------------------------------------------
# Primitivity report


@dataclass
class PrimitivityReport:
    """Measurements on one co-polarised class; nothing here is asserted.

    Attributes:
        harmonic_primitive: Delta_A-harmonic representative of [v _| u] passes the wedge test.
        harmonic_defect: |omega ^ harmonic rep|.
        v0, zeta: least-squares solution of v _| W = delbar(omega^{n-3} ^ v0 + zeta _| W).
        decomposition_residual: residual of that system.
        nullity: dimension of its solution set's kernel (0 means unique).
        shifted_residual: |(v - delbar zeta) _| W - delbar(omega^{n-3} ^ v0)|.
        aeppli_harmonic: Delta_A (v _| omega^{n-1}) = 0 on the designated representative.
        d_closed: d(v _| omega) = 0 on the same representative.
        star_factor: c with v _| omega^{n-1} = c * star(v _| omega), and its residual.
    """

    harmonic_primitive: bool
    harmonic_defect: float
    v0: Form | None
    zeta: np.ndarray
    decomposition_residual: float
    nullity: int
    shifted_residual: float
    aeppli_harmonic: bool
    d_closed: bool
    star_factor: complex
    star_residual: float

    @property
    def equivalence_holds(self):
        return self.aeppli_harmonic == self.d_closed

    def to_dict(self):
        return {
            "harmonic_primitive": self.harmonic_primitive,
            "harmonic_defect": self.harmonic_defect,
            "decomposition_residual": self.decomposition_residual,
            "nullity": self.nullity,
            "shifted_residual": self.shifted_residual,
            "aeppli_harmonic": self.aeppli_harmonic,
            "d_closed": self.d_closed,
            "equivalence_holds": self.equivalence_holds,
            "star_factor": [self.star_factor.real, self.star_factor.imag],
            "star_residual": self.star_residual,
        }


def primitivity_report(model, metric, tangent, cop=None, u=None, cls=None):
    """Primitivity measurements for a co-polarised tangent class.

    Raises:
        NotInSubspace: ``tangent`` fails the co-polarisation condition.
    """
    if cop is None:
        cop = copolarised_subspace(model, metric, u, cls, gauge_trials=0)
    if not cop.contains(tangent):
        raise NotInSubspace("tangent class is not co-polarised")
    n = model.n
    v = tangent.v
    W = cop.W
    tu = cop.tangent.u

    # (i) harmonic representative of [v _| u]_A
    aeppli = compute_group(model, Aeppli(n - 1, 1), metric)
    x = tu.pair(v).block(n - 1, 1)
    hrep = aeppli.reps @ aeppli.coordinates(x) if aeppli.dim else np.zeros_like(x)
    hdefect = float(np.linalg.norm(metric.lefschetz_matrix((n - 1, 1)) @ hrep))
    harmonic_primitive = hdefect <= 1e-9 * _scale(hrep)

    # (ii) v _| W = delbar(omega^{n-3} ^ v0 + zeta _| W)
    bd = (n - 2, n)
    y = _contract_block(v, W, bd)
    db = model.block("delbar", (n - 2, n - 1), bd)
    cols = []
    P = np.zeros((0, 0))
    if n >= 3:
        P = metric.primitive_basis(1, 2)
        Lk = metric.lefschetz_matrix((1, 2), n - 3) if n > 3 else np.eye(P.shape[0])
        cols.append(db @ Lk @ P)
    Z = np.array([_contract_block(VectorValuedForm.vector_field(np.eye(n)[j]), W, (n - 2, n - 1))
                  for j in range(n)]).T
    cols.append(db @ Z)
    A = la.hstack(y.size, *cols)
    sol = la.lstsq_min_norm(A, y)
    resid = float(np.linalg.norm(A @ sol - y))
    nullity = la.null_space(A).shape[1]
    k = P.shape[1] if n >= 3 else 0
    v0 = Form(n, {(1, 2): P @ sol[:k]}) if n >= 3 else None
    zeta = sol[k:]
    shifted = v - cop.tangent.gauge(zeta)
    lhs = _contract_block(shifted, W, bd)
    rhs = cols[0] @ sol[:k] if n >= 3 else np.zeros_like(lhs)
    shifted_res = float(np.linalg.norm(lhs - rhs))

    # (iii) Delta_A(v _| omega^{n-1}) = 0 versus d(v _| omega) = 0
    Wraw = power(metric.omega, n - 1)
    a = model.embed(bd, _contract_block(v, Wraw, bd))
    lap = metric.laplacian_matrix("aeppli")
    ah = float(np.linalg.norm(lap @ a.vector())) <= 1e-9 * _scale(a.vector())
    b = model.embed((0, 2), _contract_block(v, metric.omega, (0, 2)))
    dc = float(np.linalg.norm(model.matrix("d") @ b.vector())) <= 1e-9 * _scale(b.vector())
    sb = metric.star(b).block(*bd)
    av = a.block(*bd)
    if np.linalg.norm(sb) > TOL:
        c = complex(np.vdot(sb, av) / np.vdot(sb, sb))
        sres = float(np.linalg.norm(av - c * sb))
    else:
        c, sres = 0j, float(np.linalg.norm(av))
    return PrimitivityReport(harmonic_primitive, hdefect, v0, zeta, resid, nullity,
                             shifted_res, ah, dc, c, sres)


# ---------------------------------------------------------------------------
# Moduli metrics


@dataclass
class ModuliMetrics:
    """Gram matrices of g1, g2 and gamma on a basis of co-polarised classes.

    ``lefschetz`` lists (|v' _| u|^2, |zeta|^2) per basis class; the
    ``*_formula_residual`` fields compare g2 and gamma with those norms.
    """

    g1: np.ndarray
    g2: np.ndarray
    gamma: np.ndarray
    g1_tensor: np.ndarray
    lefschetz: list
    density: float
    raw_volume: complex
    representatives: list
    g2_formula_residual: float
    gamma_formula_residual: float
    difference_residual: float

    @property
    def g1_discrepancy(self):
        return float(np.abs(self.g1 - self.g1_tensor).max(initial=0.0))

    def to_dict(self):
        def cm(M):
            return {"re": M.real.tolist(), "im": M.imag.tolist()}

        return {
            "g1": cm(self.g1), "g2": cm(self.g2), "gamma": cm(self.gamma),
            "g1_tensor_discrepancy": self.g1_discrepancy,
            "lefschetz": [list(map(float, t)) for t in self.lefschetz],
            "density": self.density,
            "raw_volume": [complex(self.raw_volume).real, complex(self.raw_volume).imag],
            "g2_formula_residual": self.g2_formula_residual,
            "gamma_formula_residual": self.gamma_formula_residual,
            "difference_residual": self.difference_residual,
        }


def moduli_metrics(model, metric, u=None, basis=None):
    """g1, g2 and gamma on co-polarised tangent classes.

    Each class is represented by the v with v _| u the metric-minimal
    d-closed representative of [v _| u]_A.

    Args:
        basis: list of TangentClass; the co-polarised basis if None.

    Raises:
        LemmaRequired: the ddbar-lemma fails.
        NoTrivializer: u is not a valid trivializing form.
    """
    require_lemma(model, "ddbar")
    n = model.n
    if not isinstance(u, TrivializingForm):
        u = TrivializingForm(model, u)
    if basis is None:
        cop = copolarised_subspace(model, metric, u, gauge_trials=0)
        basis = [cop.tangent.element(b) for b in cop.basis.T]
    aeppli = compute_group(model, Aeppli(n - 1, 1), metric)
    chis, vs = [], []
    for cls in basis:
        x = u.pair(cls.v)
        chi = minimal_d_closed_rep(metric, aeppli.class_of(x)).chi_min
        chis.append(chi)
        vs.append(u.pull(chi))
    k = len(chis)
    den = u.density(metric)
    uu = metric.inner(u.u, u.u).real
    sgn = -1.0 if n % 2 == 0 else -1j
    G = np.array([[metric.inner(a, b) for b in chis] for a in chis]).reshape(k, k)
    g1 = G / uu
    g1t = np.array([[tensor_inner(metric, a, b) for b in vs] for a in vs]).reshape(k, k)
    g2 = G / den
    gamma = np.array([[sgn * metric.integrate(a ^ b.conj()) for b in chis]
                      for a in chis]).reshape(k, k)
    gamma = gamma / den
    lef = []
    r2 = rg = rd = 0.0
    for i, chi in enumerate(chis):
        prim, zeta = metric.lefschetz_split(chi)
        p2, z2 = metric.norm(prim) ** 2, metric.norm(zeta) ** 2
        lef.append((p2, z2))
        r2 = max(r2, abs(g2[i, i] - (p2 + 2 * z2) / den))
        rg = max(rg, abs(gamma[i, i] - (p2 - 2 * z2) / den))
        rd = max(rd, abs(g2[i, i] - gamma[i, i] - 4 * z2 / den))
    return ModuliMetrics(g1, g2, gamma, g1t, lef, den, metric.raw_volume, vs, r2, rg, rd)


# ---------------------------------------------------------------------------
# Maurer-Cartan in the invariant complex


def _bracket_tensor(model):
    """C[g, a, b] with [E_a, E_b] = sum_g C[g,a,b] E_g in the frame dual to psi."""
    n = model.n
    N = 2 * n
    lay = model.layout
    C = np.zeros((N, N, N), dtype=complex)
    for g in range(N):
        dv = model._dgen[g]
        for a in range(N):
            for b in range(a + 1, N):
                val = dv[lay.index[(1 << a) | (1 << b)]]
                C[g, a, b] = -val
                C[g, b, a] = val
    return C


def mc_defect(model, V, C=None):
    """Integrability defect of the (0,1)-space spanned by Zbar_l + sum_j V[l,j] Z_j.

    Zero exactly when the deformed structure is integrable; the linear part
    is the transported delbar on (0,1)-valued forms.
    """
    n = model.n
    C = _bracket_tensor(model) if C is None else C
    X = np.hstack([V, np.eye(n)])
    out = []
    for l in range(n):
        for m in range(l + 1, n):
            br = np.einsum("gab,a,b->g", C, X[l], X[m])
            out.append(br[:n] - V.T @ br[n:])
    return np.array(out).reshape(-1)


def _mc_jacobian(model, V, C):
    n = model.n
    X = np.hstack([V, np.eye(n)])
    cols = []
    for i in range(n * n):
        dV = np.zeros((n, n), dtype=complex)
        dV.flat[i] = 1.0
        dX = np.hstack([dV, np.zeros((n, n))])
        out = []
        for l in range(n):
            for m in range(l + 1, n):
                br = np.einsum("gab,a,b->g", C, X[l], X[m])
                dbr = np.einsum("gab,a,b->g", C, dX[l], X[m]) + np.einsum("gab,a,b->g", C, X[l], dX[m])
                out.append(dbr[:n] - dV.T @ br[n:] - V.T @ dbr[n:])
        cols.append(np.array(out).reshape(-1))
    return np.array(cols).T


def solve_mc(model, V1, order=2, C=None):
    """Coefficients [V1, V2, ...] of an order-``order`` solution t V1 + t^2 V2 + ...

    Raises:
        MCObstructed: V1 is not delbar-closed, or a higher coefficient has no
            invariant solution.
    """
    n = model.n
    C = _bracket_tensor(model) if C is None else C
    V1 = np.asarray(V1, dtype=complex).reshape(n, n)
    L = _mc_jacobian(model, np.zeros((n, n)), C)
    if np.linalg.norm(L @ V1.ravel()) > TOL * _scale(V1):
        raise MCObstructed("first-order term is not delbar-closed")
    coeffs = [V1]
    for k in range(2, order + 1):
        # order-k coefficient of the defect along the current truncation, without V_k
        ss = np.arange(1, k + 3, dtype=float) / (k + 2)
        vals = np.array([mc_defect(model, sum(s ** (i + 1) * c for i, c in enumerate(coeffs)), C)
                         for s in ss])
        vander = np.vander(ss, k + 3, increasing=True)[:, 1:]
        poly = np.linalg.solve(vander[:, : len(ss)], vals)
        rhs = -poly[k - 1]
        Vk = la.lstsq_min_norm(L, rhs)
        if np.linalg.norm(L @ Vk - rhs) > 1e-9 * _scale(rhs):
            raise MCObstructed(f"order-{k} term has no invariant solution")
        coeffs.append(Vk.reshape(n, n))
    return coeffs


def _newton_mc(model, V, C, tol=1e-13, max_iter=30):
    for it in range(max_iter):
        r = mc_defect(model, V, C)
        if np.linalg.norm(r) <= tol:
            return V, it
        J = _mc_jacobian(model, V, C)
        V = V - la.lstsq_min_norm(J, r).reshape(V.shape)
    if np.linalg.norm(mc_defect(model, V, C)) <= 1e-10:
        return V, max_iter
    raise NoConvergence("Newton correction of the Maurer-Cartan solution failed")


def deformed_model(model, V):
    """Model with (1,0)-coframe phi - V^T phi-bar.

    Raises:
        NonIntegrable: the deformed structure is not integrable.
    """
    P = model.coframe
    Pt = P - np.asarray(V).T @ P.conj()
    return build_model(replace(model.presentation, coframe=Pt))


def transport_form(a, src, dst):
    """Re-express a Form of ``src`` in the generator basis of ``dst`` (same real algebra)."""
    return Form.from_vector(src.n, dst.from_real @ (src.to_real @ a.vector()))


# ---------------------------------------------------------------------------
# Families and openness


@dataclass
class FibreReport:
    """Per-fibre re-certification; ``checks`` maps a label to a boolean."""

    t: float
    model: object
    checks: dict
    values: dict = field(default_factory=dict)

    def to_dict(self):
        return {"t": self.t, "checks": dict(self.checks),
                "values": {k: float(v) for k, v in self.values.items()}}


@dataclass
class DeformationFamily:
    """Fibres over a parameter grid together with the base-point checks."""

    grid: np.ndarray
    fibres: list
    coefficients: list | None = None
    gauss_manin: dict | None = None

    @property
    def base(self):
        i = int(np.argmin(np.abs(self.grid)))
        return self.fibres[i]

    def retained(self):
        """Labels that hold at the base and fail on some fibre."""
        base = self.base.checks
        lost = {}
        for f in self.fibres:
            for k, ok in f.checks.items():
                if base.get(k) and not ok:
                    lost.setdefault(k, []).append(f.t)
        return lost

    @property
    def open(self):
        return not self.retained()

    def to_dict(self):
        return {"grid": list(map(float, self.grid)),
                "fibres": [f.to_dict() for f in self.fibres],
                "lost": {k: list(map(float, v)) for k, v in self.retained().items()},
                "gauss_manin": self.gauss_manin}


def _fibre_checks(model, kinds, hs, seed):
    from .structures import find_structure

    checks = {"ddbar": bool(check_lemma(model, "ddbar"))}
    for h in hs:
        checks[f"h_ddbar({h:g})"] = bool(check_lemma(model, "h_ddbar", h))
    n = model.n
    u = Form.monomial(n, tuple(range(1, n + 1)), ())
    checks["calabi_yau"] = bool(np.linalg.norm(model.matrix("d") @ u.vector()) <= TOL)
    for kind in kinds:
        res = find_structure(model, kind, seed=seed)
        checks[str(kind)] = res.found
    return checks


def _class_norm(group, x):
    """Norm of the harmonic part of a cocycle: Gram distance to the coboundaries."""
    G = group.gram
    R = np.linalg.cholesky(G).conj().T  # |y|_G = |R y|
    x = np.asarray(x, dtype=complex)
    if group.B.shape[1]:
        y = la.lstsq_min_norm(R @ group.B, R @ x)
        x = x - group.B @ y
    return float(np.linalg.norm(R @ x))


def deform_family(model, tangent, grid=None, order=2, metric=None, kinds=None, hs=(),
                  seed=0, exact=True):
    """Invariant deformation along a tangent class, re-certified on every fibre.

    The order-``order`` Maurer-Cartan truncation is corrected by Newton's
    method so every fibre is genuinely integrable (``exact=False`` keeps
    the bare truncation and lets NonIntegrable propagate).

    Args:
        tangent: TangentClass, VectorValuedForm or n x n coefficient matrix.
        grid: parameter values; nine points in [-0.2, 0.2] by default.
        metric: base HermitianMetric; enables the co-polarisation projection,
            the transported omega-tilde and the first-order check.
        kinds: StructureKind list searched on every fibre.
        hs: twist parameters for the h-ddbar lemma checks.

    Raises:
        MCObstructed: the Maurer-Cartan equation has no invariant solution to ``order``.
        NonIntegrable: a fibre fails integrability.
    """
    from .structures import michelsohn_root

    n = model.n
    grid = DEFAULT_GRID if grid is None else np.asarray(grid, dtype=float)
    kinds = list(kinds or [])
    if isinstance(tangent, TangentClass):
        V1 = tangent.v.coeffs
    elif isinstance(tangent, VectorValuedForm):
        V1 = tangent.coeffs
    else:
        V1 = np.asarray(tangent, dtype=complex)
    C = _bracket_tensor(model)
    coeffs = solve_mc(model, V1, order, C)

    W = Wdr = None
    if metric is not None and check_lemma(model, "ddbar"):
        W = minimal_d_closed_rep(metric, _omega_power_class(metric, None)).chi_min
        # the minimal representative need not be positive; omega-tilde only
        # needs the de Rham class, so prefer omega^{n-1} when it is closed
        Wdr = power(metric.omega, n - 1)
        if np.linalg.norm(model.matrix("d") @ Wdr.vector()) > TOL:
            Wdr = W

    fibres = []
    for t in grid:
        V = sum(t ** (i + 1) * c for i, c in enumerate(coeffs))
        trunc = float(np.linalg.norm(mc_defect(model, V, C)))
        steps = 0
        if exact and t != 0:
            V, steps = _newton_mc(model, V, C)
        mt = model if t == 0 else deformed_model(model, V)
        checks = _fibre_checks(mt, kinds, hs, seed)
        values = {"mc_truncation_defect": trunc, "newton_steps": steps,
                  "correction": float(np.linalg.norm(V - sum(t ** (i + 1) * c for i, c in enumerate(coeffs))))}
        if W is not None:
            Wt = transport_form(W, model, mt)
            gt = HermitianMetric(mt, metric.H)
            ap = compute_group(mt, Aeppli(n - 2, n), gt)
            proj = _class_norm(ap, Wt.block(n - 2, n))
            values["copolarisation_projection"] = proj
            Om = Form(n, {(n - 1, n - 1): transport_form(Wdr, model, mt).block(n - 1, n - 1)})
            Om = (Om + Om.conj()) * 0.5
            try:
                om = michelsohn_root(Om) if n > 2 else Om
                checks["omega_tilde"] = True
                values["omega_tilde_min_eig"] = float(
                    np.linalg.eigvalsh(-1j * om.block(1, 1).reshape(n, n)).min()) if n > 2 else 0.0
            except (NotPositive, NoConvergence):
                checks["omega_tilde"] = False
        fibres.append(FibreReport(float(t), mt, checks, values))

    gm = None
    if W is not None:
        nz = grid[grid != 0]
        if nz.size:
            ts = nz[np.argmin(np.abs(nz))]
            fib = next(f for f in fibres if f.t == ts)
            slope = fib.values["copolarisation_projection"] / abs(ts)
            ap0 = compute_group(model, Aeppli(n - 2, n), metric)
            v = VectorValuedForm.from_flat(n, 1, np.asarray(V1).ravel())
            pred = _class_norm(ap0, _contract_block(v, W, (n - 2, n)))
            gm = {"t_step": float(abs(ts)), "slope": slope, "predicted": pred,
                  "within": bool(abs(slope - pred) <= 10 * abs(ts) * max(1.0, pred))}
    return DeformationFamily(grid, fibres, coeffs, gm)


def parameter_family(factory, values, base=None, kinds=None, hs=(), seed=0):
    """Fibres of a family given by a model-valued function of a parameter.

    ``base`` (defaulting to the middle value) is shifted to t = 0 so the
    report reads like ``deform_family``.
    """
    values = np.asarray(values, dtype=float)
    base = values[len(values) // 2] if base is None else base
    fibres = []
    for a in values:
        m = factory(a)
        fibres.append(FibreReport(float(a - base), m, _fibre_checks(m, list(kinds or []), hs, seed),
                                  {"parameter": float(a)}))
    return DeformationFamily(values - base, fibres)

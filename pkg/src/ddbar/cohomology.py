"""Cohomology of the invariant double complex.

Every flavor is a quotient Z / B of subspaces of one coefficient space (a
bidegree block or a total degree).  Representatives are chosen in the
complement of B inside Z: Gram-orthogonal when a metric is supplied (which
gives the harmonic forms for Aeppli and Bott-Chern), Euclidean otherwise.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import _linalg as la
from .algebra import Form, OperatorTag
from .errors import HypothesisFailed, InconsistentSystem, LemmaRequired, NoCanonicalMap, ZeroH

__all__ = [
    "DeRham",
    "Dolbeault",
    "BottChern",
    "Aeppli",
    "Dh",
    "HAeppli",
    "CohomologyGroup",
    "CohomologyClass",
    "LemmaVerdict",
    "compute_group",
    "check_lemma",
    "transfer_class",
    "theta_map",
]

CLOSED_TOL = 1e-10


# ---------------------------------------------------------------------------
# Flavors


@dataclass(frozen=True)
class DeRham:
    k: int

    @property
    def space(self):
        return self.k

    def cocycle_ops(self, model):
        return [model.block("d", self.k, self.k + 1)]

    def coboundaries(self, model):
        return [model.block("d", self.k - 1, self.k)]


@dataclass(frozen=True)
class Dolbeault:
    p: int
    q: int

    @property
    def space(self):
        return (self.p, self.q)

    def cocycle_ops(self, model):
        return [model.block("delbar", self.space, (self.p, self.q + 1))]

    def coboundaries(self, model):
        return [model.block("delbar", (self.p, self.q - 1), self.space)]


@dataclass(frozen=True)
class BottChern:
    p: int
    q: int

    @property
    def space(self):
        return (self.p, self.q)

    def cocycle_ops(self, model):
        s = self.space
        return [model.block("del", s, (self.p + 1, self.q)), model.block("delbar", s, (self.p, self.q + 1))]

    def coboundaries(self, model):
        return [model.block("deldelbar", (self.p - 1, self.q - 1), self.space)]


@dataclass(frozen=True)
class Aeppli:
    p: int
    q: int

    @property
    def space(self):
        return (self.p, self.q)

    def cocycle_ops(self, model):
        return [model.block("deldelbar", self.space, (self.p + 1, self.q + 1))]

    def coboundaries(self, model):
        return [model.block("del", (self.p - 1, self.q), self.space),
                model.block("delbar", (self.p, self.q - 1), self.space)]


def _check_h(h):
    if h is None or h == 0:
        raise ZeroH("h must be a nonzero real number")


@dataclass(frozen=True)
class Dh:
    k: int
    h: float

    def __post_init__(self):
        _check_h(self.h)

    @property
    def space(self):
        return self.k

    def cocycle_ops(self, model):
        return [model.block("d_h", self.k, self.k + 1, h=self.h)]

    def coboundaries(self, model):
        return [model.block("d_h", self.k - 1, self.k, h=self.h)]


@dataclass(frozen=True)
class HAeppli:
    k: int
    h: float

    def __post_init__(self):
        _check_h(self.h)

    @property
    def space(self):
        return self.k

    def cocycle_ops(self, model):
        return [model.block("dh_dminusinvh", self.k, self.k + 2, h=self.h)]

    def coboundaries(self, model):
        return [model.block("d_h", self.k - 1, self.k, h=self.h),
                model.block("d_minus_inv_h", self.k - 1, self.k, h=self.h)]


FLAVORS = {"DeRham": DeRham, "Dolbeault": Dolbeault, "BottChern": BottChern,
           "Aeppli": Aeppli, "Dh": Dh, "HAeppli": HAeppli}


def flavor_name(fl):
    return type(fl).__name__


# ---------------------------------------------------------------------------
# Groups and classes


class CohomologyGroup:
    """Quotient Z / B with a fixed basis of representatives.

    ``reps`` holds the representatives as columns in the coordinates of the
    flavor's space; ``coordinates`` maps any cocycle to quotient coordinates.
    """

    def __init__(self, model, flavor, metric=None):
        self.model = model
        self.flavor = flavor
        self.metric = metric
        space = flavor.space
        self.dim_space = dim = model.space_dim(space)
        ops = [op for op in flavor.cocycle_ops(model) if op.shape[0]]
        self.cocycle_matrix = np.vstack(ops) if ops else np.zeros((0, dim))
        self.Z = la.null_space(self.cocycle_matrix) if dim else np.zeros((0, 0))
        self.B = la.span(dim, *flavor.coboundaries(model))
        if metric is not None:
            M = metric.block_gram(space)
        else:
            M = np.eye(dim)
        self.gram = M
        self.reps = la.gram_complement(self.Z, self.B, M)
        self.dim = self.reps.shape[1]
        self._basis = la.hstack(dim, self.reps, self.B)

    def __repr__(self):
        return f"CohomologyGroup({self.flavor}, dim={self.dim})"

    @property
    def space(self):
        return self.flavor.space

    def to_form(self, x):
        return self.model.embed(self.space, x)

    def representatives(self):
        return [self.to_form(c) for c in self.reps.T]

    def cocycle_residual(self, x):
        if self.cocycle_matrix.shape[0] == 0:
            return 0.0
        return float(np.linalg.norm(self.cocycle_matrix @ x))

    def _vec(self, a):
        if isinstance(a, Form):
            return self.model.restrict(self.space, a)
        return np.asarray(a, dtype=complex)

    def is_cocycle(self, a, tol=CLOSED_TOL):
        x = self._vec(a)
        return self.cocycle_residual(x) <= tol * max(1.0, np.linalg.norm(x))

    def is_coboundary(self, a):
        return la.in_span(la.hstack(self.dim_space, self.B), self._vec(a))

    def coordinates(self, a, check=True):
        """Quotient coordinates of a cocycle."""
        x = self._vec(a)
        if check and not self.is_cocycle(x):
            raise InconsistentSystem(f"form is not a {self.flavor} cocycle "
                                     f"(residual {self.cocycle_residual(x):.3g})")
        if self.dim == 0:
            return np.zeros(0, dtype=complex)
        sol = la.lstsq_min_norm(self._basis, x)
        return sol[: self.dim]

    def class_of(self, a):
        x = self._vec(a)
        return CohomologyClass(self, self.coordinates(x), x)

    def element(self, coords):
        coords = np.asarray(coords, dtype=complex)
        x = self.reps @ coords
        return CohomologyClass(self, coords, x)

    def random_class(self, rng):
        c = rng.standard_normal(self.dim) + 1j * rng.standard_normal(self.dim)
        return self.element(c)

    def random_coboundary(self, rng):
        if self.B.shape[1] == 0:
            return np.zeros(self.dim_space, dtype=complex)
        c = rng.standard_normal(self.B.shape[1]) + 1j * rng.standard_normal(self.B.shape[1])
        return self.B @ c

    def coboundary_solve(self, x):
        """(ops, coefficient vectors) with x = sum op_i @ y_i, or raise."""
        ops = self.flavor.coboundaries(self.model)
        A = la.hstack(self.dim_space, *ops)
        y = la.lstsq_min_norm(A, x)
        if np.linalg.norm(A @ y - x) > 1e-8 * max(1.0, np.linalg.norm(x)):
            raise InconsistentSystem("not a coboundary")
        out, start = [], 0
        for op in ops:
            out.append(y[start:start + op.shape[1]])
            start += op.shape[1]
        return out


@dataclass
class CohomologyClass:
    group: CohomologyGroup
    coords: np.ndarray
    rep_vector: np.ndarray = field(repr=False)

    @property
    def flavor(self):
        return self.group.flavor

    @property
    def representative(self):
        return self.group.to_form(self.rep_vector)

    @property
    def is_zero(self):
        return bool(np.linalg.norm(self.coords) <= 1e-9)

    def shifted(self, rng):
        """Same class, representative moved by a random coboundary."""
        return CohomologyClass(self.group, self.coords, self.rep_vector + self.group.random_coboundary(rng))


def compute_group(model, flavor, metric=None):
    return CohomologyGroup(model, flavor, metric)


# ---------------------------------------------------------------------------
# Lemma checks


@dataclass
class LemmaVerdict:
    kind: str
    holds: bool
    witness: Form | None = None
    location: object = None
    reason: str = ""
    failures: list = field(default_factory=list)

    def __bool__(self):
        return self.holds


def _gap_witness(model, spec, X, target):
    """A vector of span(X) outside span(target), or None."""
    dim = model.space_dim(spec)
    if X.shape[1] == 0:
        return None
    if la.contains(la.hstack(dim, target), X):
        return None
    T = la.col_space(target) if target.shape[1] else np.zeros((dim, 0))
    R = X - T @ (T.conj().T @ X)
    j = int(np.argmax(np.linalg.norm(R, axis=0)))
    w = X[:, j]
    return w / np.linalg.norm(w)


def _image_in_block(model, tag, k, bd, h=None):
    """Im(op: degree k-1 -> k) intersected with the bidegree block bd, in block coords."""
    full = model.block(tag, k - 1, k, h=h)
    idx = list(model._indices(k))
    blk = list(model._indices(bd))
    pos = [idx.index(i) for i in blk]
    other = [i for i in range(len(idx)) if i not in pos]
    if full.shape[1] == 0:
        return np.zeros((len(blk), 0), dtype=complex)
    K = la.null_space(full[other]) if other else np.eye(full.shape[1], dtype=complex)
    return full[pos] @ K


def _ddbar_lemma(model):
    lay = model.layout
    failures = []
    first = None
    for bd in lay.bidegrees:
        p, q = bd
        k = p + q
        dim = lay.block_size(p, q)
        Z = la.null_space(np.vstack([model.block("del", bd, (p + 1, q)),
                                     model.block("delbar", bd, (p, q + 1))]))
        target = model.block("deldelbar", (p - 1, q - 1), bd)
        images = {
            "del": model.block("del", (p - 1, q), bd),
            "delbar": model.block("delbar", (p, q - 1), bd),
            "d": _image_in_block(model, "d", k, bd) if k >= 1 else np.zeros((dim, 0)),
        }
        for name, I in images.items():
            X = la.intersect(Z, I)
            w = _gap_witness(model, bd, X, target)
            if w is not None:
                failures.append((bd, name))
                if first is None:
                    first = (bd, name, w)
    if first is None:
        return LemmaVerdict("ddbar", True)
    bd, name, w = first
    return LemmaVerdict("ddbar", False, model.embed(bd, w), bd,
                        f"d-closed {bd}-form in Im {name} but not in Im ddbar", failures)


def _h_ddbar_lemma(model, h):
    _check_h(h)
    failures = []
    first = None
    for k in range(2 * model.n + 1):
        Z = la.null_space(np.vstack([model.block("d_h", k, k + 1, h=h),
                                     model.block("d_minus_inv_h", k, k + 1, h=h)]))
        target = model.block("dh_dminusinvh", k - 2, k, h=h)
        images = {
            "d_h": model.block("d_h", k - 1, k, h=h),
            "d_minus_inv_h": model.block("d_minus_inv_h", k - 1, k, h=h),
            "d": model.block("d", k - 1, k),
        }
        for name, I in images.items():
            X = la.intersect(Z, I)
            w = _gap_witness(model, k, X, target)
            if w is not None:
                failures.append((k, name))
                if first is None:
                    first = (k, name, w)
    kind = f"h_ddbar({h:g})"
    if first is None:
        return LemmaVerdict(kind, True)
    k, name, w = first
    return LemmaVerdict(kind, False, model.embed(k, w), k,
                        f"degree-{k} form closed for d_h and d_-1/h, in Im {name}, not in Im d_h d_-1/h",
                        failures)


def check_lemma(model, kind="ddbar", h=None):
    """Decide the ddbar-lemma (kind="ddbar") or its h-twisted variant (kind="h_ddbar")."""
    key = ("lemma", kind, h)
    cache = model._cache
    if key not in cache:
        if kind == "ddbar":
            cache[key] = _ddbar_lemma(model)
        elif kind == "h_ddbar":
            cache[key] = _h_ddbar_lemma(model, h)
        else:
            raise ValueError(f"unknown lemma kind {kind!r}")
    return cache[key]


def require_lemma(model, kind="ddbar", h=None):
    v = check_lemma(model, kind, h)
    if not v.holds:
        raise LemmaRequired(f"{v.kind}-lemma fails: {v.reason}")
    return v


# ---------------------------------------------------------------------------
# Transfers


def theta_map(model, h):
    """Full-algebra matrix of theta_h (scales (p,q) by h^p)."""
    return model.matrix(OperatorTag("theta", h))


def _solve(A, b, what):
    y = la.lstsq_min_norm(A, b)
    if np.linalg.norm(A @ y - b) > 1e-8 * max(1.0, np.linalg.norm(b)):
        raise InconsistentSystem(f"no solution for {what}")
    return y


def d_closed_rep_dh(model, h, k, x):
    """d-closed representative of the d_h-class of x (degree-k coordinates)."""
    dh = model.block("d_h", k - 1, k, h=h)
    d_k = model.block("d", k, k + 1)
    beta = _solve(d_k @ dh, -d_k @ x, "d(alpha + d_h beta) = 0")
    return x + dh @ beta


def dh_closed_rep_ha(model, h, k, x):
    """d_h-closed representative of the h-Aeppli class of x."""
    dh_k = model.block("d_h", k, k + 1, h=h)
    dm = model.block("d_minus_inv_h", k - 1, k, h=h)
    v = _solve(dh_k @ dm, -dh_k @ x, "d_h(Omega + d_-1/h v) = 0")
    return x + dm @ v


def d_closed_rep_aeppli(model, p, q, x):
    """d-closed representative of the Aeppli class of x, as a degree-(p+q) vector.

    Solves ddbar a = delbar x and ddbar b = -del x; then x + del a + delbar b
    is both del- and delbar-closed.
    """
    bd = (p, q)
    Dl_b = model.block("del", (p - 1, q), bd)
    Db_b = model.block("delbar", (p, q - 1), bd)
    A_a = model.block("deldelbar", (p - 1, q), (p, q + 1))
    A_b = model.block("deldelbar", (p, q - 1), (p + 1, q))
    a = _solve(A_a, model.block("delbar", bd, (p, q + 1)) @ x, "ddbar a = delbar chi")
    b = _solve(A_b, -model.block("del", bd, (p + 1, q)) @ x, "ddbar b = -del chi")
    return x + Dl_b @ a + Db_b @ b


def _block_of_degree(model, k, bd, x):
    idx = list(model._indices(k))
    return x[[idx.index(i) for i in model._indices(bd)]]


def _degree_of_block(model, k, bd, y):
    idx = list(model._indices(k))
    out = np.zeros(len(idx), dtype=complex)
    out[[idx.index(i) for i in model._indices(bd)]] = y
    return out


def transfer_class(cls, target, verify_shifts=10, seed=0):
    """Push a class along the canonical map to ``target``.

    Supported maps: Dh -> DeRham (F, needs the h-ddbar-lemma), HAeppli -> Dh
    (G, needs the h-ddbar-lemma), Dolbeault -> Aeppli, DeRham -> Aeppli
    (type component), Aeppli -> DeRham (needs the ddbar-lemma), DeRham -> Dh
    (theta_h).  The image is recomputed for ``verify_shifts`` random
    representatives of the same class; disagreement raises HypothesisFailed.
    """
    src = cls.flavor
    model = cls.group.model
    metric = cls.group.metric
    tgt_group = compute_group(model, target, metric)
    s, t = flavor_name(src), flavor_name(target)

    if s == "Dh" and t == "DeRham" and src.k == target.k:
        require_lemma(model, "h_ddbar", src.h)

        def push(x):
            return d_closed_rep_dh(model, src.h, src.k, x)
    elif s == "HAeppli" and t == "Dh" and src.k == target.k and src.h == target.h:
        require_lemma(model, "h_ddbar", src.h)

        def push(x):
            return dh_closed_rep_ha(model, src.h, src.k, x)
    elif s == "Dolbeault" and t == "Aeppli" and src.space == target.space:
        def push(x):
            return x
    elif s == "DeRham" and t == "Aeppli" and src.k == target.p + target.q:
        def push(x):
            return _block_of_degree(model, src.k, target.space, x)
    elif s == "Aeppli" and t == "DeRham" and sum(src.space) == target.k:
        require_lemma(model, "ddbar")

        def push(x):
            y = d_closed_rep_aeppli(model, src.p, src.q, x)
            return _degree_of_block(model, target.k, src.space, y)
    elif s == "DeRham" and t == "Dh" and src.k == target.k:
        T = theta_map(model, target.h)
        idx = model._indices(src.k)
        Tk = T[np.ix_(idx, idx)]

        def push(x):
            return Tk @ x
    else:
        raise NoCanonicalMap(f"no canonical map {src} -> {target}")

    y = push(cls.rep_vector)
    image = tgt_group.class_of(y)
    if verify_shifts:
        rng = np.random.default_rng(seed)
        for _ in range(verify_shifts):
            y2 = push(cls.shifted(rng).rep_vector)
            c2 = tgt_group.coordinates(y2)
            if np.linalg.norm(c2 - image.coords) > 1e-7 * max(1.0, np.linalg.norm(image.coords)):
                raise HypothesisFailed(f"{src} -> {target} depends on the representative")
    return image


def map_matrix(src_group, target, verify_shifts=0):
    """Matrix of a transfer map in the two groups' quotient coordinates."""
    cols = []
    tgt = None
    for j in range(src_group.dim):
        e = np.zeros(src_group.dim)
        e[j] = 1
        img = transfer_class(src_group.element(e), target, verify_shifts=verify_shifts)
        tgt = img.group
        cols.append(img.coords)
    if tgt is None:
        tgt = compute_group(src_group.model, target, src_group.metric)
        return np.zeros((tgt.dim, 0)), tgt
    return np.array(cols).T, tgt


def dimension_table(model, hs=(0.5, 2.0)):
    """All flavor dimensions of a model, keyed by readable labels."""
    lay = model.layout
    out = {}
    for p, q in lay.bidegrees:
        for name in ("Dolbeault", "BottChern", "Aeppli"):
            out[f"{name}({p},{q})"] = compute_group(model, FLAVORS[name](p, q)).dim
    for k in range(2 * model.n + 1):
        out[f"DeRham({k})"] = compute_group(model, DeRham(k)).dim
        for h in hs:
            out[f"Dh({k},{h:g})"] = compute_group(model, Dh(k, h)).dim
            out[f"HAeppli({k},{h:g})"] = compute_group(model, HAeppli(k, h)).dim
    return out

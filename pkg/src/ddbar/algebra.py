"""Invariant forms on a Lie group with a left-invariant complex structure.

The complexified exterior algebra is spanned by monomials in the (1,0)-coframe
phi^1..phi^n and its conjugate.  A monomial phi^I ^ conj(phi)^J is stored as a
bit mask over 2n generators (bits 0..n-1 for phi, n..2n-1 for conj(phi)); the
increasing bit order is exactly the normal form phi^I ^ conj(phi)^J with I, J
increasing.  Blocks Lambda^{p,q} are ordered by total degree, then by p, and
inside a block by (I, J) lexicographically with I major.

Indices exposed to users (``Form.monomial``, presentations, catalog entries)
are 1-based to match the usual phi^1, phi^2, ... notation.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property, lru_cache
from math import comb

import numpy as np

from . import _linalg as la
from .errors import (
    DegreeMismatch,
    DegreeOverflow,
    JacobiViolation,
    NonIntegrable,
    NotAlmostComplex,
    ZeroH,
)

__all__ = [
    "ExteriorLayout",
    "layout",
    "Form",
    "VectorValuedForm",
    "OperatorTag",
    "LieAlgebraPresentation",
    "InvariantModel",
    "build_model",
    "presentation_from_complex",
    "wedge",
    "power",
    "contract",
    "apply_diff",
]

STRUCT_TOL = 1e-9


def _popcount(x):
    return bin(x).count("1")


class ExteriorLayout:
    """Index bookkeeping for the exterior algebra on 2n generators."""

    def __init__(self, n):
        self.n = n
        self.ngen = 2 * n
        self.bidegrees = []
        self.masks = []
        self.monomials = {}
        self.blocks = {}
        for k in range(2 * n + 1):
            for p in range(max(0, k - n), min(k, n) + 1):
                q = k - p
                start = len(self.masks)
                mons = []
                for I in itertools.combinations(range(n), p):
                    for J in itertools.combinations(range(n), q):
                        mask = sum(1 << i for i in I) | sum(1 << (n + j) for j in J)
                        self.masks.append(mask)
                        mons.append((I, J))
                self.bidegrees.append((p, q))
                self.monomials[(p, q)] = mons
                self.blocks[(p, q)] = slice(start, len(self.masks))
        self.dim = len(self.masks)
        self.index = {m: i for i, m in enumerate(self.masks)}
        self.bideg_of = np.empty((self.dim, 2), dtype=int)
        for bd, sl in self.blocks.items():
            self.bideg_of[sl] = bd
        self.degree_of = self.bideg_of.sum(axis=1)

    def block_size(self, p, q):
        if not (0 <= p <= self.n and 0 <= q <= self.n):
            return 0
        return comb(self.n, p) * comb(self.n, q)

    def degree_indices(self, k):
        return np.flatnonzero(self.degree_of == k)

    def degree_bidegrees(self, k):
        return [(p, k - p) for p in range(max(0, k - self.n), min(k, self.n) + 1)]

    def valid(self, p, q):
        return 0 <= p <= self.n and 0 <= q <= self.n

    @cached_property
    def wedge_table(self):
        """Target index (-1 if the product vanishes) and sign for basis pairs."""
        tgt = np.full((self.dim, self.dim), -1, dtype=int)
        sgn = np.zeros((self.dim, self.dim), dtype=float)
        for a, S in enumerate(self.masks):
            for b, T in enumerate(self.masks):
                if S & T:
                    continue
                swaps = 0
                t = T
                while t:
                    low = t & -t
                    swaps += _popcount(S & ~((low << 1) - 1))
                    t ^= low
                tgt[a, b] = self.index[S | T]
                sgn[a, b] = -1.0 if swaps % 2 else 1.0
        return tgt, sgn

    def wedge_vectors(self, x, y):
        tgt, sgn = self.wedge_table
        prod = np.multiply.outer(x, y) * sgn
        ok = tgt >= 0
        out = np.zeros(self.dim, dtype=complex)
        np.add.at(out, tgt[ok], prod[ok])
        return out

    def left_mult(self, x):
        """Matrix of y -> x ^ y."""
        tgt, sgn = self.wedge_table
        L = np.zeros((self.dim, self.dim), dtype=complex)
        nz = np.flatnonzero(x)
        for a in nz:
            row = tgt[a]
            ok = row >= 0
            L[row[ok], np.flatnonzero(ok)] += sgn[a, ok] * x[a]
        return L

    @cached_property
    def conj_perm(self):
        """conj(e_a) = sign[a] * e_{perm[a]}."""
        n = self.n
        perm = np.empty(self.dim, dtype=int)
        sign = np.empty(self.dim)
        low = (1 << n) - 1
        for a, m in enumerate(self.masks):
            hol, anti = m & low, m >> n
            perm[a] = self.index[anti | (hol << n)]
            sign[a] = (-1.0) ** (_popcount(hol) * _popcount(anti))
        return perm, sign

    @cached_property
    def conj_matrix(self):
        """Real signed permutation K with conj(x) = K @ x.conj()."""
        perm, sign = self.conj_perm
        K = np.zeros((self.dim, self.dim))
        K[perm, np.arange(self.dim)] = sign
        return K

    @cached_property
    def iota(self):
        """Contraction matrices by the dual frame vectors Z_1..Z_n."""
        mats = []
        for j in range(self.n):
            M = np.zeros((self.dim, self.dim))
            bit = 1 << j
            for a, m in enumerate(self.masks):
                if m & bit:
                    s = -1.0 if _popcount(m & (bit - 1)) % 2 else 1.0
                    M[self.index[m ^ bit], a] = s
            mats.append(M)
        return mats

    def basis_vector(self, mask, coeff=1.0):
        v = np.zeros(self.dim, dtype=complex)
        v[self.index[mask]] = coeff
        return v

    def antiholo_mask(self, J):
        return sum(1 << (self.n + j) for j in J)

    @cached_property
    def top_index(self):
        return self.index[(1 << self.ngen) - 1]


@lru_cache(maxsize=None)
def layout(n):
    return ExteriorLayout(n)


def _sort_sign(seq):
    seq = list(seq)
    sign = 1
    for i in range(len(seq)):
        for j in range(len(seq) - 1 - i):
            if seq[j] > seq[j + 1]:
                seq[j], seq[j + 1] = seq[j + 1], seq[j]
                sign = -sign
    if len(set(seq)) != len(seq):
        return 0, tuple(seq)
    return sign, tuple(seq)


class Form:
    """A (possibly mixed-degree) invariant form with per-bidegree coefficients.

    ``coeffs`` maps each present bidegree (p, q) to a complex vector of length
    C(n,p)*C(n,q) in the block's (I, J) order.  Declared bidegrees are kept even
    when their coefficients vanish, so operators can report where a zero
    result lives.
    """

    __slots__ = ("n", "coeffs")

    def __init__(self, n, coeffs=None):
        lay = layout(n)
        clean = {}
        for bd, vec in (coeffs or {}).items():
            bd = (int(bd[0]), int(bd[1]))
            if not lay.valid(*bd):
                raise DegreeMismatch(f"bidegree {bd} invalid for n={n}")
            vec = np.asarray(vec, dtype=complex).ravel()
            if vec.size != lay.block_size(*bd):
                raise ValueError(f"block {bd} needs {lay.block_size(*bd)} coefficients, got {vec.size}")
            clean[bd] = vec.copy()
            clean[bd].setflags(write=False)
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "coeffs", clean)

    def __setattr__(self, key, value):
        raise AttributeError("Form is immutable")

    # construction -----------------------------------------------------
    @classmethod
    def zero(cls, n, bidegree=None):
        if bidegree is None:
            return cls(n, {})
        return cls(n, {bidegree: np.zeros(layout(n).block_size(*bidegree))})

    @classmethod
    def one(cls, n):
        return cls(n, {(0, 0): [1.0]})

    @classmethod
    def monomial(cls, n, I=(), J=(), coeff=1.0):
        """coeff * phi^I ^ conj(phi)^J with 1-based, possibly unsorted indices."""
        lay = layout(n)
        sI, I0 = _sort_sign([i - 1 for i in I])
        sJ, J0 = _sort_sign([j - 1 for j in J])
        bd = (len(I0), len(J0))
        vec = np.zeros(lay.block_size(*bd), dtype=complex)
        if sI and sJ:
            vec[lay.monomials[bd].index((I0, J0))] = coeff * sI * sJ
        return cls(n, {bd: vec})

    @classmethod
    def from_vector(cls, n, vec, bidegrees=None):
        """Split a full-algebra vector into blocks.

        Without ``bidegrees`` only blocks with a nonzero entry are kept.
        """
        lay = layout(n)
        vec = np.asarray(vec, dtype=complex)
        out = {}
        for bd, sl in lay.blocks.items():
            part = vec[sl]
            if bidegrees is None:
                if np.any(part != 0):
                    out[bd] = part
            elif bd in bidegrees:
                out[bd] = part
        if bidegrees is None and not out:
            return cls(n, {})
        return cls(n, out)

    @classmethod
    def from_block(cls, n, bidegree, vec):
        return cls(n, {bidegree: vec})

    @classmethod
    def random(cls, n, bidegree, rng, real_part_only=False):
        size = layout(n).block_size(*bidegree)
        v = rng.standard_normal(size)
        if not real_part_only:
            v = v + 1j * rng.standard_normal(size)
        return cls(n, {bidegree: v})

    # inspection ---------------------------------------------------------
    @property
    def bidegrees(self):
        return sorted(self.coeffs)

    @property
    def is_pure(self):
        return len(self.coeffs) == 1

    @property
    def bidegree(self):
        if len(self.coeffs) != 1:
            raise DegreeMismatch(f"form is not of pure type: {self.bidegrees}")
        return next(iter(self.coeffs))

    @property
    def degree(self):
        degs = {p + q for p, q in self.coeffs}
        if len(degs) != 1:
            raise DegreeMismatch(f"form is not homogeneous: {self.bidegrees}")
        return degs.pop()

    def component(self, p, q):
        if (p, q) in self.coeffs:
            return Form(self.n, {(p, q): self.coeffs[(p, q)]})
        return Form.zero(self.n, (p, q))

    def block(self, p, q):
        if (p, q) in self.coeffs:
            return np.array(self.coeffs[(p, q)])
        return np.zeros(layout(self.n).block_size(p, q), dtype=complex)

    def vector(self):
        lay = layout(self.n)
        out = np.zeros(lay.dim, dtype=complex)
        for bd, vec in self.coeffs.items():
            out[lay.blocks[bd]] = vec
        return out

    def norm(self):
        """Euclidean norm of the coefficient vector (not the metric norm)."""
        return float(np.sqrt(sum(np.vdot(v, v).real for v in self.coeffs.values())))

    def conj(self):
        lay = layout(self.n)
        vec = lay.conj_matrix @ self.vector().conj()
        return Form.from_vector(self.n, vec, bidegrees={(q, p) for p, q in self.coeffs})

    def is_real(self, tol=1e-10):
        return (self - self.conj()).norm() <= tol * max(1.0, self.norm())

    def allclose(self, other, tol=1e-10):
        return (self - other).norm() <= tol

    def top(self):
        """Coefficient of phi^{1..n} ^ conj(phi)^{1..n}."""
        return complex(self.vector()[layout(self.n).top_index])

    # arithmetic ---------------------------------------------------------
    def _combine(self, other, sign):
        if not isinstance(other, Form):
            return NotImplemented
        if other.n != self.n:
            raise ValueError("forms live on different dimensions")
        out = {bd: np.array(v) for bd, v in self.coeffs.items()}
        for bd, v in other.coeffs.items():
            out[bd] = out.get(bd, 0) + sign * v
        return Form(self.n, out)

    def __add__(self, other):
        return self._combine(other, 1)

    def __sub__(self, other):
        return self._combine(other, -1)

    def __neg__(self):
        return Form(self.n, {bd: -v for bd, v in self.coeffs.items()})

    def __mul__(self, c):
        if isinstance(c, Form):
            return wedge(self, c)
        return Form(self.n, {bd: c * v for bd, v in self.coeffs.items()})

    __rmul__ = __mul__

    def __truediv__(self, c):
        return self * (1.0 / c)

    def __xor__(self, other):
        return wedge(self, other)

    def __repr__(self):
        lay = layout(self.n)
        terms = []
        for bd in self.bidegrees:
            for (I, J), c in zip(lay.monomials[bd], self.coeffs[bd]):
                if abs(c) > 1e-12:
                    name = "".join(str(i + 1) for i in I) + ("|" + "".join(str(j + 1) for j in J) if J else "")
                    terms.append(f"{c:.4g}*[{name or '1'}]")
        return f"Form(n={self.n}, " + (" + ".join(terms) or "0") + ")"


def _wedge_raw(a, b):
    lay = layout(a.n)
    out_bd = {(p1 + p2, q1 + q2) for p1, q1 in a.coeffs for p2, q2 in b.coeffs
              if lay.valid(p1 + p2, q1 + q2)}
    return Form.from_vector(a.n, lay.wedge_vectors(a.vector(), b.vector()), bidegrees=out_bd)


def wedge(a, b):
    """Exterior product; raises DegreeOverflow when every product exceeds 2n."""
    if a.n != b.n:
        raise ValueError("forms live on different dimensions")
    if a.coeffs and b.coeffs:
        lowest = min(p + q for p, q in a.coeffs) + min(p + q for p, q in b.coeffs)
        if lowest > 2 * a.n:
            raise DegreeOverflow(f"degree {lowest} exceeds {2 * a.n}")
    return _wedge_raw(a, b)


def power(a, k):
    """a^k with a^0 = 1; products past the top degree vanish."""
    out = Form.one(a.n)
    for _ in range(k):
        out = _wedge_raw(out, a)
    return out


@dataclass(frozen=True)
class VectorValuedForm:
    """Element of Lambda^{0,q} (x) T^{1,0}: coefficient matrix [J, j].

    Rows follow the lexicographic (0,q) multi-indices, columns the frame
    Z_1..Z_n dual to phi^1..phi^n.  q = 0 is a (1,0) vector field.
    """

    n: int
    q: int
    coeffs: np.ndarray = field(repr=False)

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=complex).reshape(comb(self.n, self.q), self.n)
        object.__setattr__(self, "coeffs", c)

    @classmethod
    def vector_field(cls, components):
        comps = np.asarray(components, dtype=complex).ravel()
        return cls(comps.size, 0, comps.reshape(1, -1))

    @classmethod
    def zero(cls, n, q=1):
        return cls(n, q, np.zeros((comb(n, q), n)))

    @classmethod
    def from_flat(cls, n, q, flat):
        return cls(n, q, np.asarray(flat).reshape(comb(n, q), n))

    @classmethod
    def random(cls, n, q, rng):
        shape = (comb(n, q), n)
        return cls(n, q, rng.standard_normal(shape) + 1j * rng.standard_normal(shape))

    def flat(self):
        return self.coeffs.ravel().copy()

    def __add__(self, other):
        return VectorValuedForm(self.n, self.q, self.coeffs + other.coeffs)

    def __sub__(self, other):
        return VectorValuedForm(self.n, self.q, self.coeffs - other.coeffs)

    def __mul__(self, c):
        return VectorValuedForm(self.n, self.q, c * self.coeffs)

    __rmul__ = __mul__


@lru_cache(maxsize=None)
def _contraction_basis(n, q):
    """Matrices C[(J,j)] with (phi-bar^J (x) Z_j) _| x = C @ x on the full algebra."""
    lay = layout(n)
    mats = []
    for J in itertools.combinations(range(n), q):
        L = lay.left_mult(lay.basis_vector(lay.antiholo_mask(J)))
        for j in range(n):
            mats.append(L @ lay.iota[j])
    return np.array(mats)


def contraction_operator(v):
    """Full-algebra matrix of a -> v _| a."""
    mats = _contraction_basis(v.n, v.q)
    return np.tensordot(v.flat(), mats, axes=1)


def contract(v, a):
    """Interior product v _| a for a vector field (q=0) or vector-valued (0,q)-form.

    For phi-bar^J (x) Z_j this is phi-bar^J ^ (Z_j _| a); Z_j _| deletes phi^j
    with the sign of its slot, so (p,q') goes to (p-1, q'+q).
    """
    if v.n != a.n:
        raise ValueError("dimension mismatch")
    lay = layout(a.n)
    out_bd = {(p - 1, qq + v.q) for p, qq in a.coeffs if p >= 1 and lay.valid(p - 1, qq + v.q)}
    vec = contraction_operator(v) @ a.vector()
    return Form.from_vector(a.n, vec, bidegrees=out_bd)


# ---------------------------------------------------------------------------
# Operators

_PLAIN = {"d", "del", "delbar", "deldelbar"}
_TWISTED = {"d_h", "d_minus_inv_h", "dh_dminusinvh", "theta"}


@dataclass(frozen=True)
class OperatorTag:
    """Differential operator name plus the twisting parameter where it applies.

    ``d_h = h*del + delbar``; ``d_minus_inv_h`` is d_{-1/h};
    ``dh_dminusinvh`` is the composite d_h d_{-1/h}; ``theta`` scales the
    (p,q)-component by h**p.
    """

    name: str
    h: float | None = None

    def __post_init__(self):
        if self.name not in _PLAIN | _TWISTED:
            raise ValueError(f"unknown operator {self.name!r}")
        if self.name in _TWISTED:
            if self.h is None or self.h == 0:
                raise ZeroH(f"{self.name} needs a nonzero h")

    def __str__(self):
        return self.name if self.h is None else f"{self.name}({self.h:g})"


def _tag(tag, h=None):
    if isinstance(tag, OperatorTag):
        return tag
    return OperatorTag(tag, h)


# ---------------------------------------------------------------------------
# Presentations


@dataclass(frozen=True)
class LieAlgebraPresentation:
    """Real structure constants plus a complex structure.

    ``structure_constants[k, i, j]`` (0-based, antisymmetric in i, j) define
    de^k = sum_{i<j} c[k,i,j] e^i ^ e^j.  Give either ``J`` (real 2n x 2n,
    acting on vectors; (1,0)-covectors satisfy a(JX) = i a(X)) or ``coframe``
    (complex n x 2n, phi^a = sum_k coframe[a,k] e^k).
    """

    dim_real: int
    structure_constants: np.ndarray
    J: np.ndarray | None = None
    coframe: np.ndarray | None = None
    name: str = ""

    def __post_init__(self):
        c = np.asarray(self.structure_constants, dtype=float)
        object.__setattr__(self, "structure_constants", c)
        if self.J is not None:
            object.__setattr__(self, "J", np.asarray(self.J, dtype=float))
        if self.coframe is not None:
            object.__setattr__(self, "coframe", np.asarray(self.coframe, dtype=complex))

    @property
    def n(self):
        return self.dim_real // 2


def _exact(x):
    f = Fraction(repr(float(x)))
    return f if f.denominator <= 10**6 else None


def check_jacobi(c, exact=None):
    """Max |d(de^k)| coefficient; exact Fraction arithmetic for rational input."""
    m = c.shape[0]
    fr = [[[_exact(c[k, i, j]) for j in range(m)] for i in range(m)] for k in range(m)]
    use_exact = exact if exact is not None else all(
        x is not None for a in fr for b in a for x in b)
    zero = Fraction(0) if use_exact else 0.0
    get = (lambda k, i, j: fr[k][i][j]) if use_exact else (lambda k, i, j: float(c[k, i, j]))
    worst = zero
    # d(de^k) = sum_{i<j} c^k_ij (de^i ^ e^j - e^i ^ de^j); coefficient on e^a^e^b^e^c
    for k in range(m):
        acc = {}
        for i in range(m):
            for j in range(i + 1, m):
                ckij = get(k, i, j)
                if ckij == 0:
                    continue
                for s in range(m):
                    for t in range(s + 1, m):
                        ci = get(i, s, t)
                        if ci != 0:
                            sgn, key = _sort_sign((s, t, j))
                            if sgn:
                                acc[key] = acc.get(key, zero) + sgn * ckij * ci
                        cj = get(j, s, t)
                        if cj != 0:
                            sgn, key = _sort_sign((i, s, t))
                            if sgn:
                                acc[key] = acc.get(key, zero) - sgn * ckij * cj
        for val in acc.values():
            if abs(val) > worst:
                worst = abs(val)
    return float(worst), use_exact


def _coframe_from_J(J):
    """Pick n independent (1,0)-covectors e^k - i (e^k o J)."""
    m = J.shape[0]
    n = m // 2
    rows = []
    for k in range(m):
        cand = np.eye(m)[k] - 1j * J[k, :]
        trial = np.array(rows + [cand])
        if la.numerical_rank(trial) == len(rows) + 1:
            rows.append(cand)
        if len(rows) == n:
            break
    return np.array(rows)


def presentation_from_complex(n, equations, name=""):
    """Real presentation from complex structure equations.

    ``equations`` maps a 1-based index a to terms (coeff, x, y) meaning
    d phi^a += coeff * x ^ y where x, y are labels "3" (phi^3) or "3b"
    (conj phi^3).  The real coframe is phi^a = e^{2a-1} + i e^{2a}.
    """
    m = 2 * n
    P = np.zeros((n, m), dtype=complex)
    for a in range(n):
        P[a, 2 * a] = 1.0
        P[a, 2 * a + 1] = 1j
    M = np.vstack([P, P.conj()])

    def gen(label):
        label = str(label)
        if label.endswith("b"):
            return n + int(label[:-1]) - 1
        return int(label) - 1

    # complex 2-forms in the psi basis, as antisymmetric 2n x 2n arrays
    dpsi = np.zeros((m, m, m), dtype=complex)
    for a, terms in equations.items():
        for coeff, x, y in terms:
            g, h = gen(x), gen(y)
            dpsi[a - 1, g, h] += coeff / 2
            dpsi[a - 1, h, g] -= coeff / 2
    for a in range(n):
        # conjugate equation: swap holomorphic and antiholomorphic slots
        perm = np.r_[np.arange(n, m), np.arange(n)]
        dpsi[n + a] = dpsi[a][np.ix_(perm, perm)].conj()
    # psi^g = sum_k M[g,k] e^k, so a 2-form with psi-coefficients F has
    # e-coefficients M^T F M.
    c = np.zeros((m, m, m))
    for a in range(n):
        F = M.T @ dpsi[a] @ M
        c[2 * a] = 2 * F.real
        c[2 * a + 1] = 2 * F.imag
    c[np.abs(c) < 1e-15] = 0.0
    return LieAlgebraPresentation(m, c, coframe=P, name=name)


# ---------------------------------------------------------------------------
# Models


class InvariantModel:
    """Bigraded invariant-form complex of a Lie algebra with complex structure."""

    def __init__(self, presentation, coframe, dgen):
        self.presentation = presentation
        self.n = presentation.n
        self.layout = layout(self.n)
        self.coframe = coframe
        self.psi = np.vstack([coframe, coframe.conj()])
        self._dgen = dgen
        lay = self.layout
        D = np.zeros((lay.dim, lay.dim), dtype=complex)
        gens = [lay.basis_vector(1 << g) for g in range(lay.ngen)]
        for col, mask in enumerate(lay.masks):
            bits = [g for g in range(lay.ngen) if mask >> g & 1]
            acc = np.zeros(lay.dim, dtype=complex)
            for pos, g in enumerate(bits):
                term = np.zeros(lay.dim, dtype=complex)
                term[lay.index[0]] = 1.0
                for g2 in bits[:pos]:
                    term = lay.wedge_vectors(term, gens[g2])
                term = lay.wedge_vectors(term, dgen[g])
                for g2 in bits[pos + 1:]:
                    term = lay.wedge_vectors(term, gens[g2])
                acc += (-1) ** pos * term
            D[:, col] = acc
        D[np.abs(D) < 1e-14] = 0.0
        self.D = D
        shift = lay.bideg_of[:, None, :] - lay.bideg_of[None, :, :]
        self.Del = np.where((shift[..., 0] == 1) & (shift[..., 1] == 0), D, 0)
        self.Delbar = np.where((shift[..., 0] == 0) & (shift[..., 1] == 1), D, 0)
        self._cache = {}

    @property
    def name(self):
        return self.presentation.name

    def dgen(self, g):
        """d of the g-th generator (0-based; g >= n are conjugates) as a Form."""
        return Form.from_vector(self.n, self._dgen[g])

    # operator matrices ----------------------------------------------------
    def matrix(self, tag, h=None):
        """Full-algebra matrix of an operator."""
        tag = _tag(tag, h)
        key = (tag.name, tag.h)
        if key in self._cache:
            return self._cache[key]
        Dl, Db = self.Del, self.Delbar
        hh = tag.h
        if tag.name == "d":
            M = self.D
        elif tag.name == "del":
            M = Dl
        elif tag.name == "delbar":
            M = Db
        elif tag.name == "deldelbar":
            M = Dl @ Db
        elif tag.name == "d_h":
            M = hh * Dl + Db
        elif tag.name == "d_minus_inv_h":
            M = -Dl / hh + Db
        elif tag.name == "dh_dminusinvh":
            M = (hh * Dl + Db) @ (-Dl / hh + Db)
        else:  # theta
            M = np.diag(float(hh) ** self.layout.bideg_of[:, 0]).astype(complex)
        self._cache[key] = M
        return M

    def block(self, tag, src, tgt=None, h=None):
        """Restriction of an operator to Lambda^src -> Lambda^tgt.

        ``src``/``tgt`` are bidegrees or total degrees (ints).  When ``tgt`` is
        omitted it is inferred from the operator's bidegree shift.
        """
        tag = _tag(tag, h)
        M = self.matrix(tag)
        rows = self._indices(tgt if tgt is not None else self._default_target(tag, src))
        cols = self._indices(src)
        return M[np.ix_(rows, cols)]

    def _default_target(self, tag, src):
        if isinstance(src, (int, np.integer)):
            k = int(src)
            return k if tag.name == "theta" else k + (2 if tag.name in ("deldelbar", "dh_dminusinvh") else 1)
        p, q = src
        shift = {"del": (1, 0), "delbar": (0, 1), "deldelbar": (1, 1), "theta": (0, 0)}.get(tag.name)
        if shift is None:
            raise DegreeMismatch(f"{tag} does not preserve pure type; pass a total degree")
        return (p + shift[0], q + shift[1])

    def _indices(self, spec):
        lay = self.layout
        if isinstance(spec, (int, np.integer)):
            if not 0 <= spec <= 2 * self.n:
                return np.zeros(0, dtype=int)
            return lay.degree_indices(int(spec))
        p, q = spec
        if not lay.valid(p, q):
            return np.zeros(0, dtype=int)
        sl = lay.blocks[(p, q)]
        return np.arange(sl.start, sl.stop)

    def space_dim(self, spec):
        return len(self._indices(spec))

    def embed(self, spec, vec):
        """Coefficient vector on a block/degree space -> Form."""
        lay = self.layout
        full = np.zeros(lay.dim, dtype=complex)
        full[self._indices(spec)] = vec
        if isinstance(spec, (int, np.integer)):
            bds = set(lay.degree_bidegrees(int(spec)))
        else:
            bds = {tuple(spec)}
        return Form.from_vector(self.n, full, bidegrees=bds)

    def restrict(self, spec, form):
        return form.vector()[self._indices(spec)]

    def conj_block(self, spec):
        """Real signed-permutation matrix of conjugation restricted to a space.

        For a bidegree (p,q) it maps Lambda^{p,q} coefficients (conjugated) to
        Lambda^{q,p}; for a total degree it is square.
        """
        K = self.layout.conj_matrix
        cols = self._indices(spec)
        if isinstance(spec, (int, np.integer)):
            rows = cols
        else:
            rows = self._indices((spec[1], spec[0]))
        return K[np.ix_(rows, cols)]

    # checks ---------------------------------------------------------------
    def operator_identity_residuals(self, hs=(-2.0, -1.0, -0.5, 0.5, 1.0, 2.0)):
        Dl, Db, D = self.Del, self.Delbar, self.D
        out = {
            "del^2": np.abs(Dl @ Dl).max(),
            "delbar^2": np.abs(Db @ Db).max(),
            "del delbar + delbar del": np.abs(Dl @ Db + Db @ Dl).max(),
            "d^2": np.abs(D @ D).max(),
            "d - del - delbar": np.abs(D - Dl - Db).max(),
        }
        for h in hs:
            dh = self.matrix("d_h", h)
            out[f"d_h^2 (h={h:g})"] = np.abs(dh @ dh).max()
            lhs = self.matrix("dh_dminusinvh", h)
            out[f"d_h d_-1/h - (h+1/h) ddbar (h={h:g})"] = np.abs(lhs - (h + 1 / h) * Dl @ Db).max()
        return {k: float(v) for k, v in out.items()}

    @cached_property
    def to_real(self):
        """Full-algebra matrix taking psi-monomial coefficients to e-monomial ones."""
        lay = self.layout
        E = np.zeros((lay.dim, lay.dim), dtype=complex)
        gens_e = []
        for g in range(lay.ngen):
            v = np.zeros(lay.dim, dtype=complex)
            for k in range(lay.ngen):
                v[lay.index[1 << k]] = self.psi[g, k]
            gens_e.append(v)
        for col, mask in enumerate(lay.masks):
            acc = np.zeros(lay.dim, dtype=complex)
            acc[lay.index[0]] = 1.0
            for g in range(lay.ngen):
                if mask >> g & 1:
                    acc = lay.wedge_vectors(acc, gens_e[g])
            E[:, col] = acc
        return E

    @cached_property
    def from_real(self):
        return np.linalg.inv(self.to_real)

    def fingerprint(self):
        import hashlib

        c = np.round(self.presentation.structure_constants, 12) + 0.0
        cf = np.round(self.coframe, 12) + 0.0
        h = hashlib.sha256()
        h.update(c.tobytes())
        h.update(cf.tobytes())
        return h.hexdigest()[:16]


def build_model(pres, check=True):
    """Validate a presentation and assemble all operator matrices."""
    m = pres.dim_real
    if m % 2:
        raise NotAlmostComplex("real dimension must be even")
    n = m // 2
    c = pres.structure_constants
    if c.shape != (m, m, m):
        raise ValueError(f"structure constants must have shape {(m, m, m)}")
    if not np.allclose(c, -np.swapaxes(c, 1, 2), atol=1e-12):
        raise ValueError("structure constants must be antisymmetric in the lower indices")
    if check:
        worst, _ = check_jacobi(c)
        if worst > 1e-10:
            raise JacobiViolation(f"d^2 != 0 on degree one (max coefficient {worst:.3g})")
    if pres.coframe is not None:
        P = pres.coframe
        if P.shape != (n, m):
            raise NotAlmostComplex(f"coframe must have shape {(n, m)}")
    elif pres.J is not None:
        J = pres.J
        if J.shape != (m, m) or not np.allclose(J @ J, -np.eye(m), atol=1e-10):
            raise NotAlmostComplex("J^2 != -Id")
        P = _coframe_from_J(J)
    else:
        raise NotAlmostComplex("presentation has neither J nor a coframe")
    M = np.vstack([P, P.conj()])
    if la.numerical_rank(M) < m:
        raise NotAlmostComplex("coframe and its conjugate do not span the dual space")
    Minv = np.linalg.inv(M)
    lay = layout(n)
    dgen = np.zeros((m, lay.dim), dtype=complex)
    for g in range(m):
        # d psi^g = sum_k M[g,k] de^k with de^k = 1/2 sum_ij c[k,i,j] e^i e^j
        A = np.tensordot(M[g], c, axes=1) / 2  # e-coefficients (antisymmetric)
        F = Minv.T @ A @ Minv  # psi-coefficients
        for b in range(m):
            for cc in range(b + 1, m):
                val = F[b, cc] - F[cc, b]
                if abs(val) > 1e-15:
                    dgen[g, lay.index[(1 << b) | (1 << cc)]] += val
    if check:
        scale = max(1.0, np.abs(dgen).max())
        for a in range(n):
            vec = dgen[a][lay.blocks[(0, 2)]]
            if np.abs(vec).max(initial=0) > STRUCT_TOL * scale:
                raise NonIntegrable(f"d phi^{a + 1} has a (0,2)-component")
    return InvariantModel(pres, P, dgen)


# ---------------------------------------------------------------------------


def apply_diff(model, tag, a, h=None):
    """Apply an operator to a Form, keeping the reachable bidegrees declared."""
    tag = _tag(tag, h)
    lay = model.layout
    shifts = {
        "d": [(1, 0), (0, 1)], "del": [(1, 0)], "delbar": [(0, 1)],
        "deldelbar": [(1, 1)], "d_h": [(1, 0), (0, 1)], "d_minus_inv_h": [(1, 0), (0, 1)],
        "dh_dminusinvh": [(1, 1)], "theta": [(0, 0)],
    }[tag.name]
    bds = {(p + s, q + t) for p, q in a.coeffs for s, t in shifts if lay.valid(p + s, q + t)}
    return Form.from_vector(model.n, model.matrix(tag) @ a.vector(), bidegrees=bds)

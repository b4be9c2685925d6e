"""Hermitian metrics on an invariant model.

The metric omega = i * sum_jk H[j,k] phi^j ^ conj(phi^k) induces the inner
product <x, y> = y^H M x on coefficient vectors.  M is block diagonal in the
bidegree; on monomials it is the determinant of the matching minor of the
1-form Gram matrix diag(H^{-1}, conj(H^{-1})).  The volume form is
dV = omega^n / n!, and integrals are normalized so that its total volume is 1.
The Hodge star is the C-linear map with <a, b> dV = a ^ *conj(b).
"""
from __future__ import annotations

import enum
from functools import cached_property
from math import factorial

import numpy as np

from . import _linalg as la
from .algebra import Form, _wedge_raw, power
from .errors import DegreeMismatch, NotPositive, NotReal

__all__ = [
    "HermitianMetric",
    "LaplacianFlavor",
    "hodge_star",
    "adjoint",
    "laplacian_kernel",
    "three_space_decompose",
    "lefschetz_split",
    "is_primitive",
    "omega_from_matrix",
]

POS_TOL = 1e-10


class LaplacianFlavor(enum.Enum):
    AEPPLI = "Aeppli"
    BOTT_CHERN = "BottChern"
    DOLBEAULT = "Dolbeault"


def _flavor(f):
    if isinstance(f, LaplacianFlavor):
        return f
    key = str(f).replace("-", "").replace("_", "").lower()
    for fl in LaplacianFlavor:
        if fl.value.lower() == key:
            return fl
    raise ValueError(f"unknown Laplacian flavor {f!r}")


def omega_from_matrix(n, H):
    """i * sum H[j,k] phi^j ^ conj(phi^k) as a (1,1) Form."""
    H = np.asarray(H, dtype=complex)
    return Form(n, {(1, 1): 1j * H.reshape(-1)})


class HermitianMetric:
    """Positive real (1,1)-form on a model together with all derived matrices."""

    def __init__(self, model, omega):
        if not isinstance(omega, Form):
            omega = omega_from_matrix(model.n, omega)
        if omega.bidegrees != [(1, 1)]:
            raise DegreeMismatch("a Hermitian metric is a (1,1)-form")
        if not omega.is_real():
            raise NotReal("omega is not real")
        n = model.n
        H = -1j * omega.block(1, 1).reshape(n, n)
        H = (H + H.conj().T) / 2
        ev = np.linalg.eigvalsh(H)
        if ev.min() <= POS_TOL * max(1.0, ev.max()):
            raise NotPositive(f"omega is not positive definite (min eigenvalue {ev.min():.3g})")
        self.model = model
        self.n = n
        self.omega = omega
        self.H = H

    @classmethod
    def standard(cls, model):
        return cls(model, np.eye(model.n))

    @cached_property
    def gram(self):
        lay = self.model.layout
        Hinv = np.linalg.inv(self.H)
        G1 = np.zeros((lay.ngen, lay.ngen), dtype=complex)
        n = self.n
        G1[:n, :n] = Hinv
        G1[n:, n:] = Hinv.conj()
        bits = [[g for g in range(lay.ngen) if m >> g & 1] for m in lay.masks]
        M = np.zeros((lay.dim, lay.dim), dtype=complex)
        for sl in lay.blocks.values():
            for t in range(sl.start, sl.stop):
                for s in range(sl.start, sl.stop):
                    if bits[t]:
                        M[t, s] = np.linalg.det(G1[np.ix_(bits[t], bits[s])])
                    else:
                        M[t, s] = 1.0
        return (M + M.conj().T) / 2

    @cached_property
    def gram_inv(self):
        return np.linalg.inv(self.gram)

    @cached_property
    def volume_form(self):
        return power(self.omega, self.n) / factorial(self.n)

    @cached_property
    def _vol_top(self):
        return self.volume_form.top()

    @property
    def raw_volume(self):
        """Top coefficient of dV (the normalization divides by it)."""
        return self._vol_top

    def integrate(self, a):
        return a.top() / self._vol_top

    def inner(self, a, b):
        return complex(np.vdot(b.vector(), self.gram @ a.vector()))

    def norm(self, a):
        return float(np.sqrt(max(self.inner(a, a).real, 0.0)))

    def block_gram(self, spec):
        idx = self.model._indices(spec)
        return self.gram[np.ix_(idx, idx)]

    # star -----------------------------------------------------------------
    @cached_property
    def _pairing(self):
        lay = self.model.layout
        tgt, sgn = lay.wedge_table
        P = np.where(tgt == lay.top_index, sgn, 0.0)
        return P

    @cached_property
    def star_matrix(self):
        K = self.model.layout.conj_matrix
        S = np.linalg.solve(self._pairing, self.gram.T @ K) * self._vol_top
        S[np.abs(S) < 1e-15] = 0
        return S

    def star(self, a):
        bds = {(self.n - q, self.n - p) for p, q in a.coeffs}
        return Form.from_vector(self.n, self.star_matrix @ a.vector(), bidegrees=bds)

    # adjoints ---------------------------------------------------------------
    def adjoint_matrix(self, tag, method="gram"):
        """Formal adjoint of del, delbar or deldelbar on the full algebra."""
        D = self.model.matrix(tag)
        if method == "gram":
            return self.gram_inv @ D.conj().T @ self.gram
        partner = {"del": "delbar", "delbar": "del", "deldelbar": "deldelbar"}[tag]
        S = self.star_matrix
        out = -S @ self.model.matrix(partner) @ S
        if tag == "deldelbar":
            # ** = (-1)^k on k-forms, so the sign alternates: (-1)^(k+1) * (ddbar) *
            out = out * (-1.0) ** self.model.layout.degree_of[None, :]
        return out

    @cached_property
    def _adj(self):
        return {t: self.adjoint_matrix(t) for t in ("del", "delbar", "deldelbar")}

    # Laplacians ----------------------------------------------------------------
    def laplacian_matrix(self, flavor):
        fl = _flavor(flavor)
        Dl, Db = self.model.Del, self.model.Delbar
        Ds, Dbs = self._adj["del"], self._adj["delbar"]
        if fl is LaplacianFlavor.DOLBEAULT:
            return Db @ Dbs + Dbs @ Db
        if fl is LaplacianFlavor.AEPPLI:
            return (Dl @ Ds + Db @ Dbs + Dbs @ Ds @ Dl @ Db + Dl @ Db @ Dbs @ Ds
                    + Dl @ Dbs @ Db @ Ds + Db @ Ds @ Dl @ Dbs)
        return (Ds @ Dl + Dbs @ Db + Dl @ Db @ Dbs @ Ds + Dbs @ Ds @ Dl @ Db
                + Dbs @ Dl @ Ds @ Db + Ds @ Db @ Dbs @ Dl)

    def laplacian_block(self, flavor, bidegree):
        idx = self.model._indices(bidegree)
        return self.laplacian_matrix(flavor)[np.ix_(idx, idx)]

    def harmonic_basis(self, flavor, bidegree):
        """Gram-orthonormal basis (columns, block coordinates) of the kernel."""
        L = self.laplacian_block(flavor, bidegree)
        return la.gram_orthonormal(la.null_space(L), self.block_gram(bidegree))

    def triple_kernel(self, flavor, bidegree):
        """Kernel described by the first-order characterization of each flavor."""
        fl = _flavor(flavor)
        m = self.model
        idx = m._indices(bidegree)
        if fl is LaplacianFlavor.AEPPLI:
            ops = [self._adj["del"], self._adj["delbar"], m.matrix("deldelbar")]
        elif fl is LaplacianFlavor.BOTT_CHERN:
            ops = [m.Del, m.Delbar, self._adj["deldelbar"]]
        else:
            ops = [m.Delbar, self._adj["delbar"]]
        A = np.vstack([op[:, idx] for op in ops])
        return la.null_space(A)

    def three_space_decompose(self, flavor, a):
        """Split a pure-type form into harmonic, exact-type and coexact-type parts."""
        fl = _flavor(flavor)
        if fl is LaplacianFlavor.DOLBEAULT:
            raise ValueError("three-space decomposition is defined for Aeppli and BottChern")
        p, q = a.bidegree
        m = self.model
        idx = m._indices((p, q))
        M = self.block_gram((p, q))
        Dl, Db = m.Del, m.Delbar
        dim = len(idx)

        def image(op, src):
            cols = m._indices(src)
            return op[np.ix_(idx, cols)] if len(cols) else np.zeros((dim, 0))

        Hb = self.harmonic_basis(fl, (p, q))
        if fl is LaplacianFlavor.AEPPLI:
            E = la.hstack(dim, image(Dl, (p - 1, q)), image(Db, (p, q - 1)))
            C = image(self._adj["deldelbar"], (p + 1, q + 1))
        else:
            E = image(m.matrix("deldelbar"), (p - 1, q - 1))
            C = la.hstack(dim, image(self._adj["del"], (p + 1, q)), image(self._adj["delbar"], (p, q + 1)))
        x = a.block(p, q)
        parts = [la.gram_projector(B, M) @ x for B in (Hb, E, C)]
        return tuple(Form(self.n, {(p, q): v}) for v in parts)

    # Lefschetz ----------------------------------------------------------------
    def lefschetz_matrix(self, src, power_=1):
        """Block of a -> omega^power_ ^ a from bidegree src."""
        p, q = src
        tgt = (p + power_, q + power_)
        m = self.model
        cols = m._indices(src)
        rows = m._indices(tgt)
        Lk = m.layout.left_mult(power(self.omega, power_).vector())
        return Lk[np.ix_(rows, cols)]

    def lefschetz_split(self, a):
        n = self.n
        if a.bidegrees != [(n - 1, 1)] or n < 2:
            raise DegreeMismatch(f"expected an ({n - 1},1)-form")
        x = a.block(n - 1, 1)
        L1 = self.lefschetz_matrix((n - 2, 0))
        L_hi = self.lefschetz_matrix((n - 1, 1))
        zeta = la.lstsq_min_norm(L_hi @ L1, L_hi @ x)
        prim = x - L1 @ zeta
        return Form(n, {(n - 1, 1): prim}), Form(n, {(n - 2, 0): zeta})

    def is_primitive(self, a, tol=1e-10):
        p, q = a.bidegree
        k = p + q
        if k > self.n:
            raise DegreeMismatch(f"primitivity is defined for degree <= {self.n}, got {k}")
        test = _wedge_raw(power(self.omega, self.n - k + 1), a)
        return test.norm() <= tol * max(1.0, a.norm())

    def primitive_star_coefficient(self, p, q):
        """Scalar c with *a = c * omega^{n-p-q} ^ a / (n-p-q)! on primitive forms."""
        k = p + q
        return (-1) ** (k * (k + 1) // 2) * 1j ** (p - q)

    def primitive_basis(self, p, q):
        """Basis (block columns) of primitive (p,q)-forms, p + q <= n."""
        k = p + q
        if k > self.n:
            raise DegreeMismatch("primitive forms have degree <= n")
        L = self.lefschetz_matrix((p, q), self.n - k + 1)
        return la.null_space(L)


# module-level entry points ----------------------------------------------------


def hodge_star(m, a):
    return m.star(a)


def adjoint(m, tag):
    return m.adjoint_matrix(tag)


def laplacian_kernel(m, flavor, bidegree):
    return m.harmonic_basis(flavor, bidegree)


def three_space_decompose(m, flavor, a):
    return m.three_space_decompose(flavor, a)


def lefschetz_split(m, a):
    return m.lefschetz_split(a)


def is_primitive(m, a, tol=1e-10):
    return m.is_primitive(a, tol)


def dV_check(m, a, b):
    """Difference between <a,b> and the integral of a ^ *conj(b)."""
    return m.inner(a, b) - m.integrate(_wedge_raw(a, m.star(b.conj())))


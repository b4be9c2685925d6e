"""Exact polynomial forms on a coordinate chart of C^n.

Coefficients live in the polynomial ring Q(i)[z_1..z_n, zb_1..zb_n], where zb_k
stands for conj(z_k) and is treated as an independent variable.  Monomials in
the exterior algebra use the bitmask layout of :mod:`ddbar.algebra`: bits
0..n-1 are dz_k and bits n..2n-1 are dzb_k, so every stored term is already in
the normal order dz_I ^ dzb_J with increasing indices.

The main consumer is :func:`verify_lemma_contraction`, which decides by exact
subtraction which of several candidate commutation rules between dbar and
contraction holds identically.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from sympy import QQ_I
from sympy.polys.rings import ring

from .errors import DegreeOverflow

__all__ = [
    "chart_ring",
    "PolyForm",
    "PolyVectorForm",
    "chart_apply",
    "verify_lemma_contraction",
    "IdentityReport",
    "CandidateResult",
]

MAX_N = 4
MAX_POLY_DEGREE = 4


@lru_cache(maxsize=None)
def chart_ring(n):
    """Polynomial ring in z_1..z_n, zb_1..zb_n over the Gaussian rationals."""
    names = [f"z{k}" for k in range(1, n + 1)] + [f"zb{k}" for k in range(1, n + 1)]
    R, *gens = ring(",".join(names), QQ_I)
    return R, tuple(gens)


def _below(mask, bit):
    return bin(mask & ((1 << bit) - 1)).count("1")


def _wedge_sign(s, t):
    # pairs (x in s, y in t) with x > y
    if s & t:
        return 0
    c = 0
    while t:
        low = t & -t
        c += bin(s & ~((low << 1) - 1)).count("1")
        t ^= low
    return -1 if c % 2 else 1


def _poly_degree(p):
    return max((sum(m) for m in p.keys()), default=0)


class PolyForm:
    """Mixed-degree form with exact polynomial coefficients.

    Args:
        n: complex dimension of the chart.
        terms: mapping from monomial bitmask to ring element.
    """

    def __init__(self, n, terms=None):
        self.n = n
        self.ring, self.gens = chart_ring(n)
        self.terms = {m: c for m, c in (terms or {}).items() if c}

    @classmethod
    def monomial(cls, n, I=(), J=(), coeff=1):
        """coeff * dz_I ^ dzb_J with 1-based index tuples in the given order."""
        R, _ = chart_ring(n)
        out = cls(n, {0: R(coeff)})
        for i in I:
            out = out ^ cls(n, {1 << (i - 1): R.one})
        for j in J:
            out = out ^ cls(n, {1 << (n + j - 1): R.one})
        return out

    @classmethod
    def function(cls, n, f):
        return cls(n, {0: chart_ring(n)[0](f)})

    # structure -------------------------------------------------------------
    def bidegrees(self):
        n = self.n
        return sorted({(bin(m & ((1 << n) - 1)).count("1"), bin(m >> n).count("1")) for m in self.terms})

    @property
    def bidegree(self):
        bds = self.bidegrees()
        if len(bds) != 1:
            raise ValueError(f"form is not of pure type: {bds}")
        return bds[0]

    @property
    def is_zero(self):
        return not self.terms

    def max_poly_degree(self):
        return max((_poly_degree(c) for c in self.terms.values()), default=0)

    # arithmetic -------------------------------------------------------------
    def __add__(self, other):
        t = dict(self.terms)
        for m, c in other.terms.items():
            t[m] = t.get(m, self.ring.zero) + c
        return PolyForm(self.n, t)

    def __neg__(self):
        return PolyForm(self.n, {m: -c for m, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def scale(self, f):
        f = self.ring(f)
        return PolyForm(self.n, {m: f * c for m, c in self.terms.items()})

    def __xor__(self, other):
        t = {}
        for s, a in self.terms.items():
            for u, b in other.terms.items():
                sg = _wedge_sign(s, u)
                if sg:
                    t[s | u] = t.get(s | u, self.ring.zero) + sg * a * b
        return PolyForm(self.n, t)

    def __eq__(self, other):
        return isinstance(other, PolyForm) and self.n == other.n and (self - other).is_zero

    def __repr__(self):
        return f"PolyForm({self})"

    def __str__(self):
        if not self.terms:
            return "0"
        n = self.n
        parts = []
        for m in sorted(self.terms):
            names = [f"dz{k + 1}" for k in range(n) if m >> k & 1]
            names += [f"dzb{k + 1}" for k in range(n) if m >> (n + k) & 1]
            parts.append(f"({self.terms[m].as_expr()})" + ("*" + "^".join(names) if names else ""))
        return " + ".join(parts)

    # operators ----------------------------------------------------------------
    def _first_order(self, offset):
        t = {}
        for m, c in self.terms.items():
            for k in range(self.n):
                bit = offset + k
                if m >> bit & 1:
                    continue
                dc = c.diff(self.gens[bit])
                if dc:
                    sg = -1 if _below(m, bit) % 2 else 1
                    t[m | 1 << bit] = t.get(m | 1 << bit, self.ring.zero) + sg * dc
        return PolyForm(self.n, t)

    def dl(self):
        """Holomorphic part of d: sum_k d/dz_k (.) dz_k ^ ."""
        return self._first_order(0)

    def dbar(self):
        return self._first_order(self.n)

    def iota(self, j):
        """Interior product with d/dz_j (0-based)."""
        t = {}
        for m, c in self.terms.items():
            if m >> j & 1:
                sg = -1 if _below(m, j) % 2 else 1
                t[m ^ 1 << j] = sg * c
        return PolyForm(self.n, t)


class PolyVectorForm:
    """(0,q)-form with values in T^{1,0}: sum_J sum_j c_{J,j} dzb_J (x) d/dz_j.

    A vector field has q = 0 and only the empty mask; the diagonal form
    sum_l v_l dzb_l (x) d/dz_l is :meth:`diagonal`.
    """

    def __init__(self, n, terms=None):
        self.n = n
        self.ring, self.gens = chart_ring(n)
        self.terms = {}
        for m, comps in (terms or {}).items():
            comps = tuple(self.ring(c) for c in comps)
            if len(comps) != n:
                raise ValueError("need one component per coordinate")
            if any(comps):
                self.terms[m] = comps

    @classmethod
    def vector_field(cls, n, comps):
        return cls(n, {0: comps})

    @classmethod
    def diagonal(cls, n, comps):
        R = chart_ring(n)[0]
        terms = {}
        for l, c in enumerate(comps):
            row = [R.zero] * n
            row[l] = R(c)
            terms[1 << (n + l)] = row
        return cls(n, terms)

    @classmethod
    def from_matrix(cls, n, V):
        """sum_{l,j} V[l][j] dzb_l (x) d/dz_j."""
        return cls(n, {1 << (n + l): V[l] for l in range(n)})

    @property
    def is_zero(self):
        return not self.terms

    def __add__(self, other):
        t = {m: list(c) for m, c in self.terms.items()}
        for m, comps in other.terms.items():
            row = t.setdefault(m, [self.ring.zero] * self.n)
            for j, c in enumerate(comps):
                row[j] += c
        return PolyVectorForm(self.n, t)

    def dbar(self):
        t = {}
        n = self.n
        for m, comps in self.terms.items():
            for k in range(n):
                bit = n + k
                if m >> bit & 1:
                    continue
                sg = -1 if _below(m, bit) % 2 else 1
                row = t.setdefault(m | 1 << bit, [self.ring.zero] * n)
                for j, c in enumerate(comps):
                    row[j] += sg * c.diff(self.gens[bit])
        return PolyVectorForm(n, t)

    def contract(self, a):
        """sum_J sum_j dzb_J ^ (c_{J,j} iota_j a)."""
        out = PolyForm(self.n)
        for m, comps in self.terms.items():
            lead = PolyForm(self.n, {m: self.ring.one})
            for j, c in enumerate(comps):
                if c:
                    out = out + (lead ^ a.iota(j).scale(c))
        return out

    def max_poly_degree(self):
        return max((_poly_degree(c) for comps in self.terms.values() for c in comps), default=0)


def _check_size(*objs):
    for o in objs:
        if o.n > MAX_N:
            raise DegreeOverflow(f"chart dimension {o.n} exceeds {MAX_N}")
        if o.max_poly_degree() > MAX_POLY_DEGREE:
            raise DegreeOverflow(f"polynomial degree exceeds {MAX_POLY_DEGREE}")


def chart_apply(op, a, field=None):
    """Apply ``del``, ``delbar`` or ``contract`` (with ``field``) to a PolyForm."""
    _check_size(a)
    if op == "del":
        return a.dl()
    if op == "delbar":
        return a.dbar()
    if op == "contract":
        if field is None:
            raise ValueError("contract needs a vector field or vector-valued form")
        _check_size(field)
        return field.contract(a)
    raise ValueError(f"unknown chart operator {op!r}")


# random generation ---------------------------------------------------------------


def _monomials(nvar, deg):
    if nvar == 0:
        yield ()
        return
    for e in range(deg + 1):
        for rest in _monomials(nvar - 1, deg - e):
            yield (e,) + rest


def random_poly(n, deg, rng, density=0.5, bound=3):
    """Random polynomial of total degree <= deg with small Gaussian-integer coefficients."""
    R = chart_ring(n)[0]
    terms = {}
    for mono in _monomials(2 * n, deg):
        if rng.random() < density:
            re, im = rng.integers(-bound, bound + 1, size=2)
            if re or im:
                terms[mono] = QQ_I(int(re), int(im))
    return R.from_dict(terms) if terms else R.zero


def random_form(n, bidegree, deg, rng):
    p, q = bidegree
    t = {}
    for m in range(1 << 2 * n):
        if bin(m & ((1 << n) - 1)).count("1") == p and bin(m >> n).count("1") == q:
            t[m] = random_poly(n, deg, rng)
    return PolyForm(n, t)


# lemma verification ----------------------------------------------------------------


@dataclass
class CandidateResult:
    name: str
    part: str
    source: str
    sign: int
    formula: str
    passes: int = 0
    failures: int = 0
    first_residual: str | None = None

    @property
    def holds(self):
        return self.failures == 0 and self.passes > 0

    def to_dict(self):
        return {
            "name": self.name, "part": self.part, "source": self.source, "sign": self.sign,
            "formula": self.formula, "passes": self.passes, "failures": self.failures,
            "holds": self.holds, "first_residual": self.first_residual,
        }


@dataclass
class IdentityReport:
    n: int
    trials: int
    seed: int
    candidates: list = field(default_factory=list)

    @property
    def verified(self):
        """Name of the candidate that held in every trial, per part."""
        out = {}
        for part in ("a", "b"):
            ok = [c.name for c in self.candidates if c.part == part and c.holds]
            out[part] = ok[0] if len(ok) == 1 else (ok or None)
        return out

    def to_dict(self):
        return {
            "n": self.n, "trials": self.trials, "seed": self.seed,
            "verified": self.verified,
            "candidates": [c.to_dict() for c in self.candidates],
        }


def _candidates():
    # (name, part, source, sign, formula); the rhs is built in _rhs
    out = []
    for part, fld in (("a", "zeta"), ("b", "v")):
        for source, inner in (("statement", "phi"), ("proof", "del phi")):
            for sign in (-1, 1):
                s = "-" if sign < 0 else "+"
                out.append((f"{part}-{source}{s}", part, source, sign,
                            f"dbar({fld} _| del phi) = dbar {fld} _| {inner} {s} {fld} _| dbar del phi"))
    return out


def _trial_forms(n, rng, deg_phi, deg_field):
    p = int(rng.integers(0, n + 1))
    q = int(rng.integers(0, n))
    phi = random_form(n, (p, q), deg_phi, rng)
    zeta = PolyVectorForm.vector_field(n, [random_poly(n, deg_field, rng) for _ in range(n)])
    V = [[random_poly(n, deg_field, rng) for _ in range(n)] for _ in range(n)]
    v = PolyVectorForm.from_matrix(n, V)
    return phi, zeta, v


def verify_lemma_contraction(trials=100, seed=0, n=2, deg_phi=2, deg_field=1):
    """Test candidate forms of the dbar/contraction commutation rule exactly.

    For each trial a random pure-type phi, a random vector field zeta and a
    random T^{1,0}-valued (0,1)-form v are drawn; every candidate identity is
    checked by exact subtraction.  Candidates differ in whether the first
    right-hand term contracts into phi or into del(phi), and in the sign of
    the dbar del phi term.

    Returns:
        IdentityReport with per-candidate pass/fail counts and the first
        nonzero residual of each failing candidate.
    """
    if n < 1 or n > MAX_N:
        raise DegreeOverflow(f"chart dimension must be in 1..{MAX_N}")
    report = IdentityReport(n=n, trials=trials, seed=seed)
    specs = _candidates()
    results = [CandidateResult(*s) for s in specs]
    report.candidates = results
    streams = np.random.SeedSequence(seed).spawn(trials)
    for ss in streams:
        rng = np.random.default_rng(ss)
        phi, zeta, v = _trial_forms(n, rng, deg_phi, deg_field)
        dphi = phi.dl()
        ddphi = dphi.dbar()
        fields = {"a": zeta, "b": v}
        for res in results:
            f = fields[res.part]
            lhs = f.contract(dphi).dbar()
            first = f.dbar().contract(phi if res.source == "statement" else dphi)
            last = f.contract(ddphi)
            rhs = first + last if res.sign > 0 else first - last
            diff = lhs - rhs
            if diff.is_zero:
                res.passes += 1
            else:
                res.failures += 1
                if res.first_residual is None:
                    res.first_residual = str(diff)
    return report

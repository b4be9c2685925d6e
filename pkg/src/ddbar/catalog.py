"""Named invariant models with default metrics.

Expected properties in ``flags`` are documentation only; nothing downstream
treats them as answers.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .algebra import Form, build_model, presentation_from_complex
from .errors import DdbarError
from .metric import HermitianMetric

__all__ = ["CatalogEntry", "get_entry", "entry_names", "load", "balanced_solvmanifold"]

IDENTITY_TOL = 1e-12


@dataclass
class CatalogEntry:
    """A presentation plus the data needed to run every command on it.

    Attributes:
        metric: Hermitian matrix H of omega = i sum H_jk phi^j ^ conj(phi^k),
            or None for the standard one.
        u: coefficient of the trivializing form u = c phi^1 ^ ... ^ phi^n.
        family: {"parameter", "range", "value"} when the entry is one member
            of a parametrized family.
    """

    name: str
    presentation: object
    metric: np.ndarray | None = None
    u: complex | None = 1.0
    family: dict | None = None
    flags: dict = field(default_factory=dict)
    description: str = ""

    _model: object = field(default=None, init=False, repr=False)

    @property
    def n(self):
        return self.presentation.n

    def model(self):
        if self._model is None:
            self._model = build_model(self.presentation)
        return self._model

    def hermitian_matrix(self):
        return np.eye(self.n, dtype=complex) if self.metric is None else np.asarray(self.metric)

    def hermitian_metric(self, model=None):
        return HermitianMetric(model or self.model(), self.hermitian_matrix())

    def trivializing_form(self):
        if self.u is None:
            return None
        return Form.monomial(self.n, tuple(range(1, self.n + 1)), (), self.u)

    def with_parameter(self, value):
        if self.family is None:
            raise ValueError(f"{self.name} is not a parametrized family")
        return _FACTORIES[self.name](value)


def _torus(n):
    return CatalogEntry(
        f"torus{n}",
        presentation_from_complex(n, {}, name=f"torus{n}"),
        flags={"kahler": True, "ddbar": True},
        description=f"complex torus of dimension {n}",
    )


def _iwasawa():
    return CatalogEntry(
        "iwasawa",
        presentation_from_complex(3, {3: [(-1, "1", "2")]}, name="iwasawa"),
        flags={"ddbar": False, "balanced": True, "holomorphically_parallelizable": True},
        description="complex Heisenberg nilmanifold",
    )


def _kodaira_thurston():
    return CatalogEntry(
        "kodaira_thurston",
        presentation_from_complex(2, {2: [(1j, "1", "1b")]}, name="kodaira_thurston"),
        flags={"ddbar": False, "kahler": False, "skt": True},
        description="primary Kodaira surface",
    )


def _nakamura():
    return CatalogEntry(
        "nakamura",
        presentation_from_complex(3, {2: [(1, "1", "2")], 3: [(-1, "1", "3")]}, name="nakamura"),
        flags={"holomorphically_parallelizable": True},
        description="holomorphically parallelizable solvmanifold",
    )


def _pairing_to_form(n, Q):
    """(n-1,n-1)-form whose positivity pairing matrix is Q."""
    from .algebra import layout
    from .structures import positivity_matrix

    N = layout(n).block_size(n - 1, n - 1)
    P = np.array([positivity_matrix(n, n - 1, e).ravel() for e in np.eye(N, dtype=complex)]).T
    block = np.linalg.lstsq(P, np.asarray(Q, dtype=complex).ravel(), rcond=None)[0]
    return Form(n, {(n - 1, n - 1): block})


def balanced_solvmanifold(a=0.5):
    """Six-dimensional solvmanifold family with a balanced Calabi-Yau structure.

    d phi^1 = phi^13 + phi^1 ^ conj(phi^3) + phi^3 ^ conj(phi^3)
    d phi^2 = -phi^23 - phi^2 ^ conj(phi^3) + a phi^3 ^ conj(phi^3)

    The d-closed (2,2)-forms include the ray with pairing matrix
    [[1, 0, -c], [0, 1, a c], [-c, a c, c]], positive for 0 < c < 1/(1 + a^2);
    the default metric is the (1,1)-root of its midpoint.
    """
    from .structures import michelsohn_root

    a = float(a)
    pres = presentation_from_complex(3, {
        1: [(1, "1", "3"), (1, "1", "3b"), (1, "3", "3b")],
        2: [(-1, "2", "3"), (-1, "2", "3b"), (a, "3", "3b")],
    }, name="fou")
    c = 0.5 / (1 + a * a)
    Q = np.array([[1, 0, -c], [0, 1, a * c], [-c, a * c, c]], dtype=complex)
    Omega = _pairing_to_form(3, Q)
    Omega = (Omega + Omega.conj()) * 0.5
    omega = michelsohn_root(Omega)
    H = -1j * omega.block(1, 1).reshape(3, 3)
    return CatalogEntry(
        "fou",
        pres,
        metric=(H + H.conj().T) / 2,
        family={"parameter": "a", "range": [a - 0.2, a + 0.2], "value": a},
        flags={"ddbar": True, "balanced": True, "calabi_yau": True, "kahler": False},
        description="balanced Calabi-Yau solvmanifold family in the parameter a",
    )


_FACTORIES = {
    "torus2": lambda: _torus(2),
    "torus3": lambda: _torus(3),
    "iwasawa": _iwasawa,
    "kodaira_thurston": _kodaira_thurston,
    "nakamura": _nakamura,
    "fou": balanced_solvmanifold,
}


def entry_names():
    return list(_FACTORIES)


def get_entry(name, **params):
    try:
        factory = _FACTORIES[name]
    except KeyError:
        raise KeyError(f"unknown catalog entry {name!r}; known: {', '.join(_FACTORIES)}") from None
    return factory(**params)


def load(name, check=True, **params):
    """Entry with its model built and the operator identities verified."""
    entry = get_entry(name, **params)
    model = entry.model()
    if check:
        worst = max(model.operator_identity_residuals().values())
        if worst > IDENTITY_TOL:
            raise DdbarError(f"{name}: operator identities fail (max residual {worst:.3g})")
    return entry

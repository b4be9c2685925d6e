"""Cohomology, special metrics and deformations on invariant-form models of
complex nilmanifolds and solvmanifolds."""

__version__ = "0.1.0"

from .algebra import (
    Form,
    InvariantModel,
    LieAlgebraPresentation,
    OperatorTag,
    VectorValuedForm,
    apply_diff,
    build_model,
    contract,
    power,
    presentation_from_complex,
    wedge,
)
from .catalog import CatalogEntry, entry_names, get_entry, load
from .cohomology import (
    Aeppli,
    BottChern,
    CohomologyClass,
    CohomologyGroup,
    DeRham,
    Dh,
    Dolbeault,
    HAeppli,
    check_lemma,
    compute_group,
    dimension_table,
    transfer_class,
)
from .deformation import (
    TrivializingForm,
    copolarised_subspace,
    deform_family,
    gprim_space,
    moduli_metrics,
    parameter_family,
    primitivity_report,
    tangent_cohomology,
)
from .errors import (
    DdbarError,
    DegreeMismatch,
    DegreeOverflow,
    DimensionOdd,
    HypothesisFailed,
    InconsistentSystem,
    JacobiViolation,
    LemmaRequired,
    MCObstructed,
    NoCanonicalMap,
    NoConvergence,
    NoTrivializer,
    NonIntegrable,
    NotAlmostComplex,
    NotInSubspace,
    NotPositive,
    NotReal,
    RaggedConstants,
    SchemaError,
    ZeroH,
)
from .io import canonical_json, parse_document, parse_model, serialize_model
from .local import verify_lemma_contraction
from .metric import HermitianMetric
from .representatives import closed_rep, minimal_d_closed_rep
from .structures import (
    HPHS,
    HSG,
    PHS,
    PSKT,
    SG,
    Balanced,
    Gauduchon,
    HGauduchon,
    audit_equivalences,
    check_structure,
    find_structure,
    michelsohn_root,
)

__all__ = [
    "__version__",
    "Form",
    "InvariantModel",
    "LieAlgebraPresentation",
    "OperatorTag",
    "VectorValuedForm",
    "apply_diff",
    "build_model",
    "contract",
    "power",
    "presentation_from_complex",
    "wedge",
    "Aeppli",
    "BottChern",
    "CohomologyClass",
    "CohomologyGroup",
    "DeRham",
    "Dh",
    "Dolbeault",
    "HAeppli",
    "check_lemma",
    "compute_group",
    "dimension_table",
    "transfer_class",
    "TrivializingForm",
    "copolarised_subspace",
    "deform_family",
    "gprim_space",
    "moduli_metrics",
    "parameter_family",
    "primitivity_report",
    "tangent_cohomology",
    "DdbarError",
    "DegreeMismatch",
    "DegreeOverflow",
    "DimensionOdd",
    "HypothesisFailed",
    "InconsistentSystem",
    "JacobiViolation",
    "LemmaRequired",
    "MCObstructed",
    "NoCanonicalMap",
    "NoConvergence",
    "NoTrivializer",
    "NonIntegrable",
    "NotAlmostComplex",
    "NotInSubspace",
    "NotPositive",
    "NotReal",
    "RaggedConstants",
    "SchemaError",
    "ZeroH",
    "HPHS",
    "HSG",
    "PHS",
    "PSKT",
    "SG",
    "Balanced",
    "Gauduchon",
    "HGauduchon",
    "audit_equivalences",
    "check_structure",
    "find_structure",
    "michelsohn_root",
    "CatalogEntry",
    "entry_names",
    "get_entry",
    "load",
    "canonical_json",
    "parse_document",
    "parse_model",
    "serialize_model",
    "verify_lemma_contraction",
    "HermitianMetric",
    "closed_rep",
    "minimal_d_closed_rep",
]

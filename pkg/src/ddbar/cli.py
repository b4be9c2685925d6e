"""Command-line entry point: ``run <command> [entry-or-file] [flags]``.

Every command prints one JSON report (or a TSV table with ``--format tsv``).
Exit codes: 0 success, 1 a mathematical check came out false, 2 bad input.
"""
from __future__ import annotations

import argparse
import os
import sys
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from .errors import (
    DdbarError,
    HypothesisFailed,
    JacobiViolation,
    NonIntegrable,
    NotAlmostComplex,
    SchemaError,
    ZeroH,
)

COMMANDS = ("cohomology", "lemma-check", "verify-lemma", "minimal-rep", "structures", "audit",
            "copolarised", "wp-metrics", "deform", "catalog")


class InputError(Exception):
    pass


@dataclass
class RunReport:
    command: list
    entry: str | None
    fingerprint: str | None
    seed: int
    results: dict = field(default_factory=dict)
    ok: bool = True
    error: str | None = None

    def to_dict(self):
        return {"command": self.command, "entry": self.entry, "fingerprint": self.fingerprint,
                "version": __version__, "seed": self.seed, "ok": self.ok,
                "error": self.error, "results": self.results}


@dataclass
class _Target:
    name: str
    model: object
    metric: object
    u: object
    entry: object = None


def _load_target(source, a=None):
    from .algebra import Form, build_model
    from .catalog import entry_names, load
    from .io import parse_document
    from .metric import HermitianMetric

    if source is None:
        raise InputError("this command needs a catalog entry or a JSON file")
    if source in entry_names():
        params = {"a": a} if a is not None and source == "fou" else {}
        entry = load(source, **params)
        model = entry.model()
        return _Target(source, model, entry.hermitian_metric(model), entry.trivializing_form(), entry)
    if not os.path.exists(source):
        raise InputError(f"{source!r} is neither a catalog entry ({', '.join(entry_names())}) nor a file")
    with open(source) as fh:
        doc = parse_document(fh.read())
    model = build_model(doc.presentation)
    n = model.n
    H = np.eye(n) if doc.metric is None else doc.metric
    u = Form.monomial(n, tuple(range(1, n + 1)), (), 1.0 if doc.u is None else doc.u)
    return _Target(doc.presentation.name or os.path.basename(source), model,
                   HermitianMetric(model, H), u)


def _cmat(M):
    M = np.asarray(M)
    return {"re": M.real.tolist(), "im": M.imag.tolist()}


def _form(f):
    if f is None:
        return None
    return {f"{p},{q}": _cmat(f.block(p, q)) for p, q in f.bidegrees}


# commands -------------------------------------------------------------------


def cmd_cohomology(t, args):
    from .cohomology import dimension_table

    hs = (args.h,) if args.h is not None else (0.5, 2.0)
    return {"dimensions": dimension_table(t.model, hs)}, True


def cmd_lemma_check(t, args):
    from .cohomology import check_lemma

    kind, h = ("h_ddbar", args.h) if args.h is not None else ("ddbar", None)
    v = check_lemma(t.model, kind, h)
    out = {"kind": v.kind, "h": h, "holds": v.holds, "reason": v.reason,
           "location": None if v.location is None else str(v.location),
           "witness": _form(v.witness), "failures": [str(x) for x in v.failures]}
    return out, v.holds


def cmd_verify_lemma(t, args):
    from .local import verify_lemma_contraction

    rep = verify_lemma_contraction(trials=args.trials, seed=args.seed, n=args.n)
    d = rep.to_dict()
    return d, bool(rep.verified)


def cmd_minimal_rep(t, args):
    from .cohomology import Aeppli, compute_group
    from .representatives import minimal_d_closed_rep

    n = t.model.n
    p = args.p if args.p is not None else n - 1
    q = args.q if args.q is not None else p
    group = compute_group(t.model, Aeppli(p, q), t.metric)
    classes = []
    ok = True
    for i in range(group.dim):
        rep = minimal_d_closed_rep(t.metric, group.element(np.eye(group.dim)[i]))
        res = rep.d_residual()
        ok &= res <= args.tol
        classes.append({"d_residual": res, "corrector_norms": list(rep.corrector_norms())})
    return {"bidegree": [p, q], "dim": group.dim, "classes": classes}, ok


def _kinds(n, p, h):
    from .structures import HPHS, HSG, PSKT, SG, Balanced, Gauduchon

    ps = [p] if p is not None else sorted({1, n - 1})
    kinds = [Gauduchon(), Balanced(), SG(), HSG(h)]
    kinds += [PSKT(q) for q in ps] + [HPHS(q, h) for q in ps]
    return kinds


def cmd_structures(t, args):
    from .structures import find_structure

    h = 2.0 if args.h is None else args.h
    res = [find_structure(t.model, k, seed=args.seed).to_dict() for k in _kinds(t.model.n, args.p, h)]
    return {"h": h, "searches": res}, True


def cmd_audit(t, args):
    from .structures import DEFAULT_HS, audit_equivalences

    hs = (args.h,) if args.h is not None else DEFAULT_HS
    ps = [args.p] if args.p is not None else None
    rep = audit_equivalences(t.model, hs=hs, ps=ps, metrics=(t.metric,))
    return rep.to_dict(), rep.all_agree


def cmd_copolarised(t, args):
    from .deformation import copolarised_subspace

    cop = copolarised_subspace(t.model, t.metric, t.u, seed=args.seed)
    ok = cop.gauge_residual <= args.tol and cop.representative_residual <= args.tol
    out = {"tangent_dim": cop.tangent.dim, "dim": cop.dim, "dolbeault_dim": cop.dolbeault_dim,
           "dolbeault_agrees": cop.dolbeault_agrees(),
           "omega_dim": None if cop.omega_basis is None else cop.omega_basis.shape[1],
           "omega_agrees": cop.omega_agrees(),
           "gauge_residual": cop.gauge_residual,
           "representative_residual": cop.representative_residual}
    return out, ok


def cmd_wp_metrics(t, args):
    from .deformation import moduli_metrics

    mm = moduli_metrics(t.model, t.metric, t.u)
    out = mm.to_dict()
    diag = np.real(np.diag(mm.g2 - mm.gamma))
    out["g2_minus_gamma_diagonal"] = diag.tolist()
    out["h"] = args.h
    ok = max(mm.g2_formula_residual, mm.gamma_formula_residual, mm.difference_residual) <= 1e-9
    ok = ok and bool(np.all(diag >= -1e-10))
    return out, ok


def cmd_deform(t, args):
    from .cohomology import check_lemma
    from .deformation import copolarised_subspace, deform_family, tangent_cohomology
    from .structures import HPHS, HSG, PSKT, Gauduchon

    model = t.model
    n = model.n
    h = 2.0 if args.h is None else args.h
    p = n - 1 if args.p is None else args.p
    rng = np.random.default_rng(args.seed)
    metric = None
    if check_lemma(model, "ddbar"):
        try:
            cop = copolarised_subspace(model, t.metric, t.u, gauge_trials=0)
            metric = t.metric
            tangent = cop.random_element(rng) if cop.dim else cop.tangent.random_class(rng)
        except HypothesisFailed:
            tangent = tangent_cohomology(model, t.u).random_class(rng)
    else:
        tangent = tangent_cohomology(model, t.u).random_class(rng)
    kinds = [Gauduchon(), PSKT(p), HPHS(p, h), HSG(h)]
    fam = deform_family(model, tangent, order=args.order, metric=metric, kinds=kinds, hs=(h,),
                        seed=args.seed)
    ok = fam.open and (fam.gauss_manin is None or fam.gauss_manin["within"])
    return fam.to_dict(), ok


def cmd_catalog(t, args):
    from .catalog import entry_names, load

    rows = []
    for name in entry_names():
        e = load(name)
        rows.append({"name": name, "n": e.n, "fingerprint": e.model().fingerprint(),
                     "description": e.description, "flags": e.flags, "family": e.family})
    return {"entries": rows}, True


_DISPATCH = {
    "cohomology": cmd_cohomology, "lemma-check": cmd_lemma_check,
    "verify-lemma": cmd_verify_lemma, "minimal-rep": cmd_minimal_rep,
    "structures": cmd_structures, "audit": cmd_audit, "copolarised": cmd_copolarised,
    "wp-metrics": cmd_wp_metrics, "deform": cmd_deform, "catalog": cmd_catalog,
}
_NO_TARGET = {"verify-lemma", "catalog"}


# output ---------------------------------------------------------------------


def _flatten(obj, prefix=""):
    if isinstance(obj, dict):
        for k, v in obj.items():
            yield from _flatten(v, f"{prefix}.{k}" if prefix else str(k))
    elif isinstance(obj, (list, tuple)) and obj and any(isinstance(x, (dict, list)) for x in obj):
        for i, v in enumerate(obj):
            yield from _flatten(v, f"{prefix}[{i}]")
    else:
        yield prefix, obj


def _tsv(report):
    from .io import canonical_json

    lines = ["key\tvalue"]
    for k, v in _flatten(report):
        val = v if isinstance(v, str) else canonical_json(v)
        lines.append(f"{k}\t{val}")
    return "\n".join(lines)


def build_parser():
    ap = argparse.ArgumentParser(prog="run", description="Invariant-form computations on complex nilmanifolds and solvmanifolds.")
    ap.add_argument("command", choices=COMMANDS)
    ap.add_argument("target", nargs="?", help="catalog entry name or JSON model file")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--h", type=float, default=None)
    ap.add_argument("--p", type=int, default=None)
    ap.add_argument("--q", type=int, default=None)
    ap.add_argument("--a", type=float, default=None, help="family parameter of a parametrized entry")
    ap.add_argument("--tol", type=float, default=1e-10)
    ap.add_argument("--format", choices=("json", "tsv"), default="json")
    ap.add_argument("--n", type=int, default=2, help="dimension for verify-lemma")
    ap.add_argument("--trials", type=int, default=100)
    ap.add_argument("--order", type=int, default=2)
    return ap


def run(argv=None, out=None):
    """Execute one command; returns the exit code."""
    from .io import canonical_json

    out = out or sys.stdout
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        if exc.code == 0:
            return 0
        err = RunReport(argv, None, None, 0, ok=False, error="usage: invalid arguments")
        out.write(canonical_json(err.to_dict()) + "\n")
        return 2
    report = RunReport(argv, args.target, None, args.seed)
    code = 0
    try:
        if args.h == 0:
            raise InputError("--h must be nonzero")
        target = None if args.command in _NO_TARGET else _load_target(args.target, args.a)
        if target is not None:
            report.fingerprint = target.model.fingerprint()
        results, ok = _DISPATCH[args.command](target, args)
        report.results = results
        report.ok = bool(ok)
        code = 0 if ok else 1
    except (InputError, SchemaError, JacobiViolation, NotAlmostComplex, NonIntegrable, ZeroH,
            KeyError, OSError) as exc:
        report.ok, report.error, code = False, f"{type(exc).__name__}: {exc}", 2
    except DdbarError as exc:
        # a hypothesis the command needs is false on this model
        report.ok, report.error, code = False, f"{type(exc).__name__}: {exc}", 1
    d = report.to_dict()
    text = _tsv(d) if args.format == "tsv" else canonical_json(d)
    out.write(text + "\n")
    return code


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()

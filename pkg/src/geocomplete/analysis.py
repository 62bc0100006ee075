"""Full analysis pipeline for one problem spec, producing a JSON-ready report."""

from __future__ import annotations

from typing import Optional

import numpy as np

from . import completeness as cp
from .flows import energy_form, euler_field_algebra, euler_field_dual, lax_field
from .forms import QuadraticForm3, signature, u_from_metric
from .lie3 import AlgebraType, classify, signature_str
from .odeint import IntegrateOptions, StatusKind, integrate
from .quadfield import (
    DEDUP_ANGLE,
    DEFINITE_TOL,
    DIRECTION_TOL,
    FIRST_INTEGRAL_RESIDUAL_TOL,
    FIRST_INTEGRAL_SVD_TOL,
    RHO_ZERO_CUT,
    QuadraticField,
    definite_search,
    find_idempotents,
    idempotent_residual,
    idempotent_tolerance,
    invariant_directions,
    quadratic_first_integrals,
)
from .specio import ProblemSpec

FIELD_KINDS = ("auto", "euler", "euler-dual", "lax")


def select_field(spec: ProblemSpec, kind: str = "auto"):
    """(field, kind, energy form in the field's coordinates)."""
    alg, S = spec.algebra, spec.metric
    if kind == "auto":
        kind = "lax" if classify(alg).kind is AlgebraType.SL2R else "euler-dual"
    if kind == "euler":
        return euler_field_algebra(alg, S), kind, energy_form(S, "algebra")
    if kind == "euler-dual":
        return euler_field_dual(alg, S), kind, energy_form(S, "dual")
    if kind == "lax":
        u = u_from_metric(alg, S)
        return lax_field(alg, S), kind, QuadraticForm3(u.k_ref @ u.U_inv)
    raise ValueError(f"unknown field kind {kind!r}")


def random_unit_starts(n: int, seed: int, dim: int = 3) -> np.ndarray:
    rng = np.random.default_rng(seed)
    X = rng.normal(size=(n, dim))
    return X / np.linalg.norm(X, axis=1, keepdims=True)


def field_terms(F: QuadraticField):
    return F.terms(tol=1e-15)


def form_terms(S) -> dict:
    S = np.asarray(getattr(S, "S", S), float)
    out = {}
    for i in range(S.shape[0]):
        for j in range(i, S.shape[0]):
            v = S[i, i] if i == j else 2 * S[i, j]
            if abs(v) > 1e-15:
                out[f"x{i + 1}^2" if i == j else f"x{i + 1}*x{j + 1}"] = float(v)
    return out


def certificate_dict(c) -> dict:
    if c is None:
        return None
    name = type(c).__name__
    if isinstance(c, cp.StructuralComplete):
        return {"type": name, "reason": c.reason}
    if isinstance(c, cp.DefiniteFirstIntegral):
        return {"type": name, "form": form_terms(c.form), "matrix": c.form.S, "min_eigenvalue": c.min_eigenvalue,
                "residual_tol": FIRST_INTEGRAL_RESIDUAL_TOL}
    if isinstance(c, cp.Linearizable):
        return {"type": name, "constant_forms": c.certificate.constant_forms,
                "change_of_basis": c.certificate.change_of_basis, "residual": c.certificate.residual, "tol": 1e-10}
    if isinstance(c, cp.IdempotentWitness):
        return {"type": name, "X": c.X, "residual": c.residual, "tol": idempotent_tolerance(c.X),
                "predicted_blowup_time": c.predicted_blowup_time}
    if isinstance(c, cp.SlCriterion):
        return {"type": name, "case": c.case, "shape": c.shape.value,
                "eigenvalues": [v if isinstance(v, float) else complex(v) for v in c.eigenvalues],
                "criterion_value": c.criterion_value, "gamma": c.gamma,
                "timelike_eigenvalue": c.timelike_eigenvalue, "crit_tol": cp.CRIT_TOL,
                "supporting": certificate_dict(c.supporting)}
    if isinstance(c, cp.E11SignCriterion):
        return {"type": name, "lambda": c.lam, "mu": c.mu, "nu": c.nu, "c": c.c, "frame": c.frame,
                "degenerate_on_derived": c.degenerate_on_derived, "crit_tol": cp.CRIT_TOL,
                "supporting": certificate_dict(c.supporting)}
    if isinstance(c, cp.NecessaryOnly):
        return {"type": name, "message": c.message, "n_directions": c.n_directions,
                "n_zero_directions": c.n_zero_directions}
    if isinstance(c, cp.BoundaryCase):
        return {"type": name, "quantity": c.quantity, "value": c.value, "margin": c.margin}
    raise TypeError(name)


def verdict_dict(v: cp.CompletenessVerdict) -> dict:
    return {
        "status": v.status.value,
        "label": v.label,
        "field": v.field_kind,
        "certificate": certificate_dict(v.certificate),
        "notes": list(v.notes),
        "checks": [{"name": c.name, "value": c.value, "tol": c.tolerance, "ok": c.ok} for c in cp.validate_certificate(v)],
    }


def corroborate(F, energy, verdict, spec: ProblemSpec, seed: int, rtol=None, atol=None) -> dict:
    """Integrate forward and backward from probe and random starts."""
    opts = IntegrateOptions(
        rtol=float(rtol if rtol is not None else spec.option("rtol")),
        atol=float(atol if atol is not None else spec.option("atol")),
        norm_cap=float(spec.option("norm_cap")),
        h_min=float(spec.option("h_min")),
    )
    T = float(spec.option("t_max"))
    starts = [("probe", np.asarray(p, float)) for p in spec.option("probe_points")]
    starts += [("random", x) for x in random_unit_starts(int(spec.option("n_random_starts")), seed)]
    runs = []
    for label, x0 in starts:
        for backward in (False, True):
            tr = integrate(F, x0, T, opts, backward=backward, monitor={"energy": energy})
            runs.append(_run_dict(label, x0, backward, tr))
    witness_run = None
    if verdict.witness is not None:
        tr = integrate(F, verdict.witness, max(T, 2.0), opts)
        witness_run = _run_dict("witness", verdict.witness, False, tr)
    blowups = [r for r in runs if r["status"] == StatusKind.BLOW_UP.value]
    if verdict.status is cp.Status.COMPLETE:
        conclusion = "conflict: blow-up observed for a Complete verdict" if blowups else "consistent: no blow-up observed"
    elif verdict.status is cp.Status.INCOMPLETE:
        ok = witness_run is not None and witness_run["status"] == StatusKind.BLOW_UP.value
        conclusion = "witness blow-up confirmed" if ok else "witness blow-up not observed"
    else:
        conclusion = "refuted: blow-up observed" if blowups else "no blow-up observed"
    return {
        "rtol": opts.rtol, "atol": opts.atol, "norm_cap": opts.norm_cap, "h_min": opts.h_min, "t_max": T,
        "seed": seed, "runs": runs, "witness_run": witness_run, "n_blowups": len(blowups), "conclusion": conclusion,
    }


def _run_dict(label, x0, backward, tr) -> dict:
    st = tr.status
    return {
        "start": label, "x0": x0, "direction": "backward" if backward else "forward", "status": st.kind.value,
        "t_end": float(tr.times[-1]), "t_star": st.t_star, "norm_at_stop": st.norm_at_stop,
        "n_steps": len(tr.times) - 1, "energy_drift": tr.drift_report.get("energy"),
    }


def analyze(spec: ProblemSpec, integrate_evidence: bool = True, seed: int = 0, rtol=None, atol=None):
    """Run the whole pipeline; returns (report dict, verdict)."""
    seed = int(spec.options.get("seed", seed))
    alg, S = spec.algebra, spec.metric
    cls = classify(alg)
    verdict = cp.decide(alg, S)
    F = verdict.field
    _, _, energy = select_field(spec, verdict.field_kind)
    dirs = invariant_directions(F)
    idem = find_idempotents(F, dirs)
    fib = quadratic_first_integrals(F)
    ds = definite_search(fib, seed=seed)
    report = {
        "name": spec.name,
        "classification": {
            "type": cls.kind.value,
            "description": cls.describe(),
            "unimodular": cls.kind is not AlgebraType.NON_UNIMODULAR,
            "trace_vector": cls.trace_vector,
            "unimodular_tol": 1e-10,
            "milnor_alphas": None if cls.milnor is None else cls.milnor.alphas,
            "milnor_signature": None if cls.milnor is None else signature_str(cls.milnor.sign_signature),
            "milnor_residual": None if cls.milnor is None else cls.milnor.residual,
        },
        "metric": {"matrix": S, "signature": list(signature(S)), "signature_tol": 1e-9},
        "field": {"kind": verdict.field_kind, "terms": field_terms(F), "energy": form_terms(energy)},
        "invariant_directions": {
            "tol": DIRECTION_TOL, "rho_zero_cut": RHO_ZERO_CUT, "dedup_angle": DEDUP_ANGLE,
            "items": [{"d": d.d, "rho": d.rho, "kind": d.kind, "residual": d.residual, "flagged": d.flagged}
                      for d in dirs],
        },
        "idempotents": [{"X": X, "residual": idempotent_residual(F, X), "tol": idempotent_tolerance(X)} for X in idem],
        "first_integrals": {
            "svd_tol": FIRST_INTEGRAL_SVD_TOL, "residual_tol": FIRST_INTEGRAL_RESIDUAL_TOL,
            "basis": [form_terms(B) for B in fib.basis], "residuals": fib.residuals,
        },
        "definite_combination": {
            "found": ds.found, "exact": ds.exact, "tol": DEFINITE_TOL, "min_eigenvalue": ds.min_eigenvalue,
            "coefficients": ds.coefficients, "form": None if ds.form is None else form_terms(ds.form),
        },
        "verdict": verdict_dict(verdict),
    }
    if integrate_evidence:
        report["integration"] = corroborate(F, energy, verdict, spec, seed, rtol, atol)
    report["outcome"] = outcome(verdict, report.get("integration"))
    return report, verdict


def outcome(verdict, integration: Optional[dict]) -> str:
    if verdict.status is cp.Status.UNDECIDED and integration and integration["n_blowups"] > 0:
        return "Undecided-then-refuted"
    return verdict.status.value

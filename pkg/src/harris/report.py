"""Schema-versioned JSON report of a certification run."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field, fields
from typing import Any, Dict, Optional

import numpy as np

from . import __version__
from .certify import ContractionCertificate, ContractionCheck, DriftCertificate, MinorizationCertificate
from .harris_alt import AltCertificate, AveragedCertification, AveragingCertificate
from .solve import ConvergenceRun

SCHEMA = "harris-report/1"
#: fields that legitimately differ between otherwise identical runs
VOLATILE = ("generated_at",)


def _num(x: float):
    x = float(x)
    # JSON has no inf / nan literals
    return x if np.isfinite(x) else str(x)


def drift_dict(d: DriftCertificate) -> Dict[str, Any]:
    return {"gamma": d.gamma, "K": d.K, "min_slack": d.min_slack, "slack": d.slack.tolist(), "valid": d.valid}


def minorization_dict(m: MinorizationCertificate) -> Dict[str, Any]:
    return {
        "R": m.R,
        "C": list(m.C),
        "alpha": m.alpha,
        "nu": m.nu.weights.tolist(),
        "residual_ok": m.residual_ok,
        "notes": list(m.notes),
    }


def contraction_dict(c: ContractionCertificate) -> Dict[str, Any]:
    keys = ("gamma", "K", "alpha", "R", "alpha0", "beta", "gamma0", "gamma1", "gamma2", "alpha_bar")
    out = {key: getattr(c, key) for key in keys}
    out.update(empirically_verified=c.empirically_verified, k_clamped=c.k_clamped, notes=list(c.notes))
    return out


def check_dict(c: ContractionCheck) -> Dict[str, Any]:
    out = asdict(c)
    out["worst_pair"] = list(c.worst_pair) if c.worst_pair else None
    out["passed"] = c.passed
    return out


def alt_dict(a: AltCertificate) -> Dict[str, Any]:
    return {
        "S": list(a.S),
        "gamma_tilde": a.gamma_tilde,
        "b": a.b,
        "alpha_tilde": a.alpha_tilde,
        "nu_tilde": a.nu_tilde.weights.tolist(),
        "valid": a.valid,
    }


def averaging_dict(a: AveragingCertificate) -> Dict[str, Any]:
    return {
        "n_star": a.n_star,
        "ell": a.ell,
        "alpha_hat": a.alpha_hat,
        "nu": a.nu.weights.tolist(),
        "N": a.N,
        "R": a.R,
        "remark_bound": _num(a.remark_bound),
        "remark_bound_status": "advisory",
        "lower_bound2_min": _num(a.lower_bound2_min),
        "alpha_m": _num(a.alpha_m),
    }


def averaged_dict(r: AveragedCertification) -> Dict[str, Any]:
    return {
        "N": r.N,
        "Q": r.Q.rows.tolist(),
        "gamma_Q": r.gamma_Q,
        "drift": drift_dict(r.drift),
        "minorization": minorization_dict(r.minorization),
        "theorem_contraction": contraction_dict(r.theorem_certificate),
        "contraction": contraction_dict(r.certificate),
        "check": check_dict(r.check),
    }


def convergence_dict(run: ConvergenceRun, tol: float) -> Dict[str, Any]:
    return {
        "tol": tol,
        "iterations": run.iterates,
        "certified_error": run.certified_error,
        "mu_star": run.mu_star.weights.tolist(),
        "mu_star_V": run.mu_star_V,
        "final_step_distance": float(run.distances[-1]),
    }


@dataclass
class HarrisReport:
    command: str
    input: Dict[str, Any]
    verdicts: Dict[str, bool] = field(default_factory=dict)
    drift: Optional[Dict[str, Any]] = None
    minorization: Optional[Dict[str, Any]] = None
    contraction: Optional[Dict[str, Any]] = None
    check: Optional[Dict[str, Any]] = None
    alt: Optional[Dict[str, Any]] = None
    averaging: Optional[Dict[str, Any]] = None
    averaged: Optional[Dict[str, Any]] = None
    convergence: Optional[Dict[str, Any]] = None
    error: Optional[str] = None
    schema: str = SCHEMA
    tool_version: str = __version__
    generated_at: Optional[str] = None

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "HarrisReport":
        names = {f.name for f in fields(cls)}
        unknown = set(data) - names
        if unknown:
            raise ValueError(f"unknown report fields: {sorted(unknown)}")
        return cls(**data)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True, allow_nan=False) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "HarrisReport":
        return cls.from_dict(json.loads(text))

    def stable_dict(self) -> Dict[str, Any]:
        """``to_dict`` without the volatile fields, for comparisons."""
        return {k: v for k, v in self.to_dict().items() if k not in VOLATILE}

    @property
    def passed(self) -> bool:
        return bool(self.verdicts) and all(self.verdicts.values())

    def pretty(self) -> str:
        lines = [f"harris {self.tool_version} :: {self.command}"]
        inp = self.input
        lines.append(f"  input     {inp.get('source')}  n={inp.get('n')}  V in [{inp.get('v_min'):.6g}, {inp.get('v_max'):.6g}]")
        if self.alt:
            a = self.alt
            lines.append(f"  alt       S={a['S']} gamma~={a['gamma_tilde']:.6g} b={a['b']:.6g} "
                         f"alpha~={a['alpha_tilde']:.6g} valid={a['valid']}")
        if self.averaging:
            a = self.averaging
            lines.append(f"  averaging n*={a['n_star']} ell={a['ell']} N={a['N']} alpha^={a['alpha_hat']:.6g} "
                         f"R={a['R']:.6g}")
            lines.append(f"            remark bound on N = {a['remark_bound']} (advisory)")
        contraction = self.contraction or (self.averaged or {}).get("contraction")
        if self.drift:
            lines.append(f"  drift     gamma={self.drift['gamma']:.6g} K={self.drift['K']:.6g} valid={self.drift['valid']}")
        if self.minorization:
            m = self.minorization
            lines.append(f"  minor     R={m['R']:.6g} |C|={len(m['C'])} alpha={m['alpha']:.6g}")
        if contraction:
            c = contraction
            lines.append(f"  contract  alpha_bar={c['alpha_bar']:.10g} beta={c['beta']:.6g} alpha0={c['alpha0']:.6g} "
                         f"gamma0={c['gamma0']:.6g} gamma1={c['gamma1']:.6g} gamma2={c['gamma2']:.6g}")
            for note in c.get("notes", []):
                lines.append(f"            note: {note}")
        if self.convergence:
            c = self.convergence
            lines.append(f"  invariant iterations={c['iterations']} certified_error={c['certified_error']:.3e} "
                         f"mu*(V)={c['mu_star_V']:.6g}")
            lines.append("            mu* = " + ", ".join(f"{x:.6g}" for x in c["mu_star"]))
        if self.error:
            lines.append(f"  error     {self.error}")
        for stage, ok in self.verdicts.items():
            lines.append(f"  [{'PASS' if ok else 'FAIL'}] {stage}")
        return "\n".join(lines) + "\n"

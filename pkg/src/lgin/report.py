"""Single-instance analysis report and its JSON form."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .curves import SlopePair, shifted_quartic
from .dynamics import envelope, gas_certificate
from .equilibria import (
    TOL_H,
    Classification,
    EigenPair,
    Equilibrium,
    EquilibriumSet,
    GlobalBehavior,
    HypothesisError,
    Kind,
    Label,
    Region,
    UniquenessReport,
    check_hypotheses,
    classify_by_slopes,
    find_equilibria,
    pattern_holds,
    se_ordered,
    slope_identity_defect,
    uniqueness_sufficient,
)
from .model import Jacobian2, ModelParams, Point, se_leq

THEOREM_CHECKS = (
    "pattern_theorem",
    "hypotheses",
    "slope_eigen_agreement",
    "slope_eigen_identity",
    "root_product_law",
    "envelope_sandwich",
    "uniqueness_sufficiency",
    "global_attractivity",
)
ROOT_PRODUCT_RTOL = 1e-8
IDENTITY_RTOL = 1e-8
ENVELOPE_STEPS = 200


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str = ""


@dataclass(frozen=True)
class AnalysisReport:
    params: ModelParams
    equilibria: EquilibriumSet
    uniqueness: UniquenessReport
    gas_certified: Optional[bool]
    theorem_checks: tuple[CheckResult, ...]

    @property
    def all_passed(self) -> bool:
        return all(c.passed for c in self.theorem_checks)

    def to_dict(self) -> dict:
        return {
            "params": self.params.as_dict(),
            "count": self.equilibria.count,
            "labels": [str(lab.value) for lab in self.equilibria.labels],
            "prediction": _behavior_to_dict(self.equilibria.prediction),
            "equilibria": [_eq_to_dict(e) for e in self.equilibria.all],
            "uniqueness": {"condA": self.uniqueness.condA, "condB": self.uniqueness.condB,
                           "guaranteed": self.uniqueness.guaranteed},
            "gas_certified": self.gas_certified,
            "theorem_checks": [{"name": c.name, "passed": c.passed, "detail": c.detail}
                               for c in self.theorem_checks],
            "all_passed": self.all_passed,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "AnalysisReport":
        eqs = tuple(_eq_from_dict(e) for e in d["equilibria"])
        nonneg = tuple(e for e in eqs if e.region is Region.NONNEG)
        pred = _behavior_from_dict(d["prediction"])
        u = d["uniqueness"]
        return cls(
            ModelParams.from_dict(d["params"]),
            EquilibriumSet(eqs, nonneg, pred),
            UniquenessReport(u["condA"], u["condB"]),
            d["gas_certified"],
            tuple(CheckResult(c["name"], c["passed"], c["detail"]) for c in d["theorem_checks"]),
        )


def _eq_to_dict(e: Equilibrium) -> dict:
    out = {
        "point": list(e.point),
        "jacobian": list(e.jac),
        "residual": e.residual,
        "contact_order": e.contact_order,
        "region": e.region.value,
        "eigenvalues": None if e.eig is None else [e.eig.lambda1, e.eig.lambda2],
        "slopes": None if e.slopes is None else list(e.slopes),
        "label": None if e.classification is None else e.classification.label.value,
        "margin": None if e.classification is None else e.classification.margin,
    }
    return out


def _eq_from_dict(d: dict) -> Equilibrium:
    cls = None if d["label"] is None else Classification(Label(d["label"]), d["margin"])
    return Equilibrium(
        Point(*d["point"]),
        Jacobian2(*d["jacobian"]),
        d["residual"],
        d["contact_order"],
        Region(d["region"]),
        None if d["eigenvalues"] is None else EigenPair(*d["eigenvalues"]),
        None if d["slopes"] is None else SlopePair(*d["slopes"]),
        cls,
    )


def _behavior_to_dict(g: GlobalBehavior) -> dict:
    return {"kind": g.kind.value, "attractors": list(g.attractors),
            "saddle": g.saddle, "nonhyperbolic": g.nonhyperbolic}


def _behavior_from_dict(d: dict) -> GlobalBehavior:
    return GlobalBehavior(Kind(d["kind"]), tuple(d["attractors"]), d["saddle"], d["nonhyperbolic"])


# -- individual checks ------------------------------------------------------

def _check_pattern(eqs: EquilibriumSet) -> CheckResult:
    ok = pattern_holds(eqs) and se_ordered(eqs)
    return CheckResult("pattern_theorem", ok, f"count {eqs.count}, labels {[str(l.value) for l in eqs.labels]}")


def _check_hypotheses(eqs: EquilibriumSet) -> CheckResult:
    for e in eqs.nonneg:
        try:
            check_hypotheses(e.jac)
        except HypothesisError as exc:
            return CheckResult("hypotheses", False, f"at {tuple(e.point)}: {exc}")
    return CheckResult("hypotheses", True)


def _check_agreement(eqs: EquilibriumSet, tol_h: float) -> CheckResult:
    for e in eqs.nonneg:
        if abs(e.eig.lambda1 - 1) <= tol_h:
            continue
        by_slope = classify_by_slopes(e.slopes, e.jac.b).label
        if by_slope != e.label:
            return CheckResult("slope_eigen_agreement", False,
                               f"at {tuple(e.point)}: eigen {e.label.value}, slopes {by_slope.value}")
    return CheckResult("slope_eigen_agreement", True)


def _check_identity(eqs: EquilibriumSet) -> CheckResult:
    worst = max((slope_identity_defect(e.jac, e.eig, e.slopes) for e in eqs.nonneg), default=0.0)
    return CheckResult("slope_eigen_identity", worst <= IDENTITY_RTOL, f"max scaled defect {worst:.3g}")


def root_product_defect(p: ModelParams) -> float:
    """Relative gap between the product of computed roots and ``b1^2 h1^2 / (1 - c1 c2)``."""
    sq = shifted_quartic(p)
    expected = (p.b1 * p.h1) ** 2 / (1 - p.c1 * p.c2)
    prod = complex(np.prod(sq.roots()))
    return abs(prod - expected) / abs(expected)


def _check_root_product(p: ModelParams) -> CheckResult:
    sq = shifted_quartic(p)
    if sq.effective_degree < 4:
        ok = p.c1 * p.c2 == 1 or math.isclose(p.c1 * p.c2, 1, rel_tol=1e-12)
        return CheckResult("root_product_law", ok, f"effective degree {sq.effective_degree}")
    rel = root_product_defect(p)
    return CheckResult("root_product_law", rel <= ROOT_PRODUCT_RTOL, f"relative defect {rel:.3g}")


def _check_envelope(p: ModelParams, n: int = ENVELOPE_STEPS) -> CheckResult:
    env = envelope(p, n)
    lo, hi = env.lower_seq, env.upper_seq
    # slack for rounding once the corners have converged
    tol = 1e-12 * (1 + max(p.b1 + p.h1, p.b2 + p.h2))
    ok = all(se_leq(lo[k], lo[k + 1], tol) and se_leq(hi[k + 1], hi[k], tol) for k in range(n - 1))
    ok = ok and all(se_leq(lo[k], hi[k], tol) for k in range(n))
    return CheckResult("envelope_sandwich", ok, f"{n} steps")


def _check_uniqueness(eqs: EquilibriumSet, u: UniquenessReport) -> CheckResult:
    ok = (not u.guaranteed) or eqs.count == 1
    return CheckResult("uniqueness_sufficiency", ok, f"guaranteed {u.guaranteed}, count {eqs.count}")


def _check_attractivity(eqs: EquilibriumSet, gas: Optional[bool]) -> CheckResult:
    if eqs.count == 1:
        ok = gas is True
    elif eqs.count == 3:
        ok = gas is False
    else:
        ok = True  # the fold regime makes no global claim
    return CheckResult("global_attractivity", ok, f"count {eqs.count}, certificate {gas}")


def analyze(p: ModelParams, tol: float = 1e-9, tol_h: float = TOL_H, max_n: int = 100_000) -> AnalysisReport:
    eqs = find_equilibria(p, tol_h)
    u = uniqueness_sufficient(p)
    gas = gas_certificate(p, tol, max_n)
    checks = (
        _check_pattern(eqs),
        _check_hypotheses(eqs),
        _check_agreement(eqs, tol_h),
        _check_identity(eqs),
        _check_root_product(p),
        _check_envelope(p),
        _check_uniqueness(eqs, u),
        _check_attractivity(eqs, gas),
    )
    assert tuple(c.name for c in checks) == THEOREM_CHECKS
    return AnalysisReport(p, eqs, u, gas, checks)

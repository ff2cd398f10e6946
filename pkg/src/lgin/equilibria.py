"""Equilibria: location, local stability, global-behavior prediction.

Equilibria are seeded from the real roots of the shifted elimination quartic
and polished by Newton's method on the rational fixed-point equations.
Stability is read off twice: from the eigenvalues of the Jacobian and from
the sign of the slope gap ``y1' - y2'`` between the critical curves.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .curves import (
    MERGE_RTOL,
    PoleError,
    SlopePair,
    shifted_quartic,
    slopes_from_jacobian,
    y1,
    y2_branches,
)
from .model import Jacobian2, ModelParams, Point, jacobian_xy

TOL_H = 1e-6
TOL_S = 1e-6
RESIDUAL_TOL = 1e-10


class SolverError(RuntimeError):
    def __init__(self, msg, seed=None):
        super().__init__(msg)
        self.seed = seed


class HypothesisError(ValueError):
    """The Jacobian violates the hypotheses needed for the slope criterion."""


class ContactOrderError(RuntimeError):
    def __init__(self, msg, cluster_order, slope_order):
        super().__init__(msg)
        self.cluster_order = cluster_order
        self.slope_order = slope_order


class Label(str, enum.Enum):
    LAS = "LAS"
    SADDLE = "Saddle"
    NONHYPERBOLIC = "Nonhyperbolic"


class Region(str, enum.Enum):
    NONNEG = "NonnegativeQuadrant"
    OTHER = "Other"


class Kind(str, enum.Enum):
    UNIQUE_GAS = "UniqueGAS"
    FOLD_PAIR = "FoldPair"
    BISTABLE = "Bistable"


@dataclass(frozen=True)
class EigenPair:
    lambda1: float
    lambda2: float


@dataclass(frozen=True)
class Classification:
    label: Label
    margin: float


@dataclass(frozen=True)
class Equilibrium:
    point: Point
    jac: Jacobian2
    residual: float
    contact_order: int
    region: Region
    eig: Optional[EigenPair] = None
    slopes: Optional[SlopePair] = None
    classification: Optional[Classification] = None

    @property
    def label(self) -> Optional[Label]:
        return None if self.classification is None else self.classification.label


@dataclass(frozen=True)
class GlobalBehavior:
    kind: Kind
    attractors: tuple[int, ...]
    saddle: Optional[int] = None
    nonhyperbolic: Optional[int] = None


@dataclass(frozen=True)
class EquilibriumSet:
    all: tuple[Equilibrium, ...]
    nonneg: tuple[Equilibrium, ...]
    prediction: GlobalBehavior

    @property
    def count(self) -> int:
        return len(self.nonneg)

    @property
    def labels(self) -> list[Label]:
        return [e.label for e in self.nonneg]

    def points(self) -> np.ndarray:
        return np.array([e.point for e in self.nonneg])


@dataclass(frozen=True)
class UniquenessReport:
    condA: bool
    condB: bool

    @property
    def guaranteed(self) -> bool:
        return self.condA or self.condB


@dataclass(frozen=True)
class MmWitness:
    m: float
    M: float
    mbar: float
    Mbar: float
    system_residual: float = math.nan
    identity_residual: float = math.nan


# -- stability --------------------------------------------------------------

def check_hypotheses(jac: Jacobian2) -> None:
    a, b, c, d = jac
    if not 0 < a < 1:
        raise HypothesisError(f"0 < a < 1 fails (a = {a})")
    if not 0 < d < 1:
        raise HypothesisError(f"0 < d < 1 fails (d = {d})")
    if not b * c > 0:
        raise HypothesisError(f"b c > 0 fails (b c = {b * c})")
    if not 1 + (a + d) + a * d - b * c > 0:
        raise HypothesisError("1 + (a + d) + a d - b c > 0 fails")


def eigenpair(jac: Jacobian2) -> EigenPair:
    a, b, c, d = jac
    disc = (a - d) ** 2 + 4 * b * c
    if disc < 0:
        raise HypothesisError(f"complex eigenvalues (discriminant {disc})")
    tr = a + d
    lam1 = 0.5 * (tr + math.copysign(math.sqrt(disc), tr))
    lam2 = (a * d - b * c) / lam1 if lam1 != 0 else 0.5 * (tr - math.sqrt(disc))
    if abs(lam2) > abs(lam1):
        lam1, lam2 = lam2, lam1
    return EigenPair(lam1, lam2)


def label_from_margin(margin: float, tol_h: float = TOL_H) -> Label:
    if margin < -tol_h:
        return Label.LAS
    if margin > tol_h:
        return Label.SADDLE
    return Label.NONHYPERBOLIC


def classify_by_eigen(jac: Jacobian2, tol_h: float = TOL_H) -> tuple[EigenPair, Classification]:
    check_hypotheses(jac)
    eig = eigenpair(jac)
    margin = eig.lambda1 - 1
    return eig, Classification(label_from_margin(margin, tol_h), margin)


def classify_by_slopes(slopes: SlopePair, b_sign: float, tol_s: float = TOL_S) -> Classification:
    """Stability from the slope gap of the critical curves.

    For ``b < 0``, ``s1 < s2`` means an attractor and ``s1 > s2`` a saddle;
    the correspondence flips for ``b > 0``. The margin reported is the gap
    itself, oriented so that negative means attracting.
    """
    if b_sign == 0:
        raise ValueError("b_sign must be nonzero")
    s1, s2 = slopes
    gap = s1 - s2
    if abs(gap) <= tol_s * (1 + abs(s1) + abs(s2)):
        return Classification(Label.NONHYPERBOLIC, 0.0)
    oriented = gap if b_sign < 0 else -gap
    return Classification(Label.LAS if oriented < 0 else Label.SADDLE, oriented)


def slope_identity_defect(jac: Jacobian2, eig: EigenPair, slopes: SlopePair) -> float:
    """``|(s1 - s2) - (1 - l1)(1 - l2) / (b (1 - d))|`` scaled by ``1 + |s1 - s2|``."""
    rhs = (1 - eig.lambda1) * (1 - eig.lambda2) / (jac.b * (1 - jac.d))
    return abs(slopes.gap - rhs) / (1 + abs(slopes.gap))


# -- location ---------------------------------------------------------------

def fixed_point_residual(p: ModelParams, x: float, y: float) -> float:
    """Defect of the fixed-point equations in cleared-denominator form.

    ``(x - h1)(1 + x + c1 y) - b1 x`` and its twin, each divided by the sum of
    magnitudes of its terms, so the floor is machine epsilon even next to a
    pole of the rational map. Points on a pole are rejected separately.
    """
    d1 = 1 + x + p.c1 * y
    d2 = 1 + y + p.c2 * x
    r1 = abs((x - p.h1) * d1 - p.b1 * x) / ((abs(x) + p.h1) * (1 + abs(x) + p.c1 * abs(y)) + p.b1 * abs(x))
    r2 = abs((y - p.h2) * d2 - p.b2 * y) / ((abs(y) + p.h2) * (1 + abs(y) + p.c2 * abs(x)) + p.b2 * abs(y))
    return max(r1, r2)


def on_pole(p: ModelParams, x: float, y: float) -> bool:
    """True where a denominator of the map vanishes (a cleared-form artifact)."""
    d1 = 1 + x + p.c1 * y
    d2 = 1 + y + p.c2 * x
    return (abs(d1) <= 1e-9 * (1 + abs(x) + p.c1 * abs(y))
            or abs(d2) <= 1e-9 * (1 + abs(y) + p.c2 * abs(x)))


def polish(p: ModelParams, x: float, y: float, max_iter: int = 100) -> tuple[float, float, float]:
    """Backtracking Newton on the cleared-denominator fixed-point equations."""
    res = fixed_point_residual(p, x, y)
    for _ in range(max_iter):
        if res <= 1e-16:
            break
        d1 = 1 + x + p.c1 * y
        d2 = 1 + y + p.c2 * x
        F1 = (x - p.h1) * d1 - p.b1 * x
        F2 = (y - p.h2) * d2 - p.b2 * y
        j11 = d1 + (x - p.h1) - p.b1
        j12 = p.c1 * (x - p.h1)
        j21 = p.c2 * (y - p.h2)
        j22 = d2 + (y - p.h2) - p.b2
        det = j11 * j22 - j12 * j21
        if det == 0:
            break
        dx = (j22 * F1 - j12 * F2) / det
        dy = (j11 * F2 - j21 * F1) / det
        lam = 1.0
        while lam > 1e-6:
            xn, yn = x - lam * dx, y - lam * dy
            rn = fixed_point_residual(p, xn, yn)
            if rn < res:
                break
            lam *= 0.5
        else:
            break
        x, y, res = xn, yn, rn
    return x, y, res


def _seed_y(p: ModelParams, x: float) -> float:
    """Point on C2 above ``x`` closest to C1; C2 branches have no pole."""
    yp, ym = y2_branches(p, x)
    try:
        yc = y1(p, x)
    except PoleError:
        return yp
    return yp if abs(yp - yc) <= abs(ym - yc) else ym


def _close(u, v, rtol=MERGE_RTOL) -> bool:
    return abs(u[0] - v[0]) < rtol * (1 + abs(u[0])) and abs(u[1] - v[1]) < rtol * (1 + abs(u[1]))


def _seeds(p: ModelParams, sq) -> list[tuple[float, float, int]]:
    """Real or nearly real quartic roots lifted to points and merged in the plane.

    A conjugate pair closer than the merge tolerance collapses to one real
    seed of multiplicity two; two real roots with nearly equal abscissa but
    different ordinates stay separate.
    """
    pts = []
    for z in sq.roots():
        if abs(z.imag) < 0.5 * MERGE_RTOL * (1 + abs(z)):
            x = z.real + sq.shift
            pts.append((x, _seed_y(p, x)))
    groups: list[list] = []
    for q in pts:
        for g in groups:
            if _close(g[0], q):
                g.append(q)
                break
        else:
            groups.append([q])
    return [(float(np.mean([q[0] for q in g])), float(np.mean([q[1] for q in g])), len(g))
            for g in groups]


def _annotate(p: ModelParams, x: float, y: float, res: float, mult: int, tol_h: float) -> Equilibrium:
    jac = Jacobian2(*jacobian_xy(p, x, y))
    if x >= 0 and y >= 0:
        eig, cls = classify_by_eigen(jac, tol_h)
        slopes = slopes_from_jacobian(*jac)
        return Equilibrium(Point(x, y), jac, res, mult, Region.NONNEG, eig, slopes, cls)
    return Equilibrium(Point(x, y), jac, res, mult, Region.OTHER)


def predict(nonneg) -> GlobalBehavior:
    n = len(nonneg)
    las = tuple(i for i, e in enumerate(nonneg) if e.label == Label.LAS)
    if n == 1:
        return GlobalBehavior(Kind.UNIQUE_GAS, (0,))
    if n == 2:
        nh = [i for i, e in enumerate(nonneg) if e.label == Label.NONHYPERBOLIC]
        return GlobalBehavior(Kind.FOLD_PAIR, las, nonhyperbolic=nh[0] if nh else None)
    if n == 3:
        return GlobalBehavior(Kind.BISTABLE, las, saddle=1)
    raise SolverError(f"{n} nonnegative equilibria found; expected 1 to 3")


def find_equilibria(p: ModelParams, tol_h: float = TOL_H) -> EquilibriumSet:
    sq = shifted_quartic(p)
    found: list[list] = []
    for x0, y0, mult in _seeds(p, sq):
        if on_pole(p, x0, y0):
            continue
        x, y, res = polish(p, x0, y0)
        if not res <= RESIDUAL_TOL or on_pole(p, x, y):
            raise SolverError(
                f"Newton did not converge from quartic seed ({x0}, {y0}); residual {res:.3g}",
                seed=(x0, y0),
            )
        for f in found:
            if _close(f, (x, y)):
                f[3] += mult
                if res < f[2]:
                    f[0], f[1], f[2] = x, y, res
                break
        else:
            found.append([x, y, res, mult])
    eqs = [_annotate(p, x, y, res, mult, tol_h) for x, y, res, mult in found]
    eqs.sort(key=lambda e: (e.point.x, -e.point.y))
    nonneg = tuple(e for e in eqs if e.region is Region.NONNEG)
    return EquilibriumSet(tuple(eqs), nonneg, predict(nonneg))


# -- theorem-level checks ---------------------------------------------------

def pattern_holds(eqs: EquilibriumSet) -> bool:
    """Label pattern implied by the equilibrium count."""
    labels = eqs.labels
    if eqs.count == 1:
        return labels == [Label.LAS]
    if eqs.count == 3:
        return labels == [Label.LAS, Label.SADDLE, Label.LAS]
    if eqs.count == 2:
        ok = sorted(labels, key=str) == sorted([Label.LAS, Label.NONHYPERBOLIC], key=str)
        nh = [e for e in eqs.nonneg if e.label == Label.NONHYPERBOLIC]
        return ok and nh[0].contact_order == 2
    return False


def se_ordered(eqs: EquilibriumSet) -> bool:
    pts = [e.point for e in eqs.nonneg]
    return all(p.x < q.x and p.y > q.y for p, q in zip(pts, pts[1:]))


def contact_order(p: ModelParams, eq: Equilibrium, tol_s: float = TOL_S) -> int:
    """Contact order of C1 and C2 at ``eq``, estimated two ways.

    One estimate is the multiplicity of the quartic root cluster at ``eq.x``;
    the other is the order of vanishing of ``y1 - y2`` from finite
    differences. The two must agree.
    """
    x0, y0 = eq.point
    groups = _seeds(p, shifted_quartic(p))
    gx, gy, mult = min(groups, key=lambda g: max(abs(g[0] - x0), abs(g[1] - y0)))
    if not _close((gx, gy), (x0, y0), 1e-4):
        raise ContactOrderError(f"no quartic root near ({x0}, {y0})", None, None)

    yp, ym = y2_branches(p, x0)
    use_plus = abs(yp - y0) <= abs(ym - y0)

    def gap(x):
        return y1(p, x) - y2_branches(p, x)[0 if use_plus else 1]

    room = abs(x0 - p.h1) / 4
    h = min(1e-5 * (1 + abs(x0)), room)
    d1 = (gap(x0 + h) - gap(x0 - h)) / (2 * h)
    s1, s2 = eq.slopes if eq.slopes is not None else slopes_from_jacobian(*eq.jac)
    if abs(d1) > tol_s * (1 + abs(s1) + abs(s2)):
        fd_order = 1
    else:
        h2 = min(1e-3 * (1 + abs(x0)), room)
        d2 = (gap(x0 + h2) - 2 * gap(x0) + gap(x0 - h2)) / (h2 * h2)
        fd_order = 2 if abs(d2) > 1e-5 * (1 + abs(s1) + abs(s2)) else 3
    if fd_order != mult:
        raise ContactOrderError(
            f"contact order mismatch at ({x0}, {y0}): root cluster {mult}, finite differences {fd_order}",
            mult, fd_order,
        )
    return mult


def uniqueness_sufficient(p: ModelParams) -> UniquenessReport:
    condA = (1 - p.b1 + p.h1 + p.c1 * p.h2 >= 0) and (1 - p.b2 + p.h2 + p.c2 * p.h1 >= 0)
    condB = p.c1 * p.c2 <= 1
    return UniquenessReport(condA, condB)


# -- M & m system -----------------------------------------------------------

def _mm_equations(p: ModelParams, v) -> np.ndarray:
    m, M, mb, Mb = v
    return np.array([
        p.b1 * m / (1 + m + p.c1 * Mb) + p.h1 - m,
        p.b1 * M / (1 + M + p.c1 * mb) + p.h1 - M,
        p.b2 * mb / (1 + mb + p.c2 * M) + p.h2 - mb,
        p.b2 * Mb / (1 + Mb + p.c2 * m) + p.h2 - Mb,
    ])


def _mm_jacobian(p: ModelParams, v) -> np.ndarray:
    m, M, mb, Mb = v
    J = np.zeros((4, 4))
    a, b, c, d = jacobian_xy(p, m, Mb)   # f(m, Mb), g(m, Mb)
    J[0, 0], J[0, 3] = a - 1, b
    J[3, 0], J[3, 3] = c, d - 1
    a, b, c, d = jacobian_xy(p, M, mb)   # f(M, mb), g(M, mb)
    J[1, 1], J[1, 2] = a - 1, b
    J[2, 1], J[2, 2] = c, d - 1
    return J


def _mm_identity(p: ModelParams, v) -> float:
    m, M, mb, Mb = v
    return (p.c2 * (M - m) * ((m - p.h1) + (M - p.h1) + (1 - p.b1 + p.h1 + p.c1 * p.h2))
            + p.c1 * (Mb - mb) * ((mb - p.h2) + (Mb - p.h2) + (1 - p.b2 + p.h2 + p.c2 * p.h1)))


def mm_check(p: ModelParams, w: MmWitness) -> MmWitness:
    v = tuple(float(t) for t in (w.m, w.M, w.mbar, w.Mbar))
    if min(v) < 0:
        raise ValueError("witness components must be >= 0")
    sys_res = float(np.max(np.abs(_mm_equations(p, v))))
    return MmWitness(*v, system_residual=sys_res, identity_residual=float(abs(_mm_identity(p, v))))


def _damped_newton(F, J, v, max_iter: int = 60, tol: float = 1e-14):
    r = F(v)
    nr = np.max(np.abs(r))
    for _ in range(max_iter):
        if nr <= tol:
            break
        try:
            dv = np.linalg.solve(J(v), r)
        except np.linalg.LinAlgError:
            break
        lam = 1.0
        while lam > 1e-8:
            vn = v - lam * dv
            if np.all(vn >= 0):
                rn = F(vn)
                nrn = np.max(np.abs(rn))
                if nrn < nr:
                    break
            lam *= 0.5
        else:
            break
        v, r, nr = vn, rn, nrn
    return v, nr


def mm_search_asymmetric(
    p: ModelParams, n_seeds: int = 100, seed: int = 0, gap: float = 1e-6
) -> Optional[MmWitness]:
    """Multi-start search for a solution of the M&m system with ``M - m >= gap``."""
    rng = np.random.default_rng(seed)
    lo = np.array([p.h1, p.h1, p.h2, p.h2])
    hi = lo + np.array([p.b1, p.b1, p.b2, p.b2])
    corners = [np.array([lo[0], hi[1], lo[2], hi[3]]), np.array([hi[0], lo[1], hi[2], lo[3]])]
    seeds = corners + list(lo + rng.random((max(n_seeds - 2, 0), 4)) * (hi - lo))
    F = lambda v: _mm_equations(p, v)
    J = lambda v: _mm_jacobian(p, v)
    for v0 in seeds:
        v, nr = _damped_newton(F, J, np.asarray(v0, dtype=float))
        if nr > 1e-12 * (1 + np.max(np.abs(v))):
            continue
        m, M, mb, Mb = v
        if M < m:
            m, M, mb, Mb = M, m, Mb, mb
        if M - m >= gap:
            return mm_check(p, MmWitness(m, M, mb, Mb))
    return None

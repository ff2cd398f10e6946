"""Critical curves of the map and their algebraic intersection.

C1 = {x = f(x, y)} and C2 = {y = g(x, y)} are hyperbolas. Cleared of
denominators they read

    C1: x^2 + c1 x y + (1 - b1 - h1) x - c1 h1 y - h1 = 0
    C2: y^2 + c2 x y + (1 - b2 - h2) y - c2 h2 x - h2 = 0

Eliminating y gives a quartic in x whose real roots are the abscissae of
all intersections, hence of all equilibria.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from numpy.polynomial import polynomial as P

from .model import ModelParams, jacobian_xy

MERGE_RTOL = 1e-6
_EPS = np.finfo(float).eps


class PoleError(ValueError):
    pass


class NoRealBranchError(ValueError):
    pass


class DegenerateSlopeError(ValueError):
    pass


class SlopePair(NamedTuple):
    s1: float
    s2: float

    @property
    def gap(self) -> float:
        return self.s1 - self.s2


def y1(p: ModelParams, x):
    """Explicit C1 branch ``y = y1(x)``; vertical asymptote at ``x = h1``."""
    x = np.asarray(x, dtype=float)
    if np.any(x == p.h1):
        raise PoleError(f"y1 has a pole at x = h1 = {p.h1}")
    out = (x * x + (1 - p.b1 - p.h1) * x - p.h1) / (p.c1 * (p.h1 - x))
    return out[()] if out.ndim == 0 else out


def _y2_disc(p: ModelParams, x):
    u = -p.b2 - p.h2 + p.c2 * x + 1
    return u * u + 4 * (p.c2 * x * p.h2 + p.h2)


def y2_branches(p: ModelParams, x):
    """The two C2 branches ``(y2+, y2-)`` over ``x``."""
    x = np.asarray(x, dtype=float)
    disc = _y2_disc(p, x)
    if np.any(disc < 0):
        raise NoRealBranchError("C2 has no real branch at the requested abscissa")
    r = np.sqrt(disc)
    base = -1 + p.b2 + p.h2 - p.c2 * x
    # y+ * y- = -(c2 h2 x + h2): take the large root directly, the other by division
    prod = -(p.c2 * p.h2 * x + p.h2)
    big = np.where(base >= 0, 0.5 * (base + r), 0.5 * (base - r))
    with np.errstate(divide="ignore", invalid="ignore"):
        small = np.where(big != 0, prod / np.where(big != 0, big, 1.0), 0.0)
    plus = np.where(base >= 0, big, small)
    minus = np.where(base >= 0, small, big)
    if x.ndim == 0:
        return float(plus), float(minus)
    return plus, minus


def implicit_residuals(p: ModelParams, pt) -> tuple[float, float]:
    x, y = pt
    r1 = x * x + p.c1 * x * y + (1 - p.b1 - p.h1) * x - p.c1 * p.h1 * y - p.h1
    r2 = y * y + p.c2 * x * y + (1 - p.b2 - p.h2) * y - p.c2 * p.h2 * x - p.h2
    return r1, r2


def slopes_from_jacobian(a: float, b: float, c: float, d: float) -> SlopePair:
    if b == 0:
        raise DegenerateSlopeError("f_y = 0: C1 is not a graph over x here")
    if d >= 1:
        raise DegenerateSlopeError(f"g_y = {d} >= 1: C2 slope undefined")
    return SlopePair((1 - a) / b, c / (1 - d))


def slopes_at(p: ModelParams, pt) -> SlopePair:
    """Slopes of C1 and C2 through ``pt`` obtained by implicit differentiation.

    Only meaningful when ``pt`` actually lies on both curves; elsewhere the
    numbers are the slopes of the level sets through ``pt``.
    """
    x, y = float(pt[0]), float(pt[1])
    if not (x > 0 and y > 0):
        raise DegenerateSlopeError(f"slopes require x > 0 and y > 0, got ({x}, {y})")
    return slopes_from_jacobian(*jacobian_xy(p, x, y))


@dataclass(frozen=True)
class ShiftedQuartic:
    """Elimination polynomial in ``X = x - h1``; ``coeffs[k]`` multiplies X**k."""

    coeffs: tuple[float, float, float, float, float]
    effective_degree: int
    shift: float

    @property
    def leading(self) -> float:
        return self.coeffs[self.effective_degree]

    def __call__(self, X):
        return P.polyval(X, self.coeffs[: self.effective_degree + 1])

    def roots(self) -> np.ndarray:
        """All complex roots in X, via companion eigenvalues plus Newton polish."""
        return companion_roots(self.coeffs[: self.effective_degree + 1])

    def root_product(self) -> float:
        n = self.effective_degree
        return (-1) ** n * self.coeffs[0] / self.coeffs[n]


def shifted_quartic(p: ModelParams) -> ShiftedQuartic:
    """Substitute ``y = y1(x)`` into C2 and clear ``(c1 (h1 - x))**2``, in ``X = x - h1``.

    Expanding directly in X keeps the coefficients free of cancellation.
    The X^4 coefficient is ``1 - c1 c2`` and the constant term ``(b1 h1)**2``.
    """
    # C1 numerator, C2 linear coefficient and C2 constant, all in X
    num = np.array([-p.b1 * p.h1, 1 + p.h1 - p.b1, 1.0])
    lin = np.array([p.c2 * p.h1 + 1 - p.b2 - p.h2, p.c2])
    const = np.array([-p.h2 * (1 + p.c2 * p.h1), -p.c2 * p.h2])
    q = np.zeros(5)
    nn = P.polymul(num, num)
    q[: len(nn)] += nn
    q[1:] += -p.c1 * P.polymul(lin, num)
    q[2:4] += p.c1 * p.c1 * const
    q[4] = 1 - p.c1 * p.c2
    if abs(q[4]) <= 4 * _EPS * max(1.0, p.c1 * p.c2):
        q[4] = 0.0
    scale = np.max(np.abs(q))
    deg = 4
    while deg > 0 and abs(q[deg]) <= 1e-14 * scale:
        q[deg] = 0.0
        deg -= 1
    return ShiftedQuartic(tuple(float(v) for v in q), deg, p.h1)


def companion_roots(coeffs, polish_steps: int = 3) -> np.ndarray:
    """Roots of ``sum coeffs[k] X**k`` from the companion matrix eigenvalues."""
    c = np.asarray(coeffs, dtype=float)
    n = len(c) - 1
    if n < 1:
        return np.empty(0, dtype=complex)
    monic = c[:-1] / c[-1]
    comp = np.zeros((n, n))
    comp[1:, :-1] = np.eye(n - 1)
    comp[:, -1] = -monic
    roots = np.linalg.eigvals(comp).astype(complex)
    dc = P.polyder(c)
    for i, z in enumerate(roots):
        fz = abs(P.polyval(z, c))
        for _ in range(polish_steps):
            d = P.polyval(z, dc)
            if d == 0:
                break
            z_new = z - P.polyval(z, c) / d
            f_new = abs(P.polyval(z_new, c))
            if not f_new < fz:
                break
            z, fz = z_new, f_new
        if roots[i].imag == 0:
            z = complex(z.real, 0.0)
        roots[i] = z
    return roots


def cluster_roots(roots, rtol: float = MERGE_RTOL) -> list[tuple[complex, int]]:
    """Merge roots closer than ``rtol * (1 + |root|)``; returns (mean, size) pairs."""
    roots = list(roots)
    parent = list(range(len(roots)))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in range(len(roots)):
        for j in range(i + 1, len(roots)):
            if abs(roots[i] - roots[j]) < rtol * (1 + abs(roots[i])):
                parent[find(i)] = find(j)
    groups: dict[int, list[complex]] = {}
    for i, z in enumerate(roots):
        groups.setdefault(find(i), []).append(z)
    out = [(complex(np.mean(g)), len(g)) for g in groups.values()]
    out.sort(key=lambda t: (t[0].real, t[0].imag))
    return out


def real_root_clusters(sq: ShiftedQuartic, rtol: float = MERGE_RTOL) -> list[tuple[float, int]]:
    """Real intersection abscissae ``x`` (unshifted) with multiplicities."""
    out = []
    for z, mult in cluster_roots(sq.roots(), rtol):
        if abs(z.imag) <= 1e-9 * (1 + abs(z)):
            out.append((z.real + sq.shift, mult))
    return out

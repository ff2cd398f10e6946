"""Orbits, corner envelopes, basins and the bistable separatrix."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .equilibria import EquilibriumSet, Kind, Label, find_equilibria
from .model import Box, ModelParams, Point, _check_point, step_xy, trapping_box

WINDOW = 10
UNRESOLVED = -1
_EPS = np.finfo(float).eps


class RegimeError(ValueError):
    pass


class BracketError(ValueError):
    pass


@dataclass(frozen=True)
class Trajectory:
    points: np.ndarray
    limit: Optional[Point]
    cauchy_tail: float
    monotone_onset: Optional[int]

    @property
    def converged(self) -> bool:
        return self.limit is not None


@dataclass(frozen=True)
class Envelope:
    lower_seq: np.ndarray
    upper_seq: np.ndarray


@dataclass(frozen=True)
class Separatrix:
    samples: np.ndarray
    bracket_width: float
    absent: tuple[float, ...] = ()


@dataclass(frozen=True)
class BasinGrid:
    bounds: Box
    resolution: tuple[int, int]
    labels: np.ndarray          # (ny, nx); 1-based equilibrium index or UNRESOLVED
    xs: np.ndarray = field(repr=False)
    ys: np.ndarray = field(repr=False)


def monotone_onset(points) -> Optional[int]:
    """First index from which both coordinates move monotonically.

    Differences at the level of rounding noise are treated as compatible
    with either direction.
    """
    pts = np.asarray(points, dtype=float)
    if len(pts) < 2:
        return None
    diffs = np.diff(pts, axis=0)
    noise = 8 * _EPS * (1 + np.abs(pts[1:]))
    signs = np.where(np.abs(diffs) <= noise, 0, np.sign(diffs)).astype(int)
    onset = 0
    for col in range(2):
        s = signs[:, col]
        nz = np.flatnonzero(s)
        if len(nz) == 0:
            continue
        last = s[nz[-1]]
        flips = nz[s[nz] != last]
        if len(flips):
            onset = max(onset, int(flips[-1]) + 1)
    return onset


def _tail_limit(pts: list, tol: float, window: int) -> tuple[Optional[Point], float]:
    if len(pts) < 2:
        return None, np.inf
    arr = np.asarray(pts[-(window + 1):])
    tail = float(np.max(np.abs(np.diff(arr, axis=0))))
    if len(pts) > window and tail <= tol:
        return Point(*pts[-1]), tail
    return None, tail


def iterate(p: ModelParams, start, max_n: int = 100_000, tol: float = 1e-9,
            window: int = WINDOW, stop_when_converged: bool = True) -> Trajectory:
    """Iterate the map from ``start`` for at most ``max_n`` steps.

    The orbit counts as converged once ``window`` consecutive sup-norm steps
    are all ``<= tol``; the last point is then reported as the limit.
    """
    x, y = _check_point(start)
    if max_n < 1 or tol <= 0:
        raise ValueError("need max_n >= 1 and tol > 0")
    pts = [(x, y)]
    quiet = 0
    for _ in range(max_n):
        xn, yn = step_xy(p, x, y)
        if max(abs(xn - x), abs(yn - y)) <= tol:
            quiet += 1
        else:
            quiet = 0
        x, y = xn, yn
        pts.append((x, y))
        if stop_when_converged and quiet >= window:
            break
    limit, tail = _tail_limit(pts, tol, window)
    return Trajectory(np.asarray(pts), limit, tail, monotone_onset(pts))


def envelope(p: ModelParams, n: int) -> Envelope:
    """First ``n`` iterates of the se-extreme corners of the trapping box."""
    if n < 1:
        raise ValueError("n must be >= 1")
    lo = np.empty((n, 2))
    hi = np.empty((n, 2))
    lo[0] = (p.h1, p.h2 + p.b2)
    hi[0] = (p.h1 + p.b1, p.h2)
    for k in range(1, n):
        lo[k] = step_xy(p, *lo[k - 1])
        hi[k] = step_xy(p, *hi[k - 1])
    return Envelope(lo, hi)


def gas_certificate(p: ModelParams, tol: float = 1e-9, max_n: int = 100_000) -> bool:
    """True when the two corner orbits meet within ``tol``.

    Every orbit is squeezed between them after one step, so a common limit
    is numerically attracting the whole quadrant.
    """
    lx, ly = p.h1, p.h2 + p.b2
    ux, uy = p.h1 + p.b1, p.h2
    quiet = 0
    for _ in range(max_n):
        if max(ux - lx, ly - uy) <= tol:
            return True
        nlx, nly = step_xy(p, lx, ly)
        nux, nuy = step_xy(p, ux, uy)
        moved = max(abs(nlx - lx), abs(nly - ly), abs(nux - ux), abs(nuy - uy))
        quiet = quiet + 1 if moved <= 1e-3 * tol else 0
        lx, ly, ux, uy = nlx, nly, nux, nuy
        if quiet >= WINDOW:
            # both corners have stalled at distinct points
            return False
    return max(ux - lx, ly - uy) <= tol


def _settle(p: ModelParams, X, Y, eqs: EquilibriumSet, tol: float, max_n: int,
            window: int = WINDOW, pinned: int = 2000) -> np.ndarray:
    """Vectorized orbit labelling by the nonnegative equilibrium reached.

    Orbits that stall next to a saddle keep iterating, since off the stable
    manifold they eventually leave it; a saddle label is accepted only after
    ``pinned`` quiet steps or at the end of the budget.
    """
    X = np.array(X, dtype=float).ravel()
    Y = np.array(Y, dtype=float).ravel()
    pts = eqs.points()
    saddle = np.array([e.label == Label.SADDLE for e in eqs.nonneg])
    labels = np.full(X.shape, UNRESOLVED)
    quiet = np.zeros(X.shape, dtype=int)
    active = np.arange(X.size)
    for _ in range(max_n):
        if active.size == 0:
            break
        x, y = X[active], Y[active]
        xn, yn = step_xy(p, x, y)
        still = np.maximum(np.abs(xn - x), np.abs(yn - y)) <= tol
        quiet[active] = np.where(still, quiet[active] + 1, 0)
        X[active], Y[active] = xn, yn
        done = quiet[active] >= window
        if done.any():
            idx = active[done]
            d = np.max(np.abs(np.stack([X[idx], Y[idx]], axis=1)[:, None, :] - pts[None]), axis=2)
            near = np.argmin(d, axis=1)
            keep = ~saddle[near] | (quiet[idx] >= pinned)
            labels[idx[keep]] = near[keep] + 1
            active = np.setdiff1d(active, idx[keep], assume_unique=True)
    if active.size:
        d = np.max(np.abs(np.stack([X[active], Y[active]], axis=1)[:, None, :] - pts[None]), axis=2)
        near = np.argmin(d, axis=1)
        ok = quiet[active] >= window
        labels[active[ok]] = near[ok] + 1
    return labels


def basin_labels(p: ModelParams, starts, eqs: Optional[EquilibriumSet] = None,
                 tol: float = 1e-9, max_n: int = 100_000) -> np.ndarray:
    """Label each start point with the 1-based index of its limit equilibrium."""
    eqs = find_equilibria(p) if eqs is None else eqs
    starts = np.asarray(starts, dtype=float).reshape(-1, 2)
    if np.any(starts < 0):
        raise ValueError("start points must lie in [0, inf)^2")
    return _settle(p, starts[:, 0], starts[:, 1], eqs, tol, max_n)


def basin_grid(p: ModelParams, bounds: Box, nx: int, ny: int, tol: float = 1e-9,
               max_n: int = 100_000, eqs: Optional[EquilibriumSet] = None) -> BasinGrid:
    if nx < 2 or ny < 2:
        raise ValueError("resolution must be at least 2 x 2")
    bounds = Box(*bounds)
    if bounds.x_lo < 0 or bounds.y_lo < 0:
        raise ValueError("bounds must lie in [0, inf)^2")
    eqs = find_equilibria(p) if eqs is None else eqs
    xs = np.linspace(bounds.x_lo, bounds.x_hi, nx)
    ys = np.linspace(bounds.y_lo, bounds.y_hi, ny)
    XX, YY = np.meshgrid(xs, ys)
    labels = _settle(p, XX, YY, eqs, tol, max_n).reshape(ny, nx)
    return BasinGrid(bounds, (nx, ny), labels, xs, ys)


def _bistable_side(p: ModelParams, X, Y, saddle: Point, max_n: int) -> np.ndarray:
    """0 for orbits entering the open Q2 of the saddle, 2 for the open Q4, else -1.

    Both open quadrants are invariant and each holds a single equilibrium
    (the first resp. third), so entry decides the limit.
    """
    X = np.array(X, dtype=float)
    Y = np.array(Y, dtype=float)
    sx, sy = saddle
    out = np.full(X.shape, UNRESOLVED)
    active = np.arange(X.size)
    for _ in range(max_n + 1):
        x, y = X[active], Y[active]
        q2 = (x < sx) & (y > sy)
        q4 = (x > sx) & (y < sy)
        out[active[q2]] = 0
        out[active[q4]] = 2
        active = active[~(q2 | q4)]
        if active.size == 0:
            break
        X[active], Y[active] = step_xy(p, X[active], Y[active])
    return out


def separatrix(p: ModelParams, eqs: Optional[EquilibriumSet] = None, nx: int = 101,
               width: float = 1e-8, max_n: int = 100_000, xs=None) -> Separatrix:
    """Trace the basin boundary ``y = y*(x)`` by bisection in ``y`` at fixed ``x``.

    Abscissae span the trapping box unless ``xs`` is given; the saddle
    abscissa is always included.
    """
    eqs = find_equilibria(p) if eqs is None else eqs
    if eqs.prediction.kind is not Kind.BISTABLE:
        raise RegimeError(f"separatrix needs three equilibria, found {eqs.count}")
    saddle = eqs.nonneg[1].point
    box = trapping_box(p)
    if xs is None:
        xs = np.linspace(box.x_lo, box.x_hi, nx)
    xs = np.union1d(np.asarray(xs, dtype=float), [saddle.x])
    if np.any(xs < 0):
        raise ValueError("abscissae must be >= 0")
    lo = np.zeros_like(xs)
    hi = np.full_like(xs, box.y_hi)
    ok = _bistable_side(p, xs, lo, saddle, max_n) == 2
    for _ in range(60):
        bad = ok & (_bistable_side(p, xs, hi, saddle, max_n) != 0)
        if not bad.any():
            break
        hi[bad] *= 2
    ok &= _bistable_side(p, xs, hi, saddle, max_n) == 0
    while True:
        w = hi - lo
        todo = ok & (w > width)
        if not todo.any():
            break
        mid = 0.5 * (lo[todo] + hi[todo])
        side = _bistable_side(p, xs[todo], mid, saddle, max_n)
        ok[np.flatnonzero(todo)[side == UNRESOLVED]] = False
        idx = np.flatnonzero(todo)
        lo[idx[side == 2]] = mid[side == 2]
        hi[idx[side == 0]] = mid[side == 0]
    samples = np.column_stack([xs[ok], 0.5 * (lo[ok] + hi[ok])])
    bw = float(np.max((hi - lo)[ok])) if ok.any() else np.nan
    return Separatrix(samples, bw, tuple(float(x) for x in xs[~ok]))


def fold_search(p_base: ModelParams, param_name: str, lo: float, hi: float,
                gap: float = 1e-8, max_iter: int = 200) -> ModelParams:
    """Bisect one parameter between regimes with different equilibrium counts.

    Returns parameters at which two equilibria have merged into a single
    tangential contact (count two).
    """
    from .curves import shifted_quartic
    from .equilibria import _seed_y

    def at(v):
        return p_base.with_(**{param_name: v})

    def count(v):
        return find_equilibria(at(v)).count

    def raw_count(v):
        # unmerged real roots landing in the open quadrant
        q = at(v)
        sq = shifted_quartic(q)
        n = 0
        for z in sq.roots():
            if z.imag == 0:
                x = z.real + q.h1
                if x > 0 and _seed_y(q, x) > 0:
                    n += 1
        return n

    def pair_gap(v):
        q = at(v)
        roots = shifted_quartic(q).roots() + q.h1
        d = [abs(a - b) for i, a in enumerate(roots) for b in roots[i + 1:]]
        return min(d)

    if count(lo) == count(hi):
        raise BracketError(f"{param_name}: same equilibrium count {count(lo)} at both ends")
    n_lo = raw_count(lo)
    a, b = lo, hi
    for _ in range(max_iter):
        m = 0.5 * (a + b)
        if m in (a, b):
            break
        if raw_count(m) == n_lo:
            a = m
        else:
            b = m
        if count(m) == 2 and pair_gap(m) <= gap:
            return at(m)
    for v in sorted((a, b, 0.5 * (a + b)), key=pair_gap):
        if count(v) == 2:
            return at(v)
    raise BracketError(f"{param_name}: bracket [{a}, {b}] does not resolve a two-equilibrium fold")

"""Parameters, normalization and pointwise evaluation of the LGIN map.

The normalized Leslie-Gower map with immigration is

    T(x, y) = (b1 x / (1 + x + c1 y) + h1,  b2 y / (1 + y + c2 x) + h2)

on the closed nonnegative quadrant.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, fields, replace
from typing import NamedTuple

import numpy as np

PARAM_NAMES = ("b1", "b2", "c1", "c2", "h1", "h2")
RAW_PARAM_NAMES = ("b1", "b2", "c11", "c12", "c21", "c22", "H1", "H2")


class ParameterError(ValueError):
    """A parameter is nonpositive or not finite."""


class DomainError(ValueError):
    """A point lies outside the closed nonnegative quadrant."""


def _check_positive(obj) -> None:
    for f in fields(obj):
        v = getattr(obj, f.name)
        try:
            v = float(v)
        except (TypeError, ValueError):
            raise ParameterError(f"{f.name} must be a real number") from None
        if not math.isfinite(v):
            raise ParameterError(f"{f.name} must be finite")
        if v <= 0:
            raise ParameterError(f"{f.name} must be > 0")
        object.__setattr__(obj, f.name, v)


@dataclass(frozen=True)
class RawParams:
    """Coefficients of the un-normalized system with immigration."""

    b1: float
    b2: float
    c11: float
    c12: float
    c21: float
    c22: float
    H1: float
    H2: float

    def __post_init__(self):
        _check_positive(self)

    def step(self, x: float, y: float) -> tuple[float, float]:
        return (
            self.b1 * x / (1 + self.c11 * x + self.c12 * y) + self.H1,
            self.b2 * y / (1 + self.c21 * x + self.c22 * y) + self.H2,
        )


@dataclass(frozen=True)
class ModelParams:
    b1: float
    b2: float
    c1: float
    c2: float
    h1: float
    h2: float

    def __post_init__(self):
        _check_positive(self)

    def as_dict(self) -> dict[str, float]:
        return asdict(self)

    def with_(self, **changes) -> "ModelParams":
        return replace(self, **changes)

    def swapped(self) -> "ModelParams":
        """Parameters of the map with the two species exchanged."""
        return ModelParams(self.b2, self.b1, self.c2, self.c1, self.h2, self.h1)

    @classmethod
    def from_dict(cls, d: dict) -> "ModelParams":
        """Build from normalized keys, or from raw keys (``c11`` ... ``H2``)."""
        if "c11" in d:
            missing = [k for k in RAW_PARAM_NAMES if k not in d]
            if missing:
                raise ParameterError(f"missing raw parameter(s): {', '.join(missing)}")
            return normalize(RawParams(**{k: d[k] for k in RAW_PARAM_NAMES}))
        missing = [k for k in PARAM_NAMES if k not in d]
        if missing:
            raise ParameterError(f"missing parameter(s): {', '.join(missing)}")
        return cls(**{k: d[k] for k in PARAM_NAMES})


class Point(NamedTuple):
    x: float
    y: float


class Jacobian2(NamedTuple):
    a: float
    b: float
    c: float
    d: float

    @property
    def det(self) -> float:
        return self.a * self.d - self.b * self.c

    @property
    def trace(self) -> float:
        return self.a + self.d

    def as_array(self) -> np.ndarray:
        return np.array([[self.a, self.b], [self.c, self.d]])


class Box(NamedTuple):
    x_lo: float
    x_hi: float
    y_lo: float
    y_hi: float

    def contains(self, pt, slack: float = 0.0) -> bool:
        x, y = pt
        return (self.x_lo - slack <= x <= self.x_hi + slack
                and self.y_lo - slack <= y <= self.y_hi + slack)


def normalize(raw: RawParams) -> ModelParams:
    """Rescale ``(x, y) -> (c11 x, c22 y)`` to reach the six-parameter form."""
    return ModelParams(
        b1=raw.b1,
        b2=raw.b2,
        c1=raw.c12 / raw.c22,
        c2=raw.c21 / raw.c11,
        h1=raw.c11 * raw.H1,
        h2=raw.c22 * raw.H2,
    )


def _check_point(pt) -> tuple[float, float]:
    x, y = float(pt[0]), float(pt[1])
    if not (math.isfinite(x) and math.isfinite(y)):
        raise DomainError(f"point ({x}, {y}) is not finite")
    if x < 0 or y < 0:
        raise DomainError(f"point ({x}, {y}) is outside [0, inf)^2")
    return x, y


def step_xy(p: ModelParams, x, y):
    """Unchecked map evaluation; works elementwise on numpy arrays."""
    return (p.b1 * x / (1 + x + p.c1 * y) + p.h1,
            p.b2 * y / (1 + y + p.c2 * x) + p.h2)


def jacobian_xy(p: ModelParams, x, y):
    """Unchecked partials ``(a, b, c, d)``; elementwise on arrays."""
    d1 = 1 + x + p.c1 * y
    d2 = 1 + y + p.c2 * x
    d1sq = d1 * d1
    d2sq = d2 * d2
    return (p.b1 * (1 + p.c1 * y) / d1sq,
            -p.b1 * p.c1 * x / d1sq,
            -p.b2 * p.c2 * y / d2sq,
            p.b2 * (1 + p.c2 * x) / d2sq)


def step(p: ModelParams, pt) -> Point:
    x, y = _check_point(pt)
    return Point(*step_xy(p, x, y))


def jacobian(p: ModelParams, pt) -> Jacobian2:
    x, y = _check_point(pt)
    return Jacobian2(*jacobian_xy(p, x, y))


def jacobian_det(p: ModelParams, pt) -> float:
    """Closed-form determinant; positive on the whole quadrant."""
    x, y = _check_point(pt)
    d1 = 1 + x + p.c1 * y
    d2 = 1 + y + p.c2 * x
    return p.b1 * p.b2 * (1 + p.c1 * y + p.c2 * x) / (d1 * d1 * d2 * d2)


def trapping_box(p: ModelParams) -> Box:
    return Box(p.h1, p.h1 + p.b1, p.h2, p.h2 + p.b2)


def se_leq(p1, p2, tol: float = 0.0) -> bool:
    """South-east order: ``p1 <=se p2`` iff x1 <= x2 and y1 >= y2."""
    return p1[0] <= p2[0] + tol and p1[1] >= p2[1] - tol

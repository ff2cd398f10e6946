"""Parameter draws and per-draw summaries for randomized and grid scans."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .dynamics import gas_certificate
from .equilibria import Label, SolverError, find_equilibria, uniqueness_sufficient
from .model import PARAM_NAMES, ModelParams

SCAN_HEADER = (*PARAM_NAMES, "count", "labels", "condA", "condB", "gas")


def draw_params(rng: np.random.Generator, n: int, lo: float = 1e-2, hi: float = 1e2) -> list[ModelParams]:
    """``n`` parameter sets, each coordinate log-uniform on ``[lo, hi]``."""
    v = 10 ** rng.uniform(np.log10(lo), np.log10(hi), size=(n, 6))
    return [ModelParams(*row) for row in v]


def parse_grid(specs: Sequence[str]) -> dict[str, np.ndarray]:
    """``["b1=2:8:7", "c1=0.5:3:6"]`` -> evenly spaced values per name."""
    axes = {}
    for spec in specs:
        for part in filter(None, (s.strip() for s in spec.split(";"))):
            name, _, rng = part.partition("=")
            name = name.strip()
            if name not in PARAM_NAMES:
                raise ValueError(f"unknown grid parameter {name!r}")
            try:
                lo, hi, n = rng.split(":")
                axes[name] = np.linspace(float(lo), float(hi), int(n))
            except ValueError:
                raise ValueError(f"grid entry {part!r} is not name=lo:hi:n") from None
            if axes[name].size < 1:
                raise ValueError(f"grid entry {part!r} has no points")
    if not axes:
        raise ValueError("empty grid specification")
    return axes


def grid_params(base: ModelParams, axes: dict[str, np.ndarray]) -> list[ModelParams]:
    names = list(axes)
    mesh = np.meshgrid(*(axes[k] for k in names), indexing="ij")
    flat = [m.ravel() for m in mesh]
    return [base.with_(**{k: float(col[i]) for k, col in zip(names, flat)})
            for i in range(flat[0].size)]


@dataclass(frozen=True)
class ScanRecord:
    params: ModelParams
    count: int
    labels: tuple[str, ...]
    condA: bool
    condB: bool
    gas: bool
    error: str = ""

    def consistent(self) -> bool:
        """Whether the record agrees with the count/label/uniqueness theorems."""
        if self.error or self.count not in (1, 2, 3):
            return False
        if (self.condA or self.condB) and self.count != 1:
            return False
        if self.count == 1:
            return self.labels == ("LAS",) and self.gas
        if self.count == 3:
            return self.labels == ("LAS", "Saddle", "LAS") and not self.gas
        return sorted(self.labels) == ["LAS", "Nonhyperbolic"]


def scan_one(p: ModelParams, tol: float = 1e-9, max_n: int = 100_000) -> ScanRecord:
    u = uniqueness_sufficient(p)
    try:
        eqs = find_equilibria(p)
    except SolverError as exc:
        return ScanRecord(p, 0, (), u.condA, u.condB, False, error=str(exc))
    labels = tuple(Label(e.label).value for e in eqs.nonneg)
    return ScanRecord(p, eqs.count, labels, u.condA, u.condB, gas_certificate(p, tol, max_n))


def scan(params: Iterable[ModelParams], jobs: int = 1, tol: float = 1e-9) -> list[ScanRecord]:
    """Records in input order; the result does not depend on ``jobs``."""
    params = list(params)
    if jobs <= 1:
        return [scan_one(p, tol) for p in params]
    from concurrent.futures import ProcessPoolExecutor
    from functools import partial

    with ProcessPoolExecutor(max_workers=jobs) as ex:
        return list(ex.map(partial(scan_one, tol=tol), params, chunksize=max(1, len(params) // (4 * jobs))))

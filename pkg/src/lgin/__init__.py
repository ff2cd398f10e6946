"""Equilibria, stability and global dynamics of the Leslie-Gower map with immigration."""
from .model import (
    Box,
    DomainError,
    Jacobian2,
    ModelParams,
    ParameterError,
    Point,
    RawParams,
    jacobian,
    jacobian_det,
    normalize,
    step,
    trapping_box,
)
from .curves import shifted_quartic, slopes_at, y1, y2_branches
from .equilibria import (
    Label,
    classify_by_eigen,
    classify_by_slopes,
    contact_order,
    find_equilibria,
    mm_check,
    mm_search_asymmetric,
    uniqueness_sufficient,
)
from .dynamics import basin_grid, envelope, fold_search, gas_certificate, iterate, separatrix
from .report import AnalysisReport, analyze

__all__ = [
    "AnalysisReport", "Box", "DomainError", "Jacobian2", "Label", "ModelParams",
    "ParameterError", "Point", "RawParams", "analyze", "basin_grid", "classify_by_eigen",
    "classify_by_slopes", "contact_order", "envelope", "find_equilibria", "fold_search",
    "gas_certificate", "iterate", "jacobian", "jacobian_det", "mm_check",
    "mm_search_asymmetric", "normalize", "separatrix", "shifted_quartic", "slopes_at",
    "step", "trapping_box", "uniqueness_sufficient", "y1", "y2_branches",
]

"""Random-dimension calculus: metrics, correlation and degrees of completeness.

Every expectation is taken under the cell measure P x uniform-time, so the
values depend on that weighting convention.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._linalg import DEFAULT_ANGLE_TOL, DEFAULT_TOL
from .process import IntegrandField, cell_ranks
from .subspace import SubspaceField, _check, as_field, full_field, intersect, sum_fields
from .tree import predictable_expectation

MEASURE_CONVENTION = "P x uniform-time on predictable cells"


@dataclass(frozen=True)
class DimensionProfile:
    dd: np.ndarray
    mu: float


def profile(field: SubspaceField) -> DimensionProfile:
    return DimensionProfile(field.dim, mu(field))


def mu(field: SubspaceField) -> float:
    """Expected cell dimension."""
    return predictable_expectation(field.dim, field.tree.measure())


def phi_metric(B, C) -> float:
    """Expected absolute difference of cell dimensions."""
    B, C = as_field(B), as_field(C)
    _check(B, C)
    return predictable_expectation(np.abs(B.dim - C.dim), B.tree.measure())


def eta_metric(B, C, angle_tol: float = DEFAULT_ANGLE_TOL) -> float:
    """mu(B + C) - mu(B & C)."""
    B, C = as_field(B), as_field(C)
    return mu(sum_fields(B, C, angle_tol)) - mu(intersect(B, C, angle_tol))


def correlation(B, C, angle_tol: float = DEFAULT_ANGLE_TOL) -> float:
    """mu(B & C) / mu(B + C), or 0 when the sum has zero expected dimension."""
    B, C = as_field(B), as_field(C)
    top = mu(sum_fields(B, C, angle_tol))
    if top == 0:
        return 0.0
    return mu(intersect(B, C, angle_tol)) / top


def delta_c(theta: IntegrandField, tol: float = DEFAULT_TOL) -> float:
    """Average degree of completeness: expected rank(theta) / m."""
    dd = cell_ranks(theta, tol)
    return predictable_expectation(dd / theta.tree.m, theta.tree.measure())


def delta_i(theta: IntegrandField, tol: float = DEFAULT_TOL) -> float:
    return 1.0 - delta_c(theta, tol)


def completeness_correlation(theta: IntegrandField, tol: float = DEFAULT_TOL) -> float:
    """Correlation of the market's plug-in space with the full driver space."""
    field = as_field(theta, tol)
    return correlation(field, full_field(field.tree))

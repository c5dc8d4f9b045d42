"""Ranking partitions, rank, arrangements and maximal extensions."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._linalg import DEFAULT_ANGLE_TOL, DEFAULT_TOL
from .errors import NotContained, RankOutOfRange
from .process import IntegrandField, cell_ranks
from .subspace import (
    SubspaceField,
    _top_rows,
    as_field,
    complement_within,
    contains_cells,
    plugin_space,
)
from .tree import PredictableSet


@dataclass(frozen=True, eq=False)
class RankPartition:
    """Integer rank label per predictable cell; label k marks the region phi_k."""

    tree: object
    label: np.ndarray
    n: int

    def phi(self, k: int) -> PredictableSet:
        return PredictableSet(self.tree, self.label == k)

    def sizes(self) -> dict[int, int]:
        return {k: int(np.sum(self.label == k)) for k in range(self.n + 1)}

    def weights(self) -> dict[int, float]:
        w = self.tree.measure().weight
        return {k: float(w[self.label == k].sum()) for k in range(self.n + 1)}


def ranking_partition(theta: IntegrandField, tol: float = DEFAULT_TOL) -> RankPartition:
    return RankPartition(theta.tree, cell_ranks(theta, tol), theta.n)


def rank(theta: IntegrandField, tol: float = DEFAULT_TOL) -> int:
    """Largest cell rank over cells of positive weight."""
    labels = cell_ranks(theta, tol)
    live = theta.tree.measure().weight > 0
    return int(labels[live].max()) if live.any() else 0


def arrangement(theta: IntegrandField, tol: float = DEFAULT_TOL) -> IntegrandField:
    """The arrangement U: on a rank-k cell, rows 1..k form the canonical
    orthonormal basis of the row space of theta and rows k+1..m vanish."""
    return IntegrandField(theta.tree, plugin_space(theta, tol).basis)


def maximal_extension(
    A: SubspaceField,
    B: SubspaceField,
    r: int,
    tol: float = DEFAULT_ANGLE_TOL,
) -> SubspaceField:
    """Largest-rank-r field between B and A.

    Cells where A has dimension at most r keep all of A.  Elsewhere B is
    extended by the leading canonical directions of its complement in A
    until the dimension reaches r.
    """
    A, B = as_field(A), as_field(B)
    inside = contains_cells(A, B, tol)
    if not np.all(inside):
        raise NotContained(f"B is not contained in A (cell {int(np.flatnonzero(~inside)[0])})")
    if not int(B.dim.max(initial=0)) <= r <= A.m:
        raise RankOutOfRange(f"target rank {r} must lie in {int(B.dim.max(initial=0))}..{A.m}")
    comp = complement_within(A, B, tol)
    extra_count = np.clip(r - B.dim, 0, None)
    live = np.arange(A.m)[None, :] < extra_count[:, None]
    extra = np.where(live[..., None], comp.basis, 0.0)
    small = A.dim <= r
    dim = np.where(small, A.dim, r)
    extended = _top_rows(np.concatenate([B.basis, extra], axis=1), dim)
    basis = np.where(small[:, None, None], A.basis, extended)
    return SubspaceField(A.tree, basis, dim)


def strict_complement_condition(A_theta, B_theta, tol: float = DEFAULT_TOL) -> bool:
    """Whether B admits a strict complement in A.

    With n = rank of A and r = rank of B, the answer is no exactly when some
    cell of positive weight has rank pair (i, j) with i in n-r+1..n and j in
    0..i+r-n-1.
    """
    A, B = as_field(A_theta, tol), as_field(B_theta, tol)
    inside = contains_cells(A, B)
    if not np.all(inside):
        raise NotContained(f"B is not contained in A (cell {int(np.flatnonzero(~inside)[0])})")
    live = A.tree.measure().weight > 0
    i_lab, j_lab = A.dim[live], B.dim[live]
    n = int(i_lab.max(initial=0))
    r = int(j_lab.max(initial=0))
    for i in range(n - r + 1, n + 1):
        for j in range(0, i + r - n):
            if np.any((i_lab == i) & (j_lab == j)):
                return False
    return True

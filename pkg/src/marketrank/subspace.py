"""Per-cell subspaces of driver space and their lattice operations.

A :class:`SubspaceField` stores, for every predictable cell, an orthonormal
basis of a subspace of R^m padded with zero rows to an m x m block.  The
plug-in space of a market is the row space of its integrand; two markets
generate the same acceptance set exactly when their plug-in fields agree.

Geometry is Euclidean in driver coordinates, which is the covariation inner
product because the driver has identity instantaneous covariance.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._linalg import (
    DEFAULT_ANGLE_TOL,
    DEFAULT_TOL,
    _svd,
    canonical_rows,
    fix_signs,
    projectors,
)
from .errors import NotContained, TreeMismatch
from .process import IntegrandField
from .tree import FilteredTree


@dataclass(frozen=True, eq=False)
class SubspaceField:
    tree: FilteredTree
    basis: np.ndarray
    dim: np.ndarray

    def __post_init__(self):
        basis = np.asarray(self.basis, dtype=np.float64)
        dim = np.asarray(self.dim, dtype=np.int64)
        m = self.tree.m
        if basis.shape != (self.tree.n_cells, m, m) or dim.shape != (self.tree.n_cells,):
            raise ValueError("basis must be (n_cells, m, m) and dim (n_cells,)")
        basis.setflags(write=False)
        dim.setflags(write=False)
        object.__setattr__(self, "basis", basis)
        object.__setattr__(self, "dim", dim)

    @property
    def m(self) -> int:
        return self.tree.m

    def cell_basis(self, cell: int) -> np.ndarray:
        return self.basis[cell, : self.dim[cell]]

    def projector(self) -> np.ndarray:
        return projectors(self.basis)

    def __add__(self, other):
        return sum_fields(self, other)

    def __and__(self, other):
        return intersect(self, other)


def _check(a, b):
    if not a.tree.same_as(b.tree):
        raise TreeMismatch("subspace fields live on different trees")


def _top_rows(stack, r):
    """Canonical basis of the top-``r`` right singular directions per cell."""
    n_cells, _, m = stack.shape
    _, vh = _svd(stack)
    basis = np.zeros((n_cells, m, m))
    kept = vh.shape[1]
    if kept:
        live = np.arange(kept)[None, :] < r[:, None]
        basis[:, :kept] = np.where(live[..., None], fix_signs(vh), 0.0)
    return basis


def from_rows(tree: FilteredTree, rows, tol: float = DEFAULT_TOL) -> SubspaceField:
    """Row space of a (n_cells, r, m) stack, or of one (r, m) matrix at every cell."""
    rows = np.asarray(rows, dtype=np.float64)
    if rows.ndim == 2:
        rows = np.broadcast_to(rows, (tree.n_cells,) + rows.shape)
    basis, dim = canonical_rows(rows, tol)
    return SubspaceField(tree, basis, dim)


def plugin_space(theta: IntegrandField, tol: float = DEFAULT_TOL) -> SubspaceField:
    """Row space of the integrand at every cell."""
    return from_rows(theta.tree, theta.theta, tol)


def as_field(obj, tol: float = DEFAULT_TOL) -> SubspaceField:
    """Accept either a subspace field or an integrand (via its plug-in space)."""
    if isinstance(obj, SubspaceField):
        return obj
    if isinstance(obj, IntegrandField):
        return plugin_space(obj, tol)
    raise TypeError(f"expected SubspaceField or IntegrandField, got {type(obj).__name__}")


def zero_field(tree: FilteredTree) -> SubspaceField:
    return SubspaceField(tree, np.zeros((tree.n_cells, tree.m, tree.m)), np.zeros(tree.n_cells, dtype=np.int64))


def full_field(tree: FilteredTree) -> SubspaceField:
    return from_rows(tree, np.eye(tree.m))


def _residual_directions(rows, proj, angle_tol):
    """Directions of ``rows`` leaving the range of ``proj`` by more than
    ``angle_tol``, with the left singular vectors that produce them."""
    m = proj.shape[-1]
    resid = rows @ (np.eye(m) - proj)
    u, s, vh = np.linalg.svd(resid, full_matrices=False)
    return u, s > np.sin(angle_tol), vh


def sum_fields(a: SubspaceField, b: SubspaceField, angle_tol: float = DEFAULT_ANGLE_TOL) -> SubspaceField:
    """Per-cell span of both fields.

    Directions of ``b`` within ``angle_tol`` of ``a`` are absorbed by ``a``.
    """
    _check(a, b)
    _, new, vh = _residual_directions(b.basis, a.projector(), angle_tol)
    extra = np.where(new[..., None], vh, 0.0)
    dim = a.dim + new.sum(axis=1)
    basis = _top_rows(np.concatenate([a.basis, extra], axis=1), dim)
    return SubspaceField(a.tree, basis, dim)


def intersect(a: SubspaceField, b: SubspaceField, angle_tol: float = DEFAULT_ANGLE_TOL) -> SubspaceField:
    """Per-cell intersection: principal vectors of ``a`` at angle below
    ``angle_tol`` from ``b``."""
    _check(a, b)
    u, away, _ = _residual_directions(a.basis, b.projector(), angle_tol)
    # principal vectors of a that leave b; zero padding rows never qualify
    coef = np.where(away[:, None, :], u, 0.0)
    leaving = np.einsum("cji,cjm->cim", coef, a.basis)
    dim = a.dim - away.sum(axis=1)
    m = a.m
    rows = a.basis @ (np.eye(m) - projectors(leaving))
    return SubspaceField(a.tree, _top_rows(rows, dim), dim)


def contains_cells(a: SubspaceField, b: SubspaceField, tol: float = DEFAULT_ANGLE_TOL) -> np.ndarray:
    """Per-cell test that every basis row of ``b`` lies within ``tol`` of ``a``."""
    _check(a, b)
    m = a.m
    resid = b.basis @ (np.eye(m) - a.projector())
    return np.all(np.linalg.norm(resid, axis=2) <= tol, axis=1)


def contains(a: SubspaceField, b: SubspaceField, tol: float = DEFAULT_ANGLE_TOL) -> bool:
    return bool(np.all(contains_cells(a, b, tol)))


def equals_cells(a: SubspaceField, b: SubspaceField, tol: float = DEFAULT_ANGLE_TOL) -> np.ndarray:
    return contains_cells(a, b, tol) & contains_cells(b, a, tol)


def equals(a: SubspaceField, b: SubspaceField, tol: float = DEFAULT_ANGLE_TOL) -> bool:
    return bool(np.all(equals_cells(a, b, tol)))


def distance(a: SubspaceField, b: SubspaceField) -> np.ndarray:
    """Per-cell spectral norm of the projector difference.

    For fields of equal dimension this is the sine of the largest principal
    angle; it is 1 wherever the dimensions differ.
    """
    _check(a, b)
    diff = a.projector() - b.projector()
    return np.linalg.norm(diff, ord=2, axis=(1, 2))


def complement_within(a: SubspaceField, b: SubspaceField, tol: float = DEFAULT_ANGLE_TOL) -> SubspaceField:
    """Orthogonal complement of ``b`` inside ``a`` (requires b contained in a)."""
    _check(a, b)
    inside = contains_cells(a, b, tol)
    if not np.all(inside):
        cell = int(np.flatnonzero(~inside)[0])
        raise NotContained(f"second field is not contained in the first (cell {cell})")
    m = a.m
    rows = a.basis @ (np.eye(m) - b.projector())
    dim = a.dim - b.dim
    return SubspaceField(a.tree, _top_rows(rows, dim), dim)


def orthogonal_cells(a: SubspaceField, b: SubspaceField, tol: float = 1e-10) -> np.ndarray:
    _check(a, b)
    cross = np.einsum("cim,cjm->cij", a.basis, b.basis)
    return np.all(np.abs(cross) <= tol, axis=(1, 2))


def realize_generator(field: SubspaceField) -> IntegrandField:
    """Integrand with m rows whose plug-in space is ``field``.

    Basis rows are scaled by 1/(1 + |row|); rows past the cell dimension are
    zero.
    """
    norms = np.linalg.norm(field.basis, axis=2, keepdims=True)
    return IntegrandField(field.tree, field.basis / (1.0 + norms))

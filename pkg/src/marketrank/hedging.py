"""Martingale-measure polytopes, martingale representation and
Kunita-Watanabe style hedging on the simplex tree."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._linalg import DEFAULT_TOL, _count, _svd
from .errors import DimensionMismatch, NotAMartingale
from .process import (
    AdaptedProcess,
    IntegrandField,
    drift,
    integrate,
    integrate_process,
)
from .subspace import complement_within, full_field, plugin_space, realize_generator
from .tree import FilteredTree, martingale_of


@dataclass(frozen=True)
class MeasureCell:
    particular: np.ndarray
    null_basis: np.ndarray
    freedom: int


@dataclass(frozen=True, eq=False)
class MeasurePolytope:
    """Per-cell sets of one-step martingale measures for a market.

    ``null_basis`` has shape (n_cells, k, k); at cell c its first
    ``freedom[c]`` rows span the directions along which the branch
    probabilities can move while keeping the market a martingale.
    """

    tree: FilteredTree
    particular: np.ndarray
    null_basis: np.ndarray
    freedom: np.ndarray

    def cell(self, c: int) -> MeasureCell:
        f = int(self.freedom[c])
        return MeasureCell(self.particular[c], self.null_basis[c, :f], f)

    @property
    def unique(self) -> bool:
        return bool(np.all(self.freedom == 0))


def _sum_zero_basis(k):
    """Orthonormal basis (k, k-1) of vectors with zero coordinate sum."""
    _, _, vh = np.linalg.svd(np.ones((1, k)))
    return vh[1:].T


def measure_polytope(theta: IntegrandField, tree: FilteredTree | None = None, tol: float = DEFAULT_TOL) -> MeasurePolytope:
    """Solve sum q = 1, sum_i q_i theta delta_i = 0 per cell.

    The reference branch probabilities always solve the system and lie in
    the open simplex; the solution directions are the null space of the
    asset increments restricted to zero-sum vectors.
    """
    tree = theta.tree if tree is None else tree
    k = tree.branching
    n0 = _sum_zero_basis(k)
    steps = np.einsum("cnm,cbm->cnb", theta.theta, tree.increments)
    reduced = steps @ n0
    # zero padding rows keep the singular values and expose all m right vectors
    padded = np.concatenate([reduced, np.zeros((tree.n_cells, tree.m, tree.m))], axis=1)
    s, vh = _svd(padded)
    rank = _count(s, tol)
    freedom = tree.m - rank
    directions = np.einsum("cjm,bm->cjb", vh, n0)
    null_basis = np.zeros((tree.n_cells, k, k))
    for f in np.unique(freedom):
        if f == 0:
            continue
        idx = freedom == f
        null_basis[idx, :f] = directions[idx, tree.m - f :]
    return MeasurePolytope(tree, np.array(tree.probs), null_basis, freedom)


def martingale_representation(M: AdaptedProcess, tree: FilteredTree | None = None, tol: float = 1e-10) -> IntegrandField:
    """psi with M - M_0 = psi . W, solved per cell from the branch values."""
    tree = M.tree if tree is None else tree
    if np.any(np.abs(drift(M)) > tol):
        raise NotAMartingale("process has nonzero conditional drift")
    psi = np.einsum("cb,cbd,cbm->cdm", tree.probs, M.increments(), tree.increments) / tree.dt
    return IntegrandField(tree, psi)


@dataclass(frozen=True, eq=False)
class HedgeDecomposition:
    """h = price + (alpha . X)_T + L_T with L = residual . W orthogonal to X."""

    price: float
    alpha: np.ndarray
    residual: IntegrandField
    market: IntegrandField
    value: AdaptedProcess

    @property
    def tree(self):
        return self.market.tree

    def hedge_gains(self) -> AdaptedProcess:
        return integrate_process(self.alpha, integrate(self.market))

    def residual_process(self) -> AdaptedProcess:
        return integrate(self.residual)

    def reconstruct(self) -> np.ndarray:
        """Terminal values of price + alpha . X + L."""
        total = self.hedge_gains().terminal + self.residual_process().terminal
        return self.price + total[:, 0]


def kw_decompose(claim, theta_X: IntegrandField, tree: FilteredTree | None = None, tol: float = DEFAULT_TOL) -> HedgeDecomposition:
    """Split a terminal claim into price, hedge against X and orthogonal residual.

    Prices under the reference measure of the tree, which is a martingale
    measure for every market built as an integral against the driver.
    """
    tree = theta_X.tree if tree is None else tree
    claim = np.asarray(claim, dtype=np.float64)
    terminal = tree.terminal
    if claim.shape != (terminal.stop - terminal.start,):
        raise DimensionMismatch(f"claim needs one value per terminal node ({terminal.stop - terminal.start})")
    value = AdaptedProcess(tree, martingale_of(tree, claim))
    price = float(value.values[0, 0])
    psi = martingale_representation(value, tree).theta
    pinv = np.linalg.pinv(theta_X.theta, rcond=tol)
    alpha = psi @ pinv
    residual = psi - alpha @ theta_X.theta
    return HedgeDecomposition(price, alpha, IntegrandField(tree, residual), theta_X, value)


def orthogonal_completion(theta_X: IntegrandField, tree: FilteredTree | None = None, tol: float = DEFAULT_TOL) -> IntegrandField:
    """X' orthogonal to X such that (X, X') spans the full driver space."""
    tree = theta_X.tree if tree is None else tree
    return realize_generator(complement_within(full_field(tree), plugin_space(theta_X, tol)))

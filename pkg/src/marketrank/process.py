"""Predictable matrix integrands and the processes they generate."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels
from ._linalg import DEFAULT_TOL, ranks
from .errors import DimensionMismatch, TreeMismatch
from .tree import FilteredTree, PredictableSet


@dataclass(frozen=True, eq=False)
class IntegrandField:
    """Predictable n x m matrix process, one matrix per predictable cell.

    ``theta`` has shape ``(n_cells, n, m)``; row ``i`` is the volatility of
    asset ``i`` against the driver.
    """

    tree: FilteredTree
    theta: np.ndarray

    def __post_init__(self):
        theta = np.asarray(self.theta, dtype=np.float64)
        if theta.ndim == 2:
            theta = np.broadcast_to(theta, (self.tree.n_cells,) + theta.shape)
        if theta.ndim != 3 or theta.shape[0] != self.tree.n_cells:
            raise DimensionMismatch(
                f"integrand must have shape ({self.tree.n_cells}, n, {self.tree.m}), got {theta.shape}"
            )
        if theta.shape[2] != self.tree.m:
            raise DimensionMismatch(
                f"integrand has {theta.shape[2]} columns but the driver has dimension {self.tree.m}"
            )
        if not np.all(np.isfinite(theta)):
            raise ValueError("integrand entries must be finite")
        theta = np.array(theta)
        theta.setflags(write=False)
        object.__setattr__(self, "theta", theta)

    @property
    def n(self) -> int:
        return self.theta.shape[1]

    @property
    def m(self) -> int:
        return self.theta.shape[2]

    @classmethod
    def constant(cls, tree: FilteredTree, matrix) -> "IntegrandField":
        matrix = np.atleast_2d(np.asarray(matrix, dtype=np.float64))
        return cls(tree, np.broadcast_to(matrix, (tree.n_cells,) + matrix.shape))

    @classmethod
    def identity(cls, tree: FilteredTree) -> "IntegrandField":
        return cls.constant(tree, np.eye(tree.m))

    @classmethod
    def zeros(cls, tree: FilteredTree, n: int = 1) -> "IntegrandField":
        return cls.constant(tree, np.zeros((n, tree.m)))

    def rows(self, index) -> "IntegrandField":
        """Sub-market made of the selected assets."""
        return IntegrandField(self.tree, self.theta[:, np.atleast_1d(index), :])

    def stack(self, *others: "IntegrandField") -> "IntegrandField":
        """Joint market (X, Y, ...) with rows concatenated."""
        for other in others:
            _same_tree(self, other)
        return IntegrandField(self.tree, np.concatenate([self.theta] + [o.theta for o in others], axis=1))

    def left_multiply(self, M) -> "IntegrandField":
        """Integrand of M . X for a predictable matrix field ``M`` of shape (C, p, n)."""
        M = np.asarray(M, dtype=np.float64)
        if M.ndim == 2:
            M = np.broadcast_to(M, (self.tree.n_cells,) + M.shape)
        return IntegrandField(self.tree, np.einsum("cpn,cnm->cpm", M, self.theta))


@dataclass(frozen=True, eq=False)
class AdaptedProcess:
    """R^n-valued node map; ``values`` has shape ``(n_nodes, n)``."""

    tree: FilteredTree
    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        if values.ndim == 1:
            values = values[:, None]
        if values.shape[0] != self.tree.n_nodes:
            raise DimensionMismatch(
                f"process needs {self.tree.n_nodes} node values, got {values.shape[0]}"
            )
        object.__setattr__(self, "values", values)

    @property
    def n(self) -> int:
        return self.values.shape[1]

    def at(self, t: int) -> np.ndarray:
        return self.values[self.tree.level(t)]

    @property
    def terminal(self) -> np.ndarray:
        return self.values[self.tree.terminal]

    def increments(self) -> np.ndarray:
        """One-step increments out of every cell, shape (n_cells, k, n)."""
        k, C = self.tree.branching, self.tree.n_cells
        kids = self.values[1 : 1 + k * C].reshape(C, k, self.n)
        return kids - self.values[:C, None, :]

    def __add__(self, other: "AdaptedProcess") -> "AdaptedProcess":
        _same_tree(self, other)
        return AdaptedProcess(self.tree, self.values + other.values)


def _same_tree(a, b):
    if not a.tree.same_as(b.tree):
        raise TreeMismatch("objects live on different trees")


def integrate(theta: IntegrandField, tree: FilteredTree | None = None) -> AdaptedProcess:
    """X = theta . W, stored at every node, with X_0 = 0."""
    tree = theta.tree if tree is None else tree
    if theta.m != tree.m:
        raise DimensionMismatch(f"integrand has {theta.m} columns, driver dimension is {tree.m}")
    if not theta.tree.same_as(tree):
        raise TreeMismatch("integrand was built on a different tree")
    return AdaptedProcess(tree, _kernels.integrate(theta.theta, tree.increments))


def integrate_process(M, X: AdaptedProcess) -> AdaptedProcess:
    """M . X for a predictable (C, p, n) matrix field and an adapted process."""
    tree = X.tree
    M = np.asarray(M, dtype=np.float64)
    if M.ndim == 2:
        M = np.broadcast_to(M, (tree.n_cells,) + M.shape)
    if M.shape[0] != tree.n_cells or M.shape[2] != X.n:
        raise DimensionMismatch(f"matrix field shape {M.shape} does not fit a {X.n}-dim process")
    steps = np.einsum("cpn,cbn->cbp", M, X.increments())
    # the integrate kernel accumulates theta @ delta; feed it identity weights
    eye = np.broadcast_to(np.eye(M.shape[1]), (tree.n_cells, M.shape[1], M.shape[1]))
    return AdaptedProcess(tree, _kernels.integrate(eye, steps))


def covariation(a: IntegrandField, b: IntegrandField) -> np.ndarray:
    """Per-cell covariation increment theta_A theta_B^T dt, shape (C, n_A, n_B)."""
    _same_tree(a, b)
    if a.m != b.m:
        raise DimensionMismatch("integrands act on drivers of different dimension")
    return np.einsum("cim,cjm->cij", a.theta, b.theta) * a.tree.dt


def realized_covariation(X: AdaptedProcess, Y: AdaptedProcess) -> np.ndarray:
    """E[dX dY^T | F_cell] computed from the branch increments directly."""
    _same_tree(X, Y)
    return np.einsum("cb,cbi,cbj->cij", X.tree.probs, X.increments(), Y.increments())


def drift(process: AdaptedProcess) -> np.ndarray:
    """E[dX | F_cell] per cell, shape (n_cells, n)."""
    tree = process.tree
    return _kernels.child_average(process.values, tree.probs) - process.values[: tree.n_cells]


def is_martingale(process: AdaptedProcess, tree: FilteredTree | None = None, tol: float = 1e-10) -> bool:
    if tree is not None and not tree.same_as(process.tree):
        raise TreeMismatch("process was built on a different tree")
    return bool(np.all(np.abs(drift(process)) <= tol))


def section(theta: IntegrandField, F: PredictableSet) -> IntegrandField:
    """1_F theta: rows zeroed off ``F``."""
    _same_tree(theta, F)
    return IntegrandField(theta.tree, theta.theta * F.mask[:, None, None])


def cell_ranks(theta: IntegrandField, tol: float = DEFAULT_TOL) -> np.ndarray:
    return ranks(theta.theta, tol)


def satisfies_gamma(theta: IntegrandField, tol: float = DEFAULT_TOL) -> bool:
    """True when theta has full row rank on every cell of positive weight."""
    weight = theta.tree.measure().weight
    full = cell_ranks(theta, tol) == theta.n
    return bool(np.all(full | (weight <= 0)))

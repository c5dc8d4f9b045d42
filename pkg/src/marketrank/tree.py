"""Exact finite filtered probability space on an (m+1)-ary simplex tree.

Nodes are indexed breadth-first with children ordered by branch index, so
the children of node ``c`` are ``k*c + 1 .. k*c + k`` with ``k = m + 1``.
The first ``n_cells`` nodes (times ``0 .. T-1``) are the predictable cells:
the integrand value stored at a cell applies to the step leaving that node.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .errors import (
    DegenerateProbability,
    NonPositiveDimension,
    TimeOrderViolation,
    TreeMismatch,
)

_PROB_TOL = 1e-12


def simplex_increments(probs, dt):
    """Branch increments solving the two moment conditions for ``probs``.

    Returns ``D`` of shape ``(..., m+1, m)`` with ``sum_i p_i D_i = 0`` and
    ``sum_i p_i D_i D_i^T = dt * I``.  The columns come from Gram-Schmidt on
    ``[sqrt(p), e_1, ..., e_m]`` so the first increment lies on axis 1; for
    uniform ``p`` the rows are a regular simplex of radius ``sqrt(m*dt)``.
    """
    probs = np.asarray(probs, dtype=np.float64)
    k = probs.shape[-1]
    s = np.sqrt(probs)
    basis = np.broadcast_to(np.eye(k), probs.shape[:-1] + (k, k)).copy()
    basis[..., :, 1:] = basis[..., :, : k - 1]
    basis[..., :, 0] = s
    q, r = np.linalg.qr(basis)
    signs = np.sign(np.diagonal(r, axis1=-2, axis2=-1))
    signs[signs == 0] = 1.0
    q = q * signs[..., None, :]
    return np.sqrt(dt) * q[..., :, 1:] / s[..., :, None]


@dataclass(frozen=True, eq=False)
class FilteredTree:
    """Complete (m+1)-ary tree carrying the m-dimensional driver ``W``.

    ``probs`` has shape ``(n_cells, m+1)`` and ``increments`` has shape
    ``(n_cells, m+1, m)``; row ``c`` describes the step out of cell ``c``.
    """

    m: int
    T: int
    dt: float
    probs: np.ndarray
    increments: np.ndarray
    node_prob: np.ndarray = field(repr=False)
    times: np.ndarray = field(repr=False)
    W: np.ndarray = field(repr=False)

    @property
    def branching(self) -> int:
        return self.m + 1

    @property
    def n_cells(self) -> int:
        return self.probs.shape[0]

    @property
    def n_nodes(self) -> int:
        return self.node_prob.shape[0]

    def level_offset(self, t: int) -> int:
        k = self.branching
        return (k**t - 1) // (k - 1)

    def level(self, t: int) -> slice:
        """Slice of node indices at time ``t``."""
        if not 0 <= t <= self.T:
            raise TimeOrderViolation(f"time {t} outside 0..{self.T}")
        return slice(self.level_offset(t), self.level_offset(t + 1))

    @property
    def cell_times(self) -> np.ndarray:
        return self.times[: self.n_cells]

    @property
    def terminal(self) -> slice:
        return self.level(self.T)

    def signature(self):
        return (self.m, self.T, float(self.dt), self.probs.tobytes())

    def same_as(self, other: "FilteredTree") -> bool:
        return self is other or self.signature() == other.signature()

    def measure(self) -> "PredictableMeasure":
        return PredictableMeasure(self, self.node_prob[: self.n_cells] / self.T)

    def full_set(self) -> "PredictableSet":
        return PredictableSet(self, np.ones(self.n_cells, dtype=bool))

    def empty_set(self) -> "PredictableSet":
        return PredictableSet(self, np.zeros(self.n_cells, dtype=bool))

    def time_set(self, predicate) -> "PredictableSet":
        """Cells whose time satisfies ``predicate`` (vectorised over times)."""
        return PredictableSet(self, np.asarray(predicate(self.cell_times), dtype=bool))


def build_tree(m: int, T: int, dt: float = 1.0, probs=None) -> FilteredTree:
    """Build the simplex tree.

    ``probs`` may be omitted (uniform), a single vector of length ``m+1``
    used at every node, or an array of shape ``(n_cells, m+1)``.
    """
    if int(m) != m or m < 1:
        raise NonPositiveDimension(f"driver dimension must be a positive integer, got {m}")
    if int(T) != T or T < 1:
        raise NonPositiveDimension(f"number of steps must be a positive integer, got {T}")
    if not dt > 0:
        raise NonPositiveDimension(f"step length must be positive, got {dt}")
    m, T, dt = int(m), int(T), float(dt)
    k = m + 1
    n_cells = (k**T - 1) // m
    n_nodes = 1 + k * n_cells

    if probs is None:
        p = np.full((n_cells, k), 1.0 / k)
    else:
        p = np.asarray(probs, dtype=np.float64)
        if p.shape == (k,):
            p = np.broadcast_to(p, (n_cells, k))
        if p.shape != (n_cells, k):
            raise DegenerateProbability(
                f"branch probabilities must have shape ({k},) or ({n_cells}, {k}), got {p.shape}"
            )
        if not np.all(np.isfinite(p)) or np.any(p <= 0):
            raise DegenerateProbability("branch probabilities must be strictly positive")
        if np.any(np.abs(p.sum(axis=1) - 1.0) > _PROB_TOL):
            raise DegenerateProbability("branch probabilities must sum to 1 at every node")
        p = np.array(p)

    increments = simplex_increments(p, dt)

    node_prob = np.empty(n_nodes)
    node_prob[0] = 1.0
    times = np.empty(n_nodes, dtype=np.int64)
    start, width = 0, 1
    for t in range(T + 1):
        times[start : start + width] = t
        if t < T:
            parents = node_prob[start : start + width]
            node_prob[k * start + 1 : k * (start + width) + 1] = (
                parents[:, None] * p[start : start + width]
            ).ravel()
        start += width
        width *= k

    eye = np.broadcast_to(np.eye(m), (n_cells, m, m))
    W = _kernels.integrate(eye, increments)

    for arr in (p, increments, node_prob, times, W):
        arr.setflags(write=False)
    return FilteredTree(m, T, dt, p, increments, node_prob, times, W)


@dataclass(frozen=True, eq=False)
class PredictableSet:
    """Boolean mask over predictable cells."""

    tree: FilteredTree
    mask: np.ndarray

    def __post_init__(self):
        mask = np.asarray(self.mask, dtype=bool)
        if mask.shape != (self.tree.n_cells,):
            raise ValueError(f"mask must have shape ({self.tree.n_cells},), got {mask.shape}")
        object.__setattr__(self, "mask", mask)

    def _other(self, other):
        if not self.tree.same_as(other.tree):
            raise TreeMismatch("predictable sets live on different trees")
        return other.mask

    def __and__(self, other):
        return PredictableSet(self.tree, self.mask & self._other(other))

    def __or__(self, other):
        return PredictableSet(self.tree, self.mask | self._other(other))

    def __invert__(self):
        return PredictableSet(self.tree, ~self.mask)

    def __eq__(self, other):
        if not isinstance(other, PredictableSet):
            return NotImplemented
        return self.tree.same_as(other.tree) and bool(np.array_equal(self.mask, other.mask))

    def __len__(self):
        return int(self.mask.sum())

    def cells(self) -> np.ndarray:
        return np.flatnonzero(self.mask)


@dataclass(frozen=True, eq=False)
class PredictableMeasure:
    """P times uniform-over-time on predictable cells."""

    tree: FilteredTree
    weight: np.ndarray

    def of(self, pset: PredictableSet) -> float:
        return float(self.weight[pset.mask].sum())


def conditional_expectation(tree: FilteredTree, values, t: int, source_time: int | None = None):
    """E[values | F_t] for a node map given on level ``source_time`` (default T).

    ``values`` has leading dimension equal to the number of nodes at
    ``source_time``; the result has leading dimension equal to the number of
    nodes at ``t``.
    """
    s = tree.T if source_time is None else source_time
    if t > s:
        raise TimeOrderViolation(f"cannot condition time-{s} values on the later time {t}")
    if t < 0 or s > tree.T:
        raise TimeOrderViolation(f"times must lie in 0..{tree.T}")
    values = np.asarray(values, dtype=np.float64)
    src = tree.level(s)
    if values.shape[0] != src.stop - src.start:
        raise ValueError(
            f"expected {src.stop - src.start} values at time {s}, got {values.shape[0]}"
        )
    tail = values.shape[1:]
    full = np.zeros((src.stop, int(np.prod(tail, dtype=int))))
    full[src] = values.reshape(values.shape[0], -1)
    full = _kernels.backward_induction(full, tree.probs, src.start)
    return full[tree.level(t)].reshape((-1,) + tail)


def martingale_of(tree: FilteredTree, terminal):
    """Node map of E[terminal | F_t] over every node of the tree."""
    terminal = np.asarray(terminal, dtype=np.float64)
    tail = terminal.shape[1:]
    full = np.zeros((tree.n_nodes, int(np.prod(tail, dtype=int))))
    full[tree.terminal] = terminal.reshape(terminal.shape[0], -1)
    full = _kernels.backward_induction(full, tree.probs, tree.n_cells)
    return full.reshape((tree.n_nodes,) + tail)


def predictable_expectation(f, measure: PredictableMeasure) -> float:
    """Sum of ``f`` against the cell weights, in cell-index order."""
    f = np.broadcast_to(np.asarray(f, dtype=np.float64), measure.weight.shape)
    return float(np.dot(f, measure.weight))

"""Numpy implementations of the tree kernels.

Node layout is breadth-first on a complete k-ary tree: the children of node
``c`` are ``k*c + 1 .. k*c + k``.  Predictable cells are the first ``C``
nodes.  These functions are the reference the compiled kernels are tested
against.
"""
import numpy as np


def _level_bounds(k, n_nodes):
    """Yield (start, stop) of each level of a complete k-ary tree."""
    start, width = 0, 1
    while start < n_nodes:
        yield start, start + width
        start += width
        width *= k


def integrate(theta, delta):
    """Pathwise stochastic integral of ``theta`` against branch increments.

    theta: (C, n, m); delta: (C, k, m).  Returns X of shape (1 + k*C, n) with
    X at the root equal to zero.
    """
    theta = np.ascontiguousarray(theta, dtype=np.float64)
    delta = np.ascontiguousarray(delta, dtype=np.float64)
    n_cells, k = delta.shape[0], delta.shape[1]
    n = theta.shape[1]
    dx = np.einsum("cnm,cbm->cbn", theta, delta)
    out = np.zeros((1 + k * n_cells, n))
    for start, stop in _level_bounds(k, n_cells):
        parent = out[start:stop]
        out[k * start + 1:k * stop + 1] = (parent[:, None, :] + dx[start:stop]).reshape(-1, n)
    return out


def child_average(values, probs):
    """Probability-weighted mean over the children of each cell.

    values: (N, d) node map; probs: (C, k).  Returns (C, d).
    """
    values = np.asarray(values, dtype=np.float64)
    n_cells, k = probs.shape
    kids = values[1:1 + k * n_cells].reshape(n_cells, k, -1)
    return np.einsum("cb,cbd->cd", probs, kids)


def backward_induction(values, probs, stop):
    """Overwrite nodes ``0 .. stop-1`` with conditional expectations of their
    children, working from the deepest level up.  ``stop`` must be a level
    boundary."""
    out = np.array(values, dtype=np.float64, copy=True)
    k = probs.shape[1]
    bounds = [b for b in _level_bounds(k, stop)]
    for start, end in reversed(bounds):
        kids = out[k * start + 1:k * end + 1].reshape(end - start, k, -1)
        out[start:end] = np.einsum("cb,cbd->cd", probs[start:end], kids)
    return out


def gram_schmidt(theta, tol):
    """Row-wise Gram-Schmidt per cell with two orthogonalisation passes.

    Rows whose residual falls below ``tol`` times the largest input row norm
    of the cell are set to zero.  Surviving rows are not normalised.
    """
    theta = np.asarray(theta, dtype=np.float64)
    n_cells, n, m = theta.shape
    scale = np.linalg.norm(theta, axis=2).max(axis=1) if n else np.zeros(n_cells)
    out = np.zeros_like(theta)
    units = np.zeros_like(theta)
    for i in range(n):
        v = theta[:, i, :].copy()
        for _ in range(2):
            if i:
                coef = np.einsum("cm,cjm->cj", v, units[:, :i, :])
                v -= np.einsum("cj,cjm->cm", coef, units[:, :i, :])
        norm = np.linalg.norm(v, axis=1)
        keep = norm > tol * scale
        keep &= norm > 0.0
        out[keep, i, :] = v[keep]
        units[keep, i, :] = v[keep] / norm[keep, None]
    return out

"""Batched small-matrix helpers shared by the subspace and process modules.

All functions take stacks of matrices with the cell index first.
"""
import numpy as np

DEFAULT_TOL = 1e-9
DEFAULT_ANGLE_TOL = 1e-8

# entries below this are treated as zero when fixing basis signs
_SIGN_EPS = 1e-10


def _svd(stack):
    stack = np.asarray(stack, dtype=np.float64)
    n_cells, rows, m = stack.shape
    if rows == 0:
        return np.zeros((n_cells, 0)), np.zeros((n_cells, 0, m))
    _, s, vh = np.linalg.svd(stack, full_matrices=False)
    return s, vh


def ranks(stack, tol=DEFAULT_TOL):
    """Numerical rank per cell with threshold ``tol * sigma_max``."""
    s, _ = _svd(stack)
    return _count(s, tol)


def _count(s, tol):
    if s.shape[1] == 0:
        return np.zeros(s.shape[0], dtype=np.int64)
    top = s[:, :1]
    return ((s > tol * top) & (top > 0)).sum(axis=1).astype(np.int64)


def fix_signs(rows):
    """Flip each row so its first entry with magnitude above a small epsilon
    is positive."""
    rows = np.array(rows, dtype=np.float64, copy=True)
    big = np.abs(rows) > _SIGN_EPS
    first = np.argmax(big, axis=-1)
    lead = np.take_along_axis(rows, first[..., None], axis=-1)[..., 0]
    flip = np.where(big.any(axis=-1) & (lead < 0), -1.0, 1.0)
    return rows * flip[..., None]


def canonical_rows(stack, tol=DEFAULT_TOL):
    """Orthonormal row-space basis per cell in canonical form.

    Returns ``(basis, dim)`` where ``basis`` has shape ``(N, m, m)``: the first
    ``dim[c]`` rows are right singular vectors by descending singular value,
    sign-normalised, and the remaining rows are zero.
    """
    stack = np.asarray(stack, dtype=np.float64)
    n_cells, _, m = stack.shape
    s, vh = _svd(stack)
    dim = _count(s, tol)
    basis = np.zeros((n_cells, m, m))
    kept = vh.shape[1]
    if kept:
        live = np.arange(kept)[None, :] < dim[:, None]
        basis[:, :kept] = np.where(live[..., None], fix_signs(vh), 0.0)
    return basis, dim


def projectors(basis):
    """Orthogonal projector per cell from padded orthonormal rows."""
    return np.einsum("cki,ckj->cij", basis, basis)

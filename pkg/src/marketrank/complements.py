"""Orthogonal complements between markets, Gram-Schmidt, the star property
and a checker for the complement lattice laws."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from ._linalg import DEFAULT_ANGLE_TOL, DEFAULT_TOL
from .errors import InconsistentResult
from .process import IntegrandField
from .subspace import (
    as_field,
    complement_within,
    contains_cells,
    equals_cells,
    full_field,
    intersect,
    sum_fields,
)


def orthogonal_complement(A_theta, B_theta, tol: float = DEFAULT_TOL) -> IntegrandField:
    """Integrand generating the orthogonal complement of W(B) inside W(A).

    The result has as many rows as the largest complement dimension (at
    least one); rows past the cell dimension are zero.
    """
    A, B = as_field(A_theta, tol), as_field(B_theta, tol)
    comp = complement_within(A, B)
    rows = max(1, int(comp.dim.max(initial=0)))
    return IntegrandField(A.tree, comp.basis[:, :rows])


def is_complement(A, B, C, tol: float = DEFAULT_ANGLE_TOL) -> bool:
    """A = B + C with B and C meeting only in zero."""
    A, B, C = as_field(A), as_field(B), as_field(C)
    spans = equals_cells(A, sum_fields(B, C, tol), tol)
    trivial = intersect(B, C, tol).dim == 0
    return bool(np.all(spans & trivial))


def gram_schmidt(theta: IntegrandField, tol: float = DEFAULT_TOL) -> IntegrandField:
    """Pairwise orthogonal rows spanning the same plug-in space.

    Row i is row i of theta minus its projection on the earlier rows; rows
    that are dependent on earlier ones become zero.
    """
    return IntegrandField(theta.tree, _kernels.gram_schmidt(theta.theta, tol))


def _star_by_definition(B, C, tol):
    return contains_cells(C, complement_within(sum_fields(B, C, tol), B, tol), tol)


def _star_by_splitting(B, C, tol):
    perp = complement_within(full_field(B.tree), B, tol)
    split = sum_fields(intersect(C, B, tol), intersect(C, perp, tol), tol)
    return equals_cells(C, split, tol)


def star_cells(B, C, tol: float = DEFAULT_ANGLE_TOL) -> np.ndarray:
    """Per-cell star property of the pair (B, C), checked two ways."""
    B, C = as_field(B), as_field(C)
    direct = _star_by_definition(B, C, tol)
    split = _star_by_splitting(B, C, tol)
    if not np.array_equal(direct, split):
        cell = int(np.flatnonzero(direct != split)[0])
        raise InconsistentResult(f"star-property routes disagree at cell {cell}")
    return direct


def star_property(B, C, tol: float = DEFAULT_ANGLE_TOL) -> bool:
    """c(B + C, B) is contained in C."""
    return bool(np.all(star_cells(B, C, tol)))


@dataclass
class LawResult:
    name: str
    status: str  # pass | fail | expected-fail | skipped
    first_cell: int | None = None
    detail: dict = field(default_factory=dict)

    @property
    def failed(self) -> bool:
        return self.status == "fail"

    def to_dict(self):
        return {"name": self.name, "status": self.status, "first_cell": self.first_cell, "detail": self.detail}


@dataclass
class LatticeReport:
    laws: list[LawResult]

    @property
    def ok(self) -> bool:
        return not any(law.failed for law in self.laws)

    def __getitem__(self, name) -> LawResult:
        for law in self.laws:
            if law.name == name:
                return law
        raise KeyError(name)

    def to_dict(self):
        return {"ok": self.ok, "laws": [law.to_dict() for law in self.laws]}


def _first(mask):
    bad = np.flatnonzero(~mask)
    return int(bad[0]) if bad.size else None


def _unconditional(name, holds):
    if np.all(holds):
        return LawResult(name, "pass")
    return LawResult(name, "fail", _first(holds))


def _conditional(name, holds, precondition, detail=None):
    """A law that must hold on cells meeting ``precondition``."""
    detail = dict(detail or {})
    detail["precondition_cells"] = int(precondition.sum())
    required = holds | ~precondition
    if not np.all(required):
        return LawResult(name, "fail", _first(required), detail)
    if not np.all(holds):
        return LawResult(name, "expected-fail", _first(holds), detail)
    return LawResult(name, "pass", None, detail)


def verify_lattice_laws(A, B, C, D, tol: float = DEFAULT_ANGLE_TOL) -> LatticeReport:
    """Evaluate the complement, De Morgan, star and distributive laws.

    Complement-based laws need B and C inside A and are skipped otherwise.
    Distributive laws are required only on cells where (D, B) and (D, C)
    have the star property; failures elsewhere are reported as
    ``expected-fail``.
    """
    A, B, C, D = (as_field(x) for x in (A, B, C, D))
    c = lambda outer, inner: complement_within(outer, inner, tol)  # noqa: E731
    eq = lambda x, y: equals_cells(x, y, tol)  # noqa: E731
    add = lambda x, y: sum_fields(x, y, tol)  # noqa: E731
    meet = lambda x, y: intersect(x, y, tol)  # noqa: E731
    laws = []

    nested = np.all(contains_cells(A, B, tol)) and np.all(contains_cells(A, C, tol))
    if nested:
        cB, cC = c(A, B), c(A, C)
        laws.append(_unconditional("de_morgan_intersection", eq(c(A, meet(B, C)), add(cB, cC))))
        laws.append(_unconditional("de_morgan_sum", eq(c(A, add(B, C)), meet(cB, cC))))
        laws.append(_unconditional("involution", eq(c(A, cB), B) & eq(c(A, cC), C)))
        laws.append(
            _unconditional("anti_monotone", contains_cells(C, B, tol) == contains_cells(cB, cC, tol))
        )
        if np.all(contains_cells(B, C, tol)):
            cBC = c(B, C)
            laws.append(_unconditional("chain_rule", eq(cC, add(cB, cBC)) & (cC.dim == cB.dim + cBC.dim)))
            laws.append(_unconditional("restricted_complement", eq(cBC, meet(B, cC))))
        else:
            laws.append(LawResult("chain_rule", "skipped", detail={"reason": "C not inside B"}))
            laws.append(LawResult("restricted_complement", "skipped", detail={"reason": "C not inside B"}))
        star_bc = star_cells(B, C, tol)
        laws.append(_unconditional("star_symmetry", star_bc == star_cells(C, B, tol)))
        stable = star_cells(cB, cC, tol) & star_cells(B, cC, tol)
        laws.append(_conditional("star_stability", stable, star_bc))
    else:
        for name in ("de_morgan_intersection", "de_morgan_sum", "involution", "anti_monotone",
                     "chain_rule", "restricted_complement", "star_symmetry", "star_stability"):
            laws.append(LawResult(name, "skipped", detail={"reason": "B or C not inside A"}))

    pre = star_cells(D, B, tol) & star_cells(D, C, tol)
    lhs1, rhs1 = add(D, meet(B, C)), meet(add(D, B), add(D, C))
    laws.append(
        _conditional(
            "distributive_sum",
            eq(lhs1, rhs1),
            pre,
            {"lhs_dim": lhs1.dim.tolist(), "rhs_dim": rhs1.dim.tolist()},
        )
    )
    lhs2, rhs2 = meet(D, add(B, C)), add(meet(D, B), meet(D, C))
    laws.append(
        _conditional(
            "distributive_intersection",
            eq(lhs2, rhs2),
            pre,
            {"lhs_dim": lhs2.dim.tolist(), "rhs_dim": rhs2.dim.tolist()},
        )
    )
    closure = star_cells(D, meet(B, C), tol) & star_cells(D, add(B, C), tol)
    laws.append(_conditional("star_closure", closure, pre))
    return LatticeReport(laws)

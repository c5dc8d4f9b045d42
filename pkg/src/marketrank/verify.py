"""Random instance generators and the invariant suites run by ``verify``.

Each suite draws its own generator from the seed, so results do not depend
on the order in which suites run.
"""
from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .complements import gram_schmidt, is_complement, orthogonal_complement, verify_lattice_laws
from .geometry import arrangement, ranking_partition
from .hedging import kw_decompose, measure_polytope, orthogonal_completion
from .metrics import correlation, delta_c, eta_metric, mu, phi_metric
from .process import (
    IntegrandField,
    covariation,
    integrate,
    integrate_process,
    is_martingale,
    realized_covariation,
)
from .subspace import (
    SubspaceField,
    equals,
    intersect,
    plugin_space,
    realize_generator,
    sum_fields,
)
from .tree import build_tree, conditional_expectation


def random_tree(rng, max_m=4, max_T=3, uniform=None):
    m = int(rng.integers(1, max_m + 1))
    T = int(rng.integers(1, max_T + 1))
    dt = float(rng.choice([1.0, 0.5, 0.25, 1.0 / 3.0]))
    if uniform is None:
        uniform = rng.random() < 0.5
    probs = None if uniform else rng.dirichlet(np.full(m + 1, 3.0)) * 0.9 + 0.1 / (m + 1)
    return build_tree(m, T, dt, probs)


def random_low_rank(rng, shape, rank, integer=False):
    """Stack of matrices of the given per-cell rank (array or int)."""
    C, n, m = shape
    rank = np.broadcast_to(np.asarray(rank), (C,))
    kmax = max(int(rank.max(initial=0)), 1)
    draw = (lambda s: rng.integers(-3, 4, size=s).astype(float)) if integer else rng.standard_normal
    left = draw((C, n, kmax))
    right = draw((C, kmax, m))
    mask = np.arange(kmax)[None, :] < rank[:, None]
    return np.einsum("cnk,ckm->cnm", left * mask[:, None, :], right)


def random_integrand(rng, tree, n=None, deficient=True):
    """Random market; with ``deficient`` some cells get lower rank."""
    if n is None:
        n = int(rng.integers(1, tree.m + 2))
    top = min(n, tree.m)
    if deficient:
        rank = rng.integers(0, top + 1, size=tree.n_cells)
    else:
        rank = np.full(tree.n_cells, top)
    # integer entries create exact degeneracies, so only for deficient draws
    integer = deficient and rng.random() < 0.3
    theta = random_low_rank(rng, (tree.n_cells, n, tree.m), rank, integer)
    return IntegrandField(tree, theta)


def random_field(rng, tree) -> SubspaceField:
    return plugin_space(random_integrand(rng, tree, n=tree.m))


def random_overlapping_pair(rng, tree):
    """Two fields sharing a random common part, so intersections are nontrivial."""
    C, m = tree.n_cells, tree.m
    common = rng.integers(0, m + 1, size=C)
    extra_a = rng.integers(0, m + 1, size=C)
    extra_b = rng.integers(0, m + 1, size=C)
    shared = random_low_rank(rng, (C, m, m), common)
    a_rows = np.concatenate([shared, random_low_rank(rng, (C, m, m), extra_a)], axis=1)
    b_rows = np.concatenate([shared, random_low_rank(rng, (C, m, m), extra_b)], axis=1)
    return plugin_space(IntegrandField(tree, a_rows)), plugin_space(IntegrandField(tree, b_rows))


def random_nested(rng, tree, depth=3):
    """Fields F_0 >= F_1 >= ... built from random combinations of generators."""
    C, m = tree.n_cells, tree.m
    rows = random_low_rank(rng, (C, m, m), rng.integers(0, m + 1, size=C))
    fields = [plugin_space(IntegrandField(tree, rows))]
    for _ in range(depth - 1):
        mix = random_low_rank(rng, (C, m, m), rng.integers(0, m + 1, size=C))
        rows = np.einsum("cij,cjm->cim", mix, rows)
        fields.append(plugin_space(IntegrandField(tree, rows)))
    return fields


def random_inside(rng, field: SubspaceField) -> SubspaceField:
    """Random subfield built from combinations of the basis of ``field``."""
    C, m = field.tree.n_cells, field.m
    mix = random_low_rank(rng, (C, m, m), rng.integers(0, m + 1, size=C))
    return plugin_space(IntegrandField(field.tree, mix @ field.basis))


def random_commuting_family(rng, tree, count):
    """Fields spanned by random subsets of one orthonormal frame per cell.

    Their projectors commute, so every pair has the star property.
    """
    C, m = tree.n_cells, tree.m
    frame, _ = np.linalg.qr(rng.standard_normal((C, m, m)))
    frame = np.swapaxes(frame, 1, 2)
    out = []
    for _ in range(count):
        pick = rng.random((C, m)) < 0.5
        out.append(plugin_space(IntegrandField(tree, frame * pick[:, :, None])))
    return out


@dataclass
class SuiteResult:
    name: str
    cases: int
    failures: int
    first_failure: str | None = None

    @property
    def ok(self) -> bool:
        return self.failures == 0

    def to_dict(self):
        return {
            "name": self.name,
            "cases": self.cases,
            "failures": self.failures,
            "status": "pass" if self.ok else "fail",
            "first_failure": self.first_failure,
        }


def _run(name, cases, rng, check):
    failures, first = 0, None
    for i in range(cases):
        try:
            problem = check(rng)
        except Exception as exc:  # noqa: BLE001
            problem = f"{type(exc).__name__}: {exc}"
        if problem:
            failures += 1
            if first is None:
                first = f"case {i}: {problem}"
    return SuiteResult(name, cases, failures, first)


def _tree_moments(rng):
    tree = random_tree(rng, max_T=4)
    p, d = tree.probs, tree.increments
    mean = np.einsum("cb,cbm->cm", p, d)
    cov = np.einsum("cb,cbi,cbj->cij", p, d, d)
    if np.abs(mean).max() > 1e-12:
        return "driver mean nonzero"
    if np.abs(cov - tree.dt * np.eye(tree.m)).max() > 1e-12:
        return "driver covariance differs from dt I"
    for t in range(tree.T + 1):
        if abs(tree.node_prob[tree.level(t)].sum() - 1) > 1e-12:
            return f"time-{t} probabilities do not sum to 1"
    h = rng.standard_normal(tree.terminal.stop - tree.terminal.start)
    s = int(rng.integers(0, tree.T + 1))
    via = conditional_expectation(tree, conditional_expectation(tree, h, s), 0, s)
    if abs(via[0] - np.dot(tree.node_prob[tree.terminal], h)) > 1e-12:
        return "tower property violated"
    return None


def _processes(rng):
    tree = random_tree(rng)
    theta = random_integrand(rng, tree)
    X = integrate(theta)
    if not is_martingale(X, tol=1e-10):
        return "integral is not a martingale"
    M = rng.standard_normal((tree.n_cells, 2, theta.n))
    direct = integrate(theta.left_multiply(M)).values
    if np.abs(direct - integrate_process(M, X).values).max() > 1e-12 * max(1.0, np.abs(direct).max()):
        return "associativity of integrals violated"
    cov = covariation(theta, theta)
    if np.abs(cov - realized_covariation(X, X)).max() > 1e-10 * max(1.0, np.abs(cov).max()):
        return "covariation differs from realised covariation"
    if np.linalg.eigvalsh(cov).min() < -1e-10:
        return "covariation not positive semidefinite"
    return None


def _dimension_formula(rng):
    tree = random_tree(rng)
    A, B = random_overlapping_pair(rng, tree)
    lhs = sum_fields(A, B).dim + intersect(A, B).dim
    if not np.array_equal(lhs, A.dim + B.dim):
        return "dim(A+B) + dim(A&B) != dim A + dim B"
    return None


def _complement_laws(rng):
    tree = random_tree(rng)
    A, B, C = random_nested(rng, tree)
    report = verify_lattice_laws(A, B, C, random_field(rng, tree))
    if not report.ok:
        return "failed laws: " + ", ".join(law.name for law in report.laws if law.failed)
    B2, C2 = random_inside(rng, A), random_inside(rng, A)
    report = verify_lattice_laws(A, B2, C2, B2)
    if not report.ok:
        return "failed laws on unnested pair: " + ", ".join(law.name for law in report.laws if law.failed)
    A3, B3, C3, D3 = random_commuting_family(rng, tree, 4)
    report = verify_lattice_laws(sum_fields(A3, sum_fields(B3, C3)), B3, C3, D3)
    if not report.ok or report["distributive_sum"].status != "pass":
        return "failed laws on a commuting family"
    return None


def _orthogonal_complement(rng):
    tree = random_tree(rng)
    A_theta = random_integrand(rng, tree)
    mix = rng.standard_normal((tree.n_cells, int(rng.integers(1, 4)), A_theta.n))
    B_theta = A_theta.left_multiply(mix)
    comp = orthogonal_complement(A_theta, B_theta)
    A, B, Cp = plugin_space(A_theta), plugin_space(B_theta), plugin_space(comp)
    if not np.array_equal(A.dim, B.dim + Cp.dim):
        return "dimension additivity violated"
    if np.abs(covariation(B_theta, comp)).max() > 1e-10 * max(1.0, np.abs(B_theta.theta).max()):
        return "complement not orthogonal"
    other = B_theta.left_multiply(random_low_rank(rng, (tree.n_cells, 3, B_theta.n), B_theta.n))
    if equals(plugin_space(other), B) and not equals(plugin_space(orthogonal_complement(A_theta, other)), Cp):
        return "complement depends on the representation of B"
    if not is_complement(A, B, Cp):
        return "orthogonal complement is not a complement"
    return None


def _hedging(rng):
    tree = random_tree(rng)
    theta = random_integrand(rng, tree)
    h = rng.standard_normal(tree.terminal.stop - tree.terminal.start)
    dec = kw_decompose(h, theta)
    scale = max(1.0, np.abs(h).max())
    if np.abs(dec.reconstruct() - h).max() > 1e-10 * scale:
        return "reconstruction error"
    if np.abs(covariation(dec.residual, theta)).max() > 1e-10 * scale * max(1.0, np.abs(theta.theta).max()):
        return "residual not orthogonal to X"
    full = random_integrand(rng, tree, n=tree.m, deficient=False)
    if np.abs(kw_decompose(h, full).residual.theta).max() > 1e-10 * scale:
        return "complete market leaves a residual"
    return None


def _duality(rng):
    tree = random_tree(rng)
    theta = random_integrand(rng, tree)
    poly = measure_polytope(theta)
    dd = plugin_space(theta).dim
    if not np.array_equal(poly.freedom, tree.m - dd):
        return "freedom != m - dd"
    if (abs(delta_c(theta) - 1.0) <= 1e-12) != poly.unique:
        return "delta_c = 1 does not match a unique measure"
    Xp = orthogonal_completion(theta)
    if not measure_polytope(theta.stack(Xp)).unique:
        return "orthogonal completion does not pin the measure"
    return None


def _metrics(rng):
    tree = random_tree(rng)
    B, C, D = (random_field(rng, tree) for _ in range(3))
    if abs(eta_metric(B, C) - eta_metric(C, B)) > 1e-12:
        return "eta not symmetric"
    if eta_metric(B, D) + eta_metric(D, C) - eta_metric(B, C) < -1e-12:
        return "eta triangle inequality"
    if phi_metric(B, C) > eta_metric(B, C) + 1e-12:
        return "phi exceeds eta"
    if (eta_metric(B, C) <= 1e-12) != equals(B, C):
        return "eta zero does not match equality"
    big, mid, small = random_nested(rng, tree)
    if abs(eta_metric(mid, big) - phi_metric(mid, big)) > 1e-12:
        return "eta != phi under containment"
    rho = correlation(B, C)
    if not -1e-12 <= rho <= 1 + 1e-12:
        return "correlation outside [0, 1]"
    if mu(sum_fields(big, small)) > 0:
        lhs = correlation(big, small)
        rhs = correlation(big, mid) * correlation(mid, small)
        if abs(lhs - rhs) > 1e-12:
            return "correlation chain rule"
    return None


def _gram_schmidt(rng):
    tree = random_tree(rng)
    theta = random_integrand(rng, tree)
    Y = gram_schmidt(theta)
    cov = covariation(Y, Y)
    off = cov - np.einsum("cii->ci", cov)[:, :, None] * np.eye(Y.n)
    if np.abs(off).max() > 1e-10 * max(1.0, np.abs(theta.theta).max() ** 2):
        return "rows not orthogonal"
    if not equals(plugin_space(Y), plugin_space(theta)):
        return "plug-in space changed"
    return None


def _round_trips(rng):
    tree = random_tree(rng)
    field = random_field(rng, tree)
    if not equals(plugin_space(realize_generator(field)), field):
        return "realize_generator round trip"
    theta = random_integrand(rng, tree)
    if not equals(plugin_space(arrangement(theta)), plugin_space(theta)):
        return "arrangement changes the plug-in space"
    if not np.array_equal(ranking_partition(theta).label, plugin_space(theta).dim):
        return "labels differ from plug-in dimensions"
    return None


SUITES = {
    "tree_moments": _tree_moments,
    "processes": _processes,
    "dimension_formula": _dimension_formula,
    "complement_laws": _complement_laws,
    "orthogonal_complement": _orthogonal_complement,
    "hedging": _hedging,
    "completeness_duality": _duality,
    "metrics": _metrics,
    "gram_schmidt": _gram_schmidt,
    "round_trips": _round_trips,
}


def run_suites(cases: int = 200, seed: int = 0, names=None, threads: int | None = None) -> list[SuiteResult]:
    """Run the named suites (default: all) with ``cases`` random instances each."""
    names = list(SUITES) if names is None else list(names)
    seeds = np.random.SeedSequence(seed).spawn(len(names))
    if threads is None:
        threads = int(os.environ.get("MARKETRANK_THREADS", "1") or 1)
    jobs = [(n, np.random.default_rng(s)) for n, s in zip(names, seeds)]
    with ThreadPoolExecutor(max_workers=max(1, threads)) as pool:
        return list(pool.map(lambda job: _run(job[0], cases, job[1], SUITES[job[0]]), jobs))

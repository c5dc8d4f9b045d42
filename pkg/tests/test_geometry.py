import numpy as np
import pytest
from hypothesis import given, strategies as st

from marketrank import (
    IntegrandField,
    arrangement,
    build_tree,
    contains,
    equals,
    full_field,
    maximal_extension,
    plugin_space,
    rank,
    ranking_partition,
    strict_complement_condition,
    zero_field,
)
from marketrank.errors import NotContained, RankOutOfRange
from marketrank.market import build_market, parse_market
from marketrank.subspace import from_rows, intersect, sum_fields
from marketrank.verify import random_field, random_inside, random_integrand, random_tree

seeds = st.integers(0, 2**32 - 1)

EX1 = """m = 2
T = 2
set F = t == 0
asset X = [ind(F), 0], [0, 1]
"""

EX2 = """m = 2
T = 3
set D = W[1] > 0
asset X = [ind(D), 1], [1, 1]
"""


def test_ex1_partition_and_rank():
    market = build_market(parse_market(EX1))
    part = ranking_partition(market.theta)
    F = market.sets["F"]
    assert part.phi(0) == market.tree.empty_set()
    assert part.phi(1) == ~F
    assert part.phi(2) == F
    assert rank(market.theta) == 2
    assert part.label.dtype.kind == "i"


def test_ex1_arrangement():
    market = build_market(parse_market(EX1))
    U = arrangement(market.theta)
    assert equals(plugin_space(U), plugin_space(market.theta))
    # first row spans the whole space wherever the rank is one
    F = market.sets["F"].mask
    assert equals(plugin_space(U.rows(0)).__class__ and plugin_space(U), plugin_space(market.theta))
    first = plugin_space(U.rows(0))
    np.testing.assert_array_equal(first.dim, 1)
    np.testing.assert_array_equal(plugin_space(U.rows(1)).dim, F.astype(int))
    np.testing.assert_allclose(np.abs(U.theta[~F, 0]), np.broadcast_to([0.0, 1.0], U.theta[~F, 0].shape), atol=1e-12)


def test_ex2_partition():
    market = build_market(parse_market(EX2))
    part = ranking_partition(market.theta)
    D = market.sets["D"]
    assert part.phi(1) == D
    assert part.phi(2) == ~D
    assert len(D) > 0 and len(~D) > 0


def test_rank_examples():
    tree = build_tree(3, 2)
    assert rank(IntegrandField.identity(tree)) == 3
    assert np.all(ranking_partition(IntegrandField.zeros(tree, 2)).label == 0)
    v = np.array([1.0, -2.0, 0.5])
    assert rank(IntegrandField.constant(tree, np.outer([1.0, 3.0, -2.0], v))) == 1


def test_full_rank_arrangement_has_no_zero_rows():
    tree = build_tree(2, 2)
    U = arrangement(IntegrandField.constant(tree, [[1.0, 1.0], [0.0, 2.0]]))
    assert np.all(np.linalg.norm(U.theta, axis=2) > 0.5)
    np.testing.assert_allclose(U.theta @ np.swapaxes(U.theta, 1, 2), np.broadcast_to(np.eye(2), (tree.n_cells, 2, 2)), atol=1e-12)


@given(seeds)
def test_labels_match_dimensions(seed):
    rng = np.random.default_rng(seed)
    tree = random_tree(rng)
    theta = random_integrand(rng, tree)
    part = ranking_partition(theta)
    np.testing.assert_array_equal(part.label, plugin_space(theta).dim)
    assert sum(part.sizes().values()) == tree.n_cells
    assert sum(part.weights().values()) == pytest.approx(1.0)
    assert equals(plugin_space(arrangement(theta)), plugin_space(theta))


def test_maximal_extension_examples():
    tree = build_tree(2, 2)
    R2 = full_field(tree)
    a = from_rows(tree, [[1.0, 0.0]])
    assert equals(maximal_extension(R2, R2, 2), R2)
    ext = maximal_extension(R2, zero_field(tree), 1)
    np.testing.assert_array_equal(ext.dim, 1)
    assert equals(maximal_extension(R2, a, 2), R2)
    with pytest.raises(NotContained):
        maximal_extension(a, R2, 2)
    with pytest.raises(RankOutOfRange):
        maximal_extension(R2, R2, 1)


@given(seeds)
def test_maximal_extension_is_maximal(seed):
    rng = np.random.default_rng(seed)
    tree = random_tree(rng)
    A = random_field(rng, tree)
    B = random_inside(rng, A)
    r = int(rng.integers(int(B.dim.max(initial=0)), tree.m + 1))
    E = maximal_extension(A, B, r)
    assert contains(A, E) and contains(E, B)
    assert int(E.dim.max(initial=0)) <= r
    # nothing strictly larger fits: every cell is already full or at rank r
    assert np.all((E.dim == A.dim) | (E.dim == r))


def test_strict_complement_examples():
    tree = build_tree(2, 2)
    R2 = IntegrandField.identity(tree)
    assert strict_complement_condition(R2, R2)
    # B maximal inside A: rank pattern follows A
    assert strict_complement_condition(R2, IntegrandField.constant(tree, [[1.0, 1.0], [0.0, 1.0]]))
    theta = np.zeros((tree.n_cells, 1, 2))
    theta[1:, 0, 0] = 1.0
    assert not strict_complement_condition(R2, IntegrandField(tree, theta))
    with pytest.raises(NotContained):
        strict_complement_condition(IntegrandField.constant(tree, [[1.0, 0.0]]), R2)


def test_sum_intersection_dimension_identity_on_lines():
    tree = build_tree(2, 1)
    a, b = from_rows(tree, [[1.0, 0.0]]), from_rows(tree, [[1.0, 1.0]])
    assert np.all(sum_fields(a, b).dim == 2) and np.all(intersect(a, b).dim == 0)


def test_state_dependent_volatility_partition():
    # a one-asset martingale market whose volatility vanishes on part of the tree
    text = "m = 1\nT = 4\nset quiet = W[1] <= -1\nasset X = [0.3 * (1 - quiet) * (2 + W[1])]\n"
    market = build_market(parse_market(text))
    sigma = market.theta.theta[:, 0, 0]
    part = ranking_partition(market.theta)
    np.testing.assert_array_equal(part.phi(0).mask, sigma == 0)
    np.testing.assert_array_equal(part.phi(1).mask, sigma != 0)
    assert len(part.phi(0)) > 0 and len(part.phi(1)) > 0

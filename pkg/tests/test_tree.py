import numpy as np
import pytest
from hypothesis import given, strategies as st

from marketrank import build_tree, conditional_expectation, predictable_expectation
from marketrank.errors import DegenerateProbability, NonPositiveDimension, TimeOrderViolation
from marketrank.tree import martingale_of
from marketrank.verify import random_tree

import oracles

seeds = st.integers(0, 2**32 - 1)


def test_one_dimensional_step_is_plus_minus_one():
    tree = build_tree(1, 1, 1.0)
    np.testing.assert_allclose(tree.increments[0, :, 0], [1.0, -1.0], atol=1e-14)
    np.testing.assert_allclose(tree.probs[0], [0.5, 0.5])


def test_two_dimensional_simplex():
    tree = build_tree(2, 1, 1.0)
    d = tree.increments[0]
    np.testing.assert_allclose(np.linalg.norm(d, axis=1), np.sqrt(2.0))
    for i in range(3):
        for j in range(i + 1, 3):
            cos = d[i] @ d[j] / (np.linalg.norm(d[i]) * np.linalg.norm(d[j]))
            assert cos == pytest.approx(-0.5, abs=1e-12)
    np.testing.assert_allclose(d.T @ d / 3, np.eye(2), atol=1e-12)
    # first vertex points along the first axis
    assert d[0, 1] == pytest.approx(0.0, abs=1e-14) and d[0, 0] > 0


def test_skewed_two_point_step_matches_closed_form():
    tree = build_tree(1, 1, 1.0, probs=[0.7, 0.3])
    up, down = oracles.two_point_increments(0.7, 1.0)
    np.testing.assert_allclose(tree.increments[0, :, 0], [up, down], atol=1e-12)
    np.testing.assert_allclose(tree.increments[0, :, 0], [0.6547, -1.5275], atol=1e-4)


@given(seeds)
def test_moment_identities(seed):
    tree = random_tree(np.random.default_rng(seed), max_T=3)
    p, d = tree.probs, tree.increments
    np.testing.assert_allclose(np.einsum("cb,cbm->cm", p, d), 0.0, atol=1e-12)
    cov = np.einsum("cb,cbi,cbj->cij", p, d, d)
    np.testing.assert_allclose(cov, np.broadcast_to(tree.dt * np.eye(tree.m), cov.shape), atol=1e-12)


@given(seeds)
def test_slices_carry_unit_mass(seed):
    tree = random_tree(np.random.default_rng(seed))
    for t in range(tree.T + 1):
        assert tree.node_prob[tree.level(t)].sum() == pytest.approx(1.0, abs=1e-12)
    assert tree.measure().weight.sum() == pytest.approx(1.0, abs=1e-12)


@given(seeds)
def test_tower_property(seed):
    rng = np.random.default_rng(seed)
    tree = random_tree(rng, max_T=4)
    h = rng.standard_normal(tree.terminal.stop - tree.terminal.start)
    direct = conditional_expectation(tree, h, 0)
    for s in range(tree.T + 1):
        mid = conditional_expectation(tree, h, s)
        np.testing.assert_allclose(conditional_expectation(tree, mid, 0, source_time=s), direct, atol=1e-12)


def test_constant_and_driver_conditional_expectations():
    tree = build_tree(2, 3, 0.5)
    term = tree.terminal
    np.testing.assert_allclose(conditional_expectation(tree, np.full(term.stop - term.start, 4.0), 1), 4.0)
    for t in range(tree.T + 1):
        np.testing.assert_allclose(
            conditional_expectation(tree, tree.W[term, 0], t), tree.W[tree.level(t), 0], atol=1e-12
        )


def test_second_moment_of_driver():
    tree = build_tree(1, 2, 1.0)
    h = tree.W[tree.terminal, 0] ** 2
    value = conditional_expectation(tree, h, 0)[0]
    assert value == pytest.approx(2.0, abs=1e-12)
    assert value == pytest.approx(oracles.second_moment_by_paths(1.0, 2), abs=1e-12)


def test_predictable_expectation_examples():
    tree = build_tree(2, 2)
    mu = tree.measure()
    assert predictable_expectation(np.ones(tree.n_cells), mu) == pytest.approx(1.0)
    assert mu.of(tree.time_set(lambda t: t == 0)) == pytest.approx(0.5)
    dd = np.where(tree.cell_times == 0, 2, 1)
    assert predictable_expectation(dd, mu) == pytest.approx(1.5, abs=1e-12)


def test_martingale_of_matches_conditional_expectation():
    tree = build_tree(2, 2)
    h = np.arange(tree.terminal.stop - tree.terminal.start, dtype=float)
    full = martingale_of(tree, h)
    for t in range(tree.T + 1):
        np.testing.assert_allclose(full[tree.level(t)], conditional_expectation(tree, h, t), atol=1e-12)


def test_breadth_first_children():
    tree = build_tree(2, 2)
    k = tree.branching
    for c in range(tree.n_cells):
        kids = np.arange(k * c + 1, k * c + k + 1)
        np.testing.assert_allclose(tree.W[kids] - tree.W[c], tree.increments[c], atol=1e-14)
        assert np.all(tree.times[kids] == tree.times[c] + 1)


def test_predictable_set_algebra():
    tree = build_tree(1, 3)
    F = tree.time_set(lambda t: t == 0)
    G = tree.time_set(lambda t: t <= 1)
    assert (F & G) == F and (F | G) == G
    assert len(~F) == tree.n_cells - 1
    assert (F | ~F) == tree.full_set() and (F & ~F) == tree.empty_set()


@pytest.mark.parametrize(
    "kwargs, error",
    [
        (dict(m=0, T=1), NonPositiveDimension),
        (dict(m=1, T=0), NonPositiveDimension),
        (dict(m=1, T=1, dt=0.0), NonPositiveDimension),
        (dict(m=1, T=1, probs=[1.0, 0.0]), DegenerateProbability),
        (dict(m=1, T=1, probs=[0.2, 0.2]), DegenerateProbability),
        (dict(m=2, T=1, probs=[0.5, 0.5]), DegenerateProbability),
    ],
)
def test_invalid_builds(kwargs, error):
    with pytest.raises(error):
        build_tree(**kwargs)


def test_time_order_is_enforced():
    tree = build_tree(1, 2)
    with pytest.raises(TimeOrderViolation):
        conditional_expectation(tree, tree.W[tree.level(1), 0], 2, source_time=1)

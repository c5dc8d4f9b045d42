import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given, strategies as st

from marketrank import _kernels
from marketrank.verify import random_integrand, random_tree

BACKENDS = [_kernels.python_backend]
if _kernels.compiled_backend is not None:
    BACKENDS.append(_kernels.compiled_backend)

seeds = st.integers(0, 2**32 - 1)


def _case(seed):
    rng = np.random.default_rng(seed)
    tree = random_tree(rng, max_T=4)
    return rng, tree, random_integrand(rng, tree)


@pytest.mark.parametrize("backend", BACKENDS, ids=lambda b: b.__name__.rsplit(".", 1)[-1])
@given(seed=seeds)
def test_backends_agree_with_reference(backend, seed):
    rng, tree, theta = _case(seed)
    ref = _kernels.python_backend
    np.testing.assert_allclose(
        backend.integrate(theta.theta, tree.increments), ref.integrate(theta.theta, tree.increments), atol=1e-12
    )
    values = rng.standard_normal((tree.n_nodes, 3))
    np.testing.assert_allclose(
        backend.child_average(values, tree.probs), ref.child_average(values, tree.probs), atol=1e-12
    )
    stop = tree.level_offset(tree.T - 1) if tree.T > 1 else 0
    np.testing.assert_allclose(
        backend.backward_induction(values, tree.probs, tree.n_cells),
        ref.backward_induction(values, tree.probs, tree.n_cells),
        atol=1e-12,
    )
    np.testing.assert_allclose(
        backend.backward_induction(values, tree.probs, stop), ref.backward_induction(values, tree.probs, stop), atol=1e-12
    )
    np.testing.assert_allclose(backend.gram_schmidt(theta.theta, 1e-9), ref.gram_schmidt(theta.theta, 1e-9), atol=1e-10)


@pytest.mark.parametrize("backend", BACKENDS, ids=lambda b: b.__name__.rsplit(".", 1)[-1])
def test_kernels_accept_read_only_inputs(backend):
    tree = random_tree(np.random.default_rng(3))
    theta = np.ones((tree.n_cells, 1, tree.m))
    theta.setflags(write=False)
    out = backend.integrate(theta, tree.increments)
    assert out.shape == (tree.n_nodes, 1)


def test_pure_switch_selects_python():
    code = "import marketrank._kernels as k; print(k.BACKEND)"
    env = {"MARKETRANK_PURE": "1", "PATH": "/usr/bin:/bin"}
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"


def test_compiled_backend_is_active_when_built():
    if _kernels.compiled_backend is None:
        pytest.skip("compiled extension not built")
    expected = "python" if os.environ.get("MARKETRANK_PURE") else "cython"
    assert _kernels.BACKEND == expected

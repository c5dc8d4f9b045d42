"""Brute-force reference computations kept independent of the package.

Everything here enumerates paths or cells by hand with plain numpy and never
imports ``marketrank``.
"""
import itertools

import numpy as np


def two_point_increments(p_up, dt):
    """Closed-form two-point martingale step with variance ``dt``."""
    up = np.sqrt(dt * (1.0 - p_up) / p_up)
    down = -np.sqrt(dt * p_up / (1.0 - p_up))
    return up, down


def enumerate_cells(m, T):
    """Yield (time, probability, branch-history) for every predictable cell
    of a uniform (m+1)-ary tree."""
    k = m + 1
    for t in range(T):
        for hist in itertools.product(range(k), repeat=t):
            yield t, (1.0 / k) ** t, hist


def ex1_dimension_average(m=2, T=2):
    """Average of rank(theta)/m under P x uniform-time for the market
    (1_{t=0} W^1, W^2)."""
    total = 0.0
    for t, prob, _ in enumerate_cells(m, T):
        theta = np.array([[1.0 if t == 0 else 0.0, 0.0], [0.0, 1.0]])
        total += prob / T * np.linalg.matrix_rank(theta) / m
    return float(total)


def second_moment_by_paths(dt=1.0, T=2):
    """E[(W_T)^2] for the symmetric m=1 tree, by listing all 2^T paths."""
    acc = 0.0
    for path in itertools.product((1.0, -1.0), repeat=T):
        acc += 0.5 ** T * (np.sqrt(dt) * sum(path)) ** 2
    return float(acc)


if __name__ == "__main__":
    print("delta_c(ex1, m=2, T=2) =", repr(ex1_dimension_average()))
    print("E[W_2^2] =", second_moment_by_paths())
    print("two-point (0.7, dt=1) =", two_point_increments(0.7, 1.0))

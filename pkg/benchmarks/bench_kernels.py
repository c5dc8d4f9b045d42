"""Compare the compiled and numpy tree kernels.

    python3 benchmarks/bench_kernels.py [--m 4] [--T 6] [--repeat 5]
"""
import argparse
import timeit

import numpy as np

from marketrank import _kernels, build_tree


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--m", type=int, default=4)
    parser.add_argument("--T", type=int, default=6)
    parser.add_argument("--n", type=int, default=3, help="assets per market")
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args()

    tree = build_tree(args.m, args.T)
    rng = np.random.default_rng(0)
    theta = rng.standard_normal((tree.n_cells, args.n, args.m))
    values = rng.standard_normal((tree.n_nodes, 2))
    jobs = {
        "integrate": lambda k: k.integrate(theta, tree.increments),
        "child_average": lambda k: k.child_average(values, tree.probs),
        "backward_induction": lambda k: k.backward_induction(values, tree.probs, tree.n_cells),
        "gram_schmidt": lambda k: k.gram_schmidt(theta, 1e-9),
    }
    backends = {"python": _kernels.python_backend}
    if _kernels.compiled_backend is not None:
        backends["cython"] = _kernels.compiled_backend
    print(f"m={args.m} T={args.T} n={args.n}: {tree.n_cells} cells, {tree.n_nodes} nodes")
    print(f"{'kernel':<20}" + "".join(f"{name:>12}" for name in backends) + f"{'speedup':>10}")
    for name, job in jobs.items():
        best = {}
        for label, backend in backends.items():
            best[label] = min(timeit.repeat(lambda: job(backend), number=1, repeat=args.repeat))
        ratio = best["python"] / best["cython"] if "cython" in best else float("nan")
        print(f"{name:<20}" + "".join(f"{best[b] * 1e3:>10.2f}ms" for b in backends) + f"{ratio:>9.1f}x")


if __name__ == "__main__":
    main()

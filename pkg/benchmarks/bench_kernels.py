"""Time the compiled kernels against the numpy fallback on the same inputs.

    python benchmarks/bench_kernels.py [--repeat 5]

Prints the best-of-N wall time per kernel and backend, the speed-up, and
whether both backends returned identical results.
"""

import argparse
import timeit

import numpy as np

from voreal import _backend


def workloads(rng):
    sites = rng.random((60, 2))
    points = rng.random((20_000, 2))
    owner = np.sort(rng.integers(0, 60, 5_000))
    grouped = rng.random((5_000, 2))
    order = np.lexsort((grouped[:, 1], grouped[:, 0], owner))
    grouped, owner = grouped[order], owner[order]
    starts = np.searchsorted(owner, np.arange(61)).astype(np.int64)
    return {
        "nearest_sites (20k pts, 60 sites)": ("nearest_sites", (points, sites)),
        "cell_areas_2d (60 sites)": ("cell_areas_2d", (sites, 0.0, 0.0, 1.0, 1.0)),
        "grouped_hull_areas_2d (5k pts, 60 groups)": ("grouped_hull_areas_2d", (grouped, starts)),
    }


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)

    fast, slow = _backend.compiled_kernels, _backend.python_kernels
    if fast is None:
        print("compiled kernels not built; only the python fallback is available")
    print(f"{'kernel':<44}{'cython ms':>11}{'python ms':>11}{'speed-up':>10}  same")
    for label, (name, call_args) in workloads(np.random.default_rng(args.seed)).items():
        py_fn = getattr(slow, name)
        t_py = min(timeit.repeat(lambda: py_fn(*call_args), number=1, repeat=args.repeat))
        if fast is None:
            print(f"{label:<44}{'-':>11}{t_py * 1e3:>11.3f}{'-':>10}  -")
            continue
        c_fn = getattr(fast, name)
        t_c = min(timeit.repeat(lambda: c_fn(*call_args), number=1, repeat=args.repeat))
        same = np.array_equal(np.asarray(c_fn(*call_args)), np.asarray(py_fn(*call_args)))
        print(f"{label:<44}{t_c * 1e3:>11.3f}{t_py * 1e3:>11.3f}{t_py / t_c:>9.1f}x  {same}")


if __name__ == "__main__":
    main()

"""Time the numba kernels against the pure-numpy fallback.

Usage::

    python3 benchmarks/bench_kernels.py --pairs 20000 --repeat 5
    python3 benchmarks/bench_kernels.py --pipeline   # also time a full singularity pass
"""
import argparse
import time

import numpy as np

from twistspin import kernels


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def kernel_cases(n, rng):
    P3, Q3 = rng.standard_normal((2, n, 3, 3))
    P4, Q4 = rng.standard_normal((2, n, 3, 4))
    A, B, C, D = rng.standard_normal((4, n, 2))
    return {
        "tri_tri_3d": lambda: kernels.tri_tri_3d(P3, Q3, 1e-12, 0.0, 1e-9),
        "tri_tri_4d": lambda: kernels.tri_tri_4d(P4, Q4),
        "seg_seg_2d": lambda: kernels.seg_seg_2d(A, B, C, D),
    }


def pipeline_case():
    from twistspin.arc import default_twist_ball, make_trefoil_arc
    from twistspin.diagram import compute_singularity_set, project_generic
    from twistspin.spin import twist_spin

    arc = make_trefoil_arc()
    d = project_generic(twist_spin(arc, default_twist_ball(arc), 2, 48), "x", 1e-6, 0)

    def run():
        d._sing = None  # drop the cached result
        compute_singularity_set(d)
    return run


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--pairs", type=int, default=20000)
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--pipeline", action="store_true")
    args = ap.parse_args(argv)

    cases = kernel_cases(args.pairs, np.random.default_rng(args.seed))
    if args.pipeline:
        cases["singularity set (n=2, m=48)"] = pipeline_case()
    backends = ["numpy"]
    try:
        kernels.set_backend("numba")
        backends.append("numba")
    except RuntimeError:
        print("numba unavailable; timing numpy only")

    old = kernels.get_backend()
    rows = {}
    for b in backends:
        kernels.set_backend(b)
        for name, fn in cases.items():
            fn()  # warm-up, triggers JIT compilation
            rows.setdefault(name, {})[b] = best_of(fn, args.repeat)
    kernels.set_backend(old)

    print(f"{'kernel':30s} {'numpy [ms]':>12s} {'numba [ms]':>12s} {'speedup':>8s}")
    for name, t in rows.items():
        nb = t.get("numba")
        nb_txt = f"{1e3 * nb:12.2f}" if nb else f"{'-':>12s}"
        sp = f"{t['numpy'] / nb:8.1f}" if nb else f"{'-':>8s}"
        print(f"{name:30s} {1e3 * t['numpy']:12.2f} {nb_txt} {sp}")


if __name__ == "__main__":
    main()

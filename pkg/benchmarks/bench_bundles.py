"""Benchmark the compiled quadrature kernels against the pure-numpy path.

Times (a) single averaged-bundle evaluations per builtin and (b) a short
symplectic trajectory, with the compiled extension and with the fallback.

Usage: python benchmarks/bench_bundles.py [--steps N]
"""

import argparse
import time

import numpy as np

import magwp
import magwp.averaging as averaging
from magwp.averaging import _bundle_numpy, position_nodes


def state_for(field, quad_N):
    d = field.d
    q = np.linspace(0.8, 1.2, d)
    p = np.zeros(d)
    p[0] = 1.0
    pk = magwp.GaussianPacket(eps=1e-3, q=q, p=p, Q=np.eye(d), P=1j * np.eye(d))
    return magwp.vectorize(pk), magwp.hermite_rule(quad_N)


def time_call(fn, min_time=0.3):
    fn()  # warm up
    n, t0 = 0, time.perf_counter()
    while time.perf_counter() - t0 < min_time:
        fn()
        n += 1
    return (time.perf_counter() - t0) / n


def bench_bundles():
    cases = [
        ("trig2d (N=7)", magwp.make_builtin("trig2d", alpha=0.5), 7, 0.3),
        ("penning (N=5)", magwp.make_builtin("penning"), 5, 0.0),
        ("sym_rotation (N=11)", magwp.make_builtin("sym_rotation"), 11, 0.0),
    ]
    print(f"{'bundle':24s} {'numpy':>12s} {'compiled':>12s} {'speedup':>9s}")
    for label, field, N, t in cases:
        st, rule = state_for(field, N)
        xs, ws = position_nodes(st, rule)
        xs = np.ascontiguousarray(xs)
        t_np = time_call(lambda: _bundle_numpy(field, t, xs, ws))
        if averaging._ext is not None:
            t_ext = time_call(lambda: averaging._bundle_ext(field, t, xs, ws))
            print(f"{label:24s} {t_np * 1e6:10.1f}us {t_ext * 1e6:10.1f}us {t_np / t_ext:8.1f}x")
        else:
            print(f"{label:24s} {t_np * 1e6:10.1f}us {'n/a':>12s} {'':>9s}")


def bench_trajectory(n_steps):
    field = magwp.make_builtin("trig2d", alpha=0.5)
    st0, rule = state_for(field, 7)
    tau = 0.01

    def run():
        averaging.clear_bundle_cache()
        st = st0
        for n in range(n_steps):
            st = magwp.strang_step(st, tau, n * tau, field, rule)
        return st

    results = {}
    for use_ext in (False, True):
        if use_ext and averaging._ext is None:
            continue
        averaging.USE_EXT = use_ext
        t0 = time.perf_counter()
        run()
        results["compiled" if use_ext else "numpy"] = time.perf_counter() - t0
    print(f"\ntrajectory: {n_steps} symplectic2 steps on trig2d (N=7)")
    for name, dt in results.items():
        print(f"  {name:9s} {dt:7.2f}s  ({dt / n_steps * 1e3:.3f} ms/step)")
    if len(results) == 2:
        print(f"  speedup   {results['numpy'] / results['compiled']:.2f}x")


if __name__ == "__main__":
    ap = argparse.ArgumentParser()
    ap.add_argument("--steps", type=int, default=2000)
    args = ap.parse_args()
    print(f"quadrature backend at import: {magwp.backend()}\n")
    bench_bundles()
    bench_trajectory(args.steps)

"""Compare the compiled flow/algebra kernels against the pure-Python twins.

Usage: python benchmarks/bench_backends.py [--repeat N]

Three workloads:
  * flow kernel    — adaptive integration of a two-dimensional nonlinear
                     right-hand side at tight tolerance (the hot loop of
                     every action reconstruction);
  * exterior mul   — sparse supernumber products at N = 10 generators;
  * end to end     — a full scenario run (subprocess, LIACT_BACKEND forced).
"""

import argparse
import os
import subprocess
import sys
import time

import numpy as np

from liact import backends
from liact.backends import get_impl
from liact.expr import Context, compile_real, parse


def time_best(fn, repeat):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def flow_workload(impl):
    ctx = Context(("x", "y"), ())
    programs = [
        compile_real(parse("y - 0.3*x^3 + sin(x)*0.25", ctx)),
        compile_real(parse("exp(0.1*x) - y^2/(1 + x^2)", ctx)),
    ]
    inf = np.inf

    def run():
        for x0 in np.linspace(-0.5, 0.5, 20):
            backends.integrate(
                programs, [x0, 0.1], 0.0, 6.0,
                rtol=1e-10, atol=1e-10, max_steps=100000,
                lo=np.array([-inf, -inf]), hi=np.array([inf, inf]),
                boundary_tol=1e-9, period=np.array([0.0, 0.0]),
                blowup_limit=1e8, min_step_frac=1e-14, impl=impl,
            )

    return run


def gr_workload(impl):
    rng = np.random.default_rng(0)
    n = 10
    pairs = []
    for _ in range(60):
        masks_a = sorted(rng.choice(1 << n, size=12, replace=False).tolist())
        masks_b = sorted(rng.choice(1 << n, size=12, replace=False).tolist())
        ca = rng.uniform(-1, 1, 12).tolist()
        cb = rng.uniform(-1, 1, 12).tolist()
        pairs.append((masks_a, ca, masks_b, cb))

    def run():
        for ma, ca, mb, cb in pairs:
            impl.gr_mul_terms(n, ma, ca, mb, cb)

    return run


def end_to_end(backend, out_dir):
    from liact import cli

    scenario = os.path.join(str(cli.scenario_dir()), "affine.json")
    env = dict(os.environ, LIACT_BACKEND=backend)
    t0 = time.perf_counter()
    subprocess.run(
        [sys.executable, "-m", "liact.cli", "run", scenario, "--out", out_dir],
        env=env, check=True, stdout=subprocess.DEVNULL,
    )
    return time.perf_counter() - t0


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--repeat", type=int, default=5)
    parser.add_argument("--skip-e2e", action="store_true")
    args = parser.parse_args()

    pure = get_impl("pure")
    try:
        compiled = get_impl("compiled")
    except ImportError:
        print("compiled extension not available; nothing to compare")
        return 1

    rows = []
    for label, factory in (("flow kernel", flow_workload), ("exterior mul", gr_workload)):
        tp = time_best(factory(pure), args.repeat)
        tc = time_best(factory(compiled), args.repeat)
        rows.append((label, tp, tc))

    if not args.skip_e2e:
        import tempfile

        with tempfile.TemporaryDirectory() as tmp:
            tp = min(end_to_end("pure", tmp) for _ in range(max(1, args.repeat // 2)))
            tc = min(end_to_end("compiled", tmp) for _ in range(max(1, args.repeat // 2)))
        rows.append(("end to end (affine)", tp, tc))

    print(f"{'workload':<22}{'pure [ms]':>12}{'compiled [ms]':>15}{'speedup':>10}")
    for label, tp, tc in rows:
        print(f"{label:<22}{tp * 1e3:>12.2f}{tc * 1e3:>15.2f}{tp / tc:>9.1f}x")
    return 0


if __name__ == "__main__":
    sys.exit(main())

"""Parity between the pure-Python kernels and the compiled extension.

The two are written to be bit-identical; if the extension is unavailable
the comparisons are skipped and the suite runs on the fallback alone.
"""

import numpy as np
import pytest

from liact import backends
from liact.backends import get_impl
from liact.backends.ops import flatten_programs
from liact.expr import Context, compile_real, parse

try:
    compiled = get_impl("compiled")
except ImportError:
    compiled = None

pure = get_impl("pure")

needs_compiled = pytest.mark.skipif(compiled is None, reason="extension not built")


def _random_terms(rng, n, count):
    masks = sorted(rng.choice(1 << n, size=count, replace=False).tolist())
    coeffs = [float(c) for c in rng.integers(-6, 7, size=count)]
    return masks, coeffs


@needs_compiled
def test_gr_mul_bit_identical():
    rng = np.random.default_rng(0)
    for _ in range(200):
        n = int(rng.integers(1, 7))
        ma, ca = _random_terms(rng, n, int(rng.integers(1, min(6, 1 << n) + 1)))
        mb, cb = _random_terms(rng, n, int(rng.integers(1, min(6, 1 << n) + 1)))
        out_p = pure.gr_mul_terms(n, ma, ca, mb, cb)
        out_c = compiled.gr_mul_terms(n, ma, ca, mb, cb)
        assert out_p[0] == list(out_c[0])
        assert out_p[1] == list(out_c[1])


def _sample_programs(rng):
    ctx = Context(("x", "y"), ())
    srcs = [
        "y - 0.3*x^3 + sin(x)*0.25",
        "exp(0.1*x) - y^2/(1 + x^2)",
    ]
    return [compile_real(parse(s, ctx)) for s in srcs]


def _integrate(impl, programs, lo, hi, period, t1=4.0):
    return backends.integrate(
        programs, [0.4, -0.2], 0.0, t1,
        rtol=1e-10, atol=1e-10, max_steps=100000,
        lo=np.asarray(lo), hi=np.asarray(hi), boundary_tol=1e-9,
        period=np.asarray(period), blowup_limit=1e8, min_step_frac=1e-14,
        impl=impl,
    )


@needs_compiled
def test_integration_bit_identical():
    rng = np.random.default_rng(1)
    programs = _sample_programs(rng)
    inf = np.inf
    for lo, hi, period in [
        ((-inf, -inf), (inf, inf), (0.0, 0.0)),
        ((-2.0, -inf), (2.0, inf), (0.0, 0.0)),
        ((-inf, -inf), (inf, inf), (1.0, 0.0)),
    ]:
        a = _integrate(pure, programs, lo, hi, period)
        b = _integrate(compiled, programs, lo, hi, period)
        assert a.status == b.status
        assert a.naccept == b.naccept and a.nreject == b.nreject
        assert np.array_equal(a.ts, b.ts)
        assert np.array_equal(a.ys, b.ys)
        assert np.array_equal(a.fs, b.fs)
        assert a.err_est == b.err_est


@needs_compiled
def test_eval_program_bit_identical():
    rng = np.random.default_rng(2)
    programs = _sample_programs(rng)
    codes, starts, consts, max_stack, _ = flatten_programs(programs)
    for _ in range(100):
        x, y = rng.uniform(-2, 2, 2)
        for j in range(2):
            vp = pure.eval_program_flat(codes, starts, consts, max_stack, j, [x, y])
            vc = compiled.eval_program_flat(codes, starts, consts, max_stack, j, [x, y])
            assert vp == vc


def test_division_by_zero_raises_in_active_backend():
    ctx = Context(("x",), ())
    prog = compile_real(parse("1/x", ctx))
    with pytest.raises(ZeroDivisionError):
        backends.eval_program(prog, [0.0])


def test_backend_name_reported():
    assert backends.backend_name() in ("pure", "compiled")

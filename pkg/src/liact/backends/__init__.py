"""Backend selection: compiled kernels when available, pure Python otherwise.

Set ``LIACT_BACKEND=pure`` or ``LIACT_BACKEND=compiled`` to force a choice
(``compiled`` raises if the extension is missing); the default ``auto``
prefers the extension.
"""

import os

from . import pure as _pure
from .ops import flatten_programs

_choice = os.environ.get("LIACT_BACKEND", "auto")
if _choice not in ("auto", "pure", "compiled"):
    raise RuntimeError(f"LIACT_BACKEND must be auto, pure or compiled, got {_choice!r}")

if _choice == "pure":
    _impl = _pure
else:
    try:
        from liact import _kernels as _impl
    except ImportError:
        if _choice == "compiled":
            raise
        _impl = _pure


def backend_name():
    return _impl.NAME


def get_impl(name=None):
    """Return a backend module by name (for benchmarks and parity tests)."""
    if name in (None, backend_name()):
        return _impl
    if name == "pure":
        return _pure
    if name == "compiled":
        from liact import _kernels

        return _kernels
    raise ValueError(f"unknown backend {name!r}")


def gr_mul_terms(n, masks_a, coeffs_a, masks_b, coeffs_b):
    return _impl.gr_mul_terms(n, masks_a, coeffs_a, masks_b, coeffs_b)


def eval_program(program, values):
    """Evaluate one compiled expression at a real point."""
    codes, starts, consts, max_stack, _ = flatten_programs([program])
    return _impl.eval_program_flat(codes, starts, consts, max_stack, 0, list(values))


def integrate(programs, y0, t0, t1, *, rtol, atol, max_steps, lo, hi,
              boundary_tol, period, blowup_limit, min_step_frac, impl=None):
    """Run the flow kernel on one compiled RHS (one program per coordinate)."""
    codes, starts, consts, max_stack, _ = flatten_programs(programs)
    mod = impl if impl is not None else _impl
    return mod.integrate_programs(
        codes, starts, consts, max_stack, y0, t0, t1, rtol, atol, max_steps,
        lo, hi, boundary_tol, period, blowup_limit, min_step_frac,
    )

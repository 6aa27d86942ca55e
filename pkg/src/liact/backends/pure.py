"""Pure-Python kernels: exterior-algebra product, bytecode evaluation and
the adaptive Dormand-Prince flow loop.

This is the fallback twin of the Cython module ``liact._kernels``; the two
are written loop-for-loop identically so results match bit for bit. Keep
any change here in sync with the .pyx file.
"""

import math

import numpy as np

from .ops import (
    OP_ADD,
    OP_CONST,
    OP_COS,
    OP_DIV,
    OP_EXP,
    OP_MUL,
    OP_NEG,
    OP_POW,
    OP_SIN,
    OP_SUB,
    OP_VAR,
    RawTrajectory,
)
from . import rkconst as rk

NAME = "pure"


def gr_mul_terms(n, masks_a, coeffs_a, masks_b, coeffs_b):
    """Multiply two exterior-algebra elements given as sorted sparse terms.

    Returns (masks, coeffs) sorted ascending by mask, zero terms dropped.
    Generator subsets are bitmasks; the product sign is the parity of the
    transposition count that merges the two ascending index lists.
    """
    acc = [0.0] * (1 << n)
    for ia in range(len(masks_a)):
        ma = masks_a[ia]
        ca = coeffs_a[ia]
        for ib in range(len(masks_b)):
            mb = masks_b[ib]
            if ma & mb:
                continue
            swaps = 0
            rest = mb
            while rest:
                j = (rest & -rest).bit_length() - 1
                swaps += (ma >> (j + 1)).bit_count()
                rest &= rest - 1
            if swaps & 1:
                acc[ma | mb] -= ca * coeffs_b[ib]
            else:
                acc[ma | mb] += ca * coeffs_b[ib]
    masks = []
    coeffs = []
    for m in range(1 << n):
        if acc[m] != 0.0:
            masks.append(m)
            coeffs.append(acc[m])
    return masks, coeffs


def _ipow(x, n):
    r = 1.0
    b = x
    while n:
        if n & 1:
            r *= b
        n >>= 1
        if n:
            b *= b
    return r


def _eval(code, i0, i1, consts, values, stack):
    sp = 0
    for i in range(i0, i1):
        op = code[i, 0]
        arg = code[i, 1]
        if op == OP_CONST:
            stack[sp] = consts[arg]
            sp += 1
        elif op == OP_VAR:
            stack[sp] = values[arg]
            sp += 1
        elif op == OP_ADD:
            sp -= 1
            stack[sp - 1] = stack[sp - 1] + stack[sp]
        elif op == OP_SUB:
            sp -= 1
            stack[sp - 1] = stack[sp - 1] - stack[sp]
        elif op == OP_MUL:
            sp -= 1
            stack[sp - 1] = stack[sp - 1] * stack[sp]
        elif op == OP_DIV:
            sp -= 1
            if stack[sp] == 0.0:
                raise ZeroDivisionError("float division by zero")
            stack[sp - 1] = stack[sp - 1] / stack[sp]
        elif op == OP_NEG:
            stack[sp - 1] = -stack[sp - 1]
        elif op == OP_POW:
            stack[sp - 1] = _ipow(stack[sp - 1], arg)
        elif op == OP_SIN:
            stack[sp - 1] = math.sin(stack[sp - 1])
        elif op == OP_COS:
            stack[sp - 1] = math.cos(stack[sp - 1])
        elif op == OP_EXP:
            stack[sp - 1] = math.exp(stack[sp - 1])
    return stack[sp - 1]


def eval_program_flat(codes, starts, consts, max_stack, j, values):
    stack = [0.0] * max_stack
    return _eval(codes, starts[j], starts[j + 1], consts, values, stack)


def _rhs(codes, starts, consts, dim, y, period, stack, wrapped, out):
    for j in range(dim):
        if period[j] > 0.0:
            wrapped[j] = y[j] - period[j] * math.floor(y[j] / period[j])
        else:
            wrapped[j] = y[j]
    for j in range(dim):
        out[j] = _eval(codes, starts[j], starts[j + 1], consts, wrapped, stack)


def _hermite(y0, f0, y1, f1, h, theta, dim, out):
    t2 = theta * theta
    t3 = t2 * theta
    h00 = 2.0 * t3 - 3.0 * t2 + 1.0
    h10 = t3 - 2.0 * t2 + theta
    h01 = -2.0 * t3 + 3.0 * t2
    h11 = t3 - t2
    for j in range(dim):
        out[j] = h00 * y0[j] + h10 * h * f0[j] + h01 * y1[j] + h11 * h * f1[j]


def integrate_programs(
    codes,
    starts,
    consts,
    max_stack,
    y0,
    t0,
    t1,
    rtol,
    atol,
    max_steps,
    lo,
    hi,
    boundary_tol,
    period,
    blowup_limit,
    min_step_frac,
):
    """Adaptive DP5(4) integration of dy/dt = P(y) with chart guards.

    y0/lo/hi/period are float lists or 1-d arrays of equal length; lo/hi are
    -inf/+inf for unconstrained coordinates and period[j] > 0 marks a
    periodic coordinate (wrapped before each RHS evaluation, state itself
    kept unwrapped). Stops at t1, at a chart boundary (status ESCAPED) or
    on blow-up / step underflow (status BLOWUP).
    """
    dim = len(y0)
    span = t1 - t0
    direction = 1.0 if span >= 0.0 else -1.0
    span_abs = abs(span)

    stack = [0.0] * max_stack
    wrapped = [0.0] * dim
    y = [float(v) for v in y0]
    f = [0.0] * dim
    _rhs(codes, starts, consts, dim, y, period, stack, wrapped, f)

    ts = [t0]
    ys = [list(y)]
    fs = [list(f)]

    # starting step size (classic two-trial heuristic)
    d0 = 0.0
    d1 = 0.0
    for j in range(dim):
        sc = atol + rtol * abs(y[j])
        q0 = y[j] / sc
        q1 = f[j] / sc
        d0 += q0 * q0
        d1 += q1 * q1
    d0 = math.sqrt(d0 / dim)
    d1 = math.sqrt(d1 / dim)
    if d0 < 1e-5 or d1 < 1e-5:
        h_abs = 1e-6
    else:
        h_abs = 0.01 * d0 / d1
    if h_abs > span_abs:
        h_abs = span_abs
    ytrial = [0.0] * dim
    ftrial = [0.0] * dim
    for j in range(dim):
        ytrial[j] = y[j] + h_abs * direction * f[j]
    _rhs(codes, starts, consts, dim, ytrial, period, stack, wrapped, ftrial)
    d2 = 0.0
    for j in range(dim):
        sc = atol + rtol * abs(y[j])
        q2 = (ftrial[j] - f[j]) / sc
        d2 += q2 * q2
    d2 = math.sqrt(d2 / dim) / h_abs
    if max(d1, d2) <= 1e-15:
        h1 = max(1e-6, h_abs * 1e-3)
    else:
        h1 = (0.01 / max(d1, d2)) ** 0.2
    h_abs = min(100.0 * h_abs, h1, span_abs)
    if h_abs == 0.0:
        h_abs = 1e-6

    k2 = [0.0] * dim
    k3 = [0.0] * dim
    k4 = [0.0] * dim
    k5 = [0.0] * dim
    k6 = [0.0] * dim
    k7 = [0.0] * dim
    ynew = [0.0] * dim
    yref = [0.0] * dim

    t = t0
    err_acc = 0.0
    facold = 1e-4
    naccept = 0
    nreject = 0
    status = rk.COMPLETED
    escape_coord = -1

    steps = 0
    while (t - t1) * direction < 0.0:
        steps += 1
        if steps > max_steps:
            status = rk.BLOWUP
            break
        if h_abs < min_step_frac * span_abs:
            status = rk.BLOWUP
            break
        if h_abs > abs(t1 - t):
            h_abs = abs(t1 - t)
        h = h_abs * direction

        for j in range(dim):
            ytrial[j] = y[j] + h * rk.A21 * f[j]
        _rhs(codes, starts, consts, dim, ytrial, period, stack, wrapped, k2)
        for j in range(dim):
            ytrial[j] = y[j] + h * (rk.A31 * f[j] + rk.A32 * k2[j])
        _rhs(codes, starts, consts, dim, ytrial, period, stack, wrapped, k3)
        for j in range(dim):
            ytrial[j] = y[j] + h * (rk.A41 * f[j] + rk.A42 * k2[j] + rk.A43 * k3[j])
        _rhs(codes, starts, consts, dim, ytrial, period, stack, wrapped, k4)
        for j in range(dim):
            ytrial[j] = y[j] + h * (
                rk.A51 * f[j] + rk.A52 * k2[j] + rk.A53 * k3[j] + rk.A54 * k4[j]
            )
        _rhs(codes, starts, consts, dim, ytrial, period, stack, wrapped, k5)
        for j in range(dim):
            ytrial[j] = y[j] + h * (
                rk.A61 * f[j] + rk.A62 * k2[j] + rk.A63 * k3[j] + rk.A64 * k4[j] + rk.A65 * k5[j]
            )
        _rhs(codes, starts, consts, dim, ytrial, period, stack, wrapped, k6)
        for j in range(dim):
            ynew[j] = y[j] + h * (
                rk.B1 * f[j] + rk.B3 * k3[j] + rk.B4 * k4[j] + rk.B5 * k5[j] + rk.B6 * k6[j]
            )
        _rhs(codes, starts, consts, dim, ynew, period, stack, wrapped, k7)

        err = 0.0
        scale_acc = 0.0
        for j in range(dim):
            e = h * (
                rk.E1 * f[j] + rk.E3 * k3[j] + rk.E4 * k4[j] + rk.E5 * k5[j]
                + rk.E6 * k6[j] + rk.E7 * k7[j]
            )
            ay = abs(y[j])
            an = abs(ynew[j])
            sc = atol + rtol * (ay if ay > an else an)
            q = e / sc
            err += q * q
            scale_acc += sc
        err = math.sqrt(err / dim)

        if err <= 1.0:
            # accepted: guards, then bookkeeping
            blown = False
            for j in range(dim):
                if abs(ynew[j]) > blowup_limit or ynew[j] != ynew[j]:
                    blown = True
            if blown:
                t = t + h
                y = list(ynew)
                f = list(k7)
                ts.append(t)
                ys.append(list(y))
                fs.append(list(f))
                status = rk.BLOWUP
                break

            theta_esc = 2.0
            for j in range(dim):
                crossed = (
                    ynew[j] <= lo[j] + boundary_tol or ynew[j] >= hi[j] - boundary_tol
                )
                if crossed:
                    a = 0.0
                    b = 1.0
                    for _ in range(60):
                        mid = 0.5 * (a + b)
                        _hermite(y, f, ynew, k7, h, mid, dim, yref)
                        inside = lo[j] + boundary_tol < yref[j] < hi[j] - boundary_tol
                        if inside:
                            a = mid
                        else:
                            b = mid
                    if b < theta_esc:
                        theta_esc = b
                        escape_coord = j
            if theta_esc <= 1.0:
                _hermite(y, f, ynew, k7, h, theta_esc, dim, yref)
                t = t + theta_esc * h
                y = list(yref)
                _rhs(codes, starts, consts, dim, y, period, stack, wrapped, f)
                ts.append(t)
                ys.append(list(y))
                fs.append(list(f))
                status = rk.ESCAPED
                break

            err_acc += err * (scale_acc / dim)
            t = t + h
            y = list(ynew)
            f = list(k7)
            ts.append(t)
            ys.append(list(y))
            fs.append(list(f))
            naccept += 1

            fac11 = err ** rk.EXPO1
            fac = fac11 / (facold ** rk.BETA)
            fac = fac / rk.SAFETY
            if fac < 1.0 / rk.MAX_FACTOR:
                fac = 1.0 / rk.MAX_FACTOR
            if fac > 1.0 / rk.MIN_FACTOR:
                fac = 1.0 / rk.MIN_FACTOR
            h_abs = h_abs / fac
            facold = err if err > 1e-4 else 1e-4
        else:
            nreject += 1
            fac11 = err ** rk.EXPO1
            fac = fac11 / rk.SAFETY
            if fac > 1.0 / rk.MIN_FACTOR:
                fac = 1.0 / rk.MIN_FACTOR
            if fac < 1.0:
                fac = 1.0
            h_abs = h_abs / fac

    return RawTrajectory(
        status=status,
        ts=np.asarray(ts),
        ys=np.asarray(ys),
        fs=np.asarray(fs),
        err_est=err_acc,
        naccept=naccept,
        nreject=nreject,
        escape_coord=escape_coord,
    )

# cython: language_level=3
"""Compiled kernels: exterior-algebra product, bytecode evaluation and the
adaptive Dormand-Prince flow loop.

Loop-for-loop mirror of ``liact.backends.pure``; keep the two in sync. The
backend parity test asserts bit-identical output.
"""

import numpy as np

from liact.backends.ops import RawTrajectory

from libc.math cimport sin, cos, exp, floor, sqrt, fabs, pow

NAME = "compiled"

DEF OP_CONST = 0
DEF OP_VAR = 1
DEF OP_ADD = 2
DEF OP_SUB = 3
DEF OP_MUL = 4
DEF OP_DIV = 5
DEF OP_NEG = 6
DEF OP_POW = 7
DEF OP_SIN = 8
DEF OP_COS = 9
DEF OP_EXP = 10

cdef double C_SAFETY = 0.9
cdef double C_MIN_FACTOR = 0.2
cdef double C_MAX_FACTOR = 5.0
cdef double C_BETA = 0.04
cdef double C_EXPO1 = 0.2 - 0.04 * 0.75

cdef double A21 = 1.0 / 5.0
cdef double A31 = 3.0 / 40.0
cdef double A32 = 9.0 / 40.0
cdef double A41 = 44.0 / 45.0
cdef double A42 = -56.0 / 15.0
cdef double A43 = 32.0 / 9.0
cdef double A51 = 19372.0 / 6561.0
cdef double A52 = -25360.0 / 2187.0
cdef double A53 = 64448.0 / 6561.0
cdef double A54 = -212.0 / 729.0
cdef double A61 = 9017.0 / 3168.0
cdef double A62 = -355.0 / 33.0
cdef double A63 = 46732.0 / 5247.0
cdef double A64 = 49.0 / 176.0
cdef double A65 = -5103.0 / 18656.0
cdef double B1 = 35.0 / 384.0
cdef double B3 = 500.0 / 1113.0
cdef double B4 = 125.0 / 192.0
cdef double B5 = -2187.0 / 6784.0
cdef double B6 = 11.0 / 84.0
cdef double E1 = 71.0 / 57600.0
cdef double E3 = -71.0 / 16695.0
cdef double E4 = 71.0 / 1920.0
cdef double E5 = -17253.0 / 339200.0
cdef double E6 = 22.0 / 525.0
cdef double E7 = -1.0 / 40.0


cdef inline int _popcount(long x):
    cdef int c = 0
    while x:
        x &= x - 1
        c += 1
    return c


def gr_mul_terms(int n, masks_a, coeffs_a, masks_b, coeffs_b):
    """Multiply two exterior-algebra elements given as sorted sparse terms."""
    cdef int size = 1 << n
    cdef double[::1] acc = np.zeros(size, dtype=np.float64)
    cdef long[::1] ma_v = np.asarray(masks_a, dtype=np.int64).reshape(-1)
    cdef double[::1] ca_v = np.asarray(coeffs_a, dtype=np.float64).reshape(-1)
    cdef long[::1] mb_v = np.asarray(masks_b, dtype=np.int64).reshape(-1)
    cdef double[::1] cb_v = np.asarray(coeffs_b, dtype=np.float64).reshape(-1)
    cdef Py_ssize_t ia, ib
    cdef long ma, mb, rest, low
    cdef double ca
    cdef int swaps, j
    for ia in range(ma_v.shape[0]):
        ma = ma_v[ia]
        ca = ca_v[ia]
        for ib in range(mb_v.shape[0]):
            mb = mb_v[ib]
            if ma & mb:
                continue
            swaps = 0
            rest = mb
            while rest:
                low = rest & (-rest)
                j = 0
                while (low >> (j + 1)) != 0:
                    j += 1
                swaps += _popcount(ma >> (j + 1))
                rest &= rest - 1
            if swaps & 1:
                acc[ma | mb] -= ca * cb_v[ib]
            else:
                acc[ma | mb] += ca * cb_v[ib]
    masks = []
    coeffs = []
    cdef int m
    for m in range(size):
        if acc[m] != 0.0:
            masks.append(m)
            coeffs.append(acc[m])
    return masks, coeffs


cdef inline double _ipow(double x, long n):
    cdef double r = 1.0
    cdef double b = x
    while n:
        if n & 1:
            r *= b
        n >>= 1
        if n:
            b *= b
    return r


cdef double _eval(int[:, ::1] code, int i0, int i1, double[::1] consts,
                  double* values, double* stack) except *:
    cdef int sp = 0
    cdef int i, op, arg
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
            stack[sp - 1] = sin(stack[sp - 1])
        elif op == OP_COS:
            stack[sp - 1] = cos(stack[sp - 1])
        elif op == OP_EXP:
            stack[sp - 1] = exp(stack[sp - 1])
    return stack[sp - 1]


def eval_program_flat(codes, starts, consts, max_stack, j, values):
    cdef int[:, ::1] code_v = np.ascontiguousarray(codes, dtype=np.int32)
    cdef int[::1] starts_v = np.ascontiguousarray(starts, dtype=np.int32)
    cdef double[::1] consts_v = np.ascontiguousarray(consts, dtype=np.float64)
    cdef double[::1] vals = np.ascontiguousarray(values, dtype=np.float64)
    cdef double[::1] stack = np.empty(max_stack, dtype=np.float64)
    cdef double* vp = &vals[0] if vals.shape[0] else NULL
    return _eval(code_v, starts_v[j], starts_v[j + 1], consts_v, vp, &stack[0])


cdef void _rhs(int[:, ::1] codes, int[::1] starts, double[::1] consts, int dim,
               double* y, double* period, double* stack, double* wrapped,
               double* out) except *:
    cdef int j
    for j in range(dim):
        if period[j] > 0.0:
            wrapped[j] = y[j] - period[j] * floor(y[j] / period[j])
        else:
            wrapped[j] = y[j]
    for j in range(dim):
        out[j] = _eval(codes, starts[j], starts[j + 1], consts, wrapped, stack)


cdef void _hermite(double* y0, double* f0, double* y1, double* f1, double h,
                   double theta, int dim, double* out):
    cdef double t2 = theta * theta
    cdef double t3 = t2 * theta
    cdef double h00 = 2.0 * t3 - 3.0 * t2 + 1.0
    cdef double h10 = t3 - 2.0 * t2 + theta
    cdef double h01 = -2.0 * t3 + 3.0 * t2
    cdef double h11 = t3 - t2
    cdef int j
    for j in range(dim):
        out[j] = h00 * y0[j] + h10 * h * f0[j] + h01 * y1[j] + h11 * h * f1[j]


def integrate_programs(codes, starts, consts, max_stack, y0, double t0,
                       double t1, double rtol, double atol, long max_steps,
                       lo, hi, double boundary_tol, period,
                       double blowup_limit, double min_step_frac):
    """Adaptive DP5(4) integration of dy/dt = P(y) with chart guards."""
    cdef int[:, ::1] code_v = np.ascontiguousarray(codes, dtype=np.int32)
    cdef int[::1] starts_v = np.ascontiguousarray(starts, dtype=np.int32)
    cdef double[::1] consts_v = np.ascontiguousarray(consts, dtype=np.float64)
    cdef double[::1] y0_v = np.ascontiguousarray(y0, dtype=np.float64)
    cdef double[::1] lo_v = np.ascontiguousarray(lo, dtype=np.float64)
    cdef double[::1] hi_v = np.ascontiguousarray(hi, dtype=np.float64)
    cdef double[::1] period_v = np.ascontiguousarray(period, dtype=np.float64)

    cdef int dim = y0_v.shape[0]
    cdef double span = t1 - t0
    cdef double direction = 1.0 if span >= 0.0 else -1.0
    cdef double span_abs = fabs(span)

    scratch = np.zeros((10, max(dim, 1)), dtype=np.float64)
    cdef double[:, ::1] sc_v = scratch
    stack_arr = np.zeros(max_stack, dtype=np.float64)
    cdef double[::1] stack_v = stack_arr

    cdef double* stack = &stack_v[0]
    cdef double* wrapped = &sc_v[0, 0]
    cdef double* y = &sc_v[1, 0]
    cdef double* f = &sc_v[2, 0]
    cdef double* ytrial = &sc_v[3, 0]
    cdef double* k2 = &sc_v[4, 0]
    cdef double* k3 = &sc_v[5, 0]
    cdef double* k4 = &sc_v[6, 0]
    cdef double* k5 = &sc_v[7, 0]
    cdef double* k6 = &sc_v[8, 0]
    cdef double* kk = &sc_v[9, 0]
    k7_arr = np.zeros(max(dim, 1), dtype=np.float64)
    cdef double[::1] k7_v = k7_arr
    cdef double* k7 = &k7_v[0]
    ynew_arr = np.zeros(max(dim, 1), dtype=np.float64)
    cdef double[::1] ynew_v = ynew_arr
    cdef double* ynew = &ynew_v[0]
    yref_arr = np.zeros(max(dim, 1), dtype=np.float64)
    cdef double[::1] yref_v = yref_arr
    cdef double* yref = &yref_v[0]

    cdef double* per = &period_v[0]

    cdef int j
    for j in range(dim):
        y[j] = y0_v[j]
    _rhs(code_v, starts_v, consts_v, dim, y, per, stack, wrapped, f)

    ts = [t0]
    ys = [[y[j] for j in range(dim)]]
    fs = [[f[j] for j in range(dim)]]

    cdef double d0 = 0.0, d1 = 0.0, d2 = 0.0, sc = 0.0, q0, q1, q2, h1
    for j in range(dim):
        sc = atol + rtol * fabs(y[j])
        q0 = y[j] / sc
        q1 = f[j] / sc
        d0 += q0 * q0
        d1 += q1 * q1
    d0 = sqrt(d0 / dim)
    d1 = sqrt(d1 / dim)
    cdef double h_abs
    if d0 < 1e-5 or d1 < 1e-5:
        h_abs = 1e-6
    else:
        h_abs = 0.01 * d0 / d1
    if h_abs > span_abs:
        h_abs = span_abs
    for j in range(dim):
        ytrial[j] = y[j] + h_abs * direction * f[j]
    _rhs(code_v, starts_v, consts_v, dim, ytrial, per, stack, wrapped, kk)
    d2 = 0.0
    for j in range(dim):
        sc = atol + rtol * fabs(y[j])
        q2 = (kk[j] - f[j]) / sc
        d2 += q2 * q2
    d2 = sqrt(d2 / dim) / h_abs
    cdef double dmax = d1 if d1 > d2 else d2
    if dmax <= 1e-15:
        h1 = 1e-6 if 1e-6 > h_abs * 1e-3 else h_abs * 1e-3
    else:
        h1 = pow(0.01 / dmax, 0.2)
    if 100.0 * h_abs < h1:
        h1 = 100.0 * h_abs
    if h1 > span_abs:
        h1 = span_abs
    h_abs = h1
    if h_abs == 0.0:
        h_abs = 1e-6

    cdef double t = t0
    cdef double err_acc = 0.0
    cdef double facold = 1e-4
    cdef long naccept = 0
    cdef long nreject = 0
    cdef int status = 0
    cdef int escape_coord = -1
    cdef long steps = 0
    cdef double h, e, err, scale_acc, ay, an, q, fac11, fac
    cdef bint blown, crossed, inside
    cdef double theta_esc, a, b, mid
    cdef int it

    while (t - t1) * direction < 0.0:
        steps += 1
        if steps > max_steps:
            status = 2
            break
        if h_abs < min_step_frac * span_abs:
            status = 2
            break
        if h_abs > fabs(t1 - t):
            h_abs = fabs(t1 - t)
        h = h_abs * direction

        for j in range(dim):
            ytrial[j] = y[j] + h * A21 * f[j]
        _rhs(code_v, starts_v, consts_v, dim, ytrial, per, stack, wrapped, k2)
        for j in range(dim):
            ytrial[j] = y[j] + h * (A31 * f[j] + A32 * k2[j])
        _rhs(code_v, starts_v, consts_v, dim, ytrial, per, stack, wrapped, k3)
        for j in range(dim):
            ytrial[j] = y[j] + h * (A41 * f[j] + A42 * k2[j] + A43 * k3[j])
        _rhs(code_v, starts_v, consts_v, dim, ytrial, per, stack, wrapped, k4)
        for j in range(dim):
            ytrial[j] = y[j] + h * (A51 * f[j] + A52 * k2[j] + A53 * k3[j] + A54 * k4[j])
        _rhs(code_v, starts_v, consts_v, dim, ytrial, per, stack, wrapped, k5)
        for j in range(dim):
            ytrial[j] = y[j] + h * (A61 * f[j] + A62 * k2[j] + A63 * k3[j] + A64 * k4[j] + A65 * k5[j])
        _rhs(code_v, starts_v, consts_v, dim, ytrial, per, stack, wrapped, k6)
        for j in range(dim):
            ynew[j] = y[j] + h * (B1 * f[j] + B3 * k3[j] + B4 * k4[j] + B5 * k5[j] + B6 * k6[j])
        _rhs(code_v, starts_v, consts_v, dim, ynew, per, stack, wrapped, k7)

        err = 0.0
        scale_acc = 0.0
        for j in range(dim):
            e = h * (E1 * f[j] + E3 * k3[j] + E4 * k4[j] + E5 * k5[j] + E6 * k6[j] + E7 * k7[j])
            ay = fabs(y[j])
            an = fabs(ynew[j])
            sc = atol + rtol * (ay if ay > an else an)
            q = e / sc
            err += q * q
            scale_acc += sc
        err = sqrt(err / dim)

        if err <= 1.0:
            blown = False
            for j in range(dim):
                if fabs(ynew[j]) > blowup_limit or ynew[j] != ynew[j]:
                    blown = True
            if blown:
                t = t + h
                for j in range(dim):
                    y[j] = ynew[j]
                    f[j] = k7[j]
                ts.append(t)
                ys.append([y[j] for j in range(dim)])
                fs.append([f[j] for j in range(dim)])
                status = 2
                break

            theta_esc = 2.0
            for j in range(dim):
                crossed = (ynew[j] <= lo_v[j] + boundary_tol
                           or ynew[j] >= hi_v[j] - boundary_tol)
                if crossed:
                    a = 0.0
                    b = 1.0
                    for it in range(60):
                        mid = 0.5 * (a + b)
                        _hermite(y, f, ynew, k7, h, mid, dim, yref)
                        inside = lo_v[j] + boundary_tol < yref[j] < hi_v[j] - boundary_tol
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
                for j in range(dim):
                    y[j] = yref[j]
                _rhs(code_v, starts_v, consts_v, dim, y, per, stack, wrapped, f)
                ts.append(t)
                ys.append([y[j] for j in range(dim)])
                fs.append([f[j] for j in range(dim)])
                status = 1
                break

            err_acc += err * (scale_acc / dim)
            t = t + h
            for j in range(dim):
                y[j] = ynew[j]
                f[j] = k7[j]
            ts.append(t)
            ys.append([y[j] for j in range(dim)])
            fs.append([f[j] for j in range(dim)])
            naccept += 1

            fac11 = pow(err, C_EXPO1)
            fac = fac11 / pow(facold, C_BETA)
            fac = fac / C_SAFETY
            if fac < 1.0 / C_MAX_FACTOR:
                fac = 1.0 / C_MAX_FACTOR
            if fac > 1.0 / C_MIN_FACTOR:
                fac = 1.0 / C_MIN_FACTOR
            h_abs = h_abs / fac
            facold = err if err > 1e-4 else 1e-4
        else:
            nreject += 1
            fac11 = pow(err, C_EXPO1)
            fac = fac11 / C_SAFETY
            if fac > 1.0 / C_MIN_FACTOR:
                fac = 1.0 / C_MIN_FACTOR
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

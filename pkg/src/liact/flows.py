"""Flow machinery: frozen-direction flows, path lifting through the
graph foliation, completeness probing, and loop holonomy.

Three integration modes, selected per problem:

* real mode — chart has no odd coordinates, direction and start point are
  real: components compile to bytecode and run through the selected
  backend kernel (adaptive Dormand-Prince 5(4), PI step control, chart
  and blow-up guards);
* exact polynomial mode — supernumbers present, polynomial components:
  Picard iteration in polynomial-in-t arithmetic, which reaches a fixed
  point whenever the flow is polynomial (always the case for purely
  nilpotent dynamics) and is then coefficient-exact;
* super RK mode — supernumbers with genuinely moving body: the same
  embedded pair stepped in exterior-algebra arithmetic.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from . import backends, expr
from .algebra import AlgebraElement
from .backends import rkconst as rk
from .backends.pure import _hermite
from .errors import ChartDomainError, EscapeError, LiactError, ParityError
from .fields import field_combination
from .grassmann import EVEN, Supernumber, promote
from .group import ExpSegment, SampledSegment, right_log_derivative

BOUNDARY_TOL = 1e-9
BLOWUP_LIMIT = 1e8
MIN_STEP_FRAC = 1e-14

_STATUS_NAMES = {rk.COMPLETED: "completed", rk.ESCAPED: "escaped", rk.BLOWUP: "blowup"}


@dataclass
class FlowProblem:
    """Flow of sign * rho(X) from m0 over t_span."""

    rep: object
    x: AlgebraElement
    m0: tuple
    sign: float = -1.0
    t_span: tuple = (0.0, 1.0)
    rtol: float = 1e-10
    atol: float = 1e-10
    max_steps: int = 100000

    def __post_init__(self):
        if self.rtol <= 0 or self.atol <= 0:
            raise ValueError("tolerances must be positive")
        if self.x.parity_wrt(self.rep.sc.parities) != EVEN:
            raise ParityError("flow direction must be an even algebra element")
        if not self.rep.chart.contains(self.m0):
            raise ChartDomainError(f"start point {self.m0!r} outside chart")


class Trajectory:
    """Sampled flow with dense evaluation between accepted steps."""

    def __init__(self, ts, states, status, *, fs=None, polys=None, t_offset=0.0,
                 err_est=0.0, naccept=0, nreject=0, escape_coord=-1):
        self.ts = list(ts)
        self.states = [tuple(s) for s in states]
        self.status = status
        self.fs = fs
        self.polys = polys                    # exact mode: one TPoly per coordinate
        self.t_offset = t_offset              # polys are in local time t - t_offset
        self.err_est = err_est
        self.naccept = naccept
        self.nreject = nreject
        self.escape_coord = escape_coord

    @property
    def completed(self):
        return self.status == "completed"

    @property
    def escape_time(self):
        return None if self.completed else self.ts[-1]

    @property
    def escape_point(self):
        return None if self.completed else self.states[-1]

    def endpoint(self):
        return self.states[-1]

    def sample(self, t):
        """State at time t: exact in poly mode, cubic Hermite with stored
        derivatives otherwise, nearest accepted state as a last resort."""
        if self.polys is not None:
            return tuple(p.eval(t - self.t_offset) for p in self.polys)
        ts = self.ts
        if not ts[0] <= t <= ts[-1] and not ts[-1] <= t <= ts[0]:
            raise ValueError(f"sample time {t} outside trajectory range")
        if len(ts) == 1:
            return self.states[0]
        i = 0
        for i in range(len(ts) - 1):
            lo, hi = sorted((ts[i], ts[i + 1]))
            if lo - 1e-15 <= t <= hi + 1e-15:
                break
        h = ts[i + 1] - ts[i]
        if h == 0.0:
            return self.states[i]
        theta = (t - ts[i]) / h
        if self.fs is None:
            return self.states[i] if theta < 0.5 else self.states[i + 1]
        out = [0.0] * len(self.states[i])
        _hermite(self.states[i], self.fs[i], self.states[i + 1], self.fs[i + 1],
                 h, theta, len(out), out)
        return tuple(out)


class TPoly:
    """Polynomial in t with real or supernumber coefficients (exact mode)."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs):
        while coeffs and _is_zero_coeff(coeffs[-1]):
            coeffs = coeffs[:-1]
        self.coeffs = tuple(coeffs)

    @classmethod
    def const(cls, value):
        return cls((value,))

    def eval(self, t):
        acc = None
        power = 1.0
        for c in self.coeffs:
            term = c * power
            acc = term if acc is None else acc + term
            power = power * t
        return acc if acc is not None else 0.0

    def integrate(self):
        return TPoly((0.0,) + tuple(c * (1.0 / (k + 1)) for k, c in enumerate(self.coeffs)))

    def _coerce(self, other):
        if isinstance(other, TPoly):
            return other
        if isinstance(other, (int, float, Supernumber)):
            return TPoly((other,))
        return None

    def __add__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        a, b = list(self.coeffs), list(o.coeffs)
        if len(a) < len(b):
            a += [0.0] * (len(b) - len(a))
        else:
            b += [0.0] * (len(a) - len(b))
        return TPoly([x + y for x, y in zip(a, b)])

    __radd__ = __add__

    def __neg__(self):
        return TPoly([-c for c in self.coeffs])

    def __sub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return self + (-o)

    def __rsub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return o + (-self)

    def __mul__(self, other):
        if isinstance(other, (int, float, Supernumber)):
            return TPoly([c * other for c in self.coeffs])
        if not isinstance(other, TPoly):
            return NotImplemented
        out = [0.0] * (len(self.coeffs) + len(other.coeffs) - 1) if self.coeffs and other.coeffs else []
        for i, a in enumerate(self.coeffs):
            for j, b in enumerate(other.coeffs):
                out[i + j] = out[i + j] + a * b
        return TPoly(out)

    def __rmul__(self, other):
        if isinstance(other, (int, float, Supernumber)):
            return TPoly([other * c for c in self.coeffs])
        return NotImplemented

    def __pow__(self, n):
        if not isinstance(n, int) or n < 0:
            return NotImplemented
        out = TPoly((1.0,))
        for _ in range(n):
            out = out * self
        return out

    def __eq__(self, other):
        if isinstance(other, (int, float, Supernumber)):
            other = TPoly((other,))
        if not isinstance(other, TPoly):
            return NotImplemented
        if len(self.coeffs) != len(other.coeffs):
            return False
        return all(_coeff_eq(a, b) for a, b in zip(self.coeffs, other.coeffs))

    def __hash__(self):
        return hash(self.coeffs)

    def __repr__(self):
        return f"TPoly({list(self.coeffs)!r})"


def _is_zero_coeff(c):
    return c.is_zero() if isinstance(c, Supernumber) else c == 0.0


def _coeff_eq(a, b):
    if isinstance(a, Supernumber) or isinstance(b, Supernumber):
        return a == b
    return a == b


def _state_is_real(m0):
    return all(not isinstance(v, Supernumber) or v.soul().is_zero() for v in m0)


def _combined_components(rep, x, sign):
    """sign * sum_i X^i rho(e_i) as per-coordinate expressions (real X)."""
    coeffs = [sign * v for v in x.body()]
    combo = field_combination(rep.chart, coeffs, rep.fields, EVEN)
    return combo.components


def integrate_flow(problem):
    """Flow trajectory of dm/dt = sign * rho(X)(m) over the problem's span."""
    rep = problem.rep
    x = problem.x
    m0 = problem.m0
    real_problem = rep.chart.n_odd == 0 and x.is_real() and _state_is_real(m0)
    if real_problem:
        return _integrate_real(problem)
    traj = _integrate_exact_poly(problem)
    if traj is not None:
        return traj
    return _integrate_super_rk(problem)


def _integrate_real(problem):
    rep = problem.rep
    chart = rep.chart
    components = _combined_components(rep, problem.x, problem.sign)
    programs = [expr.compile_real(c) for c in components]
    y0 = [v.body if isinstance(v, Supernumber) else float(v) for v in problem.m0]
    raw = backends.integrate(
        programs,
        y0,
        problem.t_span[0],
        problem.t_span[1],
        rtol=problem.rtol,
        atol=problem.atol,
        max_steps=problem.max_steps,
        lo=np.asarray(chart.lo),
        hi=np.asarray(chart.hi),
        boundary_tol=BOUNDARY_TOL,
        period=np.asarray(chart.periodic),
        blowup_limit=BLOWUP_LIMIT,
        min_step_frac=MIN_STEP_FRAC,
    )
    return Trajectory(
        raw.ts,
        [tuple(row) for row in raw.ys],
        _STATUS_NAMES[raw.status],
        fs=list(raw.fs),
        err_est=raw.err_est,
        naccept=raw.naccept,
        nreject=raw.nreject,
        escape_coord=raw.escape_coord,
    )


def _super_rhs_exprs(rep, x):
    """Component expressions and left coefficients for a super direction."""
    pairs = []
    for i, f in enumerate(rep.fields):
        xi = promote(x.coords[i], rep.n_gen)
        if xi.is_zero():
            continue
        pairs.append((xi, f))
    return pairs


def _check_polynomial(pairs):
    for _, f in pairs:
        for comp in f.components:
            if not expr.is_polynomial(comp):
                raise LiactError(
                    "supernumber flows require polynomial field components"
                )


def _integrate_exact_poly(problem, max_iter=None):
    """Picard iteration with polynomial-in-t coefficients; None if no fixpoint.

    Terminates exactly when the flow is polynomial in t, in particular for
    purely nilpotent dynamics; the result is then coefficient-exact.
    """
    rep = problem.rep
    chart = rep.chart
    n = rep.n_gen
    pairs = _super_rhs_exprs(rep, problem.x)
    _check_polynomial(pairs)
    if max_iter is None:
        max_iter = 2 * n + chart.dim + 8

    m0 = [promote(v, n) for v in problem.m0]
    state = [TPoly.const(v) for v in m0]
    names = chart.even_names + chart.odd_names
    sign = problem.sign
    converged = False
    for _ in range(max_iter):
        binding = dict(zip(names, state))
        rhs = [TPoly(()) for _ in range(chart.dim)]
        for xi, f in pairs:
            for l in range(chart.dim):
                v = expr.evaluate(f.components[l], binding, check_parity=False)
                if not isinstance(v, TPoly):
                    v = TPoly.const(v)
                rhs[l] = rhs[l] + (xi * v) * sign
        new_state = [TPoly.const(m0[l]) + rhs[l].integrate() for l in range(chart.dim)]
        if all(a == b for a, b in zip(new_state, state)):
            converged = True
            break
        state = new_state
    if not converged:
        return None

    t0, t1 = problem.t_span
    duration = t1 - t0
    esc = _poly_escape_time(chart, state, duration)
    if esc is not None:
        t_esc = esc
        states = [tuple(m0), tuple(p.eval(t_esc) for p in state)]
        return Trajectory([t0, t0 + t_esc], states, "escaped", polys=state, t_offset=t0)
    states = [tuple(m0), tuple(p.eval(duration) for p in state)]
    return Trajectory([t0, t1], states, "completed", polys=state, t_offset=t0)


def _poly_escape_time(chart, polys, duration):
    """Earliest chart exit of the body trajectory within [0, duration]."""
    first = None
    for j in range(chart.n_even):
        if chart.periodic[j] > 0.0:
            continue
        body = [c.body if isinstance(c, Supernumber) else float(c) for c in polys[j].coeffs]
        if len(body) <= 1:
            continue  # constant body cannot leave an open box it starts in
        for bound in (chart.lo[j], chart.hi[j]):
            if not math.isfinite(bound):
                continue
            shifted = list(body)
            shifted[0] -= bound
            roots = np.roots(shifted[::-1]) if any(shifted) else []
            for r in roots:
                if abs(r.imag) < 1e-12:
                    t = r.real
                    if 1e-15 < t * math.copysign(1.0, duration) <= abs(duration):
                        if first is None or abs(t) < abs(first):
                            first = t
    return first


def _super_norm(vals, ref, atol, rtol):
    worst = 0.0
    for e, y in zip(vals, ref):
        scale = atol + rtol * (y.max_abs() if isinstance(y, Supernumber) else abs(y))
        mag = e.max_abs() if isinstance(e, Supernumber) else abs(e)
        worst = max(worst, mag / scale)
    return worst


def _integrate_super_rk(problem):
    """Embedded pair over exterior-algebra states (moving body + soul)."""
    rep = problem.rep
    chart = rep.chart
    n = rep.n_gen
    pairs = _super_rhs_exprs(rep, problem.x)
    _check_polynomial(pairs)
    names = chart.even_names + chart.odd_names
    sign = problem.sign

    def rhs(state):
        binding = dict(zip(names, state))
        out = [Supernumber(n) for _ in range(chart.dim)]
        for xi, f in pairs:
            for l in range(chart.dim):
                v = expr.evaluate(f.components[l], binding, check_parity=False)
                out[l] = out[l] + xi * promote(v, n) * sign
        return out

    def axpy(y, h, *kfs):
        out = list(y)
        for w, k in kfs:
            for j in range(len(out)):
                out[j] = out[j] + k[j] * (h * w)
        return out

    t0, t1 = problem.t_span
    direction = 1.0 if t1 >= t0 else -1.0
    span_abs = abs(t1 - t0)
    y = [promote(v, n) for v in problem.m0]
    f = rhs(y)
    h_abs = min(0.01, span_abs) if span_abs > 0 else 0.01
    t = t0
    ts = [t0]
    states = [tuple(y)]
    status = "completed"
    facold = 1e-4
    steps = 0
    while (t - t1) * direction < 0.0:
        steps += 1
        if steps > problem.max_steps or h_abs < MIN_STEP_FRAC * span_abs:
            status = "blowup"
            break
        h_abs = min(h_abs, abs(t1 - t))
        h = h_abs * direction
        k2 = rhs(axpy(y, h, (rk.A21, f)))
        k3 = rhs(axpy(y, h, (rk.A31, f), (rk.A32, k2)))
        k4 = rhs(axpy(y, h, (rk.A41, f), (rk.A42, k2), (rk.A43, k3)))
        k5 = rhs(axpy(y, h, (rk.A51, f), (rk.A52, k2), (rk.A53, k3), (rk.A54, k4)))
        k6 = rhs(axpy(y, h, (rk.A61, f), (rk.A62, k2), (rk.A63, k3), (rk.A64, k4), (rk.A65, k5)))
        ynew = axpy(y, h, (rk.B1, f), (rk.B3, k3), (rk.B4, k4), (rk.B5, k5), (rk.B6, k6))
        k7 = rhs(ynew)
        errv = axpy([Supernumber(n) for _ in y], h,
                    (rk.E1, f), (rk.E3, k3), (rk.E4, k4), (rk.E5, k5), (rk.E6, k6), (rk.E7, k7))
        err = _super_norm(errv, ynew, problem.atol, problem.rtol)
        if err <= 1.0:
            t = t + h
            y = ynew
            f = k7
            ts.append(t)
            states.append(tuple(y))
            if not chart.contains(y, margin=BOUNDARY_TOL):
                status = "escaped"
                break
            if max(v.max_abs() for v in y) > BLOWUP_LIMIT:
                status = "blowup"
                break
            fac11 = err ** rk.EXPO1
            fac = fac11 / (facold ** rk.BETA) / rk.SAFETY
            fac = min(max(fac, 1.0 / rk.MAX_FACTOR), 1.0 / rk.MIN_FACTOR)
            h_abs = h_abs / fac
            facold = max(err, 1e-4)
        else:
            fac = min(err ** rk.EXPO1 / rk.SAFETY, 1.0 / rk.MIN_FACTOR)
            h_abs = h_abs / max(fac, 1.0)
    return Trajectory(ts, states, status)


# --- path lifting ----------------------------------------------------------------


@dataclass
class LeafSample:
    """Numeric trace of a leaf: (t, group element, manifold point) triples.

    Manifold points are kept unwrapped (periodic coordinates accumulate),
    so displacements and winding numbers are recoverable.
    """

    ts: list = field(default_factory=list)
    elements: list = field(default_factory=list)
    points: list = field(default_factory=list)
    status: str = "completed"
    err_est: float = 0.0

    def append(self, t, g, m):
        self.ts.append(t)
        self.elements.append(g)
        self.points.append(tuple(m))

    def endpoint(self):
        return self.points[-1]

    @property
    def pairs(self):
        return list(zip(self.elements, self.points))


def lift_path(rep, path, m0, sign=-1.0, rtol=1e-10, atol=1e-10, dense=None):
    """Lift a group path through the foliation: dm/dt = sign rho(xi(t))(m).

    xi is the path's right logarithmic derivative, so the lift depends on
    the path only through it (right-translation invariance). Escape raises
    EscapeError carrying the partial LeafSample.
    """
    model = path.model
    leaf = LeafSample()
    m = tuple(m0)
    t_global = 0.0
    leaf.append(0.0, path.basepoint, m)
    for seg in path.segments:
        if isinstance(seg, ExpSegment):
            problem = FlowProblem(
                rep, seg.x, m, sign=sign, t_span=(0.0, seg.duration),
                rtol=rtol, atol=atol,
            )
            traj = integrate_flow(problem)
            sample_ts = _segment_sample_times(traj, seg.duration, dense)
            for s in sample_ts:
                leaf.append(t_global + s, seg.at(model, s), traj.sample(s))
            leaf.err_est += traj.err_est
            if not traj.completed:
                leaf.status = traj.status
                raise EscapeError(
                    f"lift left the chart at t = {t_global + traj.ts[-1]:.6g}",
                    partial=leaf,
                )
            m = traj.endpoint()
        elif isinstance(seg, SampledSegment):
            traj = _lift_sampled_segment(rep, path, seg, m, sign, rtol, atol)
            for s, state in zip(traj.ts, traj.states):
                if s == 0.0:
                    continue
                leaf.append(t_global + s, seg.at(model, s), state)
            leaf.err_est += traj.err_est
            if not traj.completed:
                leaf.status = traj.status
                raise EscapeError(
                    f"lift left the chart at t = {t_global + traj.ts[-1]:.6g}",
                    partial=leaf,
                )
            m = traj.endpoint()
        else:
            raise TypeError(f"unknown segment type {type(seg).__name__}")
        t_global += seg.duration
    return leaf


def _segment_sample_times(traj, duration, dense):
    if dense is None:
        ts = [t for t in traj.ts if t > 0.0]
        if not ts or ts[-1] != duration:
            if traj.completed:
                ts.append(duration)
        return ts
    count = max(2, int(math.ceil(duration / dense)) + 1)
    end = traj.ts[-1] if not traj.completed else duration
    return list(np.linspace(0.0, end, count))[1:]


def _lift_sampled_segment(rep, path, seg, m0, sign, rtol, atol):
    """Time-dependent lift along a sampled segment (real scenarios only)."""
    chart = rep.chart
    if chart.n_odd != 0 or not _state_is_real(m0):
        raise LiactError("sampled segments support real scenarios only")
    offset = sum(s.duration for s in path.segments[: path.segments.index(seg)])

    def f(t, y):
        xi = right_log_derivative(path, offset + t)
        vals = _eval_real_rho(rep, xi, y, sign)
        return np.asarray(vals)

    return _rk45_callable(
        f, 0.0, seg.duration, np.asarray([float(v) for v in m0]), rtol, atol, chart
    )


def _eval_real_rho(rep, x, y, sign):
    binding = rep.chart.binding(rep.chart.wrap(tuple(float(v) for v in y)))
    out = []
    for l in range(rep.chart.dim):
        acc = 0.0
        for i, fdef in enumerate(rep.fields):
            xi = x.coords[i]
            xi = xi.body if isinstance(xi, Supernumber) else float(xi)
            if xi == 0.0:
                continue
            acc += xi * expr.evaluate(fdef.components[l], binding)
        out.append(sign * acc)
    return out


def _rk45_callable(f, t0, t1, y0, rtol, atol, chart, max_steps=100000):
    """Adaptive pair for time-dependent right-hand sides (numpy states)."""
    direction = 1.0 if t1 >= t0 else -1.0
    span_abs = abs(t1 - t0)
    y = np.array(y0, dtype=float)
    fv = f(t0, y)
    h_abs = min(0.01 * max(span_abs, 1.0), span_abs)
    t = t0
    ts = [t0]
    states = [tuple(y)]
    fs = [list(fv)]
    status = "completed"
    facold = 1e-4
    lo = np.asarray(chart.lo)
    hi = np.asarray(chart.hi)
    free = np.asarray(chart.periodic) > 0.0
    steps = 0
    err_acc = 0.0
    while (t - t1) * direction < 0.0:
        steps += 1
        if steps > max_steps or h_abs < MIN_STEP_FRAC * span_abs:
            status = "blowup"
            break
        h_abs = min(h_abs, abs(t1 - t))
        h = h_abs * direction
        k2 = f(t + rk.C2 * h, y + h * rk.A21 * fv)
        k3 = f(t + rk.C3 * h, y + h * (rk.A31 * fv + rk.A32 * k2))
        k4 = f(t + rk.C4 * h, y + h * (rk.A41 * fv + rk.A42 * k2 + rk.A43 * k3))
        k5 = f(t + rk.C5 * h, y + h * (rk.A51 * fv + rk.A52 * k2 + rk.A53 * k3 + rk.A54 * k4))
        k6 = f(t + h, y + h * (rk.A61 * fv + rk.A62 * k2 + rk.A63 * k3 + rk.A64 * k4 + rk.A65 * k5))
        ynew = y + h * (rk.B1 * fv + rk.B3 * k3 + rk.B4 * k4 + rk.B5 * k5 + rk.B6 * k6)
        k7 = f(t + h, ynew)
        ev = h * (rk.E1 * fv + rk.E3 * k3 + rk.E4 * k4 + rk.E5 * k5 + rk.E6 * k6 + rk.E7 * k7)
        scale = atol + rtol * np.maximum(np.abs(y), np.abs(ynew))
        err = float(np.sqrt(np.mean((ev / scale) ** 2)))
        if err <= 1.0:
            err_acc += err * float(np.mean(scale))
            t = t + h
            y = ynew
            fv = k7
            ts.append(t)
            states.append(tuple(y))
            fs.append(list(fv))
            inside = np.all(
                free | ((lo + BOUNDARY_TOL < y) & (y < hi - BOUNDARY_TOL))
            )
            if not inside:
                status = "escaped"
                break
            if np.max(np.abs(y)) > BLOWUP_LIMIT:
                status = "blowup"
                break
            fac11 = err ** rk.EXPO1
            fac = fac11 / (facold ** rk.BETA) / rk.SAFETY
            fac = min(max(fac, 1.0 / rk.MAX_FACTOR), 1.0 / rk.MIN_FACTOR)
            h_abs = h_abs / fac
            facold = max(err, 1e-4)
        else:
            fac = min(err ** rk.EXPO1 / rk.SAFETY, 1.0 / rk.MIN_FACTOR)
            h_abs = h_abs / max(fac, 1.0)
    traj = Trajectory(ts, states, status, fs=fs, err_est=err_acc)
    return traj


# --- completeness and holonomy ------------------------------------------------------


@dataclass
class CompletenessReport:
    complete: bool
    escape_time: float = None
    escape_point: tuple = None
    probe_horizon: float = 0.0
    direction_index: int = -1
    start_point: tuple = None
    time_sign: float = 0.0


def completeness_probe(rep, directions, horizon, grid, rtol=1e-10, atol=1e-10):
    """Integrate each body direction from each grid point to +-horizon.

    One report per direction: the earliest escape or blow-up over all grid
    starts and both time orientations, or a clean completeness verdict up
    to the horizon.
    """
    reports = []
    for idx, x in enumerate(directions):
        if not x.is_real():
            raise ParityError("completeness probes take body (real) directions")
        report = CompletenessReport(True, probe_horizon=horizon, direction_index=idx)
        for m0 in grid:
            for time_sign in (1.0, -1.0):
                problem = FlowProblem(
                    rep, x, m0, sign=1.0, t_span=(0.0, time_sign * horizon),
                    rtol=rtol, atol=atol,
                )
                traj = integrate_flow(problem)
                if not traj.completed:
                    t_hit = abs(traj.ts[-1])
                    if report.complete or t_hit < report.escape_time:
                        report.complete = False
                        report.escape_time = t_hit
                        report.escape_point = traj.endpoint()
                        report.start_point = tuple(m0)
                        report.time_sign = time_sign
        reports.append(report)
    return reports


@dataclass
class HolonomyResult:
    endpoint: tuple                 # wrapped into the fundamental domain
    displacement: np.ndarray        # periodic coordinates reduced mod period
    winding: tuple
    raw_displacement: np.ndarray
    trivial: bool


def holonomy(rep, loop, m0, sign=-1.0, rtol=1e-10, atol=1e-10, tol=1e-8):
    """Lift a closed loop and report the endpoint displacement.

    Nontrivial displacement certifies that the leaf projection fails to be
    injective, so no global action can induce the representation. Periodic
    coordinates report displacement mod period plus an integer winding
    count (displacements within 1e-9 of a full period snap to zero).
    """
    if not loop.is_closed(1e-12):
        raise ValueError("holonomy requires a closed loop")
    try:
        leaf = lift_path(rep, loop, m0, sign=sign, rtol=rtol, atol=atol)
    except EscapeError as exc:
        raise EscapeError(
            "fields are incomplete along the loop; holonomy undefined",
            partial=exc.partial,
        ) from exc
    end = leaf.endpoint()
    chart = rep.chart
    raw = np.array(
        [_body_value(e) - _body_value(s) for e, s in zip(end, m0)][: chart.n_even]
    )
    disp = raw.copy()
    winding = [0] * chart.n_even
    snap = 1e-9
    for j, p in enumerate(chart.periodic):
        if p > 0.0:
            k = math.floor(raw[j] / p)
            d = raw[j] - k * p
            if p - d < snap:
                d -= p
                k += 1
            if abs(d) < snap:
                d = 0.0
            disp[j] = d
            winding[j] = k
    return HolonomyResult(
        endpoint=chart.wrap(end),
        displacement=disp,
        winding=tuple(winding),
        raw_displacement=raw,
        trivial=bool(np.max(np.abs(disp), initial=0.0) <= tol),
    )


def _body_value(v):
    return v.body if isinstance(v, Supernumber) else float(v)

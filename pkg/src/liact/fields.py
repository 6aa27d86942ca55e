"""Vector fields on a single-chart (super) manifold and the algebra
representation they assemble into.

The representation property is validated symbolically whenever every
bracket residual has a polynomial normal form (exact, coefficient-wise);
otherwise residual fields are evaluated at random in-chart points.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from . import expr
from .errors import ChartDomainError, DimensionError, ParityError
from .grassmann import EVEN, ODD, Supernumber

INF = math.inf


@dataclass(frozen=True)
class Chart:
    """Coordinate chart: even coordinates with an open body box, odd ones free.

    ``periodic[j] > 0`` marks even coordinate j as living on a circle of that
    period; periodic coordinates cannot also carry box constraints.
    """

    even_names: tuple
    odd_names: tuple = ()
    lo: tuple = None
    hi: tuple = None
    periodic: tuple = None

    def __post_init__(self):
        n = len(self.even_names)
        object.__setattr__(self, "lo", tuple(self.lo) if self.lo is not None else (-INF,) * n)
        object.__setattr__(self, "hi", tuple(self.hi) if self.hi is not None else (INF,) * n)
        object.__setattr__(
            self, "periodic", tuple(self.periodic) if self.periodic is not None else (0.0,) * n
        )
        if not (len(self.lo) == len(self.hi) == len(self.periodic) == n):
            raise DimensionError("chart constraint arrays must match the even dimension")
        for a, b, p in zip(self.lo, self.hi, self.periodic):
            if a >= b:
                raise ValueError("chart box must have lo < hi")
            if p > 0.0 and (a != -INF or b != INF):
                raise ValueError("periodic coordinates cannot carry box constraints")

    @property
    def n_even(self):
        return len(self.even_names)

    @property
    def n_odd(self):
        return len(self.odd_names)

    @property
    def dim(self):
        return self.n_even + self.n_odd

    @property
    def ctx(self):
        return expr.Context(self.even_names, self.odd_names)

    def body(self, point):
        out = []
        for v in point[: self.n_even]:
            out.append(v.body if isinstance(v, Supernumber) else float(v))
        return np.array(out)

    def contains(self, point, margin=0.0):
        """DeWitt openness: only body parts of even coordinates are constrained."""
        for x, a, b, p in zip(self.body(point), self.lo, self.hi, self.periodic):
            if p > 0.0:
                continue
            if not (a + margin < x < b - margin):
                return False
        return True

    def wrap(self, point):
        """Normalize periodic even coordinates into their fundamental domain."""
        out = list(point)
        for j, p in enumerate(self.periodic):
            if p > 0.0:
                v = out[j]
                if isinstance(v, Supernumber):
                    b = v.body
                    out[j] = v + (b % p - b)
                else:
                    out[j] = v % p
        return tuple(out)

    def binding(self, point):
        if len(point) != self.dim:
            raise DimensionError(
                f"point has {len(point)} coordinates, chart needs {self.dim}"
            )
        names = self.even_names + self.odd_names
        return dict(zip(names, point))

    def sample_body(self, rng, box=2.0):
        """Random real point in the chart (odd coordinates set to zero)."""
        coords = []
        for a, b, p in zip(self.lo, self.hi, self.periodic):
            if p > 0.0:
                coords.append(rng.uniform(0.0, p))
            else:
                lo = max(a, -box)
                hi = min(b, box)
                pad = 0.05 * (hi - lo)
                coords.append(rng.uniform(lo + pad, hi - pad))
        return tuple(coords) + (0.0,) * self.n_odd


class VectorField:
    """One expression per coordinate; homogeneous parity."""

    __slots__ = ("chart", "components", "parity")

    def __init__(self, chart, components, parity):
        if len(components) != chart.dim:
            raise DimensionError("one component per chart coordinate required")
        for j, comp in enumerate(components):
            coord_parity = EVEN if j < chart.n_even else ODD
            want = (parity + coord_parity) % 2
            if not comp.is_homogeneous(want):
                raise ParityError(
                    f"component {j} must be {('even', 'odd')[want]} for a "
                    f"{('even', 'odd')[parity]} field"
                )
        self.chart = chart
        self.components = tuple(components)
        self.parity = parity

    @classmethod
    def parse(cls, chart, sources, parity):
        ctx = chart.ctx
        return cls(chart, tuple(expr.parse(src, ctx) for src in sources), parity)

    def __repr__(self):
        comps = ", ".join(expr.to_source(c) for c in self.components)
        return f"VectorField[{('even', 'odd')[self.parity]}]({comps})"


def graded_bracket_fields(a, b):
    """[a, b] = a b - (-1)^{|a||b|} b a, computed symbolically.

    Component formula: [a,b]_l = sum_k a_k d_k(b_l) - (-1)^{|a||b|} b_k d_k(a_l);
    the second-derivative terms cancel by the graded symmetry of partials.
    """
    if a.chart != b.chart:
        raise DimensionError("fields live on different charts")
    chart = a.chart
    names = chart.even_names + chart.odd_names
    sign_flip = (a.parity * b.parity) % 2 == 1
    components = []
    for l in range(chart.dim):
        acc = None
        for k, name in enumerate(names):
            t1 = a.components[k] * expr.differentiate(b.components[l], name)
            t2 = b.components[k] * expr.differentiate(a.components[l], name)
            term = t1 + t2 if sign_flip else t1 - t2
            acc = term if acc is None else acc + term
        components.append(acc)
    return VectorField(chart, components, (a.parity + b.parity) % 2)


def field_combination(chart, coeffs, fields, parity):
    """Real linear combination sum_i coeffs[i] * fields[i] as a VectorField."""
    ctx = chart.ctx
    components = []
    for l in range(chart.dim):
        acc = expr.SExpr(ctx)
        for c, f in zip(coeffs, fields):
            if c != 0.0:
                acc = acc + expr.SExpr.constant(ctx, c) * f.components[l]
        components.append(acc)
    return VectorField(chart, components, parity)


class Representation:
    """Map from algebra basis elements to vector fields on the chart."""

    def __init__(self, sc, fields, chart, n_gen=2):
        if len(fields) != sc.dim:
            raise DimensionError("one vector field per basis element required")
        for i, f in enumerate(fields):
            if f.parity != sc.parities[i]:
                raise ParityError(f"field {i} parity does not match basis parity")
            if f.chart != chart:
                raise DimensionError("all fields must share the representation chart")
        if n_gen < chart.n_odd:
            raise DimensionError(
                "need at least as many exterior generators as odd coordinates"
            )
        self.sc = sc
        self.fields = tuple(fields)
        self.chart = chart
        self.n_gen = n_gen

    @property
    def dim(self):
        return self.sc.dim

    def is_real_problem(self):
        return self.chart.n_odd == 0 and self.n_gen == 0


def eval_rho(rep, x, m, check_chart=True):
    """Tangent vector of the representation at (X, m): sum_i X^i rho(e_i)|_m.

    Coordinates of X multiply from the left, so supernumber coefficients are
    supported; X must be even overall.
    """
    if x.dim != rep.dim:
        raise DimensionError("algebra element dimension mismatch")
    if x.parity_wrt(rep.sc.parities) is None:
        raise ParityError("representation evaluated at a mixed-parity algebra element")
    if check_chart and not rep.chart.contains(m):
        raise ChartDomainError(f"point {m!r} outside chart")
    binding = rep.chart.binding(m)
    super_mode = any(isinstance(v, Supernumber) for v in m) or any(
        isinstance(c, Supernumber) and not c.soul().is_zero() for c in x.coords
    )
    out = []
    for l in range(rep.chart.dim):
        acc = None
        for i, f in enumerate(rep.fields):
            xi = x.coords[i]
            xi_zero = xi.is_zero() if isinstance(xi, Supernumber) else xi == 0.0
            if xi_zero:
                continue
            v = expr.evaluate(f.components[l], binding)
            term = xi * v
            acc = term if acc is None else acc + term
        if acc is None:
            acc = Supernumber(rep.n_gen) if super_mode else 0.0
        out.append(acc)
    return out


@dataclass
class ValidationReport:
    max_residual: float
    mode: str                      # "symbolic", "sampled", or "mixed"
    pairs: dict = field(default_factory=dict)

    def ok(self, tol=1e-10):
        return self.max_residual <= tol


def _residual_magnitude_symbolic(component):
    poly = expr.as_polynomial(component)
    if poly is None:
        return None
    return max((abs(c) for c in poly.values()), default=0.0)


def validate_representation(rep, samples=25, rng=None, box=2.0):
    """Check [rho(e_i), rho(e_j)] = sum_k c_ij^k rho(e_k) for all pairs.

    Residual fields are reduced to polynomial normal form when possible
    (exact); otherwise they are evaluated at `samples` random in-chart
    points with odd coordinates set to distinct exterior generators.
    """
    sc = rep.sc
    report = ValidationReport(0.0, "symbolic")
    modes = set()
    for i in range(sc.dim):
        for j in range(i, sc.dim):
            if i == j and sc.parities[i] == EVEN:
                continue  # even self-bracket vanishes identically
            lhs = graded_bracket_fields(rep.fields[i], rep.fields[j])
            target_parity = (sc.parities[i] + sc.parities[j]) % 2
            rhs = field_combination(rep.chart, sc.c[i, j], rep.fields, target_parity)
            residual = 0.0
            mode = "symbolic"
            for l in range(rep.chart.dim):
                diff = lhs.components[l] - rhs.components[l]
                mag = _residual_magnitude_symbolic(diff)
                if mag is None:
                    mode = "sampled"
                    mag = _sample_component_magnitude(rep, diff, samples, rng, box)
                residual = max(residual, mag)
            modes.add(mode)
            report.pairs[(i, j)] = {"residual": residual, "mode": mode}
            report.max_residual = max(report.max_residual, residual)
    if modes == {"symbolic"} or not modes:
        report.mode = "symbolic"
    elif modes == {"sampled"}:
        report.mode = "sampled"
    else:
        report.mode = "mixed"
    return report


def _sample_component_magnitude(rep, component, samples, rng, box):
    if rng is None:
        rng = np.random.default_rng(0)
    chart = rep.chart
    worst = 0.0
    for _ in range(samples):
        pt = list(chart.sample_body(rng, box))
        for k in range(chart.n_odd):
            pt[chart.n_even + k] = Supernumber.generator(rep.n_gen, k) * rng.uniform(0.5, 1.5)
        value = expr.evaluate(component, chart.binding(tuple(pt)))
        mag = value.max_abs() if isinstance(value, Supernumber) else abs(value)
        worst = max(worst, mag)
    return worst


def fundamental_field_from_action(action, model, x, m, h=1e-4, sign=-1, periods=None):
    """Differentiate an action along a one-parameter subgroup at t = 0.

    Central difference (action(exp(sign h X), m) - action(exp(-sign h X), m))
    / (2h); with the default sign -1 this is the convention whose induced
    map X -> field is a homomorphism (not an anti-homomorphism).
    """
    plus = np.asarray(action(model.exp(x.scale(sign * h)), m), dtype=float)
    minus = np.asarray(action(model.exp(x.scale(-sign * h)), m), dtype=float)
    diff = plus - minus
    if periods is not None:
        for j, p in enumerate(periods):
            if p > 0.0:
                diff[j] = (diff[j] + 0.5 * p) % p - 0.5 * p
    return diff / (2.0 * h)

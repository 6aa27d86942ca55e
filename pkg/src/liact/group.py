"""Group models: multiplication, inverse, exp/log charts, and piecewise
paths with right logarithmic derivatives.

Four concrete models cover every scenario this package ships: euclidean
translation groups, real matrix groups (with a basis identifying the
algebra), nilpotent groups in exponential coordinates (exact BCH
multiplication), and the circle — the one deliberately non-simply-connected
model, kept for obstruction diagnostics.
"""

import numpy as np
import scipy.linalg

from .algebra import AlgebraElement, bracket
from .errors import DimensionError, LogChartError, ParityError
from .grassmann import Supernumber

_NILPOTENCY_TOL = 1e-12


class GroupElement:
    __slots__ = ("model", "data")

    def __init__(self, model, data):
        self.model = model
        self.data = data

    def __repr__(self):
        return f"GroupElement({self.model.kind}, {self.data!r})"


class GroupModel:
    kind = "abstract"
    simply_connected = True
    supports_super = False

    def multiply(self, a, b):
        raise NotImplementedError

    def inverse(self, a):
        raise NotImplementedError

    def identity(self):
        raise NotImplementedError

    def exp(self, x):
        raise NotImplementedError

    def log(self, g):
        raise NotImplementedError

    def distance(self, a, b):
        raise NotImplementedError

    def _check(self, *elems):
        for g in elems:
            if g.model is not self:
                raise DimensionError("group elements belong to different models")


def _coord_distance(a, b):
    out = 0.0
    for x, y in zip(a, b):
        diff = x - y
        m = diff.max_abs() if isinstance(diff, Supernumber) else abs(diff)
        out = max(out, m)
    return out


class EuclideanModel(GroupModel):
    """Additive group on R^d; coordinates may be even supernumbers."""

    kind = "euclidean"
    supports_super = True

    def __init__(self, dim):
        self.dim = dim

    def multiply(self, a, b):
        self._check(a, b)
        return GroupElement(self, tuple(x + y for x, y in zip(a.data, b.data)))

    def inverse(self, a):
        self._check(a)
        return GroupElement(self, tuple(-x for x in a.data))

    def identity(self):
        return GroupElement(self, (0.0,) * self.dim)

    def exp(self, x):
        if x.dim != self.dim:
            raise DimensionError("algebra element dimension mismatch")
        return GroupElement(self, tuple(x.coords))

    def log(self, g):
        self._check(g)
        return AlgebraElement(tuple(g.data))

    def distance(self, a, b):
        return _coord_distance(a.data, b.data)

    def element_to_json(self, g):
        return [c.to_json() if isinstance(c, Supernumber) else c for c in g.data]


class CircleModel(GroupModel):
    """R/Z with representative in [0, 1); diagnostics-only, not simply connected."""

    kind = "circle"
    simply_connected = False
    dim = 1

    def multiply(self, a, b):
        self._check(a, b)
        return GroupElement(self, (a.data + b.data) % 1.0)

    def inverse(self, a):
        self._check(a)
        return GroupElement(self, (-a.data) % 1.0)

    def identity(self):
        return GroupElement(self, 0.0)

    def exp(self, x):
        if x.dim != 1:
            raise DimensionError("circle algebra is one dimensional")
        return GroupElement(self, float(x.body()[0]) % 1.0)

    def log(self, g):
        self._check(g)
        if g.data == 0.5:
            raise LogChartError("antipode is outside the principal log chart")
        rep = g.data if g.data < 0.5 else g.data - 1.0
        return AlgebraElement.from_real([rep])

    def distance(self, a, b):
        d = abs(a.data - b.data) % 1.0
        return min(d, 1.0 - d)

    def element_to_json(self, g):
        return g.data


class MatrixModel(GroupModel):
    """Invertible real matrices near a subgroup spanned by a matrix basis."""

    kind = "matrix"

    def __init__(self, size, basis):
        self.size = size
        self.basis = [np.asarray(b, dtype=float) for b in basis]
        for b in self.basis:
            if b.shape != (size, size):
                raise DimensionError(f"basis matrices must be {size}x{size}")
        self.dim = len(self.basis)
        # flattened basis for coordinate extraction
        self._bmat = np.stack([b.reshape(-1) for b in self.basis], axis=1)

    def multiply(self, a, b):
        self._check(a, b)
        return GroupElement(self, a.data @ b.data)

    def inverse(self, a):
        self._check(a)
        if abs(np.linalg.det(a.data)) < 1e-300:
            raise DimensionError("singular matrix has no inverse")
        return GroupElement(self, np.linalg.inv(a.data))

    def identity(self):
        return GroupElement(self, np.eye(self.size))

    def as_matrix(self, x):
        if x.dim != self.dim:
            raise DimensionError("algebra element dimension mismatch")
        if not x.is_real():
            raise ParityError("matrix model accepts real algebra coordinates only")
        m = np.zeros((self.size, self.size))
        for xi, b in zip(x.body(), self.basis):
            m += xi * b
        return m

    def exp(self, x):
        return GroupElement(self, scipy.linalg.expm(self.as_matrix(x)))

    def log(self, g):
        """Principal matrix logarithm, mapped back to algebra coordinates."""
        self._check(g)
        eig = np.linalg.eigvals(g.data)
        for ev in eig:
            if abs(ev.imag) < 1e-12 and ev.real <= 0.0:
                raise LogChartError(
                    "eigenvalue on the closed negative real axis: outside log "
                    "chart; supply a route (GroupPath) instead"
                )
        lg = scipy.linalg.logm(g.data)
        if np.max(np.abs(np.imag(lg))) > 1e-9:
            raise LogChartError("principal logarithm is not real")
        lg = np.real(lg)
        coords, residual, _, _ = np.linalg.lstsq(self._bmat, lg.reshape(-1), rcond=None)
        recon = self._bmat @ coords
        if np.max(np.abs(recon - lg.reshape(-1))) > 1e-8:
            raise LogChartError("logarithm lies outside the span of the algebra basis")
        return AlgebraElement.from_real(coords)

    def distance(self, a, b):
        return float(np.max(np.abs(a.data - b.data)))

    def element_to_json(self, g):
        return [[float(v) for v in row] for row in g.data]


def bch(sc, nclass, x, y):
    """Baker-Campbell-Hausdorff combination, exact for nilpotency class <= 4."""
    z = x + y
    if nclass >= 2:
        xy = bracket(sc, x, y)
        z = z + xy.scale(0.5)
        if nclass >= 3:
            xxy = bracket(sc, x, xy)
            yxy = bracket(sc, y, xy)
            z = z + xxy.scale(1.0 / 12.0) - yxy.scale(1.0 / 12.0)
            if nclass >= 4:
                z = z - bracket(sc, y, xxy).scale(1.0 / 24.0)
    return z


class NilpotentExpModel(GroupModel):
    """Nilpotent group in exponential coordinates; BCH multiplication is exact."""

    kind = "nilpotent_exp"
    supports_super = True

    def __init__(self, sc, nclass):
        if nclass < 1 or nclass > 4:
            raise DimensionError("supported nilpotency classes are 1..4")
        self.sc = sc
        self.nclass = nclass
        self.dim = sc.dim
        self._check_nilpotent()

    def _check_nilpotent(self):
        basis = [
            AlgebraElement.from_real([1.0 if i == j else 0.0 for j in range(self.dim)])
            for i in range(self.dim)
        ]
        level = basis
        for _ in range(self.nclass):
            level = [bracket(self.sc, e, w) for e in basis for w in level]
            level = [w for w in level if w.max_abs() > _NILPOTENCY_TOL]
        if level:
            raise DimensionError(
                f"structure constants are not nilpotent of class {self.nclass}"
            )

    def multiply(self, a, b):
        self._check(a, b)
        return GroupElement(self, bch(self.sc, self.nclass, a.data, b.data))

    def inverse(self, a):
        self._check(a)
        return GroupElement(self, -a.data)

    def identity(self):
        return GroupElement(self, AlgebraElement.from_real([0.0] * self.dim))

    def exp(self, x):
        if x.dim != self.dim:
            raise DimensionError("algebra element dimension mismatch")
        return GroupElement(self, x)

    def log(self, g):
        self._check(g)
        return g.data

    def distance(self, a, b):
        return _coord_distance(a.data.coords, b.data.coords)

    def element_to_json(self, g):
        return [
            c.to_json() if isinstance(c, Supernumber) else c for c in g.data.coords
        ]


def multiply(a, b):
    return a.model.multiply(a, b)


def inverse(a):
    return a.model.inverse(a)


def exp(model, x):
    return model.exp(x)


def log_near_identity(g):
    return g.model.log(g)


# --- paths --------------------------------------------------------------------


class ExpSegment:
    """t -> exp(t X) . start for t in [0, duration]."""

    __slots__ = ("x", "duration", "start")

    def __init__(self, x, duration=1.0, start=None):
        if duration <= 0:
            raise ValueError("segment duration must be positive")
        self.x = x
        self.duration = float(duration)
        self.start = start

    def end(self, model):
        return model.multiply(model.exp(self.x.scale(self.duration)), self.start)

    def at(self, model, s):
        return model.multiply(model.exp(self.x.scale(s)), self.start)


class SampledSegment:
    """Ordered group-element samples on an increasing local time grid."""

    __slots__ = ("times", "points", "_xi_cache")

    def __init__(self, times, points):
        self.times = np.asarray(times, dtype=float)
        if len(points) != len(self.times) or len(points) < 2:
            raise ValueError("need matching times/points with at least two samples")
        if np.any(np.diff(self.times) <= 0):
            raise ValueError("sample times must be strictly increasing")
        self.points = list(points)
        self._xi_cache = None

    @property
    def duration(self):
        return float(self.times[-1] - self.times[0])

    def end(self, model):
        return self.points[-1]

    def at(self, model, s):
        t = self.times[0] + s
        i = int(np.searchsorted(self.times, t, side="right")) - 1
        i = min(max(i, 0), len(self.points) - 1)
        return self.points[i]

    def xi_nodes(self, model):
        """Right log derivative at the sample nodes by central differences.

        Computed once per segment on the segment's own grid (no resampling)
        and cached; lifting evaluates this many times per step.
        """
        if self._xi_cache is None:
            out = []
            for i in range(len(self.points)):
                lo = max(i - 1, 0)
                hi = min(i + 1, len(self.points) - 1)
                step = self.times[hi] - self.times[lo]
                ratio = model.multiply(self.points[hi], model.inverse(self.points[lo]))
                out.append(model.log(ratio).scale(1.0 / step))
            self._xi_cache = out
        return self._xi_cache


class GroupPath:
    """Piecewise path; segments chain continuously from a basepoint."""

    def __init__(self, model, basepoint=None):
        self.model = model
        self.basepoint = basepoint if basepoint is not None else model.identity()
        self.segments = []

    def append_exp(self, x, duration=1.0):
        seg = ExpSegment(x, duration, start=self.endpoint())
        self.segments.append(seg)
        return self

    def append_sampled(self, times, points, tol=1e-9):
        if self.model.distance(points[0], self.endpoint()) > tol:
            raise ValueError("sampled segment does not start at the path endpoint")
        self.segments.append(SampledSegment(times, points))
        return self

    @classmethod
    def from_word(cls, model, factors, durations=None):
        """Path from the identity realizing the product factors[0]...factors[-1].

        The path traverses the *last* factor first, so lifting it applies the
        word right to left, matching how a left action composes.
        """
        path = cls(model)
        if durations is None:
            durations = [1.0] * len(factors)
        for x, dur in zip(reversed(factors), reversed(list(durations))):
            path.append_exp(x, dur)
        return path

    @classmethod
    def single_exp(cls, model, x, duration=1.0):
        return cls(model).append_exp(x, duration)

    @property
    def total_time(self):
        return sum(seg.duration for seg in self.segments)

    def endpoint(self):
        if not self.segments:
            return self.basepoint
        return self.segments[-1].end(self.model)

    def element_at(self, t):
        seg, s = self._locate(t)
        if seg is None:
            return self.basepoint
        return seg.at(self.model, s)

    def _locate(self, t):
        if t < -1e-12 or t > self.total_time + 1e-12:
            raise ValueError(f"parameter {t} outside [0, {self.total_time}]")
        if not self.segments:
            return None, 0.0
        acc = 0.0
        for seg in self.segments:
            if t <= acc + seg.duration or seg is self.segments[-1]:
                return seg, min(max(t - acc, 0.0), seg.duration)
            acc += seg.duration
        raise AssertionError("unreachable")

    def is_closed(self, tol=1e-12):
        return self.model.distance(self.endpoint(), self.basepoint) <= tol


def right_log_derivative(path, t):
    """xi(t) with gamma'(t) = xi(t)^r at gamma(t), i.e. gamma' . gamma^{-1}.

    Exp segments return their generator exactly; sampled segments use
    central differences on their own grid, interpolated linearly between
    nodes.
    """
    seg, s = path._locate(t)
    if seg is None:
        raise ValueError("empty path has no derivative")
    if isinstance(seg, ExpSegment):
        return seg.x
    nodes = seg.xi_nodes(path.model)
    local = seg.times[0] + s
    i = int(np.searchsorted(seg.times, local, side="right")) - 1
    i = min(max(i, 0), len(nodes) - 2)
    t0, t1 = seg.times[i], seg.times[i + 1]
    w = (local - t0) / (t1 - t0)
    a, b = nodes[i], nodes[i + 1]
    return AlgebraElement(
        tuple(x * (1.0 - w) + y * w for x, y in zip(a.coords, b.coords))
    )

"""Finite-generator exterior algebra: supernumbers with parity, body/soul
split, and Taylor extension of smooth functions to even arguments.

A supernumber on N generators is stored sparsely as a map from generator
subsets (bitmasks, ascending index order) to real coefficients. All
arithmetic is exact up to float rounding: nilpotency keeps every series
finite, so nothing is ever truncated.
"""

import math

from . import backends
from .errors import DimensionError, ParityError

EVEN = 0
ODD = 1

MAX_GENERATORS = 12

_PARITY_NAMES = {"even": EVEN, "odd": ODD}


def parity_from_name(name):
    try:
        return _PARITY_NAMES[name]
    except KeyError:
        raise ValueError(f"parity must be 'even' or 'odd', got {name!r}") from None


def parity_name(parity):
    return "even" if parity == EVEN else "odd"


class Supernumber:
    """Element of the exterior algebra on ``n`` generators.

    Immutable. ``terms`` maps subset bitmask -> coefficient; zero
    coefficients are dropped so equality is structural.
    """

    __slots__ = ("n", "_terms")

    def __init__(self, n, terms=None):
        if not 0 <= n <= MAX_GENERATORS:
            raise DimensionError(f"generator count must be in [0, {MAX_GENERATORS}], got {n}")
        self.n = n
        clean = {}
        if terms:
            for mask, coeff in terms.items():
                if mask < 0 or mask >= (1 << n):
                    raise DimensionError(f"subset mask {mask:#b} out of range for n={n}")
                c = float(coeff)
                if c != 0.0:
                    clean[mask] = c
        self._terms = clean

    @classmethod
    def real(cls, n, x):
        return cls(n, {0: float(x)})

    @classmethod
    def generator(cls, n, i):
        if not 0 <= i < n:
            raise DimensionError(f"generator index {i} out of range for n={n}")
        return cls(n, {1 << i: 1.0})

    @classmethod
    def monomial(cls, n, subset, coeff=1.0):
        mask = 0
        for i in subset:
            bit = 1 << i
            if mask & bit:
                return cls(n)  # repeated generator
            mask |= bit
        return cls(n, {mask: coeff})

    @property
    def terms(self):
        return dict(self._terms)

    @property
    def body(self):
        return self._terms.get(0, 0.0)

    def soul(self):
        return Supernumber(self.n, {m: c for m, c in self._terms.items() if m != 0})

    def is_zero(self):
        return not self._terms

    @property
    def parity(self):
        """EVEN, ODD, or None for mixed/zero-is-even elements."""
        if not self._terms:
            return EVEN
        seen = {m.bit_count() & 1 for m in self._terms}
        if len(seen) > 1:
            return None
        return seen.pop()

    def _coerce(self, other):
        if isinstance(other, Supernumber):
            if other.n != self.n:
                raise DimensionError(f"generator count mismatch: {self.n} vs {other.n}")
            return other
        if isinstance(other, (int, float)):
            return Supernumber.real(self.n, other)
        return None

    def __add__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        out = dict(self._terms)
        for m, c in o._terms.items():
            out[m] = out.get(m, 0.0) + c
        return Supernumber(self.n, out)

    __radd__ = __add__

    def __neg__(self):
        return Supernumber(self.n, {m: -c for m, c in self._terms.items()})

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
        if isinstance(other, (int, float)):
            return Supernumber(self.n, {m: c * other for m, c in self._terms.items()})
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return gr_mul(self, o)

    def __rmul__(self, other):
        if isinstance(other, (int, float)):
            return Supernumber(self.n, {m: other * c for m, c in self._terms.items()})
        return NotImplemented

    def __truediv__(self, other):
        if isinstance(other, (int, float)):
            return self * (1.0 / other)
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return self * o.inv()

    def __rtruediv__(self, other):
        if isinstance(other, (int, float)):
            return Supernumber.real(self.n, other) * self.inv()
        return NotImplemented

    def __pow__(self, k):
        if not isinstance(k, int):
            return NotImplemented
        if k < 0:
            return self.inv() ** (-k)
        result = Supernumber.real(self.n, 1.0)
        base = self
        while k:
            if k & 1:
                result = result * base
            k >>= 1
            if k:
                base = base * base
        return result

    def inv(self):
        """Multiplicative inverse; finite geometric series in the soul."""
        b = self.body
        if b == 0.0:
            raise ZeroDivisionError("supernumber with zero body is not invertible")
        s = self.soul() * (-1.0 / b)
        acc = Supernumber.real(self.n, 1.0)
        power = Supernumber.real(self.n, 1.0)
        while True:
            power = power * s
            if power.is_zero():
                break
            acc = acc + power
        return acc * (1.0 / b)

    def __eq__(self, other):
        if isinstance(other, (int, float)):
            other = Supernumber.real(self.n, other)
        if not isinstance(other, Supernumber):
            return NotImplemented
        return self.n == other.n and self._terms == other._terms

    def __hash__(self):
        return hash((self.n, tuple(sorted(self._terms.items()))))

    def sorted_terms(self):
        return sorted(self._terms.items())

    def max_abs(self):
        return max((abs(c) for c in self._terms.values()), default=0.0)

    def to_json(self):
        return {
            "N": self.n,
            "terms": [
                {"subset": _mask_to_subset(m), "coeff": c} for m, c in self.sorted_terms()
            ],
        }

    @classmethod
    def from_json(cls, obj):
        n = obj["N"]
        terms = {}
        for rec in obj["terms"]:
            mask = 0
            for i in rec["subset"]:
                mask |= 1 << i
            terms[mask] = terms.get(mask, 0.0) + rec["coeff"]
        return cls(n, terms)

    def __repr__(self):
        if not self._terms:
            return "0"
        parts = []
        for m, c in self.sorted_terms():
            gens = "".join(f"th{i}" for i in _mask_to_subset(m))
            if m == 0:
                parts.append(f"{c:g}")
            elif c == 1.0:
                parts.append(gens)
            elif c == -1.0:
                parts.append(f"-{gens}")
            else:
                parts.append(f"{c:g}*{gens}")
        out = parts[0]
        for p in parts[1:]:
            out += f" {'-' if p.startswith('-') else '+'} {p.lstrip('-')}"
        return out


def _mask_to_subset(mask):
    out = []
    i = 0
    while mask:
        if mask & 1:
            out.append(i)
        mask >>= 1
        i += 1
    return out


def gr_mul(a, b):
    """Graded-commutative product of two supernumbers."""
    if not isinstance(a, Supernumber) or not isinstance(b, Supernumber):
        raise TypeError("gr_mul expects two supernumbers")
    if a.n != b.n:
        raise DimensionError(f"generator count mismatch: {a.n} vs {b.n}")
    ta = a.sorted_terms()
    tb = b.sorted_terms()
    masks, coeffs = backends.gr_mul_terms(
        a.n,
        [m for m, _ in ta],
        [c for _, c in ta],
        [m for m, _ in tb],
        [c for _, c in tb],
    )
    return Supernumber(a.n, dict(zip(masks, coeffs)))


def body_soul(s):
    """Split into (real body, nilpotent soul)."""
    return s.body, s.soul()


def taylor_eval(derivs, s, max_order=None):
    """Extend a smooth scalar function to an even supernumber argument.

    ``derivs(k, x)`` must return the k-th derivative at the real point x.
    The result is sum_k derivs(k, body) * soul^k / k!, finite by nilpotency.
    """
    if not isinstance(s, Supernumber):
        raise TypeError("taylor_eval expects a supernumber argument")
    if s.parity != EVEN:
        raise ParityError("taylor_eval requires an even argument")
    b = s.body
    sigma = s.soul()
    limit = s.n if max_order is None else max_order
    acc = Supernumber.real(s.n, float(derivs(0, b)))
    power = Supernumber.real(s.n, 1.0)
    for k in range(1, limit + 1):
        power = power * sigma
        if power.is_zero():
            break
        acc = acc + power * (float(derivs(k, b)) / math.factorial(k))
    return acc


def promote(value, n):
    """Lift a real to a supernumber on n generators.

    Supernumbers pass through; a soulless one on a different generator
    count is rebased (its body is all that matters), anything with soul
    must already live on n generators.
    """
    if isinstance(value, Supernumber):
        if value.n == n:
            return value
        if value.soul().is_zero():
            return Supernumber.real(n, value.body)
        raise DimensionError(f"generator count mismatch: {value.n} vs {n}")
    return Supernumber.real(n, value)

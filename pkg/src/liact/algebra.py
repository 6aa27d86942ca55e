"""(Super) Lie algebras given by structure constants on a homogeneous basis.

Structure constants are real; elements carry supernumber coordinates. An
element is even exactly when each coordinate's parity matches its basis
vector's parity, which is the membership test for the even part of the
scalar-extended algebra.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionError, ParityError
from .grassmann import EVEN, ODD, Supernumber, parity_from_name, parity_name, promote


@dataclass(frozen=True)
class StructureConstants:
    """Bracket tensor c[i][j][k] with per-basis-element parities."""

    dim: int
    parities: tuple
    c: np.ndarray = field(repr=False)

    def __post_init__(self):
        if len(self.parities) != self.dim:
            raise DimensionError("one parity per basis element required")
        if self.c.shape != (self.dim, self.dim, self.dim):
            raise DimensionError(f"structure tensor must be {self.dim}^3")
        for i in range(self.dim):
            for j in range(self.dim):
                target = (self.parities[i] + self.parities[j]) % 2
                for k in range(self.dim):
                    if self.c[i, j, k] != 0.0 and self.parities[k] != target:
                        raise ParityError(
                            f"c[{i}][{j}][{k}] nonzero violates parity consistency"
                        )

    def __eq__(self, other):
        return (
            isinstance(other, StructureConstants)
            and self.dim == other.dim
            and self.parities == other.parities
            and np.array_equal(self.c, other.c)
        )

    def __hash__(self):
        return hash((self.dim, self.parities, self.c.tobytes()))

    @classmethod
    def abelian(cls, dim, parities=None):
        parities = tuple(parities) if parities else (EVEN,) * dim
        return cls(dim, parities, np.zeros((dim, dim, dim)))

    @classmethod
    def from_brackets(cls, dim, parities, entries):
        """Build from sparse bracket entries {(i, j): {k: value}}.

        Unlisted entries are zero; the graded-antisymmetric counterpart of
        every entry is filled in automatically and cross-checked when both
        orders are given.
        """
        parities = tuple(parities)
        c = np.zeros((dim, dim, dim))
        given = np.zeros((dim, dim, dim), dtype=bool)
        for (i, j), coeffs in entries.items():
            for k, v in coeffs.items():
                if given[i, j, k] and c[i, j, k] != float(v):
                    raise ValueError(f"conflicting values for c[{i}][{j}][{k}]")
                c[i, j, k] = float(v)
                given[i, j, k] = True
        # fill graded-antisymmetric counterparts where only one order given
        for i in range(dim):
            for j in range(dim):
                sign = -1.0 if (parities[i] * parities[j]) % 2 == 0 else 1.0
                for k in range(dim):
                    if given[i, j, k] and not given[j, i, k]:
                        c[j, i, k] = sign * c[i, j, k]
                        given[j, i, k] = True
        return cls(dim, parities, c)

    def to_json(self):
        brackets = []
        for i in range(self.dim):
            for j in range(self.dim):
                coeffs = {
                    str(k): self.c[i, j, k]
                    for k in range(self.dim)
                    if self.c[i, j, k] != 0.0
                }
                if coeffs and (i < j or (i == j and self.parities[i] == ODD)):
                    brackets.append({"i": i, "j": j, "coeffs": coeffs})
        return {
            "dim": self.dim,
            "parities": [parity_name(p) for p in self.parities],
            "brackets": brackets,
        }

    @classmethod
    def from_json(cls, obj):
        dim = obj["dim"]
        parities = tuple(parity_from_name(p) for p in obj["parities"])
        entries = {}
        for rec in obj.get("brackets", []):
            for k, v in rec["coeffs"].items():
                if not isinstance(v, (int, float)) or isinstance(v, bool):
                    raise ValueError("structure constants must be real numbers")
                entries.setdefault((rec["i"], rec["j"]), {})[int(k)] = float(v)
        return cls.from_brackets(dim, parities, entries)


class AlgebraElement:
    """X = sum_i X^i e_i with supernumber coordinates (written on the left)."""

    __slots__ = ("coords",)

    def __init__(self, coords):
        coords = tuple(coords)
        if not coords:
            raise DimensionError("algebra element needs at least one coordinate")
        self.coords = coords

    @classmethod
    def from_real(cls, coords, n_gen=0):
        return cls(tuple(Supernumber.real(n_gen, x) for x in coords))

    @property
    def dim(self):
        return len(self.coords)

    def body(self):
        return np.array([c.body if isinstance(c, Supernumber) else float(c) for c in self.coords])

    def is_real(self):
        return all(
            not isinstance(c, Supernumber) or c.soul().is_zero() for c in self.coords
        )

    def parity_wrt(self, parities):
        """EVEN/ODD/None given the basis parities (zero coords are neutral)."""
        vote = set()
        for x, eps in zip(self.coords, parities):
            x = x if isinstance(x, Supernumber) else Supernumber.real(0, x)
            if x.is_zero():
                continue
            p = x.parity
            if p is None:
                return None
            vote.add((p + eps) % 2)
        if not vote:
            return EVEN
        return vote.pop() if len(vote) == 1 else None

    def scale(self, a):
        return AlgebraElement(tuple(a * c for c in self.coords))

    def __add__(self, other):
        if self.dim != other.dim:
            raise DimensionError("dimension mismatch")
        return AlgebraElement(tuple(a + b for a, b in zip(self.coords, other.coords)))

    def __sub__(self, other):
        if self.dim != other.dim:
            raise DimensionError("dimension mismatch")
        return AlgebraElement(tuple(a - b for a, b in zip(self.coords, other.coords)))

    def __neg__(self):
        return AlgebraElement(tuple(-c for c in self.coords))

    def __eq__(self, other):
        return isinstance(other, AlgebraElement) and self.coords == other.coords

    def __hash__(self):
        return hash(self.coords)

    def max_abs(self):
        out = 0.0
        for c in self.coords:
            m = c.max_abs() if isinstance(c, Supernumber) else abs(float(c))
            out = max(out, m)
        return out

    def __repr__(self):
        return f"AlgebraElement({list(self.coords)!r})"


def bracket(sc, x, y):
    """Graded bracket of two algebra elements via the structure tensor.

    Coordinates multiply from the left: [a X, Y] = a [X, Y]; the Koszul sign
    for moving a right-factor coefficient past a basis element is applied
    per homogeneous part.
    """
    d = sc.dim
    if x.dim != d or y.dim != d:
        raise DimensionError("element dimension does not match the algebra")
    n_gen = 0
    for c in tuple(x.coords) + tuple(y.coords):
        if isinstance(c, Supernumber):
            n_gen = max(n_gen, c.n)
    out = [Supernumber(n_gen) for _ in range(d)]
    for i in range(d):
        xi = promote(x.coords[i], n_gen)
        if xi.is_zero():
            continue
        for j in range(d):
            yj = promote(y.coords[j], n_gen)
            if yj.is_zero():
                continue
            # split y^j by parity: even parts commute past e_i, odd parts
            # pick up (-1)^{eps_i}
            even_part = Supernumber(n_gen, {m: c for m, c in yj.terms.items() if m.bit_count() % 2 == 0})
            odd_part = yj - even_part
            for part, sign in ((even_part, 1.0), (odd_part, -1.0 if sc.parities[i] == ODD else 1.0)):
                if part.is_zero():
                    continue
                coeff = xi * part * sign
                for k in range(d):
                    cijk = sc.c[i, j, k]
                    if cijk != 0.0:
                        out[k] = out[k] + coeff * cijk
    return AlgebraElement(out)


def check_antisymmetry(sc):
    """Max defect of c[i][j][k] + (-1)^{eps_i eps_j} c[j][i][k]."""
    worst = 0.0
    for i in range(sc.dim):
        for j in range(sc.dim):
            sign = -1.0 if (sc.parities[i] * sc.parities[j]) % 2 == 1 else 1.0
            defect = sc.c[i, j] + sign * sc.c[j, i]
            worst = max(worst, float(np.max(np.abs(defect))))
    return worst


def check_jacobi(sc):
    """Max graded Jacobi defect over all index triples.

    Uses the derivation form [e_i,[e_j,e_k]] = [[e_i,e_j],e_k]
    + (-1)^{eps_i eps_j} [e_j,[e_i,e_k]].
    """
    c = sc.c
    eps = sc.parities
    worst = 0.0
    d = sc.dim
    for i in range(d):
        for j in range(d):
            sign = -1.0 if (eps[i] * eps[j]) % 2 == 1 else 1.0
            for k in range(d):
                for m in range(d):
                    lhs = sum(c[j, k, l] * c[i, l, m] for l in range(d))
                    rhs = sum(c[i, j, l] * c[l, k, m] for l in range(d))
                    rhs += sign * sum(c[i, k, l] * c[j, l, m] for l in range(d))
                    worst = max(worst, abs(lhs - rhs))
    return worst

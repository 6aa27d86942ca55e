"""Expression language for vector-field coefficients.

Source strings parse into a graded normal form: a map from subsets of the
declared odd variables (canonical ascending order) to coefficient ASTs in
the even variables. Anticommutation signs, nilpotency (a repeated odd
variable kills a monomial) and parity bookkeeping all happen during
normalization, so downstream code only ever sees the normal form.

Evaluation works over reals, supernumbers, or any ring-like values that
support + - * and integer powers (used by the exact polynomial flow mode).
"""

import math
from dataclasses import dataclass

import numpy as np

from . import grassmann
from .backends.ops import (
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
    Program,
)
from .errors import ExprSyntaxError, ParityError
from .grassmann import EVEN, ODD, Supernumber

FUNCTIONS = ("sin", "cos", "exp")


@dataclass(frozen=True)
class Context:
    """Declared variables: even coordinates first, then odd ones."""

    even_names: tuple
    odd_names: tuple

    def __post_init__(self):
        seen = set()
        for name in self.even_names + self.odd_names:
            if name in seen:
                raise ValueError(f"duplicate variable name {name!r}")
            if name in FUNCTIONS:
                raise ValueError(f"variable name {name!r} collides with a function")
            seen.add(name)

    def parity_of(self, name):
        if name in self.even_names:
            return EVEN
        if name in self.odd_names:
            return ODD
        raise KeyError(name)

    def odd_index(self, name):
        return self.odd_names.index(name)

    @property
    def names(self):
        return self.even_names + self.odd_names


# --- even-coefficient ASTs -------------------------------------------------

@dataclass(frozen=True)
class Const:
    value: float


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Add:
    a: object
    b: object


@dataclass(frozen=True)
class Sub:
    a: object
    b: object


@dataclass(frozen=True)
class Mul:
    a: object
    b: object


@dataclass(frozen=True)
class Div:
    a: object
    b: object


@dataclass(frozen=True)
class Neg:
    a: object


@dataclass(frozen=True)
class Pow:
    base: object
    n: int


@dataclass(frozen=True)
class Call:
    fn: str
    arg: object


_ZERO = Const(0.0)
_ONE = Const(1.0)


def _is_const(e, v=None):
    return isinstance(e, Const) and (v is None or e.value == v)


def _add(a, b):
    if _is_const(a) and _is_const(b):
        return Const(a.value + b.value)
    if _is_const(a, 0.0):
        return b
    if _is_const(b, 0.0):
        return a
    return Add(a, b)


def _sub(a, b):
    if _is_const(a) and _is_const(b):
        return Const(a.value - b.value)
    if _is_const(b, 0.0):
        return a
    if _is_const(a, 0.0):
        return _neg(b)
    if a == b:
        return _ZERO
    return Sub(a, b)


def _mul(a, b):
    if _is_const(a) and _is_const(b):
        return Const(a.value * b.value)
    if _is_const(a, 0.0) or _is_const(b, 0.0):
        return _ZERO
    if _is_const(a, 1.0):
        return b
    if _is_const(b, 1.0):
        return a
    if _is_const(a, -1.0):
        return _neg(b)
    if _is_const(b, -1.0):
        return _neg(a)
    return Mul(a, b)


def _div(a, b):
    if _is_const(b, 1.0):
        return a
    if _is_const(a) and _is_const(b) and b.value != 0.0:
        return Const(a.value / b.value)
    return Div(a, b)


def _neg(a):
    if _is_const(a):
        return Const(-a.value)
    if isinstance(a, Neg):
        return a.a
    return Neg(a)


def _pow(a, n):
    if n == 0:
        return _ONE
    if n == 1:
        return a
    if _is_const(a):
        return Const(a.value ** n)
    return Pow(a, n)


def _call(fn, a):
    if _is_const(a):
        return Const(getattr(math, fn)(a.value))
    return Call(fn, a)


# --- graded normal form ------------------------------------------------------

def _merge_sign(s, t):
    """Sign of merging two disjoint ascending index tuples."""
    swaps = 0
    for j in t:
        swaps += sum(1 for i in s if i > j)
    return -1 if swaps & 1 else 1


class SExpr:
    """An expression in graded normal form: {odd-subset: even coefficient}."""

    __slots__ = ("ctx", "parts")

    def __init__(self, ctx, parts=None):
        self.ctx = ctx
        clean = {}
        if parts:
            for subset, coeff in parts.items():
                if not _is_const(coeff, 0.0):
                    clean[subset] = coeff
        self.parts = clean

    @classmethod
    def constant(cls, ctx, value):
        return cls(ctx, {(): Const(float(value))})

    @classmethod
    def variable(cls, ctx, name):
        if ctx.parity_of(name) == ODD:
            return cls(ctx, {(ctx.odd_index(name),): _ONE})
        return cls(ctx, {(): Var(name)})

    def _check(self, other):
        if self.ctx != other.ctx:
            raise ValueError("expressions from different variable contexts")

    def __add__(self, other):
        self._check(other)
        parts = dict(self.parts)
        for s, c in other.parts.items():
            parts[s] = _add(parts[s], c) if s in parts else c
        return SExpr(self.ctx, parts)

    def __sub__(self, other):
        self._check(other)
        parts = dict(self.parts)
        for s, c in other.parts.items():
            parts[s] = _sub(parts[s], c) if s in parts else _neg(c)
        return SExpr(self.ctx, parts)

    def __neg__(self):
        return SExpr(self.ctx, {s: _neg(c) for s, c in self.parts.items()})

    def __mul__(self, other):
        self._check(other)
        parts = {}
        for s, cs in self.parts.items():
            sset = set(s)
            for t, ct in other.parts.items():
                if sset & set(t):
                    continue
                u = tuple(sorted(s + t))
                c = _mul(cs, ct)
                if _merge_sign(s, t) < 0:
                    c = _neg(c)
                parts[u] = _add(parts[u], c) if u in parts else c
        return SExpr(self.ctx, parts)

    def __truediv__(self, other):
        self._check(other)
        even = other.parts.get((), _ZERO)
        soul = {s: c for s, c in other.parts.items() if s}
        if not soul:
            if _is_const(even, 0.0):
                raise ZeroDivisionError("division by zero expression")
            return SExpr(self.ctx, {s: _div(c, even) for s, c in self.parts.items()})
        if _is_const(even, 0.0):
            raise ZeroDivisionError("division by a nilpotent expression")
        # finite geometric series: 1/(c + eta) = (1/c) sum (-eta/c)^k
        ratio = SExpr(self.ctx, {s: _neg(_div(c, even)) for s, c in soul.items()})
        inv = SExpr.constant(self.ctx, 1.0)
        power = SExpr.constant(self.ctx, 1.0)
        while True:
            power = power * ratio
            if not power.parts:
                break
            inv = inv + power
        inv = SExpr(self.ctx, {s: _div(c, even) for s, c in inv.parts.items()})
        return self * inv

    def __pow__(self, n):
        if n < 0:
            return SExpr.constant(self.ctx, 1.0) / (self ** (-n))
        if set(self.parts) <= {()}:
            return SExpr(self.ctx, {(): _pow(self.parts.get((), _ZERO), n)})
        result = SExpr.constant(self.ctx, 1.0)
        for _ in range(n):
            result = result * self
        return result

    def apply(self, fn, offset=None):
        if any(s for s in self.parts):
            raise ExprSyntaxError(
                f"odd part in argument of {fn}()", -1 if offset is None else offset
            )
        return SExpr(self.ctx, {(): _call(fn, self.parts.get((), _ZERO))})

    def __eq__(self, other):
        return (
            isinstance(other, SExpr)
            and self.ctx == other.ctx
            and self.parts == other.parts
        )

    def __hash__(self):
        return hash((self.ctx, tuple(sorted(self.parts.items(), key=lambda kv: kv[0]))))

    def is_zero(self):
        return not self.parts

    def parity(self):
        """EVEN, ODD, or None when the expression mixes parities."""
        if not self.parts:
            return EVEN
        seen = {len(s) & 1 for s in self.parts}
        return seen.pop() if len(seen) == 1 else None

    def is_homogeneous(self, parity):
        return all((len(s) & 1) == parity for s in self.parts)

    def __repr__(self):
        return f"<SExpr {to_source(self)!r}>"


# --- parser ------------------------------------------------------------------

_NUM_START = set("0123456789.")


class _Tokenizer:
    def __init__(self, src):
        self.src = src
        self.pos = 0
        self.tokens = []
        self._run()

    def _run(self):
        s = self.src
        i = 0
        n = len(s)
        while i < n:
            ch = s[i]
            if ch in " \t\r\n":
                i += 1
                continue
            if ch in "+-*/^()":
                self.tokens.append((ch, ch, i))
                i += 1
                continue
            if ch in _NUM_START:
                j = i
                while j < n and s[j] in "0123456789":
                    j += 1
                if j < n and s[j] == ".":
                    j += 1
                    while j < n and s[j] in "0123456789":
                        j += 1
                if j < n and s[j] in "eE":
                    k = j + 1
                    if k < n and s[k] in "+-":
                        k += 1
                    if k < n and s[k].isdigit():
                        j = k
                        while j < n and s[j].isdigit():
                            j += 1
                text = s[i:j]
                try:
                    value = float(text)
                except ValueError:
                    raise ExprSyntaxError(f"bad number literal {text!r}", i) from None
                self.tokens.append(("num", value, i))
                i = j
                continue
            if ch.isalpha() or ch == "_":
                j = i
                while j < n and (s[j].isalnum() or s[j] == "_"):
                    j += 1
                self.tokens.append(("ident", s[i:j], i))
                i = j
                continue
            raise ExprSyntaxError(f"unexpected character {ch!r}", i)
        self.tokens.append(("end", None, n))


class _Parser:
    def __init__(self, src, ctx):
        self.src = src
        self.ctx = ctx
        self.tokens = _Tokenizer(src).tokens
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def next(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, kind):
        tok = self.next()
        if tok[0] != kind:
            raise ExprSyntaxError(f"expected {kind!r}, found {tok[1]!r}", tok[2])
        return tok

    def parse(self):
        e = self.expr()
        tok = self.peek()
        if tok[0] != "end":
            raise ExprSyntaxError(f"unexpected token {tok[1]!r}", tok[2])
        return e

    def expr(self):
        e = self.term()
        while self.peek()[0] in ("+", "-"):
            op = self.next()[0]
            rhs = self.term()
            e = e + rhs if op == "+" else e - rhs
        return e

    def term(self):
        e = self.unary()
        while self.peek()[0] in ("*", "/"):
            op = self.next()[0]
            rhs = self.unary()
            e = e * rhs if op == "*" else e / rhs
        return e

    def unary(self):
        if self.peek()[0] == "-":
            self.next()
            return -self.unary()
        return self.power()

    def power(self):
        base = self.atom()
        if self.peek()[0] == "^":
            self.next()
            tok = self.next()
            if tok[0] != "num" or tok[1] != int(tok[1]) or tok[1] < 0:
                raise ExprSyntaxError("exponent must be a non-negative integer", tok[2])
            return base ** int(tok[1])
        return base

    def atom(self):
        tok = self.next()
        kind, value, off = tok
        if kind == "num":
            return SExpr.constant(self.ctx, value)
        if kind == "(":
            e = self.expr()
            self.expect(")")
            return e
        if kind == "ident":
            if self.peek()[0] == "(":
                if value not in FUNCTIONS:
                    raise ExprSyntaxError(f"unknown function {value!r}", off)
                self.next()
                arg = self.expr()
                self.expect(")")
                return arg.apply(value, offset=off)
            try:
                return SExpr.variable(self.ctx, value)
            except KeyError:
                raise ExprSyntaxError(f"unknown variable {value!r}", off) from None
        raise ExprSyntaxError(f"unexpected token {value!r}", off)


def parse(src, ctx):
    """Parse source text into graded normal form over the given context."""
    return _Parser(src, ctx).parse()


# --- printer -----------------------------------------------------------------

# precedence mirrors the parser: ^ binds tightest, then unary -, then * /
_PREC = {Add: 1, Sub: 1, Mul: 2, Div: 2, Neg: 3, Pow: 4, Const: 5, Var: 5, Call: 5}


def _print_even(e):
    t = type(e)
    if t is Const:
        return repr(e.value)
    if t is Var:
        return e.name
    if t is Neg:
        return "-" + _wrap(e.a, 4)
    if t is Add:
        return _wrap(e.a, 1) + " + " + _wrap(e.b, 2)
    if t is Sub:
        return _wrap(e.a, 1) + " - " + _wrap(e.b, 2)
    if t is Mul:
        return _wrap(e.a, 2) + "*" + _wrap(e.b, 3)
    if t is Div:
        return _wrap(e.a, 2) + "/" + _wrap(e.b, 3)
    if t is Pow:
        return _wrap(e.base, 5) + "^" + str(e.n)
    if t is Call:
        return f"{e.fn}({_print_even(e.arg)})"
    raise TypeError(f"not an expression node: {e!r}")


def _wrap(e, min_prec):
    s = _print_even(e)
    prec = _PREC[type(e)]
    if prec < min_prec or (type(e) is Const and e.value < 0 and min_prec > 1):
        return f"({s})"
    return s


def to_source(e):
    """Canonical printer; `parse(to_source(e))` reproduces `e` exactly."""
    if not e.parts:
        return "0.0"
    chunks = []
    for subset in sorted(e.parts, key=lambda s: (len(s), s)):
        coeff = e.parts[subset]
        gens = "*".join(e.ctx.odd_names[i] for i in subset)
        if not subset:
            chunks.append(_print_even(coeff))
        elif _is_const(coeff, 1.0):
            chunks.append(gens)
        else:
            chunks.append(_wrap(coeff, 2) + "*" + gens)
    return " + ".join(chunks)


# --- differentiation ----------------------------------------------------------

def _d_even(e, name):
    t = type(e)
    if t is Const:
        return _ZERO
    if t is Var:
        return _ONE if e.name == name else _ZERO
    if t is Add:
        return _add(_d_even(e.a, name), _d_even(e.b, name))
    if t is Sub:
        return _sub(_d_even(e.a, name), _d_even(e.b, name))
    if t is Neg:
        return _neg(_d_even(e.a, name))
    if t is Mul:
        return _add(_mul(_d_even(e.a, name), e.b), _mul(e.a, _d_even(e.b, name)))
    if t is Div:
        num = _sub(_mul(_d_even(e.a, name), e.b), _mul(e.a, _d_even(e.b, name)))
        return _div(num, _pow(e.b, 2))
    if t is Pow:
        inner = _mul(Const(float(e.n)), _pow(e.base, e.n - 1))
        return _mul(inner, _d_even(e.base, name))
    if t is Call:
        da = _d_even(e.arg, name)
        if e.fn == "sin":
            return _mul(_call("cos", e.arg), da)
        if e.fn == "cos":
            return _neg(_mul(_call("sin", e.arg), da))
        if e.fn == "exp":
            return _mul(_call("exp", e.arg), da)
    raise TypeError(f"cannot differentiate {e!r}")


def differentiate(e, name):
    """Partial derivative; odd variables differentiate from the left."""
    ctx = e.ctx
    if ctx.parity_of(name) == EVEN:
        return SExpr(ctx, {s: _d_even(c, name) for s, c in e.parts.items()})
    k = ctx.odd_index(name)
    parts = {}
    for subset, coeff in e.parts.items():
        if k not in subset:
            continue
        pos = subset.index(k)
        rest = subset[:pos] + subset[pos + 1:]
        parts[rest] = coeff if pos % 2 == 0 else _neg(coeff)
    return SExpr(ctx, parts)


# --- evaluation ----------------------------------------------------------------

_SIN_CYCLE = (math.sin, math.cos, lambda x: -math.sin(x), lambda x: -math.cos(x))


def _derivative_tower(fn):
    if fn == "exp":
        return lambda k, x: math.exp(x)
    if fn == "sin":
        return lambda k, x: _SIN_CYCLE[k % 4](x)
    if fn == "cos":
        return lambda k, x: _SIN_CYCLE[(k + 1) % 4](x)
    raise ValueError(fn)


def _pow_value(x, n):
    """Integer power by binary exponentiation (bitwise-matches the kernels)."""
    result = 1.0
    base = x
    while n:
        if n & 1:
            result = result * base
        n >>= 1
        if n:
            base = base * base
    return result


def _eval_even(e, point):
    t = type(e)
    if t is Const:
        return e.value
    if t is Var:
        return point[e.name]
    if t is Add:
        return _eval_even(e.a, point) + _eval_even(e.b, point)
    if t is Sub:
        return _eval_even(e.a, point) - _eval_even(e.b, point)
    if t is Neg:
        return -_eval_even(e.a, point)
    if t is Mul:
        return _eval_even(e.a, point) * _eval_even(e.b, point)
    if t is Div:
        num = _eval_even(e.a, point)
        den = _eval_even(e.b, point)
        if isinstance(den, Supernumber):
            return grassmann.promote(num, den.n) * den.inv()
        return num / den
    if t is Pow:
        return _pow_value(_eval_even(e.base, point), e.n)
    if t is Call:
        v = _eval_even(e.arg, point)
        if isinstance(v, Supernumber):
            return grassmann.taylor_eval(_derivative_tower(e.fn), v)
        return getattr(math, e.fn)(v)
    raise TypeError(f"cannot evaluate {e!r}")


def evaluate(e, point, check_parity=True):
    """Evaluate at a point binding every declared variable.

    Values may be reals or supernumbers (odd variables must bind to odd
    supernumbers). The result is real when no supernumber is involved.
    """
    ctx = e.ctx
    n_gen = None
    for name in ctx.names:
        if name not in point:
            raise KeyError(f"unbound variable {name!r}")
        v = point[name]
        if isinstance(v, Supernumber):
            n_gen = v.n if n_gen is None else n_gen
            if check_parity:
                want = ctx.parity_of(name)
                got = v.parity
                if not (v.is_zero() or got == want):
                    raise ParityError(
                        f"{grassmann.parity_name(want)} variable {name!r} bound to "
                        f"a value of wrong parity"
                    )
        elif check_parity and ctx.parity_of(name) == ODD and v != 0:
            raise ParityError(f"odd variable {name!r} bound to a nonzero real")

    total = None
    for subset, coeff in e.parts.items():
        v = _eval_even(coeff, point)
        for idx in subset:
            v = v * point[ctx.odd_names[idx]]
        total = v if total is None else total + v
    if total is None:
        return 0.0 if n_gen is None else Supernumber(n_gen)
    return total


# --- polynomial normal form and compilation -------------------------------------

def _poly_even(e, ctx):
    """Monomial dict {exponent tuple: coeff} or None if not polynomial."""
    t = type(e)
    nvar = len(ctx.even_names)
    if t is Const:
        return {(0,) * nvar: e.value}
    if t is Var:
        expo = [0] * nvar
        expo[ctx.even_names.index(e.name)] = 1
        return {tuple(expo): 1.0}
    if t is Neg:
        p = _poly_even(e.a, ctx)
        return None if p is None else {m: -c for m, c in p.items()}
    if t in (Add, Sub):
        pa = _poly_even(e.a, ctx)
        pb = _poly_even(e.b, ctx)
        if pa is None or pb is None:
            return None
        out = dict(pa)
        sgn = 1.0 if t is Add else -1.0
        for m, c in pb.items():
            out[m] = out.get(m, 0.0) + sgn * c
        return {m: c for m, c in out.items() if c != 0.0}
    if t is Mul:
        pa = _poly_even(e.a, ctx)
        pb = _poly_even(e.b, ctx)
        if pa is None or pb is None:
            return None
        out = {}
        for ma, ca in pa.items():
            for mb, cb in pb.items():
                m = tuple(x + y for x, y in zip(ma, mb))
                out[m] = out.get(m, 0.0) + ca * cb
        return {m: c for m, c in out.items() if c != 0.0}
    if t is Div:
        if _is_const(e.b) and e.b.value != 0.0:
            pa = _poly_even(e.a, ctx)
            return None if pa is None else {m: c / e.b.value for m, c in pa.items()}
        return None
    if t is Pow:
        pa = _poly_even(e.base, ctx)
        if pa is None:
            return None
        out = {(0,) * nvar: 1.0}
        for _ in range(e.n):
            nxt = {}
            for ma, ca in out.items():
                for mb, cb in pa.items():
                    m = tuple(x + y for x, y in zip(ma, mb))
                    nxt[m] = nxt.get(m, 0.0) + ca * cb
            out = nxt
        return {m: c for m, c in out.items() if c != 0.0}
    return None


def as_polynomial(e):
    """Full polynomial normal form {(odd subset, even monomial): coeff}.

    None when any coefficient involves a transcendental or a non-constant
    denominator.
    """
    out = {}
    for subset, coeff in e.parts.items():
        p = _poly_even(coeff, e.ctx)
        if p is None:
            return None
        for m, c in p.items():
            if c != 0.0:
                out[(subset, m)] = out.get((subset, m), 0.0) + c
    return out


def is_polynomial(e):
    return as_polynomial(e) is not None


def _compile_even(e, ctx, code, consts):
    t = type(e)
    if t is Const:
        code.append((OP_CONST, len(consts)))
        consts.append(e.value)
        return 1
    if t is Var:
        code.append((OP_VAR, ctx.even_names.index(e.name)))
        return 1
    if t is Neg:
        d = _compile_even(e.a, ctx, code, consts)
        code.append((OP_NEG, 0))
        return d
    if t in (Add, Sub, Mul, Div):
        da = _compile_even(e.a, ctx, code, consts)
        db = _compile_even(e.b, ctx, code, consts)
        op = {Add: OP_ADD, Sub: OP_SUB, Mul: OP_MUL, Div: OP_DIV}[t]
        code.append((op, 0))
        return max(da, 1 + db)
    if t is Pow:
        d = _compile_even(e.base, ctx, code, consts)
        code.append((OP_POW, e.n))
        return d
    if t is Call:
        d = _compile_even(e.arg, ctx, code, consts)
        code.append(({"sin": OP_SIN, "cos": OP_COS, "exp": OP_EXP}[e.fn], 0))
        return d
    raise TypeError(f"cannot compile {e!r}")


def compile_real(e):
    """Lower a purely even expression to backend bytecode."""
    if any(s for s in e.parts):
        raise ParityError("cannot compile an expression with odd parts to real bytecode")
    code = []
    consts = []
    depth = _compile_even(e.parts.get((), _ZERO), e.ctx, code, consts)
    return Program(
        code=np.asarray(code, dtype=np.int32).reshape(-1, 2),
        consts=np.asarray(consts, dtype=np.float64),
        max_stack=depth,
        n_vars=len(e.ctx.even_names),
    )

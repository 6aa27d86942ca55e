import math

import numpy as np
import pytest

from liact.errors import ExprSyntaxError, ParityError
from liact.expr import (
    Context,
    SExpr,
    as_polynomial,
    compile_real,
    differentiate,
    evaluate,
    parse,
    to_source,
)
from liact import backends
from liact.grassmann import Supernumber

CTX = Context(("x1", "x2"), ("th1", "th2"))
REAL_CTX = Context(("x1", "x2"), ())


def zero_odds(n=2):
    return {"th1": Supernumber(n), "th2": Supernumber(n)}


def test_parse_basic_grammar():
    e = parse("3*x1 + sin(x1)", CTX)
    assert evaluate(e, {"x1": 2.0, "x2": 0.0, **zero_odds()}) == pytest.approx(
        6.0 + math.sin(2.0)
    )


def test_odd_monomials_normalize():
    e = parse("th1*th2 - th2*th1", CTX)
    assert to_source(e) == "2.0*th1*th2"
    assert parse("th1*th1", CTX).is_zero()


def test_syntax_error_carries_offset():
    with pytest.raises(ExprSyntaxError) as err:
        parse("x1 + )", CTX)
    assert err.value.offset == 5


def test_unknown_identifier_rejected():
    with pytest.raises(ExprSyntaxError):
        parse("x1 + bogus", CTX)
    with pytest.raises(ExprSyntaxError):
        parse("tan(x1)", CTX)


def test_odd_argument_to_function_rejected_unless_cancelling():
    with pytest.raises(ExprSyntaxError):
        parse("sin(th1)", CTX)
    # th1*th1 normalizes to zero, so the argument is even
    e = parse("sin(th1*th1 + x1)", CTX)
    assert evaluate(e, {"x1": 0.5, "x2": 0.0, **zero_odds()}) == pytest.approx(math.sin(0.5))


def test_power_requires_nonnegative_integer():
    with pytest.raises(ExprSyntaxError):
        parse("x1^2.5", CTX)
    with pytest.raises(ExprSyntaxError):
        parse("x1^x2", CTX)


def test_derivatives_even():
    assert to_source(differentiate(parse("x1^2", CTX), "x1")) == "2.0*x1"
    d = differentiate(parse("sin(x1)*x2", CTX), "x1")
    pt = {"x1": 0.3, "x2": 2.0, **zero_odds()}
    assert evaluate(d, pt) == pytest.approx(2.0 * math.cos(0.3))


def test_left_derivatives_odd():
    e = parse("th1*th2", CTX)
    assert to_source(differentiate(e, "th1")) == "th2"
    assert to_source(differentiate(e, "th2")) == "(-1.0)*th1"


def test_eval_supernumber_cases():
    t1 = Supernumber.generator(2, 0)
    t2 = Supernumber.generator(2, 1)
    body = {"x2": 0.0, "th2": Supernumber(2)}
    assert evaluate(parse("exp(x1)", CTX), {"x1": t1 * t2, "th1": Supernumber(2), **body}) \
        == Supernumber.real(2, 1.0) + t1 * t2
    assert evaluate(parse("th1*x1", CTX), {"x1": 2.0, "th1": t1, **body}) == t1 * 2.0
    one_plus = Supernumber.real(2, 1.0) + t1 * t2
    assert evaluate(parse("x1^2", CTX), {"x1": one_plus, "th1": Supernumber(2), **body}) \
        == Supernumber.real(2, 1.0) + t1 * t2 * 2.0


def test_eval_parity_checks():
    t1 = Supernumber.generator(2, 0)
    with pytest.raises(ParityError):
        evaluate(parse("x1", CTX), {"x1": t1, "x2": 0.0, **zero_odds()})
    with pytest.raises(ParityError):
        evaluate(parse("th1", CTX), {"x1": 0.0, "x2": 0.0, "th1": 0.5, "th2": Supernumber(2)})


def test_division_by_zero_body():
    e = parse("1.0/x1", CTX)
    t1t2 = Supernumber.generator(2, 0) * Supernumber.generator(2, 1)
    with pytest.raises(ZeroDivisionError):
        evaluate(e, {"x1": t1t2, "x2": 0.0, **zero_odds()})
    # nonzero body: geometric series, exact
    v = evaluate(e, {"x1": Supernumber.real(2, 2.0) + t1t2, "x2": 0.0, **zero_odds()})
    assert v == Supernumber.real(2, 0.5) + t1t2 * -0.25


def test_division_by_expression_with_odd_part():
    e = parse("x1/(x1 + th1*th2)", CTX)
    t1 = Supernumber.generator(2, 0)
    t2 = Supernumber.generator(2, 1)
    v = evaluate(e, {"x1": 2.0, "x2": 0.0, "th1": t1, "th2": t2})
    # 2/(2 + t1 t2) = 1 - t1 t2 / 2
    assert v == Supernumber.real(2, 1.0) + t1 * t2 * -0.5


def test_print_parse_fixed_point():
    sources = [
        "3*x1 + sin(x1)",
        "x1^3/(1 + x2^2)",
        "-x1*(x2 - 2)",
        "th1*x1 - 2*th2 + x2",
        "exp(x1)*cos(x2) - 1",
        "th1*th2*x1 + th1",
    ]
    for src in sources:
        e = parse(src, CTX)
        printed = to_source(e)
        assert parse(printed, CTX) == e
        assert to_source(parse(printed, CTX)) == printed


def _expr_sources(depth=3):
    from hypothesis import strategies as st

    leaves = st.sampled_from(["x1", "x2", "th1", "th2", "2.0", "0.5", "3"])

    def extend(children):
        binop = st.tuples(children, st.sampled_from(["+", "-", "*"]), children).map(
            lambda t: f"({t[0]} {t[1]} {t[2]})"
        )
        negated = children.map(lambda s: f"-({s})")
        powered = children.map(lambda s: f"({s})^2")
        return st.one_of(binop, negated, powered)

    return st.recursive(leaves, extend, max_leaves=12)


def test_print_parse_fixed_point_property():
    from hypothesis import given, settings

    @given(_expr_sources())
    @settings(max_examples=150, deadline=None)
    def check(src):
        e = parse(src, CTX)
        printed = to_source(e)
        assert parse(printed, CTX) == e
        assert to_source(parse(printed, CTX)) == printed

    check()


def test_polynomial_normal_form():
    e = parse("(x1 + x2)^2 - x1^2 - 2*x1*x2 - x2^2", CTX)
    assert as_polynomial(e) == {}
    assert as_polynomial(parse("sin(x1)", CTX)) is None


def _random_poly_source(rng, depth):
    if depth == 0:
        return rng.choice(["x1", "x2", str(round(rng.uniform(-3, 3), 2))])
    op = rng.choice(["+", "-", "*"])
    a = _random_poly_source(rng, depth - 1)
    b = _random_poly_source(rng, depth - 1)
    if rng.uniform(0, 1) < 0.2:
        return f"({a})^{rng.integers(0, 4)}"
    return f"({a} {op} {b})"


def test_derivative_matches_finite_differences():
    rng = np.random.default_rng(7)
    h = 1e-5
    for _ in range(100):
        src = _random_poly_source(rng, int(rng.integers(1, 5)))
        e = parse(src, REAL_CTX)
        d = differentiate(e, "x1")
        x1, x2 = rng.uniform(-2, 2, 2)
        num = (
            evaluate(e, {"x1": x1 + h, "x2": x2}) - evaluate(e, {"x1": x1 - h, "x2": x2})
        ) / (2 * h)
        sym = evaluate(d, {"x1": x1, "x2": x2})
        assert sym == pytest.approx(num, rel=1e-6, abs=1e-4)


def test_real_eval_matches_soulless_supernumber_eval():
    rng = np.random.default_rng(11)
    for _ in range(100):
        src = _random_poly_source(rng, 3)
        e = parse(src, REAL_CTX)
        x1, x2 = rng.uniform(-2, 2, 2)
        real = evaluate(e, {"x1": x1, "x2": x2})
        sup = evaluate(
            e, {"x1": Supernumber.real(2, x1), "x2": Supernumber.real(2, x2)}
        )
        if not isinstance(sup, Supernumber):
            sup = Supernumber.real(2, sup)  # constant expressions stay real
        assert sup.body == pytest.approx(real, rel=1e-12, abs=1e-12)
        assert sup.soul().is_zero()


def test_compiled_program_matches_interpreter():
    rng = np.random.default_rng(13)
    for _ in range(50):
        src = _random_poly_source(rng, 3)
        e = parse(f"sin({src}) + exp(x2/(x1^2 + 1))", REAL_CTX)
        prog = compile_real(e)
        x1, x2 = rng.uniform(-2, 2, 2)
        direct = evaluate(e, {"x1": x1, "x2": x2})
        via_prog = backends.eval_program(prog, [x1, x2])
        assert via_prog == pytest.approx(direct, rel=1e-14, abs=1e-14)


def test_compile_rejects_odd_parts():
    with pytest.raises(ParityError):
        compile_real(parse("th1", CTX))


def test_zero_expression_prints_and_evaluates():
    z = SExpr(CTX)
    assert to_source(z) == "0.0"
    assert evaluate(z, {"x1": 1.0, "x2": 2.0, **zero_odds()}) == 0.0

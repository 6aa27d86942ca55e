import numpy as np
import pytest

from liact.algebra import AlgebraElement, StructureConstants
from liact.errors import ChartDomainError, ParityError
from liact.expr import to_source
from liact.fields import (
    Chart,
    Representation,
    VectorField,
    eval_rho,
    fundamental_field_from_action,
    graded_bracket_fields,
    validate_representation,
)
from liact.grassmann import EVEN, ODD, Supernumber
from liact.group import CircleModel, EuclideanModel


def line_rep(lam, lo=None, hi=None, periodic=None):
    sc = StructureConstants.abelian(1)
    chart = Chart(("x",), lo=lo, hi=hi, periodic=periodic)
    f = VectorField.parse(chart, [repr(lam)], EVEN)
    return Representation(sc, [f], chart, n_gen=0)


def supertranslation_rep():
    sc = StructureConstants.from_brackets(2, (EVEN, ODD), {(1, 1): {0: 2.0}})
    chart = Chart(("x",), ("th",))
    p = VectorField.parse(chart, ["1.0", "0.0"], EVEN)
    d = VectorField.parse(chart, ["th", "1.0"], ODD)
    return Representation(sc, [p, d], chart, n_gen=2)


def heisenberg_rep(flip=False):
    sc = StructureConstants.from_brackets(
        3, (EVEN,) * 3, {(0, 1): {2: -1.0 if flip else 1.0}}
    )
    chart = Chart(("x", "y"))
    fields = [
        VectorField.parse(chart, ["1.0", "0.0"], EVEN),
        VectorField.parse(chart, ["0.0", "x"], EVEN),
        VectorField.parse(chart, ["0.0", "1.0"], EVEN),
    ]
    return Representation(sc, fields, chart, n_gen=0)


def test_eval_rho_scaled_translation():
    rep = line_rep(0.5)
    out = eval_rho(rep, AlgebraElement.from_real([2.0]), (0.7,))
    assert out == [1.0]


def test_eval_rho_zero_direction():
    rep = line_rep(0.5)
    assert eval_rho(rep, AlgebraElement.from_real([0.0]), (0.7,)) == [0.0]


def test_eval_rho_supertranslation_field():
    rep = supertranslation_rep()
    th = Supernumber.generator(2, 1)
    out = eval_rho(rep, AlgebraElement.from_real([0.0, 1.0], 2), (0.3, th))
    # rho(D) at (x, th) is (th, 1)
    assert out[0] == th
    assert out[1] == Supernumber.real(2, 1.0)


def test_eval_rho_guards():
    rep = line_rep(1.0, lo=(0.0,), hi=(1.0,))
    with pytest.raises(ChartDomainError):
        eval_rho(rep, AlgebraElement.from_real([1.0]), (1.5,))
    srep = supertranslation_rep()
    # real coordinates on both an even and an odd basis element: mixed parity
    with pytest.raises(ParityError):
        eval_rho(srep, AlgebraElement.from_real([1.0, 1.0], 2), (0.3, Supernumber(2)))


def test_graded_bracket_flow_fields():
    chart = Chart(("x",))
    dx = VectorField.parse(chart, ["1.0"], EVEN)
    xdx = VectorField.parse(chart, ["x"], EVEN)
    out = graded_bracket_fields(dx, xdx)
    assert to_source(out.components[0]) == "1.0"


def test_graded_bracket_odd_square():
    chart = Chart(("x",), ("th",))
    d = VectorField.parse(chart, ["th", "1.0"], ODD)
    out = graded_bracket_fields(d, d)
    assert to_source(out.components[0]) == "2.0"
    assert out.components[1].is_zero()
    assert out.parity == EVEN


def test_even_self_bracket_vanishes_symbolically():
    chart = Chart(("x",))
    f = VectorField.parse(chart, ["sin(x)"], EVEN)
    out = graded_bracket_fields(f, f)
    assert out.components[0].is_zero()


def test_validate_representation_trivial_line():
    report = validate_representation(line_rep(0.5))
    assert report.max_residual == 0.0 and report.mode == "symbolic"


def test_validate_representation_projective_line_triple():
    # fields 1, x, x^2 with [e1,e2]=e1, [e1,e3]=2 e2, [e2,e3]=e3
    sc = StructureConstants.from_brackets(
        3, (EVEN,) * 3, {(0, 1): {0: 1.0}, (0, 2): {1: 2.0}, (1, 2): {2: 1.0}}
    )
    chart = Chart(("x",))
    fields = [
        VectorField.parse(chart, ["1.0"], EVEN),
        VectorField.parse(chart, ["x"], EVEN),
        VectorField.parse(chart, ["x^2"], EVEN),
    ]
    rep = Representation(sc, fields, chart, n_gen=0)
    assert validate_representation(rep).max_residual == 0.0


def test_validate_representation_detects_flipped_constant():
    good = validate_representation(heisenberg_rep())
    assert good.max_residual == 0.0
    bad = validate_representation(heisenberg_rep(flip=True))
    assert bad.max_residual == pytest.approx(2.0)


def test_validate_representation_supertranslation():
    report = validate_representation(supertranslation_rep())
    assert report.max_residual == 0.0 and report.mode == "symbolic"


def test_validate_representation_numeric_fallback():
    # transcendental component: no polynomial normal form, falls back to sampling
    sc = StructureConstants.abelian(1)
    chart = Chart(("x",))
    f = VectorField.parse(chart, ["sin(x)"], EVEN)
    rep = Representation(sc, [f], chart, n_gen=0)
    sc2 = StructureConstants.from_brackets(2, (EVEN, EVEN), {(0, 1): {0: 1.0}})
    fields = [
        VectorField.parse(chart, ["sin(x)"], EVEN),
        VectorField.parse(chart, ["cos(x)"], EVEN),
    ]
    # [sin dx, cos dx] = (sin*(-sin) - cos*cos) dx = -dx != sin dx: nonzero residual
    rep2 = Representation(sc2, fields, chart, n_gen=0)
    report = validate_representation(rep2, samples=10, rng=np.random.default_rng(0))
    assert report.mode == "sampled"
    assert report.max_residual > 0.1


def test_fundamental_field_minus_convention_on_circle_action():
    # closed-form action x -> x + n g on the circle, n = 2
    model = CircleModel()
    chart_periods = (1.0,)

    def action(g, m):
        return [(m[0] + 2.0 * g.data) % 1.0]

    x = AlgebraElement.from_real([1.0])
    out = fundamental_field_from_action(action, model, x, (0.25,), h=1e-5,
                                        sign=-1, periods=chart_periods)
    assert out[0] == pytest.approx(-2.0, abs=1e-9)


def test_fundamental_field_trivial_action():
    model = EuclideanModel(1)

    def action(g, m):
        return list(m)

    x = AlgebraElement.from_real([1.0])
    out = fundamental_field_from_action(action, model, x, (0.3,))
    assert out[0] == 0.0


def test_body_compatibility_of_eval_rho():
    rep = supertranslation_rep()
    tau = Supernumber.generator(2, 0)
    x = AlgebraElement((Supernumber.real(2, 0.7), tau))  # 0.7 P + tau D, even
    m = (Supernumber.real(2, 0.3) + tau * Supernumber.generator(2, 1),
         Supernumber.generator(2, 1))
    full = eval_rho(rep, x, m)
    body_x = AlgebraElement.from_real(x.body(), 2)
    body_m = tuple(Supernumber.real(2, v.body) for v in m)
    body_out = eval_rho(rep, body_x, body_m, check_chart=False)
    for a, b in zip(full, body_out):
        assert a.body == pytest.approx(b.body, abs=1e-14)


def test_field_parity_checked():
    chart = Chart(("x",), ("th",))
    with pytest.raises(ParityError):
        VectorField.parse(chart, ["th", "1.0"], EVEN)


def test_chart_wrap_and_contains():
    chart = Chart(("x", "y"), lo=(-np.inf, 0.0), hi=(np.inf, 1.0), periodic=(1.0, 0.0))
    assert chart.contains((5.3, 0.5))
    assert not chart.contains((5.3, 1.5))
    assert chart.wrap((5.3, 0.5))[0] == pytest.approx(0.3)
    with pytest.raises(ValueError):
        Chart(("x",), lo=(0.0,), hi=(1.0,), periodic=(1.0,))

import numpy as np
import pytest
import scipy.linalg

from liact.algebra import AlgebraElement, StructureConstants
from liact.errors import EscapeError, LiactError
from liact.fields import Chart, Representation, VectorField
from liact.flows import (
    FlowProblem,
    TPoly,
    completeness_probe,
    holonomy,
    integrate_flow,
    lift_path,
)
from liact.grassmann import EVEN, ODD, Supernumber
from liact.group import CircleModel, EuclideanModel, GroupElement, GroupPath, MatrixModel

from test_fields import heisenberg_rep, line_rep, supertranslation_rep


def test_scaled_translation_flow_both_signs():
    rep = line_rep(0.5)
    x = AlgebraElement.from_real([1.0])
    minus = integrate_flow(FlowProblem(rep, x, (0.0,), sign=-1.0))
    assert minus.endpoint()[0] == pytest.approx(-0.5, abs=1e-12)
    plus = integrate_flow(FlowProblem(rep, x, (0.1,), sign=1.0, t_span=(0.0, 2.0)))
    assert plus.endpoint()[0] == pytest.approx(1.1, abs=1e-12)


def test_zero_direction_constant_trajectory():
    rep = line_rep(0.5)
    x = AlgebraElement.from_real([0.0])
    traj = integrate_flow(FlowProblem(rep, x, (0.3,), sign=1.0))
    assert traj.completed
    assert traj.endpoint()[0] == 0.3


def test_supertranslation_exact_nilpotent_flow():
    rep = supertranslation_rep()
    tau = Supernumber.generator(2, 0)
    theta = Supernumber.generator(2, 1)
    x = AlgebraElement((Supernumber(2), tau))
    traj = integrate_flow(FlowProblem(rep, x, (Supernumber.real(2, 0.4), theta), sign=1.0))
    assert traj.completed
    end = traj.endpoint()
    assert end[0] == Supernumber.real(2, 0.4) + tau * theta  # coefficient-exact
    assert end[1] == theta + tau
    # dense samples come from the exact polynomial
    mid = traj.sample(0.5)
    assert mid[1] == theta + tau * 0.5


def test_super_flow_body_matches_body_problem():
    rep = supertranslation_rep()
    tau = Supernumber.generator(2, 0)
    x = AlgebraElement((Supernumber.real(2, 0.7), tau))  # moving body: dx/dt has body 0.7
    theta = Supernumber.generator(2, 1)
    traj = integrate_flow(FlowProblem(rep, x, (Supernumber.real(2, 0.1), theta), sign=1.0))
    assert traj.completed
    end = traj.endpoint()
    assert end[0].body == pytest.approx(0.8, abs=1e-12)   # body problem: dx/dt = 0.7
    assert end[0].terms.get(0b11) == pytest.approx(1.0, abs=1e-12)  # tau theta correction
    assert end[1] == theta + tau


def test_super_rk_fallback_for_nonpolynomial_flow_in_t():
    # dx/dt = x from 1 + theta0 theta1: exact solution e^t (1 + t0 t1)
    sc = StructureConstants.abelian(1)
    chart = Chart(("x",))
    f = VectorField.parse(chart, ["x"], EVEN)
    rep = Representation(sc, [f], chart, n_gen=2)
    soul = Supernumber.generator(2, 0) * Supernumber.generator(2, 1)
    m0 = (Supernumber.real(2, 1.0) + soul,)
    traj = integrate_flow(FlowProblem(rep, AlgebraElement.from_real([1.0], 2), m0, sign=1.0))
    assert traj.completed
    end = traj.endpoint()[0]
    assert end.body == pytest.approx(np.e, rel=1e-9)
    assert end.terms[0b11] == pytest.approx(np.e, rel=1e-9)


def test_super_flow_rejects_transcendental_components():
    sc = StructureConstants.abelian(1)
    chart = Chart(("x",), ("th",))
    f = VectorField.parse(chart, ["sin(x)", "0.0"], EVEN)
    rep = Representation(sc, [f], chart, n_gen=2)
    m0 = (Supernumber.real(2, 0.0), Supernumber.generator(2, 1))
    with pytest.raises(LiactError):
        integrate_flow(FlowProblem(rep, AlgebraElement.from_real([1.0], 2), m0, sign=1.0))


def test_escape_on_open_interval():
    rep = line_rep(1.0, lo=(0.0,), hi=(1.0,))
    x = AlgebraElement.from_real([1.0])
    traj = integrate_flow(FlowProblem(rep, x, (0.5,), sign=1.0, t_span=(0.0, 2.0)))
    assert traj.status == "escaped"
    assert traj.escape_time == pytest.approx(0.5, abs=1e-3)
    assert traj.escape_point[0] == pytest.approx(1.0, abs=1e-6)


def test_flow_group_property():
    # Psi(s + t) = Psi(s, Psi(t)) within integrator tolerance
    sc = StructureConstants.abelian(1)
    chart = Chart(("x",))
    f = VectorField.parse(chart, ["sin(x) + 0.2*x"], EVEN)
    rep = Representation(sc, [f], chart, n_gen=0)
    x = AlgebraElement.from_real([1.0])
    rng = np.random.default_rng(4)
    for _ in range(10):
        s, t = rng.uniform(0.1, 1.5, 2)
        m0 = (rng.uniform(-1.0, 1.0),)
        both = integrate_flow(FlowProblem(rep, x, m0, sign=1.0, t_span=(0.0, s + t)))
        first = integrate_flow(FlowProblem(rep, x, m0, sign=1.0, t_span=(0.0, t)))
        second = integrate_flow(
            FlowProblem(rep, x, first.endpoint(), sign=1.0, t_span=(0.0, s))
        )
        tol = 5 * 1e-10 * (1 + abs(both.endpoint()[0]))
        assert second.endpoint()[0] == pytest.approx(both.endpoint()[0], abs=max(tol, 1e-12))


def linear_matrix_rep():
    """rho from the linear action of gl2 on R^2: rho(B)(v) = B v (sign -1 lift)."""
    basis = [
        np.array([[1.0, 0.0], [0.0, 0.0]]),
        np.array([[0.0, 1.0], [0.0, 0.0]]),
        np.array([[0.0, 0.0], [1.0, 0.0]]),
        np.array([[0.0, 0.0], [0.0, 1.0]]),
    ]
    model = MatrixModel(2, basis)
    # [B_i, B_j] coordinates in this basis give the structure constants; the
    # vector fields of the *left* action carry the opposite bracket, matching
    # fields (x, y), (y, 0), (x, 0)... built directly below.
    entries = {}
    flat = np.stack([b.reshape(-1) for b in basis], axis=1)
    for i in range(4):
        for j in range(4):
            comm = basis[i] @ basis[j] - basis[j] @ basis[i]
            coords, *_ = np.linalg.lstsq(flat, comm.reshape(-1), rcond=None)
            entries[(i, j)] = {k: -c for k, c in enumerate(coords) if abs(c) > 1e-12}
    sc = StructureConstants.from_brackets(4, (EVEN,) * 4, entries)
    chart = Chart(("x", "y"))
    fields = [
        VectorField.parse(chart, ["x", "0.0"], EVEN),
        VectorField.parse(chart, ["y", "0.0"], EVEN),
        VectorField.parse(chart, ["0.0", "x"], EVEN),
        VectorField.parse(chart, ["0.0", "y"], EVEN),
    ]
    return model, Representation(sc, fields, chart, n_gen=0)


def test_lift_matches_closed_form_matrix_action():
    # lifting t -> exp(tA) with the minus convention gives exp(-tA) v
    model, rep = linear_matrix_rep()
    rng = np.random.default_rng(8)
    for _ in range(5):
        coords = rng.uniform(-0.8, 0.8, 4)
        a = sum(c * b for c, b in zip(coords, model.basis))
        v0 = rng.uniform(-1, 1, 2)
        path = GroupPath.single_exp(model, AlgebraElement.from_real(coords), 1.0)
        leaf = lift_path(rep, path, tuple(v0), sign=-1.0)
        closed = scipy.linalg.expm(-a) @ v0
        assert np.max(np.abs(np.asarray(leaf.endpoint()) - closed)) <= 1e-8


def test_lift_example1_escapes_midway():
    rep = line_rep(1.0, lo=(0.0,), hi=(1.0,))
    model = EuclideanModel(1)
    path = GroupPath.single_exp(model, AlgebraElement.from_real([1.0]), 1.0)
    with pytest.raises(EscapeError) as err:
        lift_path(rep, path, (0.5,), sign=1.0)
    partial = err.value.partial
    assert partial.status == "escaped"
    assert partial.ts[-1] == pytest.approx(0.5, abs=1e-3)
    assert partial.points[-1][0] == pytest.approx(1.0, abs=1e-6)


def test_lift_constant_path_stays_put():
    rep = line_rep(1.0)
    model = EuclideanModel(1)
    path = GroupPath(model)  # empty path
    leaf = lift_path(rep, path, (0.25,), sign=1.0)
    assert leaf.points == [(0.25,)]


def test_lift_heisenberg_two_segments():
    rep = heisenberg_rep()
    sc = rep.sc
    from liact.group import NilpotentExpModel

    model = NilpotentExpModel(sc, 2)
    path = GroupPath(model)
    path.append_exp(AlgebraElement.from_real([1.0, 0.0, 0.0]), 1.0)  # exp(tP)
    path.append_exp(AlgebraElement.from_real([0.0, 1.0, 0.0]), 1.0)  # exp(tQ) . exp(P)
    leaf = lift_path(rep, path, (0.0, 0.0), sign=1.0)
    assert np.asarray(leaf.endpoint()) == pytest.approx([1.0, 1.0], abs=1e-10)


def test_lift_right_translation_invariance():
    rep = heisenberg_rep()
    from liact.group import NilpotentExpModel

    model = NilpotentExpModel(rep.sc, 2)
    x = AlgebraElement.from_real([0.4, 0.7, -0.2])
    h = model.exp(AlgebraElement.from_real([-0.3, 0.5, 0.8]))
    base = GroupPath.single_exp(model, x, 1.0)
    translated = GroupPath(model, basepoint=h).append_exp(x, 1.0)
    m0 = (0.3, -0.1)
    a = lift_path(rep, base, m0, sign=-1.0)
    b = lift_path(rep, translated, m0, sign=-1.0)
    assert a.points[-1] == b.points[-1]


def test_lift_sampled_segment_matches_exp_segment():
    model, rep = linear_matrix_rep()
    coords = np.array([0.3, -0.5, 0.2, 0.1])
    a = sum(c * b for c, b in zip(coords, model.basis))
    times = np.linspace(0.0, 1.0, 800)
    pts = [GroupElement(model, scipy.linalg.expm(t * a)) for t in times]
    sampled = GroupPath(model, pts[0]).append_sampled(times, pts)
    exp_path = GroupPath.single_exp(model, AlgebraElement.from_real(coords), 1.0)
    m0 = (0.4, -0.2)
    end_s = lift_path(rep, sampled, m0, sign=-1.0).endpoint()
    end_e = lift_path(rep, exp_path, m0, sign=-1.0).endpoint()
    assert np.max(np.abs(np.asarray(end_s) - np.asarray(end_e))) <= 1e-5


def test_completeness_probe_reports():
    rep_open = line_rep(1.0, lo=(0.0,), hi=(1.0,))
    x = AlgebraElement.from_real([1.0])
    rpt = completeness_probe(rep_open, [x], 2.0, [(0.5,)])[0]
    assert not rpt.complete
    assert rpt.escape_time == pytest.approx(0.5, abs=1e-3)

    rep_line = line_rep(1.0)
    rpt = completeness_probe(rep_line, [x], 100.0, [(0.0,)])[0]
    assert rpt.complete and rpt.escape_time is None

    sc = StructureConstants.abelian(1)
    chart = Chart(("x",))
    f = VectorField.parse(chart, ["x^2"], EVEN)
    rep_sq = Representation(sc, [f], chart, n_gen=0)
    for x0 in (0.5, 1.0, 2.0):
        rpt = completeness_probe(rep_sq, [x], 10.0, [(x0,)])[0]
        assert not rpt.complete
        assert rpt.escape_time == pytest.approx(1.0 / x0, rel=1e-2)


def test_completeness_probe_requires_real_directions():
    rep = supertranslation_rep()
    x = AlgebraElement((Supernumber(2), Supernumber.generator(2, 0)))
    with pytest.raises(Exception):
        completeness_probe(rep, [x], 1.0, [(Supernumber.real(2, 0.0), Supernumber(2))])


def test_holonomy_displacement_and_winding():
    model = CircleModel()
    loop = GroupPath.single_exp(model, AlgebraElement.from_real([1.0]), 1.0)
    res = holonomy(line_rep(0.5, periodic=(1.0,)), loop, (0.25,), sign=1.0)
    assert res.endpoint[0] == pytest.approx(0.75, abs=1e-9)
    assert res.displacement[0] == pytest.approx(0.5, abs=1e-9)
    assert res.winding == (0,) and not res.trivial

    res = holonomy(line_rep(2.0, periodic=(1.0,)), loop, (0.25,), sign=1.0)
    assert res.displacement[0] == pytest.approx(0.0, abs=1e-9)
    assert res.winding == (2,) and res.trivial

    res = holonomy(line_rep(0.0, periodic=(1.0,)), loop, (0.25,), sign=1.0)
    assert res.displacement[0] == 0.0 and res.trivial


def test_holonomy_requires_closed_loop():
    model = CircleModel()
    path = GroupPath.single_exp(model, AlgebraElement.from_real([1.0]), 0.5)
    with pytest.raises(ValueError):
        holonomy(line_rep(0.5, periodic=(1.0,)), path, (0.25,), sign=1.0)


def test_tpoly_arithmetic():
    p = TPoly((1.0, 2.0))          # 1 + 2t
    q = TPoly((0.0, 0.0, 3.0))     # 3t^2
    assert (p * q).coeffs == (0.0, 0.0, 3.0, 6.0)
    assert (p + q).eval(2.0) == 1.0 + 4.0 + 12.0
    assert p.integrate().coeffs == (0.0, 1.0, 1.0)
    assert (p ** 2).coeffs == (1.0, 4.0, 4.0)


def test_trajectory_dense_sampling_matches_endpoints():
    rep = line_rep(0.25)
    x = AlgebraElement.from_real([1.0])
    traj = integrate_flow(FlowProblem(rep, x, (0.0,), sign=1.0, t_span=(0.0, 4.0)))
    for t in (0.0, 1.3, 2.7, 4.0):
        assert traj.sample(t)[0] == pytest.approx(0.25 * t, abs=1e-9)

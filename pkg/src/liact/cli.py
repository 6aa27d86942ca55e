"""Scenario-driven command line front end.

``liact run scenario.json [--out DIR] [--seed K] [--jobs N]`` executes the
scenario's tasks (validate | act | orbit | diagnose | leaf), writes a
deterministic report JSON plus any CSV polylines, and exits with:

* 0 — every task within tolerance,
* 1 — I/O or schema error,
* 2 — a validation (or other tolerance) failure,
* 3 — an obstruction was detected where a task demanded an action.
"""

import argparse
import json
import logging
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from importlib import resources

import numpy as np

from . import action as action_mod
from . import backends
from .algebra import AlgebraElement, StructureConstants, check_antisymmetry, check_jacobi
from .errors import EscapeError, LiactError, LogChartError, ScenarioError
from .fields import Chart, Representation, VectorField, validate_representation
from .flows import FlowProblem, completeness_probe, holonomy, integrate_flow, lift_path
from .grassmann import EVEN, Supernumber
from .group import (
    CircleModel,
    EuclideanModel,
    GroupElement,
    GroupPath,
    MatrixModel,
    NilpotentExpModel,
)
from .schema import validate_scenario

log = logging.getLogger("liact")

_DEFAULT_TOLERANCES = {
    "jacobi": 1e-12,
    "antisymmetry": 1e-12,
    "validation": 1e-6,
    "act": 1e-8,
    "rtol": 1e-10,
    "atol": 1e-10,
}


class Scenario:
    """Parsed scenario: algebra + group + chart + representation + tasks."""

    def __init__(self, raw):
        validate_scenario(raw)
        self.raw = raw
        self.name = raw["name"]
        self.seed = raw.get("seed", 0)
        self.sign = float(raw.get("fundamental_sign", -1))
        self.n_gen = raw.get("grassmann_n", 2)
        self.tolerances = dict(_DEFAULT_TOLERANCES)
        self.tolerances.update(raw.get("tolerances", {}))
        self.sc = StructureConstants.from_json(raw["algebra"])
        self.chart = self._build_chart(raw["chart"])
        self.model = self._build_group(raw["group"])
        self.rep = self._build_rep(raw["rho"])
        self.tasks = raw["tasks"]

    def _build_chart(self, spec):
        even = tuple(spec["even"])
        odd = tuple(spec.get("odd", ()))
        domain = spec.get("domain", {})
        periodic = spec.get("periodic", {})
        for name in list(domain) + list(periodic):
            if name not in even:
                raise ScenarioError(f"chart constraint for unknown coordinate {name!r}")
        lo, hi, per = [], [], []
        for name in even:
            box = domain.get(name, "all")
            if box == "all":
                lo.append(-math.inf)
                hi.append(math.inf)
            else:
                lo.append(float(box[0]))
                hi.append(float(box[1]))
            per.append(float(periodic.get(name, 0.0)))
        try:
            return Chart(even, odd, tuple(lo), tuple(hi), tuple(per))
        except (ValueError, LiactError) as exc:
            raise ScenarioError(f"bad chart: {exc}") from exc

    def _build_group(self, spec):
        kind = spec["model"]
        if kind == "euclidean":
            dim = spec.get("dim", self.sc.dim)
            if dim != self.sc.dim:
                raise ScenarioError("euclidean group dimension must match the algebra")
            return EuclideanModel(dim)
        if kind == "circle":
            if self.sc.dim != 1 or np.any(self.sc.c != 0.0):
                raise ScenarioError("circle group needs a one-dimensional abelian algebra")
            return CircleModel()
        if kind == "nilpotent_exp":
            try:
                return NilpotentExpModel(self.sc, spec.get("class", 2))
            except LiactError as exc:
                raise ScenarioError(str(exc)) from exc
        if kind == "matrix":
            basis = spec.get("basis")
            size = spec.get("size")
            if basis is None or size is None:
                raise ScenarioError("matrix model requires 'size' and 'basis'")
            if len(basis) != self.sc.dim:
                raise ScenarioError("one basis matrix per algebra basis element required")
            model = MatrixModel(size, basis)
            self._check_matrix_brackets(model)
            return model
        raise ScenarioError(f"unknown group model {kind!r}")

    def _check_matrix_brackets(self, model):
        for i in range(self.sc.dim):
            for j in range(self.sc.dim):
                comm = model.basis[i] @ model.basis[j] - model.basis[j] @ model.basis[i]
                target = sum(
                    self.sc.c[i, j, k] * model.basis[k] for k in range(self.sc.dim)
                )
                if np.max(np.abs(comm - target)) > 1e-10:
                    raise ScenarioError(
                        f"matrix basis commutator [{i},{j}] does not match the "
                        "structure constants"
                    )

    def _build_rep(self, rho):
        if len(rho) != self.sc.dim:
            raise ScenarioError("rho needs one component list per basis element")
        fields = []
        for i, sources in enumerate(rho):
            if len(sources) != self.chart.dim:
                raise ScenarioError(
                    f"rho[{i}] needs one expression per chart coordinate"
                )
            try:
                fields.append(
                    VectorField.parse(self.chart, sources, self.sc.parities[i])
                )
            except LiactError as exc:
                raise ScenarioError(f"rho[{i}]: {exc}") from exc
        try:
            return Representation(self.sc, fields, self.chart, self.n_gen)
        except LiactError as exc:
            raise ScenarioError(str(exc)) from exc

    # --- parsing helpers -----------------------------------------------------

    def value(self, v):
        if isinstance(v, dict):
            s = Supernumber.from_json(v)
            if s.n != self.n_gen:
                raise ScenarioError(
                    f"supernumber uses N={s.n}, scenario declares {self.n_gen}"
                )
            return s
        return float(v)

    def point(self, coords):
        pt = tuple(self.value(v) for v in coords)
        if len(pt) != self.chart.dim:
            raise ScenarioError(f"point needs {self.chart.dim} coordinates")
        return pt

    def algebra_element(self, coords):
        if len(coords) != self.sc.dim:
            raise ScenarioError(f"algebra element needs {self.sc.dim} coordinates")
        out = []
        for c in coords:
            v = self.value(c)
            out.append(v if isinstance(v, Supernumber) else Supernumber.real(self.n_gen, v))
        return AlgebraElement(tuple(out))

    def group_element(self, spec):
        if "exp" in spec:
            return self.model.exp(self.algebra_element(spec["exp"]))
        if "word" in spec:
            return [self.algebra_element(c) for c in spec["word"]]
        payload = spec["element"]
        kind = self.model.kind
        if kind == "matrix":
            return GroupElement(self.model, np.asarray(payload, dtype=float))
        if kind == "circle":
            return GroupElement(self.model, float(payload) % 1.0)
        if kind == "euclidean":
            return GroupElement(self.model, tuple(self.value(v) for v in payload))
        return GroupElement(self.model, self.algebra_element(payload))

    def path(self, spec):
        model = self.model
        if "turns" in spec:
            if model.kind != "circle":
                raise ScenarioError("'turns' paths are only defined on the circle model")
            turns = float(spec["turns"])
            return GroupPath.single_exp(model, AlgebraElement.from_real([1.0], self.n_gen), turns)
        if "word" in spec:
            return GroupPath.from_word(model, [self.algebra_element(c) for c in spec["word"]])
        if "exp" in spec:
            return GroupPath.single_exp(
                model, self.algebra_element(spec["exp"]), float(spec.get("duration", 1.0))
            )
        if "segments" in spec:
            path = GroupPath(model)
            for seg in spec["segments"]:
                path.append_exp(
                    self.algebra_element(seg["exp"]), float(seg.get("duration", 1.0))
                )
            return path
        raise ScenarioError(f"cannot interpret path spec {spec!r}")

    def even_directions(self):
        out = []
        for i in range(self.sc.dim):
            if self.sc.parities[i] == EVEN:
                coords = [1.0 if j == i else 0.0 for j in range(self.sc.dim)]
                out.append(AlgebraElement.from_real(coords, self.n_gen))
        return out


def load_scenario(path):
    with open(path, "r", encoding="utf-8") as fh:
        raw = json.load(fh)
    return Scenario(raw)


def scenario_dir():
    return resources.files("liact") / "scenarios"


def shipped_scenarios():
    return sorted(p.name for p in scenario_dir().iterdir() if p.name.endswith(".json"))


# --- task runners ------------------------------------------------------------------


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, Supernumber):
        return obj.to_json()
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (np.floating, float)):
        return float(obj)
    if isinstance(obj, (np.integer, int)):
        return int(obj)
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    return obj


def _run_validate(scn, task, rng, out_dir):
    tol = scn.tolerances
    anti = check_antisymmetry(scn.sc)
    jac = check_jacobi(scn.sc)
    report = validate_representation(scn.rep, samples=25, rng=rng)
    symbolic_ok = report.mode == "symbolic" and report.max_residual <= tol["jacobi"]
    numeric_ok = report.max_residual <= tol["validation"]
    ok = anti <= tol["antisymmetry"] and jac <= tol["jacobi"] and (symbolic_ok or numeric_ok)
    return {
        "kind": "validate",
        "status": "ok" if ok else "failed",
        "antisymmetry_residual": anti,
        "jacobi_residual": jac,
        "representation_residual": report.max_residual,
        "representation_mode": report.mode,
    }


def _run_act(scn, task, rng, out_dir):
    m = scn.point(task["m"])
    route = scn.group_element(task["g"])
    rec = {"kind": "act"}
    try:
        res = action_mod.act(
            scn.rep, scn.model, route, m, sign=scn.sign,
            rtol=scn.tolerances["rtol"], atol=scn.tolerances["atol"],
        )
    except EscapeError as exc:
        rec.update(status="obstruction", reason="incomplete", message=str(exc))
        return rec
    except LogChartError as exc:
        rec.update(status="failed", reason="log_chart", message=str(exc))
        return rec
    rec.update(res.to_json())
    rec["status"] = "ok"
    if res.holonomy_flag or not res.diagnostics.get("complete_along_route", True):
        rec["status"] = "obstruction"
        rec["reason"] = "holonomy" if res.holonomy_flag else "incomplete"
    if "expect" in task and rec["status"] == "ok":
        want = scn.point(task["expect"])
        dist = action_mod.point_distance(scn.chart, res.value, want)
        rec["expect_distance"] = dist
        if dist > task.get("tol", scn.tolerances["act"]):
            rec["status"] = "failed"
    return rec


def _run_orbit(scn, task, rng, out_dir):
    x = scn.algebra_element(task["X"])
    m0 = scn.point(task["m0"])
    t0, t1 = task.get("t_span", [0.0, 1.0])
    problem = FlowProblem(
        scn.rep, x, m0, sign=scn.sign, t_span=(float(t0), float(t1)),
        rtol=scn.tolerances["rtol"], atol=scn.tolerances["atol"],
    )
    traj = integrate_flow(problem)
    rec = {
        "kind": "orbit",
        "status": "ok" if traj.completed else "obstruction",
        "flow_status": traj.status,
        "endpoint": list(traj.endpoint()),
        "t_end": traj.ts[-1],
        "error_estimate": traj.err_est,
    }
    if not traj.completed:
        rec["escape_time"] = traj.escape_time
        rec["escape_point"] = list(traj.escape_point)
    if "csv" in task:
        rec["csv"] = _write_trajectory_csv(
            scn, out_dir, task["csv"], traj.ts,
            [(None, s) for s in traj.states],
        )
    return rec


def _run_diagnose(scn, task, rng, out_dir):
    rec = {"kind": "diagnose", "status": "ok"}
    tol = scn.tolerances

    if "completeness" in task or not any(
        k in task for k in ("holonomy", "recover_rho", "group_law", "path_independence", "sign_duality")
    ):
        spec = task.get("completeness", {})
        if "directions" in spec:
            directions = [scn.algebra_element(c) for c in spec["directions"]]
        else:
            directions = scn.even_directions()
        horizon = float(spec.get("horizon", 100.0))
        if "grid" in spec:
            grid = [scn.point(c) for c in spec["grid"]]
        else:
            grid = [scn.chart.sample_body(rng) for _ in range(3)]
        reports = completeness_probe(
            scn.rep, directions, horizon, grid,
            rtol=tol["rtol"], atol=tol["atol"],
        )
        rec["completeness"] = [
            {
                "direction": i,
                "complete": r.complete,
                "escape_time": r.escape_time,
                "escape_point": list(r.escape_point) if r.escape_point else None,
                "start_point": list(r.start_point) if r.start_point else None,
                "probe_horizon": r.probe_horizon,
            }
            for i, r in enumerate(reports)
        ]

    if "holonomy" in task:
        spec = task["holonomy"]
        turns = float(spec.get("turns", 1.0))
        loop = GroupPath.single_exp(
            scn.model, AlgebraElement.from_real([1.0] * scn.model.dim, scn.n_gen), turns
        )
        m0 = scn.point(spec["m0"]) if "m0" in spec else scn.chart.sample_body(rng)
        if not loop.is_closed(1e-12):
            rec["holonomy"] = {"error": "loop is not closed in this group model"}
            rec["status"] = "failed"
        else:
            try:
                res = holonomy(scn.rep, loop, m0, sign=scn.sign,
                               rtol=tol["rtol"], atol=tol["atol"])
                rec["holonomy"] = {
                    "m0": list(m0),
                    "turns": turns,
                    "endpoint": list(res.endpoint),
                    "displacement": list(res.displacement),
                    "winding": list(res.winding),
                    "trivial": res.trivial,
                }
            except EscapeError as exc:
                rec["holonomy"] = {"error": str(exc), "incomplete": True}

    if "recover_rho" in task:
        spec = task["recover_rho"]
        dev = action_mod.recover_rho(
            scn.rep, scn.model, samples=spec.get("samples", 50),
            h=spec.get("h", 1e-4), sign=scn.sign, rng=rng,
            rtol=tol["rtol"], atol=tol["atol"],
        )
        limit = spec.get("tol", 1e-6)
        rec["recover_rho"] = {"max_deviation": dev, "tol": limit}
        if dev > limit:
            rec["status"] = "failed"

    if "group_law" in task:
        spec = task["group_law"]
        res = action_mod.verify_group_law(
            scn.rep, scn.model, trials=spec.get("trials", 100),
            word_length=spec.get("word_length", 4), rng=rng, sign=scn.sign,
            rtol=tol["rtol"], atol=tol["atol"],
        )
        limit = spec.get("tol", 1e-8)
        rec["group_law"] = {"max_residual": res, "tol": limit}
        if res > limit:
            rec["status"] = "failed"

    if "path_independence" in task:
        spec = task["path_independence"]
        g = scn.group_element(spec["g"])
        if isinstance(g, list):
            raise ScenarioError("path_independence target must be a single element")
        routes = [scn.path(p) for p in spec["routes"]]
        spread = action_mod.path_independence(
            scn.rep, scn.model, g, routes, scn.point(spec["m"]), sign=scn.sign,
            rtol=tol["rtol"], atol=tol["atol"],
        )
        rec["path_independence"] = {"max_spread": spread}
        if "tol" in spec and spread > spec["tol"]:
            rec["status"] = "failed"

    if "sign_duality" in task:
        spec = task["sign_duality"]
        res = action_mod.sign_duality_residual(
            scn.rep, scn.model, trials=spec.get("trials", 20), rng=rng,
            rtol=tol["rtol"], atol=tol["atol"],
        )
        limit = spec.get("tol", 1e-8)
        rec["sign_duality"] = {"max_residual": res, "tol": limit}
        if res > limit:
            rec["status"] = "failed"

    return rec


def emit_leaf_polyline(scn, task, rng, out_dir):
    """Trace a leaf over a group path and emit the polyline CSV."""
    spec = {k: task[k] for k in ("turns", "exp", "duration", "segments", "word", "path")
            if k in task}
    if "path" in spec:
        spec = task["path"]
    path = scn.path(spec)
    m0 = scn.point(task["m0"])
    stride = float(task.get("stride", path.total_time / 200.0))
    rec = {"kind": "leaf", "status": "ok"}
    try:
        leaf = lift_path(
            scn.rep, path, m0, sign=scn.sign,
            rtol=scn.tolerances["rtol"], atol=scn.tolerances["atol"], dense=stride,
        )
    except EscapeError as exc:
        leaf = exc.partial
        rec["status"] = "obstruction"
        rec["reason"] = "incomplete"
        rec["message"] = str(exc)
    rows = list(zip(leaf.elements, leaf.points))
    name = task.get("csv", f"{scn.name}_leaf.csv")
    rec["csv"] = _write_trajectory_csv(scn, out_dir, name, leaf.ts, rows, path=path)
    rec["rows"] = len(leaf.ts)
    rec["endpoint"] = list(leaf.endpoint())
    if rec["status"] == "ok":
        start, end = leaf.points[0], leaf.points[-1]
        closure = action_mod.point_distance(scn.chart, start, end)
        winding = []
        for j, p in enumerate(scn.chart.periodic):
            raw = _body(end[j]) - _body(start[j])
            winding.append(int(round(raw / p)) if p > 0.0 else 0)
        rec["closure_distance"] = closure
        rec["m_winding"] = winding
        if path.model.kind == "circle":
            g_raw = sum(
                seg.x.body()[0] * seg.duration for seg in path.segments
            )
            rec["g_winding"] = int(round(g_raw))
    return rec


def _body(v):
    return v.body if isinstance(v, Supernumber) else float(v)


def _unwrapped_g_coords(scn, path, t):
    """Group coordinates along the path; abelian models accumulate unwrapped."""
    model = scn.model
    if model.kind in ("euclidean", "circle"):
        total = None
        acc = 0.0
        for seg in path.segments:
            s = min(max(t - acc, 0.0), seg.duration)
            contrib = [b * s for b in seg.x.body()]
            total = contrib if total is None else [a + b for a, b in zip(total, contrib)]
            acc += seg.duration
        base = [_body(v) for v in np.atleast_1d(path.basepoint.data)]
        return [a + b for a, b in zip(base, total or [0.0] * len(base))]
    g = path.element_at(t)
    if model.kind == "matrix":
        return [float(v) for v in g.data.reshape(-1)]
    return [_body(v) for v in g.data.coords]


def _write_trajectory_csv(scn, out_dir, name, ts, rows, path=None):
    """RFC 4180 CSV: t, group coordinates, manifold bodies; 17 significant digits.

    Group and periodic manifold coordinates are written unwrapped so slopes
    and windings are visible; a companion .souls.json carries supernumber
    coefficients when any coordinate has soul.
    """
    os.makedirs(out_dir, exist_ok=True)
    fname = os.path.join(out_dir, name)
    n_g = 0
    if path is not None:
        n_g = len(_unwrapped_g_coords(scn, path, 0.0))
    header = ["t"]
    header += [f"g{i+1}" for i in range(n_g)]
    header += list(scn.chart.even_names + scn.chart.odd_names)
    lines = [",".join(header)]
    has_soul = False
    soul_rows = []
    for t, (_, state) in zip(ts, rows):
        cells = [f"{t:.17g}"]
        if path is not None:
            cells += [f"{v:.17g}" for v in _unwrapped_g_coords(scn, path, t)]
        soul_row = []
        for v in state:
            cells.append(f"{_body(v):.17g}")
            if isinstance(v, Supernumber) and not v.soul().is_zero():
                has_soul = True
            soul_row.append(v.to_json() if isinstance(v, Supernumber) else v)
        soul_rows.append(soul_row)
        lines.append(",".join(cells))
    with open(fname, "w", encoding="utf-8", newline="") as fh:
        fh.write("\r\n".join(lines) + "\r\n")
    if has_soul:
        with open(fname.replace(".csv", "") + ".souls.json", "w", encoding="utf-8") as fh:
            json.dump(_jsonable({"columns": header[1 + n_g:], "rows": soul_rows}),
                      fh, indent=1, sort_keys=True)
    return name


_RUNNERS = {
    "validate": _run_validate,
    "act": _run_act,
    "orbit": _run_orbit,
    "diagnose": _run_diagnose,
    "leaf": emit_leaf_polyline,
}


def run_scenario(path, out_dir=".", seed=None, jobs=1):
    """Execute a scenario file; returns (exit_code, report dict)."""
    scn = load_scenario(path)
    if seed is not None:
        scn.seed = seed

    def run_one(idx_task):
        idx, task = idx_task
        rng = np.random.default_rng([scn.seed, idx])
        try:
            return _RUNNERS[task["kind"]](scn, task, rng, out_dir)
        except (LiactError, ValueError, ZeroDivisionError) as exc:
            log.exception("task %d failed", idx)
            return {"kind": task["kind"], "status": "failed", "message": str(exc)}

    items = list(enumerate(scn.tasks))
    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(run_one, items))
    else:
        results = [run_one(it) for it in items]

    report = {
        "scenario": scn.name,
        "backend": backends.backend_name(),
        "seed": scn.seed,
        "fundamental_sign": scn.sign,
        "results": _jsonable(results),
    }
    os.makedirs(out_dir, exist_ok=True)
    report_path = os.path.join(out_dir, f"{scn.name}.report.json")
    with open(report_path, "w", encoding="utf-8") as fh:
        json.dump(report, fh, indent=1, sort_keys=True)
        fh.write("\n")

    statuses = [r["status"] for r in results]
    if any(s == "failed" for s in statuses):
        code = 2
    elif any(
        s == "obstruction" and r["kind"] in ("act", "orbit")
        for s, r in zip(statuses, results)
    ):
        code = 3
    else:
        code = 0
    return code, report


def main(argv=None):
    level = os.environ.get("LIACT_LOG", "warning").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING))
    parser = argparse.ArgumentParser(
        prog="liact",
        description="Integrate infinitesimal Lie algebra actions or diagnose the obstructions.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    run_p = sub.add_parser("run", help="run a scenario file")
    run_p.add_argument("scenario", help="path to a scenario JSON file")
    run_p.add_argument("--out", default=".", help="output directory for reports and CSVs")
    run_p.add_argument("--seed", type=int, default=None, help="override the scenario seed")
    run_p.add_argument("--jobs", type=int, default=1, help="run independent tasks concurrently")
    sub.add_parser("scenarios", help="list the shipped golden scenarios")
    args = parser.parse_args(argv)

    if args.command == "scenarios":
        base = scenario_dir()
        for name in shipped_scenarios():
            print(os.path.join(str(base), name))
        return 0

    try:
        code, report = run_scenario(args.scenario, args.out, args.seed, args.jobs)
    except json.JSONDecodeError as exc:
        print(f"error: malformed JSON at byte offset {exc.pos}: {exc.msg}", file=sys.stderr)
        return 1
    except (OSError, ScenarioError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    for rec in report["results"]:
        extras = ""
        if rec["status"] != "ok" and "message" in rec:
            extras = f" ({rec['message']})"
        print(f"[{rec['status']:>11}] {rec['kind']}{extras}")
    print(f"report: {os.path.join(args.out, report['scenario'])}.report.json")
    return code


if __name__ == "__main__":
    sys.exit(main())

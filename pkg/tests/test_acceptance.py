"""Acceptance criteria 1-11, one recorded PASS/FAIL line each.

Run with ``pytest tests/test_acceptance.py -v``; the lines are repeated in the
terminal summary. Tolerances are the published ones and are not relaxed.
"""

import json
import time

import numpy as np
import pytest

from inextensible.basis import grid1d, make_basis
from inextensible.cli import main
from inextensible.core import FieldState, MultiplierField, make_model
from inextensible.discrete import RitzSpace
from inextensible.dynamics import (MULTIPLIER, REDUCED, RK4, SemiDiscreteSystem, first_mode_ic, measure_period,
                                   recover_fields, simulate)
from inextensible.energy import ENERGY_VARIANTS, gradient_check
from inextensible.fields import modal_state_at, polynomial_state, random_clamped_coeffs, random_modal_coords
from inextensible.kinematics import (composite_defect, constraint_residual, curvature, plate_lambda_closed,
                                     plate_recover_inplane, plate_vtt_closure)
from inextensible.residuals import boundary_residual, interior_residual, model2_closed_residual
from inextensible.statics import LoadSpec, solve_static

BETA1 = 1.87510407  # [DERIVED] first clamped-free root, eight decimals
T1 = 2 * np.pi / BETA1 ** 2
RESULTS = []


def record(criterion: str, text: str, ok: bool) -> bool:
    line = f"{criterion:<4} {'PASS' if ok else 'FAIL'}  {text}"
    RESULTS.append(line)
    print(line)
    return ok


def loglog_slope(x, y) -> float:
    return float(np.polyfit(np.log(x), np.log(y), 1)[0])


@pytest.fixture(scope="module")
def conservation_runs():
    """Criterion 2 setup: amplitude 0.3 L, ten periods at T1/500 and T1/1000."""
    # 32 nodes resolve u_tt well enough for the spectral multiplier check; the default 24 do not
    system = SemiDiscreteSystem(make_model("beam-eta2"), mode=MULTIPLIER, nx=6, nqx=32)
    out = {}
    for div in (500, 1000):
        t0 = time.perf_counter()
        traj = simulate(system, *first_mode_ic(system, 0.3), T1 / div, 10 * T1)
        out[div] = (traj, time.perf_counter() - t0)
    return system, out


def _drift(traj) -> float:
    E = traj.array("total")
    return float(np.max(np.abs(E - E[0])) / E[0])


def test_c1_linear_limit_period():
    t0 = time.perf_counter()
    system = SemiDiscreteSystem(make_model("beam-eta2"), mode=MULTIPLIER, nx=6)
    traj = simulate(system, *first_mode_ic(system, 1e-3), T1 / 200, 5 * T1)
    period = measure_period(traj.array("t"), traj.array("tip"))
    err = abs(period / T1 - 1)
    elapsed = time.perf_counter() - t0
    ok = err <= 1e-3 and elapsed < 10
    record("C1", f"linear-limit period rel. error {err:.2e} <= 1e-3, runtime {elapsed:.1f}s < 10s", ok)
    assert ok


def test_c2_energy_conservation(conservation_runs):
    _, runs = conservation_runs
    d1, d2 = _drift(runs[500][0]), _drift(runs[1000][0])
    elapsed = runs[500][1] + runs[1000][1]
    ok = d1 <= 1e-4 and d1 / d2 >= 3.5 and elapsed < 60
    record("C2", f"energy drift {d1:.2e} <= 1e-4; halving dt reduces it x{d1 / d2:.2f} >= 3.5; "
                 f"runtime {elapsed:.1f}s < 60s", ok)
    assert ok


def test_c3_constraint_maintenance(conservation_runs):
    system, runs = conservation_runs
    traj = runs[500][0]
    g_max = float(np.max(traj.array("constraint_inf")))
    span_max = 0.0
    for q, qd in zip(traj.q, traj.qdot):
        state, _ = recover_fields(system, q, qd)
        span_max = max(span_max, float(np.max(np.abs(constraint_residual(state, "eta2-beam")["span"]))))
    ok = g_max <= 1e-9 and span_max <= 1e-10
    record("C3", f"max discrete |g| {g_max:.2e} <= 1e-9; recovered |u_x + w_x^2/2| {span_max:.2e} <= 1e-10", ok)
    assert ok


def test_c4_multiplier_recovery(conservation_runs):
    system, runs = conservation_runs
    traj = runs[500][0]
    g = system.space.grids[0]
    tip_max, l2_max = 0.0, 0.0
    for q, qd in zip(traj.q, traj.qdot):
        state, mult = recover_fields(system, q, qd)
        lam, u_tt = mult["lambda"], state["u_tt"]
        tip_max = max(tip_max, abs(float((g.tail_rows([g.b]) @ u_tt)[0])))
        r = g.D @ lam + u_tt
        l2_max = max(l2_max, float(np.sqrt(g.weights @ r ** 2)))
    ok = tip_max == 0.0 and l2_max <= 1e-8
    record("C4", f"lambda(L) max {tip_max:.1e} == 0; L2 of d_x lambda + u_tt {l2_max:.2e} <= 1e-8", ok)
    assert ok


def test_c5_plate_reduces_to_beam():
    t0 = time.perf_counter()
    beam = SemiDiscreteSystem(make_model("beam-eta2"), mode=REDUCED, nx=6)
    # unit square with D = E h^2 / (12 (1 - nu^2)) = 1, as for the beam
    plate_model = make_model("plate-II", lx=1.0, ly=1.0, thickness=0.1, poisson=0.3,
                             young=12 * (1 - 0.09) / 0.01)
    plate = SemiDiscreteSystem(plate_model, mode=REDUCED, nx=6, ny=2)
    dt = T1 / 200
    tb = simulate(beam, *first_mode_ic(beam, 0.3), dt, 5.0, RK4)
    tp = simulate(plate, *first_mode_ic(plate, 0.3), dt, 5.0, RK4)
    bx = beam.basis.x.evaluate(0, beam.space.grids[0].nodes)
    pb = plate.basis
    ry = pb.y.evaluate(0, plate.space.grids[1].nodes)
    gap = 0.0
    for qb, qp in zip(tb.q, tp.q):
        wb = bx @ qb[:6]
        wp = bx @ qp[: plate.n_w].reshape(6, pb.y.n_modes) @ ry.T
        gap = max(gap, float(np.max(np.abs(wp - wb[:, None]))))
    elapsed = time.perf_counter() - t0
    ok = gap <= 1e-8 and elapsed < 300
    record("C5", f"plate II vs beam sup |w| gap over [0, 5] {gap:.2e} <= 1e-8, runtime {elapsed:.1f}s < 300s", ok)
    assert ok


def test_c6_multiplier_elimination():
    model = make_model("plate-II", thickness=0.1, young=5.0, poisson=0.3)
    worst = 0.0
    for seed in range(20):
        rng = np.random.default_rng(seed)
        c = random_clamped_coeffs(rng, 2, ndim=2, scale=0.3)
        gx, gy = grid1d(14, 0.0, 1.0), grid1d(14, 0.0, 0.8)
        s = polynomial_state(gx.nodes, gy.nodes, {"w": c, "w_t": rng.normal(size=c.shape) * 0.1,
                                                  "w_tt": rng.normal(size=c.shape) * 0.1}, quad=(gx, gy))
        s = plate_recover_inplane(s)
        u_tt, v_tt = plate_vtt_closure(s)
        s = s.with_fields(u_tt=u_tt, v_tt=v_tt)
        l1, l2 = plate_lambda_closed(s, u_tt, v_tt)
        multiplier_form = interior_residual(s, MultiplierField.plate(l1, l2), model).interior["w"]
        closed = model2_closed_residual(s, model)
        worst = max(worst, float(np.max(np.abs(closed - multiplier_form)) / np.max(np.abs(closed))))
    ok = worst <= 1e-12
    record("C6", f"closed vs multiplier-form residual, 20 field sets, max rel. diff {worst:.2e} <= 1e-12", ok)
    assert ok


def _developable(a, b, y0=-0.7, n=14):
    """w = (y - y0) f(x / (y - y0)) with f(t) = a t^2 + b t^3; derivatives in closed form."""
    gx, gy = grid1d(n, 0.0, 1.0), grid1d(n, 0.0, 1.0)
    X, Y = np.meshgrid(gx.nodes, gy.nodes, indexing="ij")
    import sympy as sp
    x, y = sp.symbols("x y")
    t = x / (y - y0)
    w = (y - y0) * (a * t ** 2 + b * t ** 3)
    data = {}
    for i in range(5):
        for j in range(5 - i):
            key = "w" + ("_" + "x" * i + "y" * j if i + j else "")
            data[key] = sp.lambdify((x, y), sp.diff(w, x, i, y, j), "numpy")(X, Y) + 0 * X
    return FieldState(gx.nodes, gy.nodes, data, quad=(gx, gy))


def test_c7_composite_identity_developable():
    rng = np.random.default_rng(7)
    worst = 0.0
    for a, b in rng.uniform(-0.3, 0.3, (10, 2)):
        worst = max(worst, float(np.max(np.abs(composite_defect(plate_recover_inplane(_developable(a, b)))))))
    ok = worst <= 1e-10
    record("C7", f"composite defect on developable fields {worst:.2e} <= 1e-10", ok)
    assert ok


def test_c7_composite_identity_any_field():
    """Literal reading ("for any w"): fails, the identity needs zero Gaussian curvature."""
    rng = np.random.default_rng(7)
    worst = 0.0
    for _ in range(10):
        c = random_clamped_coeffs(rng, 2, ndim=2, scale=0.3)
        gx, gy = grid1d(14, 0.0, 1.0), grid1d(14, 0.0, 1.0)
        s = plate_recover_inplane(polynomial_state(gx.nodes, gy.nodes, {"w": c}, quad=(gx, gy)))
        worst = max(worst, float(np.max(np.abs(composite_defect(s)))))
    ok = worst <= 1e-10
    record("C7", f"composite defect on generic fields {worst:.2e} <= 1e-10 (literal reading)", ok)
    assert ok


def test_c8a_curvature_truncation_order():
    # below a ~ 3e-3 the eta4 gap drops under double-precision cancellation
    amps = np.logspace(-2.5, -0.5, 9)
    g = grid1d(16, 0.0, 1.0)
    rel, raw = {"beam-eta2": [], "beam-eta4": []}, {"beam-eta2": [], "beam-eta4": []}
    for a in amps:
        s = polynomial_state(g.nodes, None, {"w": np.array([0, 0, 1.0, -0.3]) * a}, quad=(g,))
        exact = curvature(s, "beam-exact")["kappa_sq"]
        for v in rel:
            gap = np.max(np.abs(exact - curvature(s, v)["kappa_sq"]))
            raw[v].append(gap)
            rel[v].append(gap / np.max(exact))
    s2, s4 = loglog_slope(amps, rel["beam-eta2"]), loglog_slope(amps, rel["beam-eta4"])
    r2, r4 = loglog_slope(amps, raw["beam-eta2"]), loglog_slope(amps, raw["beam-eta4"])
    ok = abs(s2 - 4) <= 0.25 and abs(s4 - 6) <= 0.25
    record("C8a", f"relative curvature gap slopes eta2 {s2:.3f} (4 +- 0.25), eta4 {s4:.3f} (6 +- 0.25); "
                  f"unnormalized slopes {r2:.3f}, {r4:.3f}", ok)
    assert ok


def test_c8b_free_edge_condition_order():
    model = make_model("plate-II", poisson=0.3)
    basis = make_basis(model, 4, 3)
    rng = np.random.default_rng(8)
    n = basis.x.n_modes * basis.y.n_modes
    shape = rng.normal(size=n) / (1 + np.arange(n)) ** 2
    amps = np.logspace(-3, -1, 7)
    gaps = []
    for a in amps:
        s = modal_state_at(basis, a * shape, x=[basis.x.length], y=np.linspace(0, basis.y.length, 9))
        east = boundary_residual(s, model).boundary["E"]
        gaps.append(float(np.max(np.abs(east["third"] - east["linear_third"]))))
    slope = loglog_slope(amps, gaps)
    ok = abs(slope - 3) <= 0.25
    record("C8b", f"nonlinear minus linear free-edge residual slope {slope:.3f} (3 +- 0.25)", ok)
    assert ok


def test_c8c_static_truncation_gap():
    """Fails: the eta2/eta4 gap is of higher order than the stated cubic law."""
    loads = np.logspace(-1.5, 0.5, 5)
    gaps = [abs(solve_static(make_model("beam-eta2"), LoadSpec("tip", P)).tip
                - solve_static(make_model("beam-eta4"), LoadSpec("tip", P)).tip) for P in loads]
    slope = loglog_slope(loads, gaps)
    ok = abs(slope - 3) <= 0.25
    record("C8c", f"eta2 vs eta4 static tip gap slope {slope:.3f} (3 +- 0.25)", ok)
    assert ok


def test_c9_static_linear_limit():
    t0 = time.perf_counter()
    P = 1e-3
    r = solve_static(make_model("beam-eta2"), LoadSpec("tip", P))
    err = abs(r.tip / (P / 3) - 1)
    elapsed = time.perf_counter() - t0
    ok = err <= 5e-3 and r.optimality <= 1e-10 and elapsed < 10
    record("C9", f"tip vs PL^3/(3D) rel. error {err:.2e} <= 5e-3; KKT optimality {r.optimality:.1e} <= 1e-10; "
                 f"runtime {elapsed:.2f}s < 10s", ok)
    assert ok


def _space(variant):
    if variant.startswith("beam"):
        return RitzSpace(make_model("beam-eta4" if variant == "beam-eta4" else "beam-eta2"), nx=5, inplane=False)
    model = make_model("plate-III" if variant in ("plate-III", "plate-bulk") else "plate-II")
    return RitzSpace(model, nx=3, ny=3, inplane=variant in ("plate-III", "plate-bulk"))


def test_c10_gradient_check():
    rng = np.random.default_rng(10)
    worst = {}
    for variant in ENERGY_VARIANTS:
        space = _space(variant)
        errs = []
        for amp in rng.uniform(0.01, 0.3, 50):
            q = random_modal_coords(space, rng, amp, max_slope=0.9 if variant == "beam-exact" else None)
            errs.append(gradient_check(space, q, variant))
        worst[variant] = max(errs)
    ok = max(worst.values()) <= 1e-6
    detail = ", ".join(f"{k} {v:.1e}" for k, v in worst.items())
    record("C10", f"modal gradient vs central differences, 50 states per variant, max rel. error {detail} "
                  f"<= 1e-6", ok)
    assert ok


def test_c11_determinism(tmp_path):
    cfg = tmp_path / "cfg.yaml"
    cfg.write_text("model: {variant: beam-eta2}\ninitial: {amplitude: 0.2}\n"
                   "integrator: {dt: 0.01, t_end: 10.0}\noutput: {probes: [[0.5]], snapshots: [5.0, 10.0]}\n")
    dirs = [tmp_path / "a", tmp_path / "b"]
    codes = [main(["run", "--config", str(cfg), "--out", str(d)]) for d in dirs]
    same = True
    for p in sorted(dirs[0].iterdir()):
        if p.suffix in (".csv", ".json") and p.name != "manifest.json":
            same &= p.read_bytes() == (dirs[1] / p.name).read_bytes()
    ma, mb = (json.loads((d / "manifest.json").read_text()) for d in dirs)
    for m in (ma, mb):
        m.pop("wall_clock_seconds")
    spread = json.loads((dirs[0] / "diagnostics.json").read_text())["values"]["energy_drift"]
    ok = codes == [0, 0] and same and ma == mb and spread <= 1e-4
    record("C11", f"two runs byte-identical CSV/JSON: {same and ma == mb}; "
                  f"energy spread of the T = 10 run {spread:.1e} <= 1e-4", ok)
    assert ok

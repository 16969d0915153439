import numpy as np
import pytest

from inextensible.core import NewtonDivergence, UnsupportedMode, make_model
from inextensible.dynamics import (MIDPOINT, MULTIPLIER, REDUCED, RK4, ModalState, SemiDiscreteSystem,
                                   first_mode_ic, measure_period, project_field, recover_fields,
                                   semidiscretize, simulate, step)

BETA1 = 1.8751040687119612  # [DERIVED] first clamped-free root
T1 = 2 * np.pi / BETA1 ** 2
BEAM = make_model("beam-eta2")


@pytest.fixture(scope="module")
def mult():
    return SemiDiscreteSystem(BEAM, mode=MULTIPLIER)


@pytest.fixture(scope="module")
def red():
    return SemiDiscreteSystem(BEAM, mode=REDUCED)


def test_unsupported_modes():
    with pytest.raises(UnsupportedMode):
        semidiscretize(make_model("plate-I"), mode=REDUCED)
    with pytest.raises(UnsupportedMode):
        semidiscretize(make_model("plate-III"))
    with pytest.raises(UnsupportedMode):
        step(SemiDiscreteSystem(BEAM), ModalState(np.zeros(30), np.zeros(30)), 0.1, RK4)


@pytest.mark.parametrize("mode,scheme", [(MULTIPLIER, MIDPOINT), (REDUCED, RK4), (REDUCED, MIDPOINT)])
def test_zero_state_is_preserved(mode, scheme):
    sys_ = SemiDiscreteSystem(BEAM, mode=mode)
    assert not np.any(sys_.force(np.zeros(sys_.n)))
    assert not np.any(sys_.constraints(np.zeros(sys_.n)))
    s = step(sys_, ModalState(np.zeros(sys_.n), np.zeros(sys_.n)), 0.37, scheme)
    assert not np.any(s.q) and not np.any(s.qdot)
    tr = simulate(sys_, np.zeros(6), np.zeros(6), 0.1, 1.0, scheme)
    assert not np.any(tr.array("q")) and not np.any(tr.array("total"))


def test_single_mode_linear_frequency():
    sys_ = SemiDiscreteSystem(BEAM, mode=REDUCED, nx=1)
    h = 1e-6
    stiffness = -(sys_.acceleration(np.array([h]), np.zeros(1))[0][0]
                  - sys_.acceleration(np.array([-h]), np.zeros(1))[0][0]) / (2 * h)
    assert np.sqrt(stiffness) == pytest.approx(3.5160152685001512, rel=1e-9)


def test_linear_frequency_scales_with_stiffness_and_length():
    m = make_model("beam-eta2", stiffness=4.0, length=2.0)
    sys_ = SemiDiscreteSystem(m, mode=REDUCED, nx=1)
    h = 1e-6
    k = -(sys_.acceleration(np.array([h]), np.zeros(1))[0][0]
          - sys_.acceleration(np.array([-h]), np.zeros(1))[0][0]) / (2 * h)
    assert np.sqrt(k) == pytest.approx(BETA1 ** 2 * 2.0 / 4.0, rel=1e-9)


def test_multiplier_and_reduced_modes_agree(mult, red):
    ta = simulate(mult, *first_mode_ic(mult, 0.2), T1 / 400, 5.0)
    tb = simulate(red, *first_mode_ic(red, 0.2), T1 / 400, 5.0)
    assert np.max(np.abs(ta.array("q")[:, :6] - tb.array("q"))) <= 1e-6
    np.testing.assert_allclose(ta.array("lambda_root"), tb.array("lambda_root"), atol=1e-5)


def test_reflection_symmetry(mult):
    w0, w1 = first_mode_ic(mult, 0.2)
    w1 = w1 + np.array([0.1, -0.05, 0, 0, 0, 0])
    tp = simulate(mult, w0, w1, T1 / 100, 1.0)
    tm = simulate(mult, -w0, -w1, T1 / 100, 1.0)
    qp, qm = tp.array("q"), tm.array("q")
    np.testing.assert_allclose(qp[:, :6], -qm[:, :6], atol=1e-12)
    np.testing.assert_allclose(qp[:, 6:], qm[:, 6:], atol=1e-12)
    np.testing.assert_allclose(tp.array("lambda_root"), tm.array("lambda_root"), atol=1e-12)


def test_midpoint_self_convergence_is_second_order(mult):
    # the two lowest modes are resolved at these steps; the highest ones are not, so they are left out
    divs = (200, 400, 800)
    runs = [simulate(mult, *first_mode_ic(mult, 0.2), T1 / d, T1).array("q")[:: d // 200, :2] for d in divs]
    e1 = np.max(np.abs(runs[0] - runs[1]))
    e2 = np.max(np.abs(runs[1] - runs[2]))
    assert 3.7 <= e1 / e2 <= 4.3


def test_one_period_energy_drift(mult):
    tr = simulate(mult, *first_mode_ic(mult, 0.2), T1 / 500, T1)
    E = tr.array("total")
    assert np.max(np.abs(E - E[0])) / E[0] <= 1e-5
    assert np.max(tr.array("constraint_inf")) <= 1e-9
    assert np.max(tr.array("velocity_constraint_inf")) <= 1e-9


def test_inplane_inertia_changes_period():
    periods = []
    for inertia in (True, False):
        sys_ = SemiDiscreteSystem(BEAM, mode=REDUCED, inplane_inertia=inertia)
        tr = simulate(sys_, *first_mode_ic(sys_, 0.3), T1 / 200, 4 * T1, RK4)
        periods.append(measure_period(tr.array("t"), tr.array("tip")))
    assert abs(periods[0] / periods[1] - 1) > 1e-3


def test_discrete_multipliers_equal_recovered_lambda(mult):
    rng = np.random.default_rng(5)
    q, qd = mult.lift(*first_mode_ic(mult, 0.25))
    qd[:6] = rng.normal(size=6) * 0.1
    q, qd = mult.project(q, qd)
    qdd, mu = mult.acceleration(q, qd)
    u_tt = mult.inplane_acceleration(q, qd, qdd)["u_tt"]
    np.testing.assert_allclose(mu, mult.space.grids[0].T @ u_tt, atol=1e-14)
    _, lam = recover_fields(mult, q, qd)
    # recovery from w agrees with the discrete in-plane acceleration on the constraint manifold
    np.testing.assert_allclose(lam["lambda"], mu, atol=1e-10)


def test_plate_model2_reduces_to_beam():
    plate = make_model("plate-II", young=12 * (1 - 0.09) / 0.01)
    sb = SemiDiscreteSystem(BEAM, mode=REDUCED)
    sp = SemiDiscreteSystem(plate, mode=REDUCED, ny=2)
    tb = simulate(sb, *first_mode_ic(sb, 0.3), T1 / 200, 1.0, RK4)
    tp = simulate(sp, *first_mode_ic(sp, 0.3), T1 / 200, 1.0, RK4)
    np.testing.assert_allclose(tp.array("tip"), tb.array("tip"), atol=1e-12)


def test_plate_model1_keeps_all_three_constraints():
    sys_ = SemiDiscreteSystem(make_model("plate-I"), mode=MULTIPLIER, nx=2, ny=2, nqx=6, nqy=4)
    assert sys_.m == 2 * 24 + 6
    w0 = np.array([0.05, 0.02, 0.01, 0.0])
    tr = simulate(sys_, w0, np.zeros(4), 0.02, 0.06)
    assert np.max(tr.array("constraint_inf")) <= 1e-9


def test_field_initial_data_projects_onto_basis(mult):
    b = mult.basis
    q = project_field(mult, lambda x: 0.1 * b.x.evaluate(0, x)[:, 0] - 0.02 * b.x.evaluate(0, x)[:, 2])
    np.testing.assert_allclose(q, [0.1, 0, -0.02, 0, 0, 0], atol=1e-13)


def test_failure_returns_partial_trajectory(red):
    calls = {"n": 0}
    real = red.acceleration

    class Broken(SemiDiscreteSystem):
        def acceleration(self, q, qd):
            calls["n"] += 1
            if calls["n"] > 40:
                return np.full_like(q, np.nan), None
            return real(q, qd)

    broken = Broken.__new__(Broken)
    broken.__dict__.update(red.__dict__)
    tr = simulate(broken, *first_mode_ic(red, 0.1), 0.01, 1.0, MIDPOINT, raise_on_failure=False)
    assert isinstance(tr.failure, NewtonDivergence)
    assert tr.failure.step_index == len(tr)
    assert tr.failure.trace
    calls["n"] = 0
    with pytest.raises(NewtonDivergence) as info:
        simulate(broken, *first_mode_ic(red, 0.1), 0.01, 1.0, MIDPOINT)
    assert len(info.value.trajectory) >= 1


def test_period_measurement():
    t = np.linspace(0, 10, 2001)
    assert measure_period(t, np.sin(2 * np.pi * t / 1.7 + 0.3)) == pytest.approx(1.7, rel=1e-4)
    with pytest.raises(ValueError):
        measure_period(t[:10], np.sin(t[:10]))

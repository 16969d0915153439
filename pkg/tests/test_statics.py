import numpy as np
import pytest

from inextensible.core import ContinuationStall, NewtonDivergence, make_model
from inextensible.dynamics import MULTIPLIER, SemiDiscreteSystem
from inextensible import statics
from inextensible.statics import LoadSpec, continuation_path, linear_modes, load_vector, solve_static

BEAM = make_model("beam-eta2")
# [DERIVED] tip deflection from a collocation solve of the strong form with natural end conditions
BVP_TIP = {1.0: 0.30520508338941665, 0.1: 0.033295387930585243}


def test_zero_load_gives_flat_state():
    r = solve_static(BEAM, LoadSpec("tip", 0.0))
    assert not np.any(r.q) and r.tip == 0.0 and r.energy.potential == 0.0


def test_small_load_matches_linear_cantilever():
    P = 1e-3
    r = solve_static(BEAM, LoadSpec("tip", P))
    assert r.tip == pytest.approx(P / 3, rel=5e-4)
    assert r.optimality <= 1e-10


@pytest.mark.parametrize("P", sorted(BVP_TIP))
def test_tip_load_matches_collocation_oracle(P):
    r = solve_static(BEAM, LoadSpec("tip", P))
    assert r.tip == pytest.approx(BVP_TIP[P], rel=5e-4)
    assert r.optimality <= 1e-10 and r.constraint_inf <= 1e-12


def test_nonlinear_tip_is_softer_than_linear():
    r = solve_static(BEAM, LoadSpec("tip", 1.0))
    assert r.tip < 1 / 3


def test_total_potential_derivative_is_minus_tip():
    h = 1e-4
    pot = [solve_static(BEAM, LoadSpec("tip", 0.5 + s * h)).total_potential for s in (1, -1)]
    mid = solve_static(BEAM, LoadSpec("tip", 0.5))
    assert (pot[0] - pot[1]) / (2 * h) == pytest.approx(-mid.tip, rel=1e-7)


def test_equilibrium_is_a_constrained_minimum():
    r = solve_static(BEAM, LoadSpec("tip", 1.0))
    assert r.min_reduced_eig > 0


def test_continuation_path_is_monotone():
    path = continuation_path(BEAM, LoadSpec("tip", 1.0), [0.25, 0.5, 0.75, 1.0])
    tips = [r.tip for r in path]
    assert all(a < b for a, b in zip(tips, tips[1:]))
    assert tips[-1] == pytest.approx(BVP_TIP[1.0], rel=5e-4)


def test_continuation_stall(monkeypatch):
    def never(self, q, mu, tol, max_iter):
        raise NewtonDivergence("forced", trace=[1.0])

    monkeypatch.setattr(statics._Kkt, "newton", never)
    with pytest.raises(ContinuationStall) as info:
        solve_static(BEAM, LoadSpec("tip", 1.0))
    assert info.value.last_level == 0.0


def test_load_validation():
    with pytest.raises(ValueError):
        LoadSpec("torque", 1.0)
    with pytest.raises(ValueError):
        LoadSpec("tip", float("nan"))
    sb = SemiDiscreteSystem(BEAM, mode=MULTIPLIER, statics=True)
    with pytest.raises(ValueError):
        load_vector(sb, LoadSpec("edge", 1.0))
    sp = SemiDiscreteSystem(make_model("plate-II"), mode=MULTIPLIER, nx=2, ny=2, statics=True)
    with pytest.raises(ValueError):
        load_vector(sp, LoadSpec("tip", 1.0))


def test_pressure_work_is_load_times_area_integral():
    sb = SemiDiscreteSystem(BEAM, mode=MULTIPLIER, statics=True)
    f = load_vector(sb, LoadSpec("pressure", 2.0))
    x = sb.basis.x.grid.nodes
    # integral of each clamped-free mode times the pressure
    np.testing.assert_allclose(f[:6], 2.0 * sb.basis.x.grid.weights @ sb.basis.x.evaluate(0, x), atol=1e-14)


def test_beam_linear_modes():
    r = linear_modes(BEAM, 3)
    # [DERIVED] squares of the clamped-free roots
    np.testing.assert_allclose(r.frequencies, [3.5160152685001512, 22.03449156466677, 61.697214413549102],
                               rtol=1e-6)


def test_plate_frequency_scales_with_root_stiffness():
    f1 = linear_modes(make_model("plate-II", poisson=0.3, young=1000.0), 2, nx=4, ny=3).frequencies
    f4 = linear_modes(make_model("plate-II", poisson=0.3, young=4000.0), 2, nx=4, ny=3).frequencies
    np.testing.assert_allclose(f4 / f1, 2.0, rtol=1e-10)


def test_plate_lowest_mode_poisson_trend():
    normalized = []
    for nu in (0.05, 0.15, 0.25, 0.35, 0.45):
        m = make_model("plate-II", poisson=nu)
        r = linear_modes(m, 1, nx=4, ny=3)
        p = m.params
        normalized.append(r.frequencies[0] / np.sqrt(p.stiffness))
        shape = r.shapes[0].reshape(4, 3)
        # symmetric about the mid-line and dominated by the first bending mode
        assert np.max(np.abs(shape[:, 1])) <= 1e-10 * np.max(np.abs(shape))
        assert abs(shape[0, 0]) > 0.95 * np.linalg.norm(shape)
    assert all(a > b for a, b in zip(normalized, normalized[1:]))
    assert normalized[0] == pytest.approx(3.5160152685001512, rel=1e-3)


def test_bending_only_plate_static():
    r = solve_static(make_model("plate-III"), LoadSpec("edge", 0.01), nx=3, ny=2)
    assert r.optimality <= 1e-10 and r.tip > 0 and r.corner is not None

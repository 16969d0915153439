"""Inextensibility constraints, in-plane recovery, multiplier recovery and curvatures.

Nonlocal integrals act on quadrature-node samples through the cumulative
operators of the grids attached to a FieldState (``state.quad``).
"""

from __future__ import annotations

import enum

import numpy as np

from .basis import along
from .core import FieldState, SlopeTooLarge

SLOPE_GUARD = 1.0 - 1e-8


class ConstraintFlavor(str, enum.Enum):
    EXACT_BEAM = "exact-beam"
    ETA2_BEAM = "eta2-beam"
    ETA4_BEAM = "eta4-beam"
    FULL_PLATE = "full-plate"
    QUAD_PLATE = "quad-plate"
    QUARTIC_PLATE = "quartic-plate"


class CurvatureVariant(str, enum.Enum):
    BEAM_EXACT = "beam-exact"
    BEAM_ETA2 = "beam-eta2"
    BEAM_ETA4 = "beam-eta4"
    PLATE_FULL = "plate-full"
    PLATE_SIMPLIFIED = "plate-simplified"
    PLATE_IN_W = "plate-in-w"


def _grids(state: FieldState):
    if state.quad is None:
        raise ValueError("nonlocal operators need a state sampled on quadrature nodes (state.quad)")
    return state.quad


def _check_slope(wx):
    if np.any(np.abs(wx) >= SLOPE_GUARD):
        raise SlopeTooLarge(f"exact beam kinematics need |w_x| < 1, got max {np.max(np.abs(wx)):.6g}")


def beam_slope_map(wx, flavor: ConstraintFlavor, order: int = 0):
    """The map w_x -> u_x of a beam constraint flavor, or its first/second derivative."""
    flavor = ConstraintFlavor(flavor)
    wx = np.asarray(wx, dtype=float)
    if flavor is ConstraintFlavor.ETA2_BEAM:
        return (-0.5 * wx ** 2, -wx, -np.ones_like(wx))[order]
    if flavor is ConstraintFlavor.ETA4_BEAM:
        return (-0.5 * wx ** 2 - 0.125 * wx ** 4, -wx - 0.5 * wx ** 3, -1.0 - 1.5 * wx ** 2)[order]
    if flavor is ConstraintFlavor.EXACT_BEAM:
        _check_slope(wx)
        root = np.sqrt(1.0 - wx ** 2)
        return (-1.0 + root, -wx / root, -1.0 / root ** 3)[order]
    raise ValueError(f"{flavor.value} is not a beam constraint flavor")


def cumulative_x(state: FieldState, f):
    return along(_grids(state)[0].C, f, 0)


def cumulative_y(state: FieldState, f):
    return along(_grids(state)[1].C, f, 1)


def beam_recover_u(state: FieldState, flavor=ConstraintFlavor.ETA2_BEAM) -> np.ndarray:
    """u(x) = integral from 0 to x of the constraint map applied to w_x; u(0) = 0."""
    wx = state["w_x"]
    slope = beam_slope_map(wx, flavor)
    if not np.any(wx):
        return np.zeros(state.shape)
    return cumulative_x(state, slope)


def with_beam_inplane(state: FieldState, flavor=ConstraintFlavor.ETA2_BEAM) -> FieldState:
    """Attach u, u_x, u_xx and, when w velocities are present, u_t and u_tt."""
    wx = state["w_x"]
    d1 = beam_slope_map(wx, flavor, 1)
    out = {"u": beam_recover_u(state, flavor), "u_x": beam_slope_map(wx, flavor)}
    if state.has("w_xx"):
        out["u_xx"] = d1 * state["w_xx"]
    if state.has("w_xt"):
        wxt = state["w_xt"]
        out["u_t"] = cumulative_x(state, d1 * wxt)
        out["u_xt"] = d1 * wxt
        if state.has("w_xtt"):
            d2 = beam_slope_map(wx, flavor, 2)
            rate = d2 * wxt ** 2 + d1 * state["w_xtt"]
            out["u_tt"] = cumulative_x(state, rate)
            out["u_xtt"] = rate
    return state.with_fields(**out)


def beam_recover_lambda(state: FieldState, u_tt=None) -> np.ndarray:
    """lambda(x) = integral from x to L of u_tt; exactly zero at x = L."""
    acc = state["u_tt"] if u_tt is None else np.asarray(u_tt, dtype=float)
    if not np.any(acc):
        return np.zeros(acc.shape)
    grid = _grids(state)[0]
    return along(grid.T, acc, 0)


def spectral_dx(state: FieldState, f) -> np.ndarray:
    return along(_grids(state)[0].D, f, 0)


def spectral_dy(state: FieldState, f) -> np.ndarray:
    return along(_grids(state)[1].D, f, 1)


def constraint_residual(state: FieldState, flavor) -> dict:
    """Pointwise residuals: 'span' for beams; 'span', 'chord', 'shear' for plates."""
    flavor = ConstraintFlavor(flavor)
    s = state
    if flavor is ConstraintFlavor.ETA2_BEAM:
        return {"span": s["u_x"] + 0.5 * s["w_x"] ** 2}
    if flavor is ConstraintFlavor.ETA4_BEAM:
        return {"span": s["u_x"] + 0.5 * s["w_x"] ** 2 + 0.125 * s["w_x"] ** 4}
    if flavor is ConstraintFlavor.EXACT_BEAM:
        return {"span": (1.0 + s["u_x"]) ** 2 + s["w_x"] ** 2 - 1.0}
    ux, uy, vx, vy, wx, wy = (s[k] for k in ("u_x", "u_y", "v_x", "v_y", "w_x", "w_y"))
    if flavor is ConstraintFlavor.QUAD_PLATE:
        return {"span": ux + 0.5 * wx ** 2,
                "chord": vy + 0.5 * wy ** 2,
                "shear": uy + vx + wx * wy}
    if flavor is ConstraintFlavor.FULL_PLATE:
        return {"span": (1.0 + ux) ** 2 + vx ** 2 + wx ** 2 - 1.0,
                "chord": uy ** 2 + (1.0 + vy) ** 2 + wy ** 2 - 1.0,
                "shear": uy + vx + ux * uy + vx * vy + wx * wy}
    # quartic truncation; the shear condition is kept whole at this order
    return {"span": ux + 0.5 * vx ** 2 + 0.5 * wx ** 2 + 0.25 * vx ** 2 * wx ** 2
            + 0.125 * vx ** 4 + 0.125 * wx ** 4,
            "chord": vy + 0.5 * uy ** 2 + 0.5 * wy ** 2 + 0.25 * uy ** 2 * wy ** 2
            + 0.125 * uy ** 4 + 0.125 * wy ** 4,
            "shear": uy + vx + ux * uy + vx * vy + wx * wy}


def plate_recover_inplane(state: FieldState) -> FieldState:
    """Recover u, v from w using the span and shear constraints and u = v = 0 at x = 0.

    u = -1/2 int_0^x w_x^2,  v = int_0^x int_0^xi w_x w_xy - int_0^x w_x w_y.
    First derivatives are attached in closed form; second derivatives are
    attached when the needed w derivatives are present. The chord constraint
    is not imposed: v_y + w_y^2/2 equals minus the double x-integral of the
    Gaussian curvature w_xx w_yy - w_xy^2.
    """
    s = state
    s.require("w_x", "w_y", "w_xy")
    if s.is_zero("w", "w_x", "w_y", "w_xy"):
        z = s.zeros()
        keys = ["u", "v", "u_x", "u_y", "v_x", "v_y", "u_xx", "u_xy", "u_yy", "v_xx", "v_xy", "v_yy"]
        return s.with_fields(**{k: z for k in keys})
    C = lambda f: cumulative_x(s, f)  # noqa: E731
    wx, wy, wxy = s["w_x"], s["w_y"], s["w_xy"]
    inner = C(wx * wxy)
    out = {
        "u": C(-0.5 * wx ** 2),
        "v": C(inner - wx * wy),
        "u_x": -0.5 * wx ** 2,
        "u_y": -inner,
        "v_x": inner - wx * wy,
    }
    if s.has("w_xx"):
        out["u_xx"] = -wx * s["w_xx"]
        out["u_xy"] = -wx * wxy
        out["v_xx"] = -s["w_xx"] * wy
    if s.has("w_yy", "w_xyy"):
        wyy, wxyy = s["w_yy"], s["w_xyy"]
        lift = C(wxy ** 2 + wx * wxyy)
        out["v_y"] = C(lift - wxy * wy - wx * wyy)
        out["u_yy"] = -lift
        out["v_xy"] = lift - wxy * wy - wx * wyy
        if s.has("w_yyy", "w_xyyy"):
            wyyy, wxyyy = s["w_yyy"], s["w_xyyy"]
            lift_y = C(3.0 * wxy * wxyy + wx * wxyyy)
            out["v_yy"] = C(lift_y - wxyy * wy - 2.0 * wxy * wyy - wx * wyyy)
    return s.with_fields(**out)


def composite_defect(state: FieldState) -> np.ndarray:
    """4 u_x v_y - 2 u_y v_x - (u_y^2 + v_x^2); zero whenever all three quadratic constraints hold."""
    s = state
    return 4.0 * s["u_x"] * s["v_y"] - 2.0 * s["u_y"] * s["v_x"] - (s["u_y"] ** 2 + s["v_x"] ** 2)


def gaussian_curvature(state: FieldState) -> np.ndarray:
    """Diagnostic w_xx w_yy - w_xy^2; vanishes for developable deflections."""
    return state["w_xx"] * state["w_yy"] - state["w_xy"] ** 2


def edge_trace_identity(state: FieldState) -> dict:
    """Both sides of w_yy(L_x, .) = [w_x w_xy] between y = 0 and y = L_y.

    The left side is a trace on x = L_x and the right side a difference of
    y-edge values, so the two are reported rather than compared pointwise.
    Requires samples that include the boundary lines.
    """
    s = state
    lhs = s["w_yy"][-1, :]
    prod = s["w_x"] * s["w_xy"]
    rhs = prod[:, -1] - prod[:, 0]
    return {"w_yy_at_east": lhs, "w_x_w_xy_jump_in_y": rhs}


def plate_vtt_closure(state: FieldState) -> tuple:
    """In-plane accelerations of the quadratic plate constraints.

    u_tt = -int_0^x (w_xt^2 + w_x w_xtt); v_tt = v_tt(x, 0) - int_0^y (w_yt^2 + w_y w_ytt),
    with v_tt(x, 0) chosen so that v_tt has zero mean in y. That makes
    lambda2 = -int_0^y v_tt vanish on both y = 0 and y = L_y.
    """
    s = state
    if s.is_zero("w_t", "w_xt", "w_yt", "w_tt", "w_xtt", "w_ytt"):
        return s.zeros(), s.zeros()
    grid_y = _grids(s)[1]
    rate_x = s["w_xt"] ** 2 + s["w_x"] * s["w_xtt"]
    rate_y = s["w_yt"] ** 2 + s["w_y"] * s["w_ytt"]
    u_tt = -cumulative_x(s, rate_x)
    partial = cumulative_y(s, rate_y)
    trace = (partial @ grid_y.weights) / grid_y.length
    v_tt = trace[:, None] - partial
    return u_tt, v_tt


def plate_lambda_closed(state: FieldState, u_tt, v_tt) -> tuple:
    """lambda1 = int_x^Lx u_tt and lambda2 = -int_0^y v_tt (quadratic plate multipliers)."""
    gx, gy = _grids(state)
    return along(gx.T, u_tt, 0), -along(gy.C, v_tt, 1)


def curvature(state: FieldState, variant) -> dict:
    """Curvature fields for the chosen formula.

    Beams return {'kappa_sq'} (plus 'kappa' for the exact form). Plates return
    {'k11', 'k22', 'k12'}; the full form also returns the director fields
    'theta', 'psi', 'chi'. The simplified form uses u_yy w_x + w_y v_yy for k22;
    pass variant 'plate-simplified-uyy' to use w_y u_yy instead.
    """
    use_uyy = variant == "plate-simplified-uyy"
    variant = CurvatureVariant("plate-simplified" if use_uyy else variant)
    s = state
    if variant is CurvatureVariant.BEAM_EXACT:
        wx, wxx = s["w_x"], s["w_xx"]
        _check_slope(wx)
        kappa = wxx / np.sqrt(1.0 - wx ** 2)
        return {"kappa": kappa, "kappa_sq": wxx ** 2 / (1.0 - wx ** 2)}
    if variant is CurvatureVariant.BEAM_ETA2:
        return {"kappa_sq": s["w_xx"] ** 2 * (1.0 + s["w_x"] ** 2)}
    if variant is CurvatureVariant.BEAM_ETA4:
        wx2 = s["w_x"] ** 2
        return {"kappa_sq": s["w_xx"] ** 2 * (1.0 + wx2 + wx2 ** 2)}
    if variant is CurvatureVariant.PLATE_IN_W:
        stretch = 1.0 + 0.5 * s["w_x"] ** 2 + 0.5 * s["w_y"] ** 2
        return {"k11": -s["w_xx"] * stretch, "k22": -s["w_yy"] * stretch,
                "k12": -2.0 * s["w_xy"] * stretch}
    if variant is CurvatureVariant.PLATE_SIMPLIFIED:
        wx, wy = s["w_x"], s["w_y"]
        dil = 1.0 + s["u_x"] + s["v_y"]
        chord = s["u_yy"] if use_uyy else s["v_yy"]
        return {"k11": wy * s["v_xx"] + wx * s["u_xx"] - dil * s["w_xx"],
                "k22": s["u_yy"] * wx + wy * chord - dil * s["w_yy"],
                "k12": 2.0 * (s["v_xy"] * wy + s["u_xy"] * wx - dil * s["w_xy"])}
    return _full_plate_curvature(s)


def _full_plate_curvature(s: FieldState) -> dict:
    ux, uy, vx, vy, wx, wy = (s[k] for k in ("u_x", "u_y", "v_x", "v_y", "w_x", "w_y"))
    uxx, uxy, uyy = s["u_xx"], s["u_xy"], s["u_yy"]
    vxx, vxy, vyy = s["v_xx"], s["v_xy"], s["v_yy"]
    wxx, wxy, wyy = s["w_xx"], s["w_xy"], s["w_yy"]
    a, b = 1.0 + ux, 1.0 + vy
    # expanded director derivatives, grouped term by term in the curvature sums
    theta_x = vxx * wy + vx * wxy - vxy * wx - b * wxx
    theta_y = vxy * wy + vx * wyy - vyy * wx - b * wxy
    psi_x = uxy * wx + uy * wxx - uxx * wy - a * wxy
    psi_y = uyy * wx + uy * wxy - uxy * wy - a * wyy
    chi_x = uxx + vxy + uxx * vy + ux * vxy - uxy * vx - uy * vxx
    chi_y = b * uxy + a * vyy - uyy * vx - uy * vxy
    k11 = a * theta_x + vx * psi_x + wx * chi_x
    k22 = uy * theta_y + b * psi_y + wy * chi_y
    k12 = a * theta_y + b * psi_x + uy * theta_x + vx * psi_y + wx * chi_y + wy * chi_x
    return {"k11": k11, "k22": k22, "k12": k12,
            "theta": -b * wx + vx * wy, "psi": -a * wy + uy * wx,
            "chi": ux + vy + ux * vy - uy * vx}

"""Strong-form interior and boundary residuals of the equations of motion.

Sign convention for the plate stiffness operator:
+D Lap[(1 + |grad w|^2) Lap w] - D div(|Lap w|^2 grad w), with |Lap w|^2 taken
literally as (w_xx + w_yy)^2. The variational gradient of the plate energy is
available as a separate diagnostic (``plate_energy_gradient``).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .basis import along
from .core import FieldState, MissingMultiplier, ModelSpec, MultiplierField, Variant
from .kinematics import plate_vtt_closure

EDGES = ("E", "N", "W", "S")


@dataclass
class ResidualReport:
    interior: dict = field(default_factory=dict)
    boundary: dict = field(default_factory=dict)
    norms: dict = field(default_factory=dict)

    def sup(self, key: str) -> float:
        return self.norms[key]["sup"]

    def max_sup(self) -> float:
        return max((v["sup"] for v in self.norms.values()), default=0.0)


def _norms(state: FieldState, arrays: dict, prefix: str = "") -> dict:
    out = {}
    W = None
    if state.quad is not None:
        W = (state.quad[0].weights if state.ndim == 1
             else np.outer(state.quad[0].weights, state.quad[1].weights))
    for key, arr in arrays.items():
        arr = np.asarray(arr)
        if not np.all(np.isfinite(arr)):
            raise FloatingPointError(f"non-finite residual in {prefix}{key}")
        l2 = float(np.sqrt(np.sum(W * arr ** 2))) if W is not None and arr.shape == W.shape else None
        out[prefix + key] = {"sup": float(np.max(np.abs(arr))) if arr.size else 0.0, "l2": l2}
    return out


# -- multiplier access -----------------------------------------------------------

def _lam(state: FieldState, mult: MultiplierField | None, name: str, deriv: str = ""):
    """A multiplier sample or its first derivative; derivatives fall back to spectral differentiation."""
    if mult is None or name not in mult.values:
        raise MissingMultiplier(f"multiplier {name!r} is required for this residual")
    if not deriv:
        return mult[name]
    key = f"{name}_{deriv}"
    if key in mult.values:
        return mult[key]
    if state.quad is None:
        raise MissingMultiplier(f"{key!r} not supplied and the state has no quadrature grid")
    axis = 0 if deriv == "x" else 1
    return along(state.quad[axis].D, mult[name], axis)


# -- beam --------------------------------------------------------------------------

def beam_stiffness(state: FieldState, D: float, order: str = "eta2"):
    wx, wxx, wxxx, wxxxx = (state[k] for k in ("w_x", "w_xx", "w_xxx", "w_xxxx"))
    if order == "eta2":
        # -D (w_xx^2 w_x)_x + D (w_xx (1 + w_x^2))_xx, expanded
        return D * ((1.0 + wx ** 2) * wxxxx + 4.0 * wx * wxx * wxxx + wxx ** 3)
    # -D ([w_x + 2 w_x^3] w_xx^2)_x + D (w_xx [1 + w_x^2 + w_x^4])_xx, expanded
    return D * ((1.0 + wx ** 2 + wx ** 4) * wxxxx + (4.0 * wx + 8.0 * wx ** 3) * wxx * wxxx
                + (1.0 + 6.0 * wx ** 2) * wxx ** 3)


def _beam_interior(state, mult, model, lambda_form, forcing):
    D = model.params.stiffness
    order = model.params.order
    lam, lam_x = _lam(state, mult, "lambda"), _lam(state, mult, "lambda", "x")
    wx, wxx = state["w_x"], state["w_xx"]
    if order == "eta4" and lambda_form == "variational":
        # d/dx (lambda (w_x + w_x^3 / 2))
        lam_term = lam_x * (wx + 0.5 * wx ** 3) + lam * wxx * (1.0 + 1.5 * wx ** 2)
    else:
        lam_term = lam_x * wx + lam * wxx
    w_eq = state["w_tt"] + beam_stiffness(state, D, order) + lam_term
    u_eq = state["u_tt"] + lam_x
    span = state["u_x"] + 0.5 * wx ** 2
    if order == "eta4":
        span = span + 0.125 * wx ** 4
    out = {"u": u_eq, "w": w_eq, "constraint_span": span}
    return _apply_forcing(out, forcing)


def _apply_forcing(out, forcing):
    if forcing:
        for key, f in forcing.items():
            out[key] = out[key] - f
    return out


# -- plate Models I and II -----------------------------------------------------------

def plate_stiffness(state: FieldState, D: float):
    """D (Lap[S L] - div(L^2 grad w)) with S = 1 + |grad w|^2, L = w_xx + w_yy, expanded."""
    g = state.__getitem__
    wx, wy = g("w_x"), g("w_y")
    wxx, wxy, wyy = g("w_xx"), g("w_xy"), g("w_yy")
    wxxx, wxxy, wxyy, wyyy = g("w_xxx"), g("w_xxy"), g("w_xyy"), g("w_yyy")
    wxxxx, wxxyy, wyyyy = g("w_xxxx"), g("w_xxyy"), g("w_yyyy")
    S = 1.0 + wx ** 2 + wy ** 2
    L = wxx + wyy
    Lx, Ly = wxxx + wxyy, wxxy + wyyy
    lapL = wxxxx + 2.0 * wxxyy + wyyyy
    Sx = 2.0 * (wx * wxx + wy * wxy)
    Sy = 2.0 * (wx * wxy + wy * wyy)
    lapS = 2.0 * (wxx ** 2 + 2.0 * wxy ** 2 + wyy ** 2 + wx * (wxxx + wxyy) + wy * (wxxy + wyyy))
    lap_SL = S * lapL + 2.0 * (Sx * Lx + Sy * Ly) + L * lapS
    div_flux = 2.0 * L * (Lx * wx + Ly * wy) + L ** 3
    return D * (lap_SL - div_flux)


def plate_energy_gradient(state: FieldState, model: ModelSpec) -> np.ndarray:
    """Variational gradient of the quadratic-plate energy, by spectral differentiation of moments."""
    if state.quad is None:
        raise ValueError("plate_energy_gradient needs a quadrature-node state")
    p = model.params
    D, nu = p.stiffness, p.poisson
    gx, gy = state.quad
    dx = lambda f: along(gx.D, f, 0)  # noqa: E731
    dy = lambda f: along(gy.D, f, 1)  # noqa: E731
    wx, wy, wxx, wyy, wxy = (state[k] for k in ("w_x", "w_y", "w_xx", "w_yy", "w_xy"))
    S = 1.0 + wx ** 2 + wy ** 2
    B = wxx ** 2 + wyy ** 2 + 2.0 * nu * wxx * wyy + 2.0 * (1.0 - nu) * wxy ** 2
    mxx = S * (wxx + nu * wyy)
    myy = S * (wyy + nu * wxx)
    mxy = S * wxy
    return D * (dx(dx(mxx)) + dy(dy(myy)) + 2.0 * (1.0 - nu) * dx(dy(mxy))
                - dx(wx * B) - dy(wy * B))


def _plate_multiplier_terms(state, mult, with_shear: bool):
    wx, wy = state["w_x"], state["w_y"]
    l1, l1x = _lam(state, mult, "lambda1"), _lam(state, mult, "lambda1", "x")
    l2, l2y = _lam(state, mult, "lambda2"), _lam(state, mult, "lambda2", "y")
    w_terms = l1x * wx + l1 * state["w_xx"] + l2y * wy + l2 * state["w_yy"]
    u_terms, v_terms = l1x, l2y
    if with_shear:
        l3 = _lam(state, mult, "lambda3")
        l3x, l3y = _lam(state, mult, "lambda3", "x"), _lam(state, mult, "lambda3", "y")
        w_terms = w_terms + l3x * wy + 2.0 * l3 * state["w_xy"] + l3y * wx
        u_terms = u_terms + l3y
        v_terms = v_terms + l3x
    return u_terms, v_terms, w_terms


def _plate_interior(state, mult, model, stiffness_form, forcing):
    D = model.params.stiffness
    shear = model.variant is Variant.PLATE_I
    if stiffness_form == "variational":
        stiff = plate_energy_gradient(state, model)
    else:
        stiff = plate_stiffness(state, D)
    u_m, v_m, w_m = _plate_multiplier_terms(state, mult, shear)
    wx, wy = state["w_x"], state["w_y"]
    out = {"u": state["u_tt"] + u_m, "v": state["v_tt"] + v_m, "w": state["w_tt"] + stiff + w_m,
           "constraint_span": state["u_x"] + 0.5 * wx ** 2,
           "constraint_chord": state["v_y"] + 0.5 * wy ** 2}
    if shear:
        out["constraint_shear"] = state["u_y"] + state["v_x"] + wx * wy
    return _apply_forcing(out, forcing)


def model2_closed_residual(state: FieldState, model: ModelSpec, u_tt=None, v_tt=None) -> np.ndarray:
    """Closed Model II transverse residual with both multipliers eliminated.

    w_tt + stiffness + d/dx(w_x int_x^Lx u_tt) - d/dy(w_y int_0^y v_tt), with the
    outer derivatives expanded analytically. u_tt and v_tt default to the
    quadratic-constraint closure.
    """
    if u_tt is None or v_tt is None:
        u_tt, v_tt = plate_vtt_closure(state)
    gx, gy = state.quad
    tail_u = along(gx.T, u_tt, 0)
    head_v = along(gy.C, v_tt, 1)
    inertia = state["w_xx"] * tail_u - state["w_x"] * u_tt - state["w_yy"] * head_v - state["w_y"] * v_tt
    return state["w_tt"] + plate_stiffness(state, model.params.stiffness) + inertia


# -- plate Model III -----------------------------------------------------------------

def _dyy_moment(g, nu):
    # d^2/dy^2 [w_x (w_yy + nu w_xx)]
    return (g("w_xyy") * (g("w_yy") + nu * g("w_xx")) + 2.0 * g("w_xy") * (g("w_yyy") + nu * g("w_xxy"))
            + g("w_x") * (g("w_yyyy") + nu * g("w_xxyy")))


def _dxx_moment(g, nu):
    # d^2/dx^2 [w_y (w_xx + nu w_yy)]
    return (g("w_xxy") * (g("w_xx") + nu * g("w_yy")) + 2.0 * g("w_xy") * (g("w_xxx") + nu * g("w_xyy"))
            + g("w_y") * (g("w_xxxx") + nu * g("w_xxyy")))


def model3_inplane_forces(state: FieldState, model: ModelSpec, first_form: bool = False) -> tuple:
    """Non-inertial, non-multiplier parts of the Model III u- and v-equations."""
    p = model.params
    D, nu, h = p.stiffness, p.poisson, p.thickness
    g = state.__getitem__
    memb = 12.0 * D / h ** 2 * (1.0 - nu)
    u_coeff = D if first_form else 2.0 * D
    fu = -memb * (g("u_yy") + g("w_x") * g("w_yy")) - u_coeff * _dyy_moment(g, nu)
    fv = -memb * (g("v_xx") + g("w_xx") * g("w_y")) - 2.0 * D * _dxx_moment(g, nu)
    return fu, fv


def model3_w_operator(state: FieldState, model: ModelSpec) -> np.ndarray:
    """Model III transverse operator, expanded, without w_tt and multiplier terms."""
    p = model.params
    D, nu, h = p.stiffness, p.poisson, p.thickness
    g = state.__getitem__
    wx, wy, wxx, wxy, wyy = g("w_x"), g("w_y"), g("w_xx"), g("w_xy"), g("w_yy")
    wxxx, wxxy, wxyy, wyyy = g("w_xxx"), g("w_xxy"), g("w_xyy"), g("w_yyy")
    wxxxx, wxxyy, wyyyy = g("w_xxxx"), g("w_xxyy"), g("w_yyyy")
    bracket = (wxxxx * (1.0 + wx ** 2 - wy ** 2) + wyyyy * (1.0 - wx ** 2 + wy ** 2)
               + 2.0 * wxxyy * (1.0 + wx ** 2 + wy ** 2)
               - nu * wxxyy * (wx ** 2 + wy ** 2) - wx * g("u_yyyy") - wy * g("v_xxxx")
               + 4.0 * wx * wxx * wxxx + 4.0 * wy * wyy * wyyy - wx * wyy * wxyy - wy * wxx * wxxy
               + (4.0 - 2.0 * nu) * wx * wxy * wxxy + (4.0 - 2.0 * nu) * wy * wxy * wxyy
               - 4.0 * wx * wxy * wyyy - 4.0 * wy * wxy * wxxx - 2.0 * wxy * g("v_xxx") - 2.0 * wxy * g("u_yyy")
               + 4.0 * (1.0 - nu) * wx * wxx * wxyy + 4.0 * (1.0 - nu) * wy * wyy * wxxy
               + wxx ** 3 + wyy ** 3 + wxx * wyy ** 2 + wyy * wxx ** 2
               - (1.0 + 3.0 * nu) * wxx * wxy ** 2 - (1.0 + 3.0 * nu) * wyy * wxy ** 2)
    membrane = (wxx * wy ** 2 + 2.0 * wx * wy * wxy + 2.0 * g("u_y") * wxy + g("v_xx") * wy
                + 2.0 * g("v_x") * wxy + wx ** 2 * wyy + g("u_yy") * wx)
    return -D * bracket + 6.0 * D / h ** 2 * (1.0 - nu) * membrane


def _model3_interior(state, mult, model, first_form, forcing):
    wx, wy = state["w_x"], state["w_y"]
    l1, l1x = _lam(state, mult, "lambda1"), _lam(state, mult, "lambda1", "x")
    l2, l2y = _lam(state, mult, "lambda2"), _lam(state, mult, "lambda2", "y")
    fu, fv = model3_inplane_forces(state, model, first_form)
    w_m = l1x * wx + l1 * state["w_xx"] + l2y * wy + l2 * state["w_yy"]
    out = {"u": state["u_tt"] + l1x + fu, "v": state["v_tt"] + l2y + fv,
           "w": state["w_tt"] + w_m + model3_w_operator(state, model),
           "constraint_span": state["u_x"] + 0.5 * wx ** 2,
           "constraint_chord": state["v_y"] + 0.5 * wy ** 2}
    return _apply_forcing(out, forcing)


def interior_residual(state: FieldState, multipliers: MultiplierField | None, model: ModelSpec,
                      form: str = "expanded", forcing: dict | None = None) -> ResidualReport:
    """Pointwise residuals of every equation of the model.

    ``form``: 'expanded' (default) or 'variational'. For the quartic beam the
    variational form uses d/dx(lambda (w_x + w_x^3/2)) for the multiplier
    term; for Models I and II it swaps the expanded stiffness for the
    variational energy gradient; for Model III 'first' uses the coefficient D
    (instead of 2D) on the u-equation moment term.
    ``forcing`` maps equation names to body forces subtracted from the residual.
    """
    if model.is_beam:
        out = _beam_interior(state, multipliers, model, form, forcing)
    elif model.variant is Variant.PLATE_III:
        out = _model3_interior(state, multipliers, model, form == "first", forcing)
    else:
        out = _plate_interior(state, multipliers, model, form, forcing)
    return ResidualReport(interior=out, norms=_norms(state, out))


# -- boundary conditions -------------------------------------------------------------

def _edge_index(state: FieldState, model: ModelSpec) -> dict:
    tol = 1e-12
    if model.is_beam:
        L = model.params.length
        found = {}
        if abs(state.x[-1] - L) <= tol * L:
            found["E"] = (slice(-1, None),)
        if abs(state.x[0]) <= tol:
            found["W"] = (slice(0, 1),)
        return found
    p = model.params
    found = {}
    if abs(state.x[-1] - p.lx) <= tol * p.lx:
        found["E"] = (-1, slice(None))
    if abs(state.x[0]) <= tol:
        found["W"] = (0, slice(None))
    if abs(state.y[-1] - p.ly) <= tol * p.ly:
        found["N"] = (slice(None), -1)
    if abs(state.y[0]) <= tol:
        found["S"] = (slice(None), 0)
    return found


def _beam_bc(g, order):
    wx, wxx, wxxx = g("w_x"), g("w_xx"), g("w_xxx")
    if order == "eta2":
        return {"second": (1.0 + wx ** 2) * wxx, "third": (1.0 + wx ** 2) * wxxx + wx * wxx ** 2,
                "linear_second": wxx, "linear_third": wxxx}
    c = 1.0 + wx ** 2 + wx ** 4
    return {"second": c * wxx, "third": c * wxxx + wxx ** 2 * (wx + 2.0 * wx ** 3),
            "linear_second": wxx, "linear_third": wxxx}


def _plate_bc_east(g, nu):
    wx, wy, wxy, wyy = g("w_x"), g("w_y"), g("w_xy"), g("w_yy")
    S = 1.0 + wx ** 2 + wy ** 2
    lin3 = g("w_xxx") + (2.0 - nu) * g("w_xyy")
    return {"second": g("w_xx") + nu * wyy,
            "third": (1.0 - nu) * ((1.0 + nu) * wx * wyy ** 2 - 2.0 * wx * wxy ** 2 - 4.0 * wy * wyy * wxy)
            - S * lin3,
            "linear_second": g("w_xx") + nu * wyy,
            # sign matched to the linear part of the nonlinear third-order condition
            "linear_third": -lin3}


def _plate_bc_side(g, nu):
    wx, wy, wxy, wxx = g("w_x"), g("w_y"), g("w_xy"), g("w_xx")
    S = 1.0 + wx ** 2 + wy ** 2
    lin3 = g("w_yyy") + (2.0 - nu) * g("w_xxy")
    return {"second": g("w_yy") + nu * wxx,
            "third": (1.0 - nu) * ((1.0 + nu) * wy * wxx ** 2 - 2.0 * wy * wxy ** 2 - 4.0 * wx * wxx * wxy)
            - S * lin3,
            "linear_second": nu * wxx + g("w_yy"),
            "linear_third": -lin3}


def _model3_bc_east(g, nu, h):
    wx, wy, wxx, wxy, wyy = g("w_x"), g("w_y"), g("w_xx"), g("w_xy"), g("w_yy")
    S = 1.0 + wx ** 2 + wy ** 2
    shear = g("v_x") + wx * wy + g("u_y")
    c = h ** 2 / 6.0
    third_b = (c * (-wx * wxx ** 2 - wx * wyy ** 2 - wyy * g("u_yy") - (2.0 - nu) * wx * wxy ** 2
                    - g("w_xxx") * (1.0 + wx ** 2 - wy ** 2) + 2.0 * wy * wxx * wxy
                    + wxy * g("v_xx") + wy * g("v_xxx") - nu * g("w_xyy") - nu * wx ** 2 * g("w_xyy")
                    - 2.0 * (1.0 - nu) * (g("w_xyy") * S + 2.0 * wy * wxy * wyy))
               + (1.0 - nu) * (wx * wy ** 2 + g("u_y") * wy + g("v_x") * wy))
    return {"second": wxx + nu * wyy,
            "second_nonlinear": wxx * (1.0 + wx ** 2 - wy ** 2) - wy * g("v_xx") + nu * wyy - nu * wx * g("u_yy"),
            "third_a": c * wy * (g("w_xxx") + nu * g("w_xyy")) + (1.0 - nu) * shear,
            "third_b": third_b}


def _model3_bc_side(g, nu, h):
    wx, wy, wxx, wxy, wyy = g("w_x"), g("w_y"), g("w_xx"), g("w_xy"), g("w_yy")
    S = 1.0 + wx ** 2 + wy ** 2
    shear = g("u_y") + wx * wy + g("v_x")
    c = h ** 2 / 6.0
    third_b = (c * (-wy * wyy ** 2 - wy * wxx ** 2 - wxx * g("v_xx") - (2.0 - nu) * wy * wxy ** 2
                    - g("w_yyy") * (1.0 - wx ** 2 + wy ** 2) + 2.0 * wx * wyy * wxy
                    + wxy * g("u_yy") + wx * g("u_yyy") - nu * g("w_xxy") - nu * wy ** 2 * g("w_xyy")
                    - 2.0 * (1.0 - nu) * (g("w_xxy") * S + 2.0 * wx * wxy * wxx))
               + (1.0 - nu) * (wx ** 2 * wy + g("u_y") * wx + g("v_x") * wx))
    return {"second": wyy + nu * wxx,
            "second_nonlinear": wyy * (1.0 - wx ** 2 + wy ** 2) - wx * g("u_yy") + nu * wxx - nu * wy * g("v_xx"),
            "third_a": c * wx * (g("w_yyy") + nu * g("w_xxy")) + (1.0 - nu) * shear,
            "third_b": third_b}


def boundary_residual(state: FieldState, model: ModelSpec) -> ResidualReport:
    """Residual traces of every boundary condition on the edges present in the sample grid.

    An edge is evaluated when the sample grid contains it (e.g. x[-1] == L_x for
    the east edge). Linear reference conditions are reported alongside as
    'linear_*' entries where the model has them.
    """
    edges = _edge_index(state, model)
    out = {}
    for edge, idx in edges.items():
        def g(key, idx=idx):
            return np.asarray(state[key][idx])
        if edge == "W":
            conds = {"w": g("w"), "w_x": g("w_x")}
            if model.variant is Variant.PLATE_III:
                for k in ("u", "v"):
                    if state.has(k):
                        conds[k] = g(k)
            out[edge] = conds
            continue
        if model.is_beam:
            out[edge] = _beam_bc(g, model.params.order)
            continue
        nu = model.params.poisson
        if model.variant is Variant.PLATE_III:
            h = model.params.thickness
            out[edge] = _model3_bc_east(g, nu, h) if edge == "E" else _model3_bc_side(g, nu, h)
        else:
            out[edge] = _plate_bc_east(g, nu) if edge == "E" else _plate_bc_side(g, nu)
    flat = {f"{e}.{c}": v for e, conds in out.items() for c, v in conds.items()}
    return ResidualReport(boundary=out, norms=_norms(state, flat))


# -- multiplier boundary values ---------------------------------------------------------

def _line_ops(state: FieldState):
    if state.quad is None:
        raise ValueError("multiplier boundary values need a quadrature-node state")
    return state.quad


def _at_x(grid, f, point):
    """Interpolate a field to the line x = point (returns a y-profile)."""
    return (grid.interp_matrix([point]) @ f)[0]


def _at_y(grid, f, point):
    return f @ grid.interp_matrix([point])[0]


def multiplier_boundary_values(state: FieldState, model: ModelSpec,
                               multipliers: MultiplierField | None = None) -> dict:
    """Edge traces of the multipliers from their integral formulas.

    Returns {edge: {name: trace}}. Homogeneous conditions are returned as
    residual entries ('<name>_residual') evaluated from the supplied
    multipliers or, for Model II and beams, from the closed-form multipliers.
    Model III traces include the membrane and moment terms of its in-plane
    equations, and the state must carry those derivatives.
    """
    gs = _line_ops(state)
    if model.is_beam:
        g = gs[0]
        u_tt = state["u_tt"]
        lam = along(g.T, u_tt, 0) if multipliers is None else multipliers["lambda"]
        lam_L = float(_at_x(g, lam, g.b)) if lam.ndim == 1 else None
        return {"W": {"lambda": float(g.weights @ u_tt)},
                "E": {"lambda": 0.0, "lambda_residual": lam_L}}
    gx, gy = gs
    Lx, Ly = gx.b, gy.b
    if model.variant is Variant.PLATE_III:
        fu, fv = model3_inplane_forces(state, model)
        a_u, a_v = state["u_tt"] + fu, state["v_tt"] + fv
    else:
        a_u, a_v = state["u_tt"], state["v_tt"]
    out = {e: {} for e in EDGES}

    def tail_x(f):
        return along(gx.T, f, 0)

    def tail_y(f):
        return along(gy.T, f, 1)

    if model.variant is Variant.PLATE_I:
        if multipliers is None:
            raise MissingMultiplier("Model I multiplier traces need lambda2 and lambda3")
        l2y = _lam(state, multipliers, "lambda2", "y")
        l3x = _lam(state, multipliers, "lambda3", "x")
        l3y = _lam(state, multipliers, "lambda3", "y")
        a_u1 = a_u + l3y
        a_v2 = a_v + l3x
        out["W"]["lambda1"] = gx.weights @ a_u1
        out["W"]["lambda2"] = _at_x(gx, tail_y(a_v2), 0.0)
        out["W"]["lambda3"] = gx.weights @ (a_v + l2y)
        out["S"]["lambda1"] = _at_y(gy, tail_x(a_u1), 0.0)
        out["N"]["lambda1"] = _at_y(gy, tail_x(a_u1), Ly)
        out["E"]["lambda2"] = _at_x(gx, tail_y(a_v2), Lx)
        homogeneous = {"E": ("lambda1", "lambda3"), "S": ("lambda2", "lambda3"), "N": ("lambda2", "lambda3")}
        fields = multipliers.values
    else:
        # root formula: an integral over y of the x = 0 trace (u_tt vanishes there for Model II)
        out["W"]["lambda1"] = np.full(gy.n, float(_at_x(gx, a_u, 0.0) @ gy.weights))
        if model.variant is Variant.PLATE_II:
            out["W"]["lambda1_consistent"] = gx.weights @ a_u
        out["S"]["lambda1"] = _at_y(gy, tail_x(a_u), 0.0)
        out["N"]["lambda1"] = _at_y(gy, tail_x(a_u), Ly)
        out["W"]["lambda2"] = _at_x(gx, tail_y(a_v), 0.0)
        out["E"]["lambda2"] = _at_x(gx, tail_y(a_v), Lx)
        homogeneous = {"E": ("lambda1",), "S": ("lambda2",), "N": ("lambda2",)}
        if multipliers is not None:
            fields = multipliers.values
        else:
            fields = {"lambda1": tail_x(a_u), "lambda2": -along(gy.C, a_v, 1)}
    where = {"E": lambda f: _at_x(gx, f, Lx), "S": lambda f: _at_y(gy, f, 0.0),
             "N": lambda f: _at_y(gy, f, Ly)}
    for edge, names in homogeneous.items():
        for name in names:
            if name in fields:
                out[edge][f"{name}_residual"] = where[edge](np.asarray(fields[name]))
    return out

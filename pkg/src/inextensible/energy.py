"""Kinetic and potential energies for the beam and plate models.

Each potential is a pointwise density of derivative channels (w_x, w_xx, u_yy,
...) integrated by the tensor Gauss rule. The same density code serves two
callers: FieldState evaluation and the modal gradient of a RitzSpace, whose
gradient is the chain rule through the channel matrices.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .core import FieldState, ModelSpec, SlopeTooLarge, Variant
from .kinematics import _full_plate_curvature

ENERGY_VARIANTS = ("beam-eta2", "beam-eta4", "beam-exact", "plate-slope-weighted", "plate-III", "plate-bulk")


@dataclass(frozen=True)
class EnergyReport:
    kinetic: float
    potential: float
    total: float = field(init=False)
    breakdown: dict = field(default_factory=dict)

    def __post_init__(self):
        if not (math.isfinite(self.kinetic) and math.isfinite(self.potential)):
            raise FloatingPointError("non-finite energy")
        object.__setattr__(self, "total", self.kinetic + self.potential)


def default_variant(model: ModelSpec) -> str:
    return {Variant.BEAM_ETA2: "beam-eta2", Variant.BEAM_ETA4: "beam-eta4",
            Variant.PLATE_I: "plate-slope-weighted", Variant.PLATE_II: "plate-slope-weighted",
            Variant.PLATE_III: "plate-III"}[model.variant]


# -- densities -----------------------------------------------------------------
# Each returns (terms, partials): terms maps breakdown labels to density arrays,
# partials maps channel names to d(density)/d(channel).

def _beam(f, p, order):
    D = p.stiffness
    wx, wxx = f["w_x"], f["w_xx"]
    wx2 = wx * wx
    if order == "eta2":
        coeff, dcoeff = 1.0 + wx2, 2.0 * wx
    elif order == "eta4":
        coeff, dcoeff = 1.0 + wx2 + wx2 * wx2, 2.0 * wx + 4.0 * wx * wx2
    else:
        coeff = 1.0 / (1.0 - wx2)
        dcoeff = 2.0 * wx * coeff * coeff
    terms = {"bending": 0.5 * D * wxx ** 2, "nonlinear": 0.5 * D * wxx ** 2 * (coeff - 1.0)}
    partials = {"w_xx": D * wxx * coeff, "w_x": 0.5 * D * wxx ** 2 * dcoeff}
    return terms, partials


def _bending_form(f, nu):
    wxx, wyy, wxy = f["w_xx"], f["w_yy"], f["w_xy"]
    return wxx ** 2 + wyy ** 2 + 2.0 * nu * wxx * wyy + 2.0 * (1.0 - nu) * wxy ** 2


def _slope_weighted(f, p):
    D, nu = p.stiffness, p.poisson
    wx, wy, wxx, wyy, wxy = f["w_x"], f["w_y"], f["w_xx"], f["w_yy"], f["w_xy"]
    B = _bending_form(f, nu)
    S = 1.0 + wx ** 2 + wy ** 2
    terms = {"bending": 0.5 * D * B, "nonlinear": 0.5 * D * (S - 1.0) * B}
    partials = {"w_x": D * wx * B, "w_y": D * wy * B,
                "w_xx": D * S * (wxx + nu * wyy), "w_yy": D * S * (wyy + nu * wxx),
                "w_xy": 2.0 * (1.0 - nu) * D * S * wxy}
    return terms, partials


def _model3(f, p):
    D, nu, h = p.stiffness, p.poisson, p.thickness
    wx, wy, wxx, wyy, wxy = f["w_x"], f["w_y"], f["w_xx"], f["w_yy"], f["w_xy"]
    uy, vx, uyy, vxx = f["u_y"], f["v_x"], f["u_yy"], f["v_xx"]
    c_bend = D * h / 2.0          # (6D/h)(h^2/12)
    c_memb = 3.0 * D * (1.0 - nu) / h  # (6D/h)(1 - nu)/2
    S = 1.0 + wx ** 2 + wy ** 2
    dsq = wx ** 2 - wy ** 2
    curv_sq = wxx ** 2 - wyy ** 2
    linear = wxx ** 2 + wyy ** 2 + 2.0 * nu * wxx * wyy + 2.0 * (1.0 - nu) * wxy ** 2
    rest = (2.0 * (1.0 - nu) * wxy ** 2 * (S - 1.0) + dsq * curv_sq
            - 2.0 * wy * wxx * vxx - 2.0 * wx * wyy * uyy
            - 2.0 * nu * (wy * wyy * vxx + wx * wxx * uyy))
    shear = uy + vx + wx * wy
    terms = {"bending": c_bend * linear, "nonlinear": c_bend * rest,
             "shear_membrane": c_memb * shear ** 2}
    partials = {
        "w_x": c_bend * (4.0 * (1.0 - nu) * wxy ** 2 * wx + 2.0 * wx * curv_sq
                         - 2.0 * wyy * uyy - 2.0 * nu * wxx * uyy) + c_memb * 2.0 * shear * wy,
        "w_y": c_bend * (4.0 * (1.0 - nu) * wxy ** 2 * wy - 2.0 * wy * curv_sq
                         - 2.0 * wxx * vxx - 2.0 * nu * wyy * vxx) + c_memb * 2.0 * shear * wx,
        "w_xx": c_bend * (2.0 * wxx + 2.0 * nu * wyy + 2.0 * dsq * wxx
                          - 2.0 * wy * vxx - 2.0 * nu * wx * uyy),
        "w_yy": c_bend * (2.0 * wyy + 2.0 * nu * wxx - 2.0 * dsq * wyy
                          - 2.0 * wx * uyy - 2.0 * nu * wy * vxx),
        "w_xy": c_bend * 4.0 * (1.0 - nu) * wxy * S,
        "u_yy": c_bend * (-2.0 * wx * wyy - 2.0 * nu * wx * wxx),
        "v_xx": c_bend * (-2.0 * wy * wxx - 2.0 * nu * wy * wyy),
        "u_y": c_memb * 2.0 * shear,
        "v_x": c_memb * 2.0 * shear,
    }
    return terms, partials


_BULK_CHANNELS = ("u_x", "u_y", "v_x", "v_y", "u_xx", "u_xy", "u_yy", "v_xx", "v_xy", "v_yy",
                  "w_x", "w_y", "w_xx", "w_xy", "w_yy")


def _bulk_terms(f, p):
    D, nu, h = p.stiffness, p.poisson, p.thickness
    k = _full_plate_curvature(f)
    k11, k22, k12 = k["k11"], k["k22"], k["k12"]
    ux, uy, vx, vy, wx, wy = (f[c] for c in ("u_x", "u_y", "v_x", "v_y", "w_x", "w_y"))
    e11 = ux + 0.5 * (ux ** 2 + vx ** 2 + wx ** 2)
    e22 = vy + 0.5 * (uy ** 2 + vy ** 2 + wy ** 2)
    e12 = uy + vx + ux * uy + vx * vy + wx * wy
    # thickness integral divided by h: D/2 on curvatures, 6D/h^2 on mid-plane strains
    curv = 0.5 * D * (k11 ** 2 + k22 ** 2 + 2.0 * nu * k11 * k22 + 0.5 * (1.0 - nu) * k12 ** 2)
    memb = 6.0 * D / h ** 2 * (e11 ** 2 + e22 ** 2 + 2.0 * nu * e11 * e22 + 0.5 * (1.0 - nu) * e12 ** 2)
    return {"curvature": curv, "membrane": memb}


def _bulk(f, p):
    terms = _bulk_terms(f, p)
    # the density is a polynomial in the channels, so complex-step partials are exact to rounding
    step = 1e-30
    base = {c: np.asarray(f[c], dtype=complex) for c in _BULK_CHANNELS}
    partials = {}
    for c in _BULK_CHANNELS:
        probe = dict(base)
        probe[c] = base[c] + 1j * step
        t = _bulk_terms(probe, p)
        partials[c] = np.imag(t["curvature"] + t["membrane"]) / step
    return terms, partials


DENSITY_CHANNELS = {
    "beam-eta2": ("w_x", "w_xx"),
    "beam-eta4": ("w_x", "w_xx"),
    "beam-exact": ("w_x", "w_xx"),
    "plate-slope-weighted": ("w_x", "w_y", "w_xx", "w_yy", "w_xy"),
    "plate-III": ("w_x", "w_y", "w_xx", "w_yy", "w_xy", "u_y", "v_x", "u_yy", "v_xx"),
    "plate-bulk": _BULK_CHANNELS,
}


def energy_density(variant: str, f, params) -> tuple:
    if variant == "beam-eta2":
        return _beam(f, params, "eta2")
    if variant == "beam-eta4":
        return _beam(f, params, "eta4")
    if variant == "beam-exact":
        wx = np.asarray(f["w_x"])
        if np.any(np.abs(wx) >= 1.0):
            raise SlopeTooLarge("exact beam energy needs |w_x| < 1")
        return _beam(f, params, "exact")
    if variant == "plate-slope-weighted":
        return _slope_weighted(f, params)
    if variant == "plate-III":
        return _model3(f, params)
    if variant == "plate-bulk":
        return _bulk(f, params)
    raise ValueError(f"unknown energy variant {variant!r}; choose from {ENERGY_VARIANTS}")


def _check_variant(variant: str, model: ModelSpec):
    if variant.startswith("beam") != model.is_beam:
        raise ValueError(f"energy variant {variant!r} does not apply to {model.variant.value}")


def _weights(state: FieldState) -> np.ndarray:
    if state.quad is None:
        raise ValueError("energy quadrature needs a state sampled at quadrature nodes")
    if state.ndim == 1:
        return state.quad[0].weights
    return np.outer(state.quad[0].weights, state.quad[1].weights)


# -- state-level API -------------------------------------------------------------

def kinetic_energy(state: FieldState, model: ModelSpec) -> float:
    """1/2 integral of w_t^2 + u_t^2 (+ v_t^2 for plates). All velocity fields are required."""
    names = ("w_t", "u_t") if model.is_beam else ("w_t", "u_t", "v_t")
    state.require(*names)
    W = _weights(state)
    return float(0.5 * sum(np.sum(W * state[n] ** 2) for n in names))


def potential_energy(state: FieldState, model: ModelSpec, variant: str | None = None,
                     kinetic: float = 0.0) -> EnergyReport:
    variant = variant or default_variant(model)
    _check_variant(variant, model)
    state.require(*DENSITY_CHANNELS[variant])
    W = _weights(state)
    terms, _ = energy_density(variant, state, model.params)
    breakdown = {k: float(np.sum(W * v)) for k, v in terms.items()}
    return EnergyReport(kinetic=float(kinetic), potential=float(sum(breakdown.values())),
                        breakdown=breakdown)


def energy_report(state: FieldState, model: ModelSpec, variant: str | None = None) -> EnergyReport:
    return potential_energy(state, model, variant, kinetic=kinetic_energy(state, model))


def energy_order_gap(state: FieldState, model: ModelSpec, variants: tuple) -> float:
    a, b = variants
    if a == b:
        return 0.0
    return abs(potential_energy(state, model, a).potential - potential_energy(state, model, b).potential)


# -- discrete API ------------------------------------------------------------------

def discrete_potential(space, q, variant: str | None = None, gradient: bool = True):
    """E_P(q) on a RitzSpace and, if requested, its gradient in q."""
    variant = variant or default_variant(space.model)
    _check_variant(variant, space.model)
    if not np.any(q):
        # the flat state is an exact equilibrium of every variant
        return 0.0 if not gradient else (0.0, np.zeros(space.n))
    chans = space.channels(DENSITY_CHANNELS[variant], q)
    terms, partials = energy_density(variant, chans, space.model.params)
    W = space.weights
    value = float(sum(np.dot(W, t) for t in terms.values()))
    if not gradient:
        return value
    return value, space.pullback({k: W * v for k, v in partials.items()})


def gradient_check(space, q, variant: str | None = None, step: float = 1e-6) -> float:
    """Relative 2-norm gap between the modal gradient and central finite differences.

    The step is scaled per coordinate by max(1, |q_k|).
    """
    q = np.asarray(q, dtype=float)
    _, grad = discrete_potential(space, q, variant)
    fd = np.empty_like(grad)
    for k in range(q.size):
        h = step * max(1.0, abs(q[k]))
        e = np.zeros_like(q)
        e[k] = h
        fd[k] = (discrete_potential(space, q + e, variant, gradient=False)
                 - discrete_potential(space, q - e, variant, gradient=False)) / (2.0 * h)
    scale = max(np.linalg.norm(grad), np.linalg.norm(fd))
    return float(np.linalg.norm(grad - fd) / scale) if scale > 0 else 0.0

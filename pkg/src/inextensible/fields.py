"""Builders for FieldState samples: from modal coefficients or from polynomials."""

from __future__ import annotations

import numpy as np
from numpy.polynomial import polynomial as P

from .core import FieldState, dkey

# derivative orders stored for w (space); time levels are 0, 1, 2
_SPACE_ORDER = 4


def _space_orders(ndim: int, max_order: int):
    if ndim == 1:
        return [(i, 0) for i in range(max_order + 1)]
    return [(i, j) for i in range(max_order + 1) for j in range(max_order + 1 - i)]


def modal_state(basis, q, qdot=None, qddot=None, max_order: int = _SPACE_ORDER) -> FieldState:
    """Sample w = sum q_k phi_k and its derivatives at the basis quadrature nodes.

    Velocity and acceleration coefficients add the w_t- and w_tt-families.
    """
    data = {}
    for level, coeffs in enumerate((q, qdot, qddot)):
        if coeffs is None:
            continue
        coeffs = np.asarray(coeffs, dtype=float)
        orders = _space_orders(basis.ndim, max_order if level == 0 else max(max_order - 1, 1))
        for nx, ny in orders:
            data[dkey("w", nx, ny, level)] = basis.field(coeffs, nx, ny)
    grids = basis.grids
    y = grids[1].nodes if basis.ndim == 2 else None
    return FieldState(grids[0].nodes, y, data, quad=tuple(grids))


def polynomial_samples(coeffs, x, y=None, name: str = "w", nt: int = 0,
                       max_order: int = _SPACE_ORDER) -> dict:
    """Derivative samples of a power-series polynomial on the tensor grid (x, y).

    ``coeffs`` is 1D for a beam field or 2D (x-degree, y-degree) for a plate
    field; the returned keys carry ``nt`` time marks.
    """
    c = np.asarray(coeffs, dtype=float)
    out = {}
    if y is None:
        for nx in range(max_order + 1):
            out[dkey(name, nx, 0, nt)] = P.polyval(x, P.polyder(c, nx))
        return out
    for nx, ny in _space_orders(2, max_order):
        cd = c
        if nx:
            cd = P.polyder(cd, nx, axis=0)
        if ny:
            cd = P.polyder(cd, ny, axis=1)
        out[dkey(name, nx, ny, nt)] = P.polygrid2d(x, y, cd)
    return out


def polynomial_state(x, y, fields: dict, quad=None, max_order: int = _SPACE_ORDER) -> FieldState:
    """Build a FieldState from polynomial coefficient arrays.

    ``fields`` maps a base key such as 'w', 'w_t', 'w_tt', 'u', 'u_tt' to coefficients.
    """
    data = {}
    for key, coeffs in fields.items():
        name, _, marks = key.partition("_")
        nt = marks.count("t")
        data.update(polynomial_samples(coeffs, x, y, name, nt, max_order))
    return FieldState(x, y, data, quad=quad)


def random_clamped_coeffs(rng: np.random.Generator, degree: int, ndim: int = 1,
                          scale: float = 1.0, clamped: bool = True) -> np.ndarray:
    """Random polynomial coefficients; clamped fields carry an x^2 factor (w = w_x = 0 at x = 0)."""
    if ndim == 1:
        c = rng.uniform(-1.0, 1.0, degree + 1) * scale
        if clamped:
            c = np.concatenate([[0.0, 0.0], c])
        return c
    c = rng.uniform(-1.0, 1.0, (degree + 1, degree + 1)) * scale
    if clamped:
        c = np.vstack([np.zeros((2, degree + 1)), c])
    return c


def modal_state_at(basis, q, x=None, y=None, qdot=None, qddot=None,
                   max_order: int = _SPACE_ORDER) -> FieldState:
    """Like modal_state but sampled on an arbitrary tensor grid (e.g. including the edges).

    The result carries no quadrature grids, so nonlocal operators do not apply to it.
    """
    xs = basis.x.grid.nodes if x is None else np.atleast_1d(np.asarray(x, dtype=float))
    ys = None
    if basis.ndim == 2:
        ys = basis.y.grid.nodes if y is None else np.atleast_1d(np.asarray(y, dtype=float))
    data = {}
    for level, coeffs in enumerate((q, qdot, qddot)):
        if coeffs is None:
            continue
        coeffs = np.asarray(coeffs, dtype=float)
        orders = _space_orders(basis.ndim, max_order if level == 0 else max(max_order - 1, 1))
        for nx, ny in orders:
            data[dkey("w", nx, ny, level)] = basis.evaluate(coeffs, nx, ny, xs, ys)
    return FieldState(xs, ys, data)


def random_modal_coords(space, rng: np.random.Generator, amplitude: float,
                        max_slope: float | None = None) -> np.ndarray:
    """Random coordinates with decaying modal content, scaled so that max |w| = amplitude.

    With ``max_slope`` the state is shrunk further when needed so that
    max |w_x| stays below it (the exact beam energy needs |w_x| < 1).

    In-plane coordinates, when the space has them, get independent random
    values of size amplitude^2 (the order of constrained in-plane motion).
    """
    q = np.zeros(space.n)
    decay = 1.0 / (1.0 + np.arange(space.n_w)) ** 2
    qw = rng.normal(size=space.n_w) * decay
    peak = np.max(np.abs(space.w_matrix(0, 0) @ qw))
    qw = qw * (amplitude / peak if peak > 0 else 0.0)
    if max_slope is not None:
        slope = np.max(np.abs(space.w_matrix(1, 0) @ qw))
        if slope > max_slope:
            qw *= max_slope / slope
    q[: space.n_w] = qw
    if space.n_p:
        q[space.n_w:] = rng.normal(size=space.n_p) * amplitude ** 2
    return q

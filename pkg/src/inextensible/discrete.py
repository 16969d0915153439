"""Ritz space: linear maps from generalized coordinates to quadrature samples.

Coordinates are q = (q_w, p). q_w are modal amplitudes of w. In multiplier
mode p holds the in-plane unknowns as nodal samples of their constrained
derivatives:

* beam: s = u_x at the x-nodes, u = C s;
* plate: s_u = u_x and s_v = v_y at the tensor nodes plus a trace r = v_x(., 0)
  along x, with u = C_x s_u and v = C_x r + C_y s_v.

Every sampled channel (w_xx, u_y, v_xx, ...) is a dense matrix applied to q.
"""

from __future__ import annotations

import numpy as np

from .basis import make_basis
from .core import FieldState, dkey

_W_ORDER = 4


class RitzSpace:
    def __init__(self, model, basis=None, nx: int = 6, ny: int = 1, inplane: bool = True,
                 nqx: int | None = None, nqy: int | None = None):
        self.model = model
        self.basis = basis if basis is not None else make_basis(model, nx, ny, nqx, nqy)
        self.ndim = self.basis.ndim
        self.grids = self.basis.grids
        self.shape = self.basis.shape
        self.npts = int(np.prod(self.shape))
        self.weights = self.basis.weights.ravel()
        self.n_w = self.basis.n_coeffs
        self.inplane = inplane
        self._w = {}
        self._p = self._inplane_channels() if inplane else {}
        self.n_p = self._n_p if inplane else 0
        self.n = self.n_w + self.n_p

    # -- in-plane layout -------------------------------------------------
    def _inplane_channels(self) -> dict:
        gx = self.grids[0]
        Ix = np.eye(gx.n)
        if self.ndim == 1:
            self._n_p = gx.n
            self.slices = {"s_u": slice(0, gx.n)}
            return {"u": gx.C, "u_x": Ix, "u_xx": gx.D}
        gy = self.grids[1]
        nx, ny = gx.n, gy.n
        Iy = np.eye(ny)
        one = np.ones((ny, 1))
        npt = nx * ny
        self._n_p = 2 * npt + nx
        self.slices = {"s_u": slice(0, npt), "s_v": slice(npt, 2 * npt),
                       "r": slice(2 * npt, 2 * npt + nx)}
        zero_u = np.zeros((npt, npt))
        zero_r = np.zeros((npt, nx))

        def u_part(m):
            return np.hstack([m, zero_u, zero_r])

        def v_part(ms, mr):
            return np.hstack([zero_u, ms, mr])

        Dx, Dy, Cx, Cy = gx.D, gy.D, gx.C, gy.C
        return {
            "u": u_part(np.kron(Cx, Iy)),
            "u_x": u_part(np.eye(npt)),
            "u_y": u_part(np.kron(Cx, Dy)),
            "u_xx": u_part(np.kron(Dx, Iy)),
            "u_xy": u_part(np.kron(Ix, Dy)),
            "u_yy": u_part(np.kron(Cx, Dy @ Dy)),
            "v": v_part(np.kron(Ix, Cy), np.kron(Cx, one)),
            "v_x": v_part(np.kron(Dx, Cy), np.kron(Ix, one)),
            "v_y": v_part(np.eye(npt), zero_r),
            "v_xx": v_part(np.kron(Dx @ Dx, Cy), np.kron(Dx, one)),
            "v_xy": v_part(np.kron(Dx, Iy), zero_r),
            "v_yy": v_part(np.kron(Ix, Dy), zero_r),
        }

    # -- channel access ----------------------------------------------------
    def w_matrix(self, dx: int, dy: int = 0) -> np.ndarray:
        key = (dx, dy)
        if key not in self._w:
            self._w[key] = self.basis.matrix(dx, dy)
        return self._w[key]

    def split(self, q):
        q = np.asarray(q, dtype=float)
        return q[: self.n_w], q[self.n_w:]

    def channel(self, name: str, q) -> np.ndarray:
        qw, p = self.split(q)
        field, _, marks = name.partition("_")
        if field == "w":
            return self.w_matrix(marks.count("x"), marks.count("y")) @ qw
        return self._p[name] @ p

    def channels(self, names, q) -> dict:
        return {k: self.channel(k, q) for k in names}

    def pullback(self, grads: dict) -> np.ndarray:
        """Gradient in q of sum_k <grads[k], channel_k(q)> for already-weighted grads."""
        out = np.zeros(self.n)
        for name, g in grads.items():
            field, _, marks = name.partition("_")
            if field == "w":
                out[: self.n_w] += self.w_matrix(marks.count("x"), marks.count("y")).T @ g
            else:
                out[self.n_w:] += self._p[name].T @ g
        return out

    def p_matrix(self, name: str) -> np.ndarray:
        return self._p[name]

    # -- states --------------------------------------------------------------
    def field_state(self, q, qdot=None, qddot=None, max_order: int = _W_ORDER) -> FieldState:
        """Samples of w (all derivatives up to ``max_order``) and of the in-plane channels."""
        data = {}
        levels = [(0, q), (1, qdot), (2, qddot)]
        for level, vec in levels:
            if vec is None:
                continue
            qw, p = self.split(vec)
            top = max_order if level == 0 else max_order - 1
            orders = ([(i, 0) for i in range(top + 1)] if self.ndim == 1 else
                      [(i, j) for i in range(top + 1) for j in range(top + 1 - i)])
            for nx, ny in orders:
                data[dkey("w", nx, ny, level)] = (self.w_matrix(nx, ny) @ qw).reshape(self.shape)
            if self.inplane:
                for name, mat in self._p.items():
                    fld, _, marks = name.partition("_")
                    key = dkey(fld, marks.count("x"), marks.count("y"), level)
                    data[key] = (mat @ p).reshape(self.shape)
        y = self.grids[1].nodes if self.ndim == 2 else None
        return FieldState(self.grids[0].nodes, y, data, quad=tuple(self.grids))

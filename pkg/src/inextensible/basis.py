"""Cantilever and free-free mode bases, Gauss quadrature and nodal spectral operators."""

from __future__ import annotations

import functools
import math

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.optimize import brentq

CLAMPED_FREE = "clamped-free"
FREE_FREE = "free-free"


def quadrature_rule(n: int, interval=(0.0, 1.0)):
    """Gauss-Legendre nodes and weights on ``interval`` (exact to degree 2n-1)."""
    if n < 2:
        raise ValueError("quadrature needs n >= 2 points")
    a, b = map(float, interval)
    t, wt = leggauss(n)
    half = 0.5 * (b - a)
    return a + half * (t + 1.0), half * wt


def _barycentric_weights(t):
    diff = t[:, None] - t[None, :]
    np.fill_diagonal(diff, 1.0)
    w = 1.0 / np.prod(diff, axis=1)
    return w / np.max(np.abs(w))


class Grid1D:
    """Gauss nodes on [a, b] with interpolation, differentiation and integration operators.

    All operators act on nodal samples through the degree n-1 interpolant, so
    cumulative integrals are evaluated at the nodes without resampling.
    """

    def __init__(self, n: int, a: float, b: float):
        self.n, self.a, self.b = int(n), float(a), float(b)
        self.nodes, self.weights = quadrature_rule(self.n, (self.a, self.b))
        self._t = np.polynomial.legendre.leggauss(self.n)[0]
        self._bw = _barycentric_weights(self._t)
        for arr in (self.nodes, self.weights):
            arr.setflags(write=False)

    @property
    def length(self) -> float:
        return self.b - self.a

    def _to_ref(self, pts):
        return 2.0 * (np.asarray(pts, dtype=float) - self.a) / (self.b - self.a) - 1.0

    def interp_matrix(self, pts) -> np.ndarray:
        s = np.atleast_1d(self._to_ref(pts))
        diff = s[:, None] - self._t[None, :]
        exact = np.isclose(diff, 0.0, rtol=0.0, atol=1e-15)
        with np.errstate(divide="ignore", invalid="ignore"):
            terms = self._bw[None, :] / diff
            mat = terms / terms.sum(axis=1, keepdims=True)
        rows = np.any(exact, axis=1)
        if np.any(rows):
            mat[rows] = exact[rows].astype(float)
        return mat

    @functools.cached_property
    def D(self) -> np.ndarray:
        t, w = self._t, self._bw
        diff = t[:, None] - t[None, :]
        np.fill_diagonal(diff, 1.0)
        mat = (w[None, :] / w[:, None]) / diff
        np.fill_diagonal(mat, 0.0)
        np.fill_diagonal(mat, -mat.sum(axis=1))
        mat *= 2.0 / (self.b - self.a)
        mat.setflags(write=False)
        return mat

    def D_power(self, k: int) -> np.ndarray:
        return np.linalg.matrix_power(self.D, k) if k else np.eye(self.n)

    def _segment_rows(self, lo, hi):
        lo, hi = np.broadcast_arrays(np.atleast_1d(lo).astype(float), np.atleast_1d(hi).astype(float))
        rows = np.zeros((lo.size, self.n))
        t, wt = leggauss(self.n)
        for i, (p, q) in enumerate(zip(lo, hi)):
            if q == p:
                continue
            half = 0.5 * (q - p)
            rows[i] = (half * wt) @ self.interp_matrix(p + half * (t + 1.0))
        return rows

    def cumulative_rows(self, pts) -> np.ndarray:
        """Rows r with r @ f = integral of the interpolant of f from a to each point."""
        return self._segment_rows(self.a, pts)

    def tail_rows(self, pts) -> np.ndarray:
        """Rows r with r @ f = integral from each point to b; exactly zero at b."""
        return self._segment_rows(pts, self.b)

    @functools.cached_property
    def C(self) -> np.ndarray:
        mat = self.cumulative_rows(self.nodes)
        mat.setflags(write=False)
        return mat

    @functools.cached_property
    def T(self) -> np.ndarray:
        mat = self.tail_rows(self.nodes)
        mat.setflags(write=False)
        return mat

    def integrate(self, f, axis: int = 0):
        return np.tensordot(self.weights, f, axes=([0], [axis]))


@functools.lru_cache(maxsize=64)
def grid1d(n: int, a: float, b: float) -> Grid1D:
    return Grid1D(n, a, b)


def along(mat: np.ndarray, f: np.ndarray, axis: int) -> np.ndarray:
    """Apply a (m, n) operator along one axis of a 1D or 2D array."""
    if f.ndim == 1 or axis == 0:
        return mat @ f
    return f @ mat.T


def _char_clamped_free(b):
    return math.cos(b) + 1.0 / math.cosh(b)


def _char_free_free(b):
    return math.cos(b) - 1.0 / math.cosh(b)


@functools.lru_cache(maxsize=32)
def _roots(kind: str, n: int) -> tuple:
    out = []
    for k in range(1, n + 1):
        if kind == CLAMPED_FREE:
            lo, hi, fn = (k - 1) * math.pi, k * math.pi, _char_clamped_free
        else:
            lo, hi, fn = k * math.pi, (k + 1) * math.pi, _char_free_free
        out.append(brentq(fn, lo + 1e-12, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=200))
    return tuple(out)


def clamped_free_roots(n: int) -> np.ndarray:
    """First n positive roots of 1 + cos(b) cosh(b) = 0 (solved in the scaled form cos b + sech b)."""
    if n < 1:
        raise ValueError("n must be >= 1")
    return np.array(_roots(CLAMPED_FREE, int(n)))


def free_free_roots(n: int) -> np.ndarray:
    """First n positive roots of cos(b) cosh(b) = 1 (elastic free-free modes)."""
    if n < 1:
        raise ValueError("n must be >= 1")
    return np.array(_roots(FREE_FREE, int(n)))


def _elastic_mode(kind, root, length, d, x):
    # phi = H(z) -/+ T(z), H = cosh z - s sinh z, T = cos z - s sin z; H is
    # rewritten with decaying exponentials so large z neither overflows nor cancels.
    b = root
    z = b * np.asarray(x, dtype=float) / length
    eb, e2b = math.exp(-b), math.exp(-2.0 * b)
    if kind == CLAMPED_FREE:
        sigma = (math.cosh(b) + math.cos(b)) / (math.sinh(b) + math.sin(b))
        one_minus = 2.0 * (-eb + math.sin(b) - math.cos(b)) / (1.0 - e2b + 2.0 * eb * math.sin(b))
        trig_sign = -1.0
    else:
        sigma = (math.cosh(b) - math.cos(b)) / (math.sinh(b) - math.sin(b))
        one_minus = 2.0 * (-eb - math.sin(b) + math.cos(b)) / (1.0 - e2b - 2.0 * eb * math.sin(b))
        trig_sign = 1.0
    # (1 - sigma) e^z = one_minus * e^(z - b)
    hyper = 0.5 * (one_minus * np.exp(z - b) + (-1.0) ** d * (1.0 + sigma) * np.exp(-z))
    shift = 0.5 * math.pi * d
    trig = np.cos(z + shift) - sigma * np.sin(z + shift)
    return (b / length) ** d * (hyper + trig_sign * trig) / math.sqrt(length)


class ModeBasis:
    """L2-orthonormal 1D mode family with derivative samples at Gauss nodes.

    kind 'clamped-free': cantilever modes, phi(0) = phi'(0) = 0.
    kind 'free-free': the constant and linear functions followed by the
    elastic free-free modes.
    """

    def __init__(self, kind: str, length: float, n_modes: int, n_quad: int | None = None):
        if kind not in (CLAMPED_FREE, FREE_FREE):
            raise ValueError(f"unknown basis kind {kind!r}")
        if n_modes < 1:
            raise ValueError("n_modes must be >= 1")
        self.kind = kind
        self.length = float(length)
        self.n_modes = int(n_modes)
        self.n_quad = int(n_quad) if n_quad else max(4 * self.n_modes, 4)
        if kind == CLAMPED_FREE:
            self.roots = clamped_free_roots(self.n_modes)
        else:
            n_el = max(self.n_modes - 2, 0)
            elastic = free_free_roots(n_el) if n_el else np.zeros(0)
            self.roots = np.concatenate([np.zeros(min(self.n_modes, 2)), elastic])
        self.grid = grid1d(self.n_quad, 0.0, self.length)
        self.samples = np.stack([self.evaluate(d, self.grid.nodes) for d in range(5)])
        self.samples.setflags(write=False)

    @property
    def nodes(self):
        return self.grid.nodes

    @property
    def weights(self):
        return self.grid.weights

    def _one(self, k, d, x):
        if self.kind == CLAMPED_FREE:
            return _elastic_mode(CLAMPED_FREE, self.roots[k], self.length, d, x)
        x = np.asarray(x, dtype=float)
        L = self.length
        if k == 0:
            return np.full(x.shape, 1.0 / math.sqrt(L)) if d == 0 else np.zeros(x.shape)
        if k == 1:
            c = math.sqrt(12.0 / L ** 3)
            if d == 0:
                return c * (x - 0.5 * L)
            return np.full(x.shape, c) if d == 1 else np.zeros(x.shape)
        return _elastic_mode(FREE_FREE, self.roots[k], L, d, x)

    def evaluate(self, d: int, points) -> np.ndarray:
        """All modes' d-th derivatives at ``points``; shape (len(points), N)."""
        pts = np.atleast_1d(np.asarray(points, dtype=float))
        return np.stack([self._one(k, d, pts) for k in range(self.n_modes)], axis=-1)

    def gram(self) -> np.ndarray:
        phi = self.samples[0]
        return phi.T @ (self.weights[:, None] * phi)


def eval_basis(basis: ModeBasis, k: int, d: int, points) -> np.ndarray:
    if not 0 <= k < basis.n_modes:
        raise IndexError(f"mode index {k} outside 0..{basis.n_modes - 1}")
    if not 0 <= d <= 4:
        raise ValueError(f"derivative order {d} outside 0..4")
    pts = np.atleast_1d(np.asarray(points, dtype=float))
    tol = 1e-12 * basis.length
    if np.any(pts < -tol) or np.any(pts > basis.length + tol):
        raise ValueError("evaluation points must lie in [0, L]")
    return basis._one(k, d, pts)


class BeamBasis:
    """Modal discretization of a beam deflection w(x) = sum_k q_k phi_k(x)."""

    ndim = 1

    def __init__(self, length: float, n_modes: int, n_quad: int | None = None):
        self.x = ModeBasis(CLAMPED_FREE, length, n_modes, n_quad)
        self.grids = (self.x.grid,)
        self.shape = (self.x.grid.n,)
        self.n_coeffs = self.x.n_modes
        self.weights = np.array(self.x.grid.weights)
        self._mats = {}

    @property
    def lengths(self):
        return (self.x.length,)

    def matrix(self, dx: int, dy: int = 0) -> np.ndarray:
        """Nodal samples of the (dx)-th derivative of every basis function."""
        if dy:
            return np.zeros((self.shape[0], self.n_coeffs))
        return self.x.samples[dx]

    def field(self, q, dx: int = 0, dy: int = 0) -> np.ndarray:
        return self.matrix(dx, dy) @ q

    def pullback(self, F, dx: int = 0, dy: int = 0) -> np.ndarray:
        return self.matrix(dx, dy).T @ F.ravel()

    def evaluate(self, q, dx, dy=0, x=None, y=None) -> np.ndarray:
        pts = self.x.grid.nodes if x is None else x
        if dy:
            return np.zeros(np.atleast_1d(pts).shape)
        return self.x.evaluate(dx, pts) @ q

    def mass(self) -> np.ndarray:
        return self.x.gram()


class PlateBasis:
    """Tensor basis: clamped-free modes in x times free-free functions in y.

    Coefficients are stored as a flat vector of length Nx*Ny in row-major
    (x-mode major) order.
    """

    ndim = 2

    def __init__(self, lx: float, ly: float, nx: int, ny: int,
                 nqx: int | None = None, nqy: int | None = None):
        self.x = ModeBasis(CLAMPED_FREE, lx, nx, nqx)
        self.y = ModeBasis(FREE_FREE, ly, ny, nqy)
        self.grids = (self.x.grid, self.y.grid)
        self.shape = (self.x.grid.n, self.y.grid.n)
        self.n_coeffs = nx * ny
        self.weights = np.outer(self.x.grid.weights, self.y.grid.weights)
        self._mats = {}

    @property
    def lengths(self):
        return (self.x.length, self.y.length)

    def matrix(self, dx: int, dy: int = 0) -> np.ndarray:
        key = (dx, dy)
        if key not in self._mats:
            self._mats[key] = np.kron(self.x.samples[dx], self.y.samples[dy])
        return self._mats[key]

    def coeff_grid(self, q) -> np.ndarray:
        return np.asarray(q).reshape(self.x.n_modes, self.y.n_modes)

    def field(self, q, dx: int = 0, dy: int = 0) -> np.ndarray:
        Q = self.coeff_grid(q)
        return self.x.samples[dx] @ Q @ self.y.samples[dy].T

    def pullback(self, F, dx: int = 0, dy: int = 0) -> np.ndarray:
        return (self.x.samples[dx].T @ F @ self.y.samples[dy]).ravel()

    def evaluate(self, q, dx, dy=0, x=None, y=None) -> np.ndarray:
        xs = self.x.grid.nodes if x is None else np.atleast_1d(x)
        ys = self.y.grid.nodes if y is None else np.atleast_1d(y)
        Q = self.coeff_grid(q)
        return self.x.evaluate(dx, xs) @ Q @ self.y.evaluate(dy, ys).T

    def mass(self) -> np.ndarray:
        return np.kron(self.x.gram(), self.y.gram())


def make_basis(model, nx: int, ny: int = 1, nqx: int | None = None, nqy: int | None = None):
    if model.is_beam:
        return BeamBasis(model.params.length, nx, nqx)
    p = model.params
    return PlateBasis(p.lx, p.ly, nx, ny, nqx, nqy)

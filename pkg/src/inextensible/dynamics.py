"""Semi-discrete constrained equations of motion and time integration.

Two constraint modes:

* multiplier: coordinates (q_w, p) from a RitzSpace; the weak constraints
  g(q) = 0 are kept and accelerations come from the saddle-point system
  [M, -G^T; G, 0] [a; mu] = [f - grad V; -gamma].
* reduced: coordinates q_w only; in-plane samples are explicit functions of w
  (u = C h(w_x), ...), so the mass matrix depends on q and the in-plane
  inertia enters through J^T W (J qdd + kappa).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla

from .core import (ModelSpec, NewtonDivergence, ProjectionFailure, UnsupportedMode, Variant)
from .discrete import RitzSpace
from .energy import discrete_potential
from .core import MultiplierField
from .fields import modal_state
from .kinematics import (ConstraintFlavor, beam_recover_lambda, beam_slope_map, plate_lambda_closed,
                         plate_recover_inplane, plate_vtt_closure, with_beam_inplane)

MULTIPLIER = "multiplier"
REDUCED = "reduced"
MIDPOINT = "implicit-midpoint-projected"
RK4 = "explicit-rk4-reduced"
SCHEMES = (MIDPOINT, RK4)


def _flavor(model: ModelSpec) -> ConstraintFlavor:
    if model.variant is Variant.BEAM_ETA4:
        return ConstraintFlavor.ETA4_BEAM
    return ConstraintFlavor.ETA2_BEAM


def check_mode(model: ModelSpec, mode: str, scheme: str | None = None, statics: bool = False) -> None:
    """Raise UnsupportedMode for combinations the equations do not support."""
    if mode not in (MULTIPLIER, REDUCED):
        raise UnsupportedMode(f"unknown constraint mode {mode!r}")
    if model.variant is Variant.PLATE_III and statics and mode == MULTIPLIER:
        return
    if model.variant is Variant.PLATE_III:
        raise UnsupportedMode("plate-III has no time integration; use residuals or statics")
    if model.variant is Variant.PLATE_I and mode == REDUCED:
        raise UnsupportedMode("plate-I keeps the shear multiplier; only multiplier mode is available")
    if scheme is not None:
        if scheme not in SCHEMES:
            raise UnsupportedMode(f"unknown scheme {scheme!r}")
        if scheme == RK4 and mode != REDUCED:
            raise UnsupportedMode("explicit-rk4-reduced needs the reduced constraint mode")


@dataclass
class ModalState:
    q: np.ndarray
    qdot: np.ndarray
    t: float = 0.0
    mu: np.ndarray | None = None


@dataclass
class Trajectory:
    times: list = field(default_factory=list)
    q: list = field(default_factory=list)
    qdot: list = field(default_factory=list)
    diagnostics: dict = field(default_factory=dict)
    failure: Exception | None = None

    def append(self, state: ModalState, diag: dict) -> None:
        if self.times and state.t <= self.times[-1]:
            raise ValueError("trajectory times must increase strictly")
        self.times.append(state.t)
        self.q.append(np.array(state.q))
        self.qdot.append(np.array(state.qdot))
        for k, v in diag.items():
            self.diagnostics.setdefault(k, []).append(v)

    def array(self, key: str) -> np.ndarray:
        if key == "t":
            return np.asarray(self.times)
        if key in ("q", "qdot"):
            return np.asarray(getattr(self, key))
        return np.asarray(self.diagnostics[key])

    def __len__(self):
        return len(self.times)


class SemiDiscreteSystem:
    """Discrete operators of one model on one RitzSpace in one constraint mode."""

    def __init__(self, model: ModelSpec, space: RitzSpace | None = None, mode: str = MULTIPLIER,
                 nx: int = 6, ny: int = 1, load=None, inplane_inertia: bool = True,
                 nqx: int | None = None, nqy: int | None = None, statics: bool = False):
        check_mode(model, mode, statics=statics)
        self.model = model
        self.mode = mode
        if space is None:
            space = RitzSpace(model, nx=nx, ny=ny, inplane=(mode == MULTIPLIER), nqx=nqx, nqy=nqy)
        if (mode == MULTIPLIER) != space.inplane:
            raise ValueError("multiplier mode needs a RitzSpace with in-plane coordinates and reduced mode one without")
        self.space = space
        self.basis = space.basis
        self.n = space.n
        self.n_w = space.n_w
        self.inplane_inertia = inplane_inertia
        self.W = space.weights
        self.flavor = _flavor(model)
        self.load = np.zeros(self.n) if load is None else np.asarray(load, dtype=float)
        if self.load.shape != (self.n,):
            padded = np.zeros(self.n)
            padded[: self.load.size] = self.load
            self.load = padded
        self.Mw = self.basis.mass()
        self._phi = {k: space.w_matrix(*k) for k in ((0, 0), (1, 0), (0, 1))
                     if space.ndim == 2 or k[1] == 0}
        if mode == MULTIPLIER:
            self._setup_multiplier()
        else:
            self._setup_reduced()
        # tip probe: x = L (beam) or (L_x, L_y / 2) (plate)
        if space.ndim == 1:
            self.tip_row = self.basis.x.evaluate(0, [self.basis.x.length])[0]
        else:
            px = self.basis.x.evaluate(0, [self.basis.x.length])[0]
            py = self.basis.y.evaluate(0, [0.5 * self.basis.y.length])[0]
            self.tip_row = np.kron(px, py)

    # -- multiplier mode ------------------------------------------------------------
    def _setup_multiplier(self):
        sp = self.space
        W = self.W
        names = ("u",) if sp.ndim == 1 else ("u", "v")
        Mp = sum(sp.p_matrix(k).T @ (W[:, None] * sp.p_matrix(k)) for k in names)
        if not self.inplane_inertia:
            Mp = np.zeros_like(Mp)
        self.M = sla.block_diag(self.Mw, Mp)
        self.shear = self.model.variant is Variant.PLATE_I
        if self.shear:
            gx, gy = sp.grids
            self.Ty = np.kron(np.eye(gx.n), np.ones((1, gy.n)))
            self.shear_p = sp.p_matrix("u_y") + sp.p_matrix("v_x")
        self.m = sp.npts if sp.ndim == 1 else 2 * sp.npts + (sp.grids[0].n if self.shear else 0)

    def _slope_channels(self):
        return [("s_u", (1, 0))] if self.space.ndim == 1 else [("s_u", (1, 0)), ("s_v", (0, 1))]

    def constraints(self, q) -> np.ndarray:
        if self.mode == REDUCED:
            return np.zeros(0)
        sp = self.space
        qw, p = sp.split(q)
        parts = []
        for name, d in self._slope_channels():
            slope = self._phi[d] @ qw
            parts.append(self.W * (p[sp.slices[name]] - beam_slope_map(slope, self.flavor)))
        if self.shear:
            wx, wy = self._phi[(1, 0)] @ qw, self._phi[(0, 1)] @ qw
            parts.append(self.Ty @ (self.W * (self.shear_p @ p + wx * wy)))
        return np.concatenate(parts)

    def constraint_jacobian(self, q) -> np.ndarray:
        sp = self.space
        qw, _ = sp.split(q)
        G = np.zeros((self.m, self.n))
        row = 0
        npt = sp.npts
        for name, d in self._slope_channels():
            slope = self._phi[d] @ qw
            G[row:row + npt, : self.n_w] = -(self.W * beam_slope_map(slope, self.flavor, 1))[:, None] * self._phi[d]
            sl = sp.slices[name]
            G[np.arange(row, row + npt), self.n_w + np.arange(sl.start, sl.stop)] = self.W
            row += npt
        if self.shear:
            wx, wy = self._phi[(1, 0)] @ qw, self._phi[(0, 1)] @ qw
            Gw = wy[:, None] * self._phi[(1, 0)] + wx[:, None] * self._phi[(0, 1)]
            G[row:, : self.n_w] = self.Ty @ (self.W[:, None] * Gw)
            G[row:, self.n_w:] = self.Ty @ (self.W[:, None] * self.shear_p)
        return G

    def _convective(self, q, qd) -> np.ndarray:
        qw, _ = self.space.split(q)
        vw = qd[: self.n_w]
        parts = []
        for _, d in self._slope_channels():
            slope, rate = self._phi[d] @ qw, self._phi[d] @ vw
            parts.append(-self.W * beam_slope_map(slope, self.flavor, 2) * rate ** 2)
        if self.shear:
            wxt, wyt = self._phi[(1, 0)] @ vw, self._phi[(0, 1)] @ vw
            parts.append(self.Ty @ (self.W * 2.0 * wxt * wyt))
        return np.concatenate(parts)

    def _kkt(self, G):
        m = G.shape[0]
        K = np.zeros((self.n + m, self.n + m))
        K[: self.n, : self.n] = self.M
        K[: self.n, self.n:] = -G.T
        K[self.n:, : self.n] = G
        return K

    # -- reduced mode -------------------------------------------------------------------
    def _setup_reduced(self):
        sp = self.space
        self.M = None
        gx = sp.grids[0]
        if sp.ndim == 1:
            self.components = [(gx.C, (1, 0))]
        else:
            gy = sp.grids[1]
            Z = np.eye(gy.n) - np.outer(np.ones(gy.n), gy.weights) / gy.length
            self.components = [(np.kron(gx.C, np.eye(gy.n)), (1, 0)),
                               (np.kron(np.eye(gx.n), Z @ gy.C), (0, 1))]

    def _reduced_parts(self, q, qd):
        """Per in-plane component: (J, kappa) with in-plane velocity J qd and acceleration J qdd + kappa."""
        out = []
        for A, d in self.components:
            slope = self._phi[d] @ q
            rate = self._phi[d] @ qd
            J = A @ (beam_slope_map(slope, self.flavor, 1)[:, None] * self._phi[d])
            kappa = A @ (beam_slope_map(slope, self.flavor, 2) * rate ** 2)
            out.append((J, kappa))
        return out

    def reduced_mass(self, q) -> np.ndarray:
        M = np.array(self.Mw)
        if self.inplane_inertia:
            for J, _ in self._reduced_parts(q, np.zeros_like(q)):
                M += J.T @ (self.W[:, None] * J)
        return M

    # -- shared API ------------------------------------------------------------------------
    def force(self, q) -> np.ndarray:
        """Generalized force -grad E_P(q) + load."""
        _, grad = discrete_potential(self.space, q)
        return self.load - grad

    def acceleration(self, q, qd):
        """Returns (qdd, mu); mu is None in reduced mode."""
        f = self.force(q)
        if self.mode == MULTIPLIER:
            G = self.constraint_jacobian(q)
            rhs = np.concatenate([f, -self._convective(q, qd)])
            sol = np.linalg.solve(self._kkt(G), rhs)
            return sol[: self.n], sol[self.n:]
        M = np.array(self.Mw)
        if self.inplane_inertia:
            for J, kappa in self._reduced_parts(q, qd):
                WJ = self.W[:, None] * J
                M += J.T @ WJ
                f = f - WJ.T @ kappa
        return np.linalg.solve(M, f), None

    def energies(self, q, qd) -> tuple:
        E_P = discrete_potential(self.space, q, gradient=False) - float(self.load @ q)
        if self.mode == MULTIPLIER:
            E_K = 0.5 * float(qd @ self.M @ qd)
        else:
            E_K = 0.5 * float(qd @ self.reduced_mass(q) @ qd)
        return E_K, E_P

    def inplane_acceleration(self, q, qd, qdd) -> dict:
        """Samples of u_tt (and v_tt) on the quadrature grid, shaped like the grid."""
        shape = self.space.shape
        if self.mode == MULTIPLIER:
            _, p = self.space.split(qdd)
            names = ("u",) if self.space.ndim == 1 else ("u", "v")
            return {f"{k}_tt": (self.space.p_matrix(k) @ p).reshape(shape) for k in names}
        out = {}
        for key, (J, kappa) in zip(("u_tt", "v_tt"), self._reduced_parts(q, qd)):
            out[key] = (J @ qdd + kappa).reshape(shape)
        return out

    def root_multiplier(self, q, qd, qdd) -> float:
        """lambda at the clamped root, i.e. the integral of u_tt (averaged over y for plates)."""
        u_tt = self.inplane_acceleration(q, qd, qdd)["u_tt"]
        if u_tt.ndim == 1:
            return float(self.space.grids[0].weights @ u_tt)
        gx, gy = self.space.grids
        return float(gx.weights @ u_tt @ gy.weights) / gy.length

    def tip(self, q) -> float:
        return float(self.tip_row @ q[: self.n_w])

    def lift(self, qw, qdw) -> tuple:
        """Full coordinates from w data: in-plane values follow from the constraints."""
        qw = np.asarray(qw, dtype=float)
        qdw = np.asarray(qdw, dtype=float)
        if self.mode == REDUCED:
            return qw.copy(), qdw.copy()
        sp = self.space
        q = np.concatenate([qw, np.zeros(sp.n_p)])
        for name, d in self._slope_channels():
            q[self.n_w + np.arange(sp.n_p)[sp.slices[name]]] = beam_slope_map(self._phi[d] @ qw, self.flavor)
        # remaining in-plane unknowns (shear trace) from the constraints, w held fixed
        for _ in range(10):
            g = self.constraints(q)
            if np.max(np.abs(g), initial=0.0) <= 1e-14:
                break
            Gp = self.constraint_jacobian(q)[:, self.n_w:]
            q[self.n_w:] -= np.linalg.lstsq(Gp, g, rcond=None)[0]
        G = self.constraint_jacobian(q)
        qd = np.concatenate([qdw, np.zeros(sp.n_p)])
        qd[self.n_w:] = np.linalg.lstsq(G[:, self.n_w:], -G[:, : self.n_w] @ qdw, rcond=None)[0]
        return q, qd

    def project(self, q, qd, tol: float = 1e-13, hard_tol: float = 1e-9, max_iter: int = 10,
                step_index=None):
        """M-orthogonal projection onto g(q) = 0, then onto G(q) qd = 0."""
        if self.mode == REDUCED:
            return q, qd
        q = np.array(q)
        g = self.constraints(q)
        it = 0
        while np.max(np.abs(g)) > tol and it < max_iter:
            G = self.constraint_jacobian(q)
            rhs = np.concatenate([np.zeros(self.n), -g])
            q += np.linalg.solve(self._kkt(G), rhs)[: self.n]
            g = self.constraints(q)
            it += 1
        if np.max(np.abs(g)) > hard_tol:
            raise ProjectionFailure(f"position projection stalled at |g| = {np.max(np.abs(g)):.3e}",
                                    step_index=step_index)
        G = self.constraint_jacobian(q)
        rhs = np.concatenate([np.zeros(self.n), -G @ qd])
        qd = qd + np.linalg.solve(self._kkt(G), rhs)[: self.n]
        return q, qd


def semidiscretize(model: ModelSpec, basis=None, mode: str = MULTIPLIER, nx: int = 6, ny: int = 1,
                   **kwargs) -> SemiDiscreteSystem:
    check_mode(model, mode)
    space = None
    if basis is not None:
        space = RitzSpace(model, basis=basis, inplane=(mode == MULTIPLIER))
    return SemiDiscreteSystem(model, space, mode, nx=nx, ny=ny, **kwargs)


# -- integrators ----------------------------------------------------------------------------

class _MidpointSolver:
    """Newton on the midpoint Y = y0 + dt/2 F(Y) with a reused LU of a finite-difference Jacobian."""

    def __init__(self, system: SemiDiscreteSystem, dt: float, tol: float = 1e-11, max_iter: int = 25):
        self.sys = system
        self.dt = dt
        self.tol = tol
        self.max_iter = max_iter
        self.lu = None
        self.n = system.n

    def rhs(self, y):
        q, qd = y[: self.n], y[self.n:]
        qdd, _ = self.sys.acceleration(q, qd)
        return np.concatenate([qd, qdd])

    def _factor(self, y):
        n2 = y.size
        J = np.empty((n2, n2))
        for j in range(n2):
            h = 1e-7 * max(1.0, abs(y[j]))
            e = np.zeros(n2)
            e[j] = h
            J[:, j] = (self.rhs(y + e) - self.rhs(y - e)) / (2.0 * h)
        if not np.all(np.isfinite(J)):
            self.lu = None
            return False
        self.lu = sla.lu_factor(np.eye(n2) - 0.5 * self.dt * J)
        return True

    def _newton(self, y0, trace):
        if self.lu is None:
            trace.append(float("nan"))
            return None
        Y = y0 + 0.5 * self.dt * self.rhs(y0)
        scale = max(1.0, float(np.max(np.abs(y0))))
        for _ in range(self.max_iter):
            R = Y - y0 - 0.5 * self.dt * self.rhs(Y)
            res = float(np.max(np.abs(R)))
            trace.append(res)
            if not np.isfinite(res):
                return None
            if res <= self.tol * scale:
                return Y
            Y = Y - sla.lu_solve(self.lu, R)
        return None

    def solve(self, y0, step_index=None):
        """Midpoint value Y; one retry with a Jacobian refreshed at y0 before giving up."""
        trace = []
        if self.lu is None:
            self._factor(y0)
        Y = self._newton(y0, trace)
        if Y is None:
            self._factor(y0)
            Y = self._newton(y0, trace)
        if Y is None:
            raise NewtonDivergence(
                f"implicit midpoint Newton did not converge (last residual {trace[-1]:.3e})",
                trace=trace, step_index=step_index)
        return Y


def step(system: SemiDiscreteSystem, state: ModalState, dt: float, scheme: str = MIDPOINT,
         solver: _MidpointSolver | None = None, step_index=None) -> ModalState:
    if dt <= 0:
        raise ValueError("dt must be positive")
    check_mode(system.model, system.mode, scheme)
    n = system.n
    if scheme == RK4:
        def F(q, v):
            return v, system.acceleration(q, v)[0]
        q, v = state.q, state.qdot
        k1 = F(q, v)
        k2 = F(q + 0.5 * dt * k1[0], v + 0.5 * dt * k1[1])
        k3 = F(q + 0.5 * dt * k2[0], v + 0.5 * dt * k2[1])
        k4 = F(q + dt * k3[0], v + dt * k3[1])
        q1 = q + dt / 6.0 * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0])
        v1 = v + dt / 6.0 * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1])
        return ModalState(q1, v1, state.t + dt)
    solver = solver or _MidpointSolver(system, dt)
    y0 = np.concatenate([state.q, state.qdot])
    if not np.any(y0) and not np.any(system.load):
        return ModalState(state.q.copy(), state.qdot.copy(), state.t + dt, state.mu)
    Y = solver.solve(y0, step_index)
    y1 = 2.0 * Y - y0
    q1, v1 = system.project(y1[:n], y1[n:], step_index=step_index)
    return ModalState(q1, v1, state.t + dt)


def _diagnostics(system: SemiDiscreteSystem, state: ModalState) -> dict:
    qdd, mu = system.acceleration(state.q, state.qdot)
    state.mu = mu
    E_K, E_P = system.energies(state.q, state.qdot)
    g = system.constraints(state.q)
    diag = {"kinetic": E_K, "potential": E_P, "total": E_K + E_P, "tip": system.tip(state.q),
            "lambda_root": system.root_multiplier(state.q, state.qdot, qdd)}
    if system.mode == MULTIPLIER:
        G = system.constraint_jacobian(state.q)
        diag["constraint_inf"] = float(np.max(np.abs(g)))
        diag["velocity_constraint_inf"] = float(np.max(np.abs(G @ state.qdot)))
    else:
        diag["constraint_inf"] = 0.0
        diag["velocity_constraint_inf"] = 0.0
    return diag


def simulate(system: SemiDiscreteSystem, w0, w1, dt: float, t_end: float, scheme: str = MIDPOINT,
             raise_on_failure: bool = True, callback=None, newton_tol: float = 1e-11) -> Trajectory:
    """Integrate from modal w data (w0, w1); in-plane initial data come from the constraints.

    On a solver failure the partial trajectory is attached to the exception as
    ``trajectory`` (or returned with ``failure`` set when raise_on_failure is False).
    """
    check_mode(system.model, system.mode, scheme)
    if dt <= 0 or t_end <= 0:
        raise ValueError("dt and t_end must be positive")
    w0, w1 = (project_field(system, w) if callable(w) else w for w in (w0, w1))
    q0, v0 = system.lift(w0, w1)
    state = ModalState(q0, v0, 0.0)
    traj = Trajectory()
    traj.append(state, _diagnostics(system, state))
    n_steps = int(round(t_end / dt))
    solver = _MidpointSolver(system, dt, tol=newton_tol) if scheme == MIDPOINT else None
    for k in range(1, n_steps + 1):
        try:
            state = step(system, state, dt, scheme, solver, step_index=k)
            state.t = k * dt
            traj.append(state, _diagnostics(system, state))
        except (NewtonDivergence, ProjectionFailure, np.linalg.LinAlgError) as exc:
            if not hasattr(exc, "step_index") or exc.step_index is None:
                exc.step_index = k
            traj.failure = exc
            if raise_on_failure:
                exc.trajectory = traj
                raise
            return traj
        if callback is not None:
            callback(k, state)
    return traj


def recover_fields(system: SemiDiscreteSystem, q, qd) -> tuple:
    """FieldState (w with time derivatives, in-plane fields) and multipliers at one instant.

    In-plane fields and multipliers come from the recovery formulas applied to
    the transverse motion, so they are comparable across constraint modes.
    """
    qdd, _ = system.acceleration(q, qd)
    n_w = system.n_w
    state = modal_state(system.basis, q[:n_w], qd[:n_w], qdd[:n_w])
    if system.space.ndim == 1:
        state = with_beam_inplane(state, system.flavor)
        return state, MultiplierField.beam(beam_recover_lambda(state))
    state = plate_recover_inplane(state)
    u_tt, v_tt = plate_vtt_closure(state)
    state = state.with_fields(u_tt=u_tt, v_tt=v_tt)
    lam1, lam2 = plate_lambda_closed(state, u_tt, v_tt)
    return state, MultiplierField.plate(lam1, lam2)


# -- initial data and frequency measurement ---------------------------------------------------

def first_mode_ic(system: SemiDiscreteSystem, amplitude: float, mode: int = 0) -> tuple:
    """Modal w data with tip deflection ``amplitude`` in one clamped-free x-mode (uniform in y)."""
    basis = system.basis
    qw = np.zeros(system.n_w)
    tip = basis.x.evaluate(0, [basis.x.length])[0, mode]
    if system.space.ndim == 1:
        qw[mode] = amplitude / tip
    else:
        # y-function 0 is the constant 1/sqrt(L_y)
        qw[mode * basis.y.n_modes] = amplitude * np.sqrt(basis.y.length) / tip
    return qw, np.zeros(system.n_w)


def project_field(system: SemiDiscreteSystem, func) -> np.ndarray:
    """L2 projection of a callable w(x) or w(x, y) onto the transverse basis."""
    grids = system.space.grids
    if system.space.ndim == 1:
        samples = func(grids[0].nodes)
    else:
        X, Y = np.meshgrid(grids[0].nodes, grids[1].nodes, indexing="ij")
        samples = func(X, Y)
    Phi = system.space.w_matrix(0, 0)
    rhs = Phi.T @ (system.W * np.ravel(samples))
    return np.linalg.solve(system.Mw, rhs)


def measure_period(times, signal) -> float:
    """Mean spacing of upward zero crossings, located by linear interpolation."""
    t = np.asarray(times, dtype=float)
    s = np.asarray(signal, dtype=float)
    idx = np.nonzero((s[:-1] < 0.0) & (s[1:] >= 0.0))[0]
    if idx.size < 2:
        raise ValueError("need at least two upward zero crossings to measure a period")
    frac = -s[idx] / (s[idx + 1] - s[idx])
    crossings = t[idx] + frac * (t[idx + 1] - t[idx])
    return float(np.mean(np.diff(crossings)))

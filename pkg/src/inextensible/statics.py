"""Static equilibria under transverse loads and linear modes about the flat state."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla

from .core import ContinuationStall, ModelSpec, NewtonDivergence
from .dynamics import MULTIPLIER, SemiDiscreteSystem
from .energy import EnergyReport, discrete_potential

LOAD_KINDS = ("tip", "edge", "pressure")


@dataclass(frozen=True)
class LoadSpec:
    """Transverse load. tip: point force at x = L (beams); edge: line load on x = L_x (plates);
    pressure: uniform load per unit length or area."""

    kind: str = "tip"
    magnitude: float = 0.0

    def __post_init__(self):
        if self.kind not in LOAD_KINDS:
            raise ValueError(f"load kind must be one of {LOAD_KINDS}, got {self.kind!r}")
        if not math.isfinite(float(self.magnitude)):
            raise ValueError("load magnitude must be finite")
        object.__setattr__(self, "magnitude", float(self.magnitude))

    def scaled(self, factor: float) -> "LoadSpec":
        return LoadSpec(self.kind, self.magnitude * factor)


def load_vector(system: SemiDiscreteSystem, load: LoadSpec) -> np.ndarray:
    """Generalized force: the work of the load is f . q."""
    basis = system.basis
    f = np.zeros(system.n)
    if load.kind == "pressure":
        f[: system.n_w] = system.space.w_matrix(0, 0).T @ system.W * load.magnitude
        return f
    if system.space.ndim == 1:
        if load.kind != "tip":
            raise ValueError("beams take tip or pressure loads")
        f[: system.n_w] = load.magnitude * basis.x.evaluate(0, [basis.x.length])[0]
        return f
    if load.kind != "edge":
        raise ValueError("plates take edge or pressure loads")
    gy = basis.y.grid
    tip = basis.x.evaluate(0, [basis.x.length])[0]
    f[: system.n_w] = load.magnitude * np.kron(tip, gy.weights @ basis.y.samples[0])
    return f


@dataclass
class EquilibriumReport:
    q: np.ndarray
    multipliers: np.ndarray
    optimality: float
    constraint_inf: float
    energy: EnergyReport
    tip: float
    corner: float | None
    load: LoadSpec
    load_level: float = 1.0
    iterations: int = 0
    min_reduced_eig: float = float("nan")
    work: float = 0.0

    @property
    def total_potential(self) -> float:
        """E_P minus the work of the load."""
        return self.energy.potential - self.work


@dataclass
class ModalReport:
    frequencies: np.ndarray
    shapes: np.ndarray
    basis: object = field(repr=False, default=None)


class _Kkt:
    def __init__(self, system: SemiDiscreteSystem, f: np.ndarray):
        self.sys = system
        self.f = f
        self.n = system.n

    def grad_lagrangian(self, q, mu):
        _, grad = discrete_potential(self.sys.space, q)
        return grad - self.f - self.sys.constraint_jacobian(q).T @ mu

    def hessian(self, q, mu):
        n = self.n
        H = np.empty((n, n))
        for j in range(n):
            h = 1e-7 * max(1.0, abs(q[j]))
            e = np.zeros(n)
            e[j] = h
            H[:, j] = (self.grad_lagrangian(q + e, mu) - self.grad_lagrangian(q - e, mu)) / (2.0 * h)
        return 0.5 * (H + H.T)

    def optimality(self, q, mu):
        scale = max(1.0, float(np.max(np.abs(self.f))))
        r = float(np.max(np.abs(self.grad_lagrangian(q, mu)))) / scale
        g = float(np.max(np.abs(self.sys.constraints(q))))
        return max(r, g), g

    def newton(self, q, mu, tol, max_iter):
        trace = []
        for it in range(max_iter + 1):
            opt, _ = self.optimality(q, mu)
            trace.append(opt)
            if not math.isfinite(opt):
                break
            if opt <= tol:
                return q, mu, it
            if it == max_iter:
                break
            G = self.sys.constraint_jacobian(q)
            m = G.shape[0]
            K = np.zeros((self.n + m, self.n + m))
            K[: self.n, : self.n] = self.hessian(q, mu)
            K[: self.n, self.n:] = -G.T
            K[self.n:, : self.n] = G
            rhs = -np.concatenate([self.grad_lagrangian(q, mu), self.sys.constraints(q)])
            # min-norm step: directions absent from energy and constraints (free trace DOFs) stay put
            d = np.linalg.lstsq(K, rhs, rcond=None)[0]
            q = q + d[: self.n]
            mu = mu + d[self.n:]
        raise NewtonDivergence(f"static Newton did not converge (optimality {trace[-1]:.3e})", trace=trace)


def _system(model: ModelSpec, nx: int, ny: int, nqx=None, nqy=None) -> SemiDiscreteSystem:
    return SemiDiscreteSystem(model, mode=MULTIPLIER, nx=nx, ny=ny, nqx=nqx, nqy=nqy, statics=True)


def _report(kkt: _Kkt, q, mu, load, level, iterations) -> EquilibriumReport:
    sys_ = kkt.sys
    opt, g = kkt.optimality(q, mu)
    E_P = discrete_potential(sys_.space, q, gradient=False)
    G = sys_.constraint_jacobian(q)
    Z = sla.null_space(G)
    min_eig = float("nan")
    if Z.size:
        min_eig = float(np.min(np.linalg.eigvalsh(Z.T @ kkt.hessian(q, mu) @ Z)))
    corner = None
    if sys_.space.ndim == 2:
        b = sys_.basis
        row = np.kron(b.x.evaluate(0, [b.x.length])[0], b.y.evaluate(0, [b.y.length])[0])
        corner = float(row @ q[: sys_.n_w])
    return EquilibriumReport(q=q, multipliers=mu, optimality=opt, constraint_inf=g,
                             energy=EnergyReport(0.0, E_P), tip=sys_.tip(q), corner=corner,
                             load=load, load_level=level, iterations=iterations,
                             min_reduced_eig=min_eig, work=float(kkt.f @ q))


def solve_static(model: ModelSpec, load: LoadSpec, nx: int = 6, ny: int = 1, tol: float = 1e-10,
                 max_iter: int = 25, system: SemiDiscreteSystem | None = None,
                 initial: tuple | None = None) -> EquilibriumReport:
    """KKT point of E_P - f.q subject to g(q) = 0 by full-space Newton.

    A cold Newton at the target load comes first; on failure the load is ramped
    from 10% of the target, halving the increment after each failure down to
    1e-4 of the target.
    """
    sys_ = system or _system(model, nx, ny)
    f_target = load_vector(sys_, load)
    zero_q = np.zeros(sys_.n)
    zero_mu = np.zeros(sys_.m)
    q0, mu0 = initial if initial is not None else (zero_q, zero_mu)
    if not np.any(f_target) and initial is None:
        kkt = _Kkt(sys_, f_target)
        return _report(kkt, zero_q, zero_mu, load, 1.0, 0)
    kkt = _Kkt(sys_, f_target)
    try:
        q, mu, it = kkt.newton(q0, mu0, tol, max_iter)
        return _report(kkt, q, mu, load, 1.0, it)
    except (NewtonDivergence, np.linalg.LinAlgError):
        pass
    level, inc = 0.0, 0.1
    q, mu = q0, mu0
    last = None
    total_it = 0
    while level < 1.0:
        trial = min(1.0, level + inc)
        kkt = _Kkt(sys_, trial * f_target)
        try:
            q_new, mu_new, it = kkt.newton(q, mu, tol, max_iter)
        except (NewtonDivergence, np.linalg.LinAlgError):
            inc *= 0.5
            if inc < 1e-4:
                raise ContinuationStall(f"load continuation stalled at level {level:.4g}",
                                        last_level=level, last_report=last) from None
            continue
        q, mu, level = q_new, mu_new, trial
        total_it += it
        last = _report(kkt, q, mu, load.scaled(level), level, total_it)
    return last


def continuation_path(model: ModelSpec, load: LoadSpec, levels, nx: int = 6, ny: int = 1,
                      tol: float = 1e-10) -> list:
    """Equilibria at increasing load fractions, each warm-started from the previous one."""
    sys_ = _system(model, nx, ny)
    out = []
    state = None
    for lv in levels:
        rep = solve_static(model, load.scaled(lv), tol=tol, system=sys_, initial=state)
        state = (rep.q, rep.multipliers)
        out.append(rep)
    return out


def linear_modes(model: ModelSpec, n: int, nx: int = 6, ny: int = 1) -> ModalReport:
    """Generalized eigenpairs of the transverse stiffness and mass at the flat state.

    In-plane coordinates drop out: at the flat state the linearized constraints
    fix them to zero and their inertia is of higher order.
    """
    sys_ = _system(model, nx, ny)
    n_w = sys_.n_w
    if not 1 <= n <= n_w:
        raise ValueError(f"n must lie in [1, {n_w}]")
    K = np.empty((n_w, n_w))
    q = np.zeros(sys_.n)
    for j in range(n_w):
        e = np.zeros(sys_.n)
        e[j] = 1e-6
        # the gradient is odd in q, so the central difference carries no truncation error at this order
        gp = discrete_potential(sys_.space, q + e)[1][:n_w]
        gm = discrete_potential(sys_.space, q - e)[1][:n_w]
        K[:, j] = (gp - gm) / 2e-6
    K = 0.5 * (K + K.T)
    vals, vecs = sla.eigh(K, sys_.Mw)
    order = np.argsort(vals)[:n]
    freqs = np.sqrt(np.clip(vals[order], 0.0, None))
    return ModalReport(frequencies=freqs, shapes=vecs[:, order].T, basis=sys_.basis)

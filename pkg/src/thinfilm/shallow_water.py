"""Curved-surface shallow-water system for (h, V1, V2).

Mass:      dh/dt = -(h/sqrt(A0)) div(sqrt(A0) V) - h (A1/A0) wn
Momentum:  dV_i/dt = -(V_l - C_l) d_l V_i - (R_ik + H_ilk V_l) V_k
                     - (1/rho0) ginv[i, m] d_m pi0
                     + nu { d_l d_m V_i J_lm + d_l V_k (L_kli + psi_ikl)
                            + V_k (S_ik + chi_ik) + kappa_hat_i }
                     + F_i - Q_i3 wn

(summation over l, m in {1, 2} and k in {1, 2}).  Integrated with classical
RK4; every stage recomputes the gap-dependent coefficients and re-imposes
Dirichlet data.
"""
from dataclasses import dataclass, field, replace

import numpy as np

from .coefficients import GapField, gap_coefficients, geometric_coefficients
from .errors import BlowUp, CflViolation, GapCollapse
from .geometry import sample_geometry


@dataclass(frozen=True)
class ShallowWaterState:
    t: float
    h: np.ndarray
    V1: np.ndarray
    V2: np.ndarray

    def arrays(self):
        return self.h, self.V1, self.V2


@dataclass
class ShallowWaterProblem:
    """Physical and numerical set-up.

    Callables take nodal coordinate arrays (X1, X2) and a time t:

    ``pi0(X1, X2, t) -> array``                 applied wall pressure
    ``f0(X1, X2, t) -> (f1, f2)``               tangential body force (local basis)
    ``boundary(X1, X2, t) -> (h, V1, V2)``      Dirichlet data (default: hold initial values)
    ``forcing(X1, X2, t) -> (Sh, S1, S2)``      extra source terms (manufactured solutions)
    """

    chart: object
    grid: object
    rho0: float = 1.0
    nu: float = 0.01
    CR: float = 0.0
    s0: int = 1
    pi0: object = None
    f0: object = None
    boundary: object = None
    forcing: object = None
    h0: float = 1e-8
    cfl: float = 0.4
    visc: float = 0.25
    _geo_cache: dict = field(default_factory=dict, repr=False)
    _initial_bc: tuple = field(default=None, repr=False)

    def __post_init__(self):
        if self.rho0 <= 0 or self.nu <= 0:
            raise ValueError("rho0 and nu must be positive")
        if self.CR < 0:
            raise ValueError("friction coefficient must be non-negative")
        if self.s0 not in (-1, 1):
            raise ValueError("s0 must be -1 or +1")
        self.X1, self.X2 = self.grid.mesh()
        self.bmask = self.grid.boundary_mask()

    @property
    def mu(self):
        return self.rho0 * self.nu

    def geometry(self, t):
        """(sample, geometric coefficients) at time t, cached."""
        return self._geometry(t)[:2]

    def _geometry(self, t):
        key = 0.0 if self.chart.static else float(t)
        hit = self._geo_cache.get(key)
        if hit is None:
            s = sample_geometry(self.chart, self.X1, self.X2, key)
            geo = geometric_coefficients(s)
            jmax = float(np.max(np.linalg.eigvalsh(s.ginv)))
            hit = (s, geo, jmax)
            if len(self._geo_cache) > 8:
                self._geo_cache.clear()
            self._geo_cache[key] = hit
        return hit

    def pi0_field(self, t):
        if self.pi0 is None:
            return np.zeros(self.grid.shape)
        return np.broadcast_to(np.asarray(self.pi0(self.X1, self.X2, t), float), self.grid.shape)

    def f0_field(self, t):
        if self.f0 is None:
            return None
        f1, f2 = self.f0(self.X1, self.X2, t)
        return np.stack(np.broadcast_arrays(np.asarray(f1, float) + 0 * self.X1,
                                            np.asarray(f2, float) + 0 * self.X1), -1)

    def impose_bc(self, state):
        if not self.bmask.any():
            return state
        if self.boundary is not None:
            vals = self.boundary(self.X1, self.X2, state.t)
            vals = [np.broadcast_to(np.asarray(v, float), self.grid.shape) for v in vals]
        else:
            if self._initial_bc is None:
                raise RuntimeError("boundary values unknown; call initialize() first")
            vals = self._initial_bc
        out = []
        for arr, v in zip(state.arrays(), vals):
            a = arr.copy()
            a[self.bmask] = v[self.bmask]
            out.append(a)
        return ShallowWaterState(state.t, *out)

    def initialize(self, state):
        """Store boundary data (when held fixed) and return the state with BCs applied."""
        self._initial_bc = tuple(np.array(a, copy=True) for a in state.arrays())
        check_state(self, state)
        return self.impose_bc(state)


def check_state(problem, state):
    for name, a in zip(("h", "V1", "V2"), state.arrays()):
        if not np.all(np.isfinite(a)):
            raise BlowUp(f"non-finite values in {name} at t = {state.t:.6g}")
    if np.any(state.h < problem.h0):
        raise GapCollapse(f"gap fell below h0 = {problem.h0:g} (min {state.h.min():.3e}) at t = {state.t:.6g}")


def continuity_rhs(state, sample, grid):
    """Pointwise dh/dt from the mass balance (no forcing)."""
    sq = np.sqrt(sample.A0)
    cdiv = grid.divergence(sq * state.V1, sq * state.V2) / sq
    return -state.h * cdiv - state.h * (sample.A1 / sample.A0) * sample.wn


def momentum_rhs(state, sample, geo, gapc, grad_pi0, rho0, nu, grid):
    """(dV1/dt, dV2/dt) without forcing; ``gapc`` from gap_coefficients."""
    V = (state.V1, state.V2)
    D = [grid.derivatives(v) for v in V]           # (f1, f2, f11, f12, f22)
    dV = [(d[0], d[1]) for d in D]                 # dV[k][l]
    d2V = [((d[2], d[3]), (d[3], d[4])) for d in D]
    J, H, L, R, S = geo.J, geo.H, geo.L, geo.R, geo.S
    C, Q = geo.C, geo.Q
    ginv = sample.ginv
    out = []
    for i in range(2):
        adv = -sum((V[l] - C[..., l]) * dV[i][l] for l in range(2))
        quad = -sum((R[..., i, k] + sum(H[..., i, l, k] * V[l] for l in range(2))) * V[k]
                    for k in range(2))
        press = -(ginv[..., i, 0] * grad_pi0[0] + ginv[..., i, 1] * grad_pi0[1]) / rho0
        visc = sum(d2V[i][l][m] * J[..., l, m] for l in range(2) for m in range(2))
        visc = visc + sum(dV[k][l] * (L[..., k, l, i] + gapc.psi[..., i, k, l])
                          for k in range(2) for l in range(2))
        visc = visc + sum(V[k] * (S[..., i, k] + gapc.chi[..., i, k]) for k in range(2))
        visc = visc + gapc.kappa_hat[..., i]
        out.append(adv + quad + press + nu * visc + gapc.F[..., i] - Q[..., i, 2] * sample.wn)
    return tuple(out)


def _interior_gradient(f, grid):
    # gradient of a computed field whose edge values carry a different
    # truncation error than the interior: the first interior layer next to a
    # Dirichlet edge uses a one-sided stencil that skips the edge node
    out = list(grid.gradient(f))
    for ax, d in ((0, grid.d1), (1, grid.d2)):
        n = f.shape[ax]
        if grid.periodic[ax] or n < 6:
            continue
        g = np.moveaxis(out[ax], ax, 0)
        ff = np.moveaxis(f, ax, 0)
        g[1] = (-3.0 * ff[1] + 4.0 * ff[2] - ff[3]) / (2.0 * d)
        g[-2] = (3.0 * ff[-2] - 4.0 * ff[-3] + ff[-4]) / (2.0 * d)
    return tuple(out)


def evaluate_rhs(problem, state):
    """Full right-hand side (dh/dt, dV1/dt, dV2/dt) including forcing."""
    g = problem.grid
    s, geo = problem.geometry(state.t)
    dhdt = continuity_rhs(state, s, g)
    src = None
    if problem.forcing is not None:
        src = [np.broadcast_to(np.asarray(v, float), g.shape)
               for v in problem.forcing(problem.X1, problem.X2, state.t)]
        dhdt = dhdt + src[0]
    gap = GapField(h=state.h, dh=g.gradient(state.h), dhdt=dhdt,
                   ddhdt=_interior_gradient(dhdt, g), h0=problem.h0)
    gapc = gap_coefficients(s, geo, gap, V=(state.V1, state.V2), CR=problem.CR,
                            s0=problem.s0, rho0=problem.rho0, f0=problem.f0_field(state.t),
                            with_eta=False)
    grad_pi = g.gradient(problem.pi0_field(state.t))
    dV1, dV2 = momentum_rhs(state, s, geo, gapc, grad_pi, problem.rho0, problem.nu, g)
    if src is not None:
        dV1 = dV1 + src[1]
        dV2 = dV2 + src[2]
    if problem.bmask.any():
        for a in (dhdt, dV1, dV2):
            a[problem.bmask] = 0.0
    return dhdt, dV1, dV2


def time_step_bounds(problem, state):
    """(advective bound, viscous bound) on dt for the given state."""
    s, geo, jmax = problem._geometry(state.t)
    g = problem.grid
    dmin = min(g.d1, g.d2)
    speed = np.sqrt((state.V1 - geo.C[..., 0]) ** 2 + (state.V2 - geo.C[..., 1]) ** 2)
    vmax = float(np.max(speed))
    adv = np.inf if vmax == 0.0 else problem.cfl * dmin / vmax
    vis = problem.visc * dmin * dmin / (problem.nu * jmax)
    return adv, vis


def stable_dt(problem, state):
    return min(time_step_bounds(problem, state))


def _axpy(state, dt, k, t):
    return ShallowWaterState(t, state.h + dt * k[0], state.V1 + dt * k[1], state.V2 + dt * k[2])


def step(state, problem, dt, check_cfl=True):
    """One RK4 step; returns the new state."""
    if check_cfl:
        adv, vis = time_step_bounds(problem, state)
        if dt > adv * (1 + 1e-12) or dt > vis * (1 + 1e-12):
            raise CflViolation(f"dt = {dt:.4e} exceeds stability bounds "
                               f"(advective {adv:.4e}, viscous {vis:.4e})")
    t = state.t
    k1 = evaluate_rhs(problem, state)
    s2 = problem.impose_bc(_axpy(state, 0.5 * dt, k1, t + 0.5 * dt))
    check_state(problem, s2)
    k2 = evaluate_rhs(problem, s2)
    s3 = problem.impose_bc(_axpy(state, 0.5 * dt, k2, t + 0.5 * dt))
    check_state(problem, s3)
    k3 = evaluate_rhs(problem, s3)
    s4 = problem.impose_bc(_axpy(state, dt, k3, t + dt))
    check_state(problem, s4)
    k4 = evaluate_rhs(problem, s4)
    new = ShallowWaterState(
        t + dt,
        state.h + dt / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]),
        state.V1 + dt / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]),
        state.V2 + dt / 6.0 * (k1[2] + 2.0 * k2[2] + 2.0 * k3[2] + k4[2]),
    )
    new = problem.impose_bc(new)
    check_state(problem, new)
    return new


def mass(problem, state):
    """Mass functional: integral of h sqrt(A0) over the parameter domain."""
    s, _ = problem.geometry(state.t)
    return problem.grid.integrate(state.h * np.sqrt(s.A0))


def integrate(problem, state, t_end, dt=None, safety=0.9, every=None, callback=None,
              max_steps=10_000_000):
    """March from ``state`` to ``t_end``.

    With ``dt=None`` each step uses ``safety`` times the current stability
    bound.  ``callback(step_index, state)`` runs every ``every`` steps and at
    the end.  Returns (final state, history) where history lists
    per-step dt and CFL numbers.
    """
    hist = []
    n = 0
    while state.t < t_end * (1 - 1e-14) and t_end - state.t > 1e-14 * max(1.0, abs(t_end)):
        adv, vis = time_step_bounds(problem, state)
        h = dt if dt is not None else safety * min(adv, vis)
        h = min(h, t_end - state.t)
        state = step(state, problem, h)
        n += 1
        hist.append({"step": n, "t": state.t, "dt": h,
                     "cfl_adv": 0.0 if not np.isfinite(adv) else problem.cfl * h / adv,
                     "cfl_visc": problem.visc * h / vis})
        if callback is not None and every and n % every == 0:
            callback(n, state)
        if n >= max_steps:
            raise RuntimeError("maximum number of steps reached")
    if callback is not None and (not every or n % every != 0):
        callback(n, state)
    return state, hist


@dataclass(frozen=True)
class PressureFields:
    p0: np.ndarray          # (2 mu / h) dh/dt + pi0
    p0_long: np.ndarray     # -2 mu covdiv(V) - 2 mu (A1/A0) wn + pi0
    discrepancy: np.ndarray
    pi1: np.ndarray


def recover_pressure(problem, state, dhdt=None):
    """Zeroth-order pressure in both forms and the upper-wall pressure.

    By default dh/dt is taken from the mass balance (plus forcing); pass an
    exact field to measure how far the discrete state is from satisfying it.
    """
    s, _ = problem.geometry(state.t)
    g = problem.grid
    mu = problem.mu
    pi0 = np.array(problem.pi0_field(state.t), copy=True)
    if dhdt is None:
        dhdt = continuity_rhs(state, s, g)
        if problem.forcing is not None:
            dhdt = dhdt + problem.forcing(problem.X1, problem.X2, state.t)[0]
    sq = np.sqrt(s.A0)
    cdiv = g.divergence(sq * state.V1, sq * state.V2) / sq
    p0 = 2.0 * mu / state.h * dhdt + pi0
    p0_long = -2.0 * mu * cdiv - 2.0 * mu * (s.A1 / s.A0) * s.wn + pi0
    return PressureFields(p0=p0, p0_long=p0_long, discrepancy=p0 - p0_long, pi1=pi0.copy())


@dataclass(frozen=True)
class DerivedFields:
    jump1: np.ndarray           # W1^1 - V1^1
    jump2: np.ndarray
    dhdt: np.ndarray
    cdiv: np.ndarray
    h: np.ndarray
    A1A0wn: np.ndarray
    gauge: str = "V^1 = 0"

    def u3(self, xi3):
        """Normal first-order velocity, time-derivative form."""
        return xi3 * self.dhdt

    def u3_long(self, xi3):
        """Normal first-order velocity, divergence form."""
        return -self.h * xi3 * (self.cdiv + self.A1A0wn)

    def u1(self, xi3, V1=0.0):
        return self.jump1 * xi3 + V1

    def u2(self, xi3, V2=0.0):
        return self.jump2 * xi3 + V2


def first_order_fields(problem, state, dhdt=None):
    s, geo = problem.geometry(state.t)
    g = problem.grid
    if dhdt is None:
        dhdt = continuity_rhs(state, s, g)
        if problem.forcing is not None:
            dhdt = dhdt + problem.forcing(problem.X1, problem.X2, state.t)[0]
    ginv = s.ginv
    V = (state.V1, state.V2)
    jumps = []
    for i in range(2):
        j = ginv[..., i, 0] * s.dwn[..., 0] + ginv[..., i, 1] * s.dwn[..., 1]
        j = j + (geo.B[..., i, 0] * V[0] + geo.B[..., i, 1] * V[1]) / s.A0
        jumps.append(-state.h * j)
    sq = np.sqrt(s.A0)
    cdiv = g.divergence(sq * state.V1, sq * state.V2) / sq
    return DerivedFields(jump1=jumps[0], jump2=jumps[1], dhdt=dhdt, cdiv=cdiv, h=state.h,
                         A1A0wn=s.A1 / s.A0 * s.wn)


def scaled_output(state, eps):
    """State expressed with the physical gap eps*h (velocities unchanged)."""
    return replace(state, h=eps * state.h)

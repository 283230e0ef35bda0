"""Generalized Reynolds equation on a curved, moving surface.

The leading pressure p satisfies

    (1/sqrt(A0)) div( (h^3/sqrt(A0)) M grad p ) = RHS,   M = [[G, -F], [-F, E]]

    RHS = 12 mu dh/dt + 12 mu h (A1/A0) wn - 6 mu grad h . (W - V)
          + 6 mu h (1/sqrt(A0)) div( sqrt(A0) (W + V) )

with wn = X_t . a3.  The operator is discretized in flux form on a 9-point
stencil and multiplied through by sqrt(A0), which keeps the matrix
symmetric.  Dirichlet nodes are eliminated.
"""
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from . import kernels
from .errors import GapTooSmall, NoConvergence, SingularSystem
from .geometry import sample_geometry

DIRECT_MAX = 100_000


@dataclass
class LubricationProblem:
    """Inputs of one Reynolds solve.

    Arrays are nodal (n1, n2).  ``V`` and ``W`` are (V1, V2) / (W1, W2), the
    tangential velocity components of the lower and upper wall.
    ``p_boundary`` is used on Dirichlet edges only.  ``source`` is an extra
    right-hand-side term (manufactured solutions).  With ``rescale_eps`` set
    the physical gap eps*h is used and the solution is the physical pressure.
    """

    chart: object
    grid: object
    h: np.ndarray
    dh: tuple
    dhdt: np.ndarray = None
    V: tuple = None
    W: tuple = None
    mu: float = 1.0
    p_boundary: object = 0.0
    t: float = 0.0
    h0: float = 0.0
    rescale_eps: float = None
    source: np.ndarray = None

    def __post_init__(self):
        z = np.zeros(self.grid.shape)
        if self.mu <= 0:
            raise ValueError("viscosity mu must be positive")
        self.h = np.broadcast_to(np.asarray(self.h, float), self.grid.shape).copy()
        self.dh = tuple(np.broadcast_to(np.asarray(d, float), self.grid.shape).copy() for d in self.dh)
        self.dhdt = z.copy() if self.dhdt is None else np.broadcast_to(np.asarray(self.dhdt, float), z.shape).copy()
        self.V = (z, z) if self.V is None else tuple(np.broadcast_to(np.asarray(v, float), z.shape) for v in self.V)
        self.W = (z, z) if self.W is None else tuple(np.broadcast_to(np.asarray(v, float), z.shape) for v in self.W)
        self.p_boundary = np.broadcast_to(np.asarray(self.p_boundary, float), z.shape).copy()
        if not np.all(np.isfinite(self.p_boundary[self.grid.boundary_mask()])):
            raise ValueError("boundary pressure data must be finite")

    def effective_gap(self):
        """(h, dh1, dh2, dhdt) as used in the equation (scaled if rescaled)."""
        s = 1.0 if self.rescale_eps is None else float(self.rescale_eps)
        return s * self.h, s * self.dh[0], s * self.dh[1], s * self.dhdt


@dataclass
class ReynoldsSystem:
    matrix: sp.csr_matrix          # unknown-unknown block
    rhs: np.ndarray                # with Dirichlet data moved over
    operator: sp.csr_matrix        # full (N, N) operator (zero rows on Dirichlet nodes)
    unknown: np.ndarray            # boolean mask (n1, n2)
    p_known: np.ndarray            # (n1, n2) Dirichlet values (0 on unknowns)
    rhs_field: np.ndarray          # pointwise RHS of the unscaled equation
    K: tuple                       # (K11, K12, K22) nodal flux coefficients
    sample: object
    grid: object


def reynolds_rhs(problem, sample):
    g = problem.grid
    mu = problem.mu
    h, dh1, dh2, dhdt = problem.effective_gap()
    V1, V2 = problem.V
    W1, W2 = problem.W
    sq = np.sqrt(sample.A0)
    cdiv = g.divergence(sq * (W1 + V1), sq * (W2 + V2)) / sq
    rhs = (12.0 * mu * dhdt
           + 12.0 * mu * h * (sample.A1 / sample.A0) * sample.wn
           - 6.0 * mu * (dh1 * (W1 - V1) + dh2 * (W2 - V2))
           + 6.0 * mu * h * cdiv)
    if problem.source is not None:
        rhs = rhs + problem.source
    return rhs


def assemble_reynolds(problem, sample=None, backend=None):
    g = problem.grid
    if all(g.periodic):
        raise SingularSystem("fully periodic domain: pressure defined only up to a constant; "
                             "give Dirichlet data on at least one pair of edges")
    h, _, _, _ = problem.effective_gap()
    if np.any(h <= 0) or (problem.h0 > 0 and np.any(problem.h < problem.h0)):
        raise GapTooSmall(f"gap minimum {problem.h.min():.6g} below floor {problem.h0:g}")
    if sample is None:
        X1, X2 = g.mesh()
        sample = sample_geometry(problem.chart, X1, X2, problem.t)
    be = backend or kernels.backend
    sq = np.sqrt(sample.A0)
    h3 = h ** 3 / sq
    K11 = h3 * sample.G
    K12 = -h3 * sample.F
    K22 = h3 * sample.E
    rows, cols, vals = be.reynolds_coo(K11, K12, K22, g.d1, g.d2, *g.periodic)
    N = g.size
    S = sp.coo_matrix((vals, (rows, cols)), shape=(N, N)).tocsr()
    S.sum_duplicates()

    rhs_field = reynolds_rhs(problem, sample)
    known = g.boundary_mask()
    unknown = ~known
    uidx = np.flatnonzero(unknown.ravel())
    kidx = np.flatnonzero(known.ravel())
    p_known = np.where(known, problem.p_boundary, 0.0)
    Su = S[uidx]
    A = Su[:, uidx].tocsr()
    b = (sq * rhs_field).ravel()[uidx] - Su[:, kidx] @ p_known.ravel()[kidx]
    return ReynoldsSystem(matrix=A, rhs=b, operator=S, unknown=unknown, p_known=p_known,
                          rhs_field=rhs_field, K=(K11, K12, K22), sample=sample, grid=g)


@dataclass
class PressureSolution:
    p: np.ndarray
    diagnostics: dict = field(default_factory=dict)


def solve_pressure(system, method="auto", tol=1e-10, maxiter=None):
    """Solve the assembled system.

    ``method`` is "direct" (sparse LU), "cg" (conjugate gradients on the
    negated, positive definite matrix, Jacobi preconditioned) or "auto",
    which picks direct up to 1e5 nodes.
    """
    A, b = system.matrix, system.rhs
    n = A.shape[0]
    if method == "auto":
        method = "direct" if system.grid.size <= DIRECT_MAX else "cg"
    bn = np.linalg.norm(b)
    iters = 0
    if bn == 0.0:
        x = np.zeros(n)
    elif method == "direct":
        try:
            lu = spla.splu(A.tocsc())
        except RuntimeError as exc:
            raise SingularSystem(f"sparse factorization failed: {exc}") from None
        x = lu.solve(b)
        iters = 1
    elif method == "cg":
        d = -A.diagonal()
        if np.any(d <= 0):
            raise SingularSystem("operator diagonal is not negative; CG needs a definite system")
        M = sp.diags(1.0 / d)
        count = [0]

        def cb(_):
            count[0] += 1

        x, info = spla.cg(-A, -b, rtol=tol, atol=0.0, M=M,
                          maxiter=maxiter or 10 * n, callback=cb)
        iters = count[0]
        if info != 0:
            res = np.linalg.norm(b - A @ x) / bn
            raise NoConvergence(iters, res)
    else:
        raise ValueError(f"unknown solve method {method!r}")
    res = 0.0 if bn == 0.0 else float(np.linalg.norm(b - A @ x) / bn)
    if not np.all(np.isfinite(x)):
        raise SingularSystem("solution is not finite")
    p = system.p_known.copy()
    p[system.unknown] = x
    return PressureSolution(p=p, diagnostics={"method": method, "iterations": iters,
                                              "residual": res, "unknowns": n})


@dataclass
class VelocityProfile:
    """Zeroth-order velocity across the gap, evaluable at any xi3 in [0, 1].

    The tangential profile is written as (1 - xi3) V + xi3 W plus the
    pressure-driven parabola, so both wall values are reproduced exactly.
    """

    h: np.ndarray
    mu: float
    c: tuple          # (c1, c2) = ginv . grad p
    V: tuple
    W: tuple
    wn: np.ndarray
    grad_p: tuple

    def u(self, xi3):
        q = self.h * self.h * (xi3 * xi3 - xi3) / (2.0 * self.mu)
        return tuple(q * self.c[i] + (1.0 - xi3) * self.V[i] + xi3 * self.W[i] for i in range(2))

    def u1(self, xi3):
        return self.u(xi3)[0]

    def u2(self, xi3):
        return self.u(xi3)[1]

    def u3(self, xi3=None):
        return self.wn

    def d2u_dxi3(self):
        """Second xi3-derivative of (u1, u2); constant across the gap."""
        return tuple(self.h * self.h * self.c[i] / self.mu for i in range(2))

    def flux(self):
        """Gap-integrated tangential flux h * int_0^1 u_i dxi3."""
        return tuple(self.h * (-self.h * self.h * self.c[i] / (12.0 * self.mu)
                               + 0.5 * (self.V[i] + self.W[i])) for i in range(2))


def reconstruct_velocity(problem, p, sample=None):
    g = problem.grid
    if sample is None:
        X1, X2 = g.mesh()
        sample = sample_geometry(problem.chart, X1, X2, problem.t)
    p = p.p if isinstance(p, PressureSolution) else p
    p1, p2 = g.gradient(p)
    c1 = (sample.G * p1 - sample.F * p2) / sample.A0
    c2 = (sample.E * p2 - sample.F * p1) / sample.A0
    h, _, _, _ = problem.effective_gap()
    return VelocityProfile(h=h, mu=problem.mu, c=(c1, c2), V=problem.V, W=problem.W,
                           wn=sample.wn, grad_p=(p1, p2))


def solve_lubrication(problem, method="auto", tol=1e-10):
    """Assemble, solve and reconstruct in one call.

    Returns (PressureSolution, VelocityProfile, ReynoldsSystem).
    """
    system = assemble_reynolds(problem)
    sol = solve_pressure(system, method=method, tol=tol)
    prof = reconstruct_velocity(problem, sol, system.sample)
    return sol, prof, system

"""Differential geometry of the lower surface and the thin-domain change of
variables.

Everything is vectorized: pass arrays of (xi1, xi2) (any broadcastable shape)
and receive arrays with that leading shape.  Index conventions are 0-based:
``a[..., k, :]`` is basis vector k (k = 2 is the unit normal),
``da[..., k, l, :]`` its derivative along xi_l, ``d2a[..., k, l, m, :]`` the
second derivative.
"""
from dataclasses import dataclass

import numpy as np

from .charts import ChartJet
from .errors import DegenerateChart, NumericalInconsistency, SingularJacobian

DELTA_REG = 1e-8
DISC_TOL = 1e-10


def _dot(u, v):
    return np.einsum("...i,...i->...", u, v)


@dataclass(frozen=True)
class GeometrySample:
    t: float
    a: np.ndarray        # (..., 3, 3)
    da: np.ndarray       # (..., 3, 2, 3)
    d2a: np.ndarray      # (..., 3, 2, 2, 3)
    dadt: np.ndarray     # (..., 3, 3)
    Xt: np.ndarray       # (..., 3)
    E: np.ndarray
    F: np.ndarray
    G: np.ndarray
    e: np.ndarray
    f: np.ndarray
    g: np.ndarray
    A0: np.ndarray
    A1: np.ndarray
    A2: np.ndarray
    KG: np.ndarray
    Km: np.ndarray
    kplus: np.ndarray
    kminus: np.ndarray
    ginv: np.ndarray     # (..., 2, 2) inverse metric
    dginv: np.ndarray    # (..., 2, 2, 2) dginv[..., l, n, m] = d ginv[l, n] / d xi_m
    wn: np.ndarray       # normal chart speed  Xt . a3
    dwn: np.ndarray      # (..., 2)

    @property
    def sqrtA0(self):
        return np.sqrt(self.A0)

    @property
    def static(self):
        return not np.any(self.Xt)

    @property
    def shape(self):
        return self.A0.shape


def _normal_jet(jet, delta_reg):
    a1 = jet.dX[..., 0, :]
    a2 = jet.dX[..., 1, :]
    c = np.cross(a1, a2)
    s = np.sqrt(_dot(c, c))
    scale = np.maximum(_dot(a1, a1), _dot(a2, a2))
    bad = ~(s > delta_reg * scale)
    if np.any(bad):
        raise DegenerateChart(
            f"tangent vectors (nearly) parallel at {int(np.count_nonzero(bad))} point(s): "
            f"|a1 x a2| <= {delta_reg:g} * max(E, G)")
    n = c / s[..., None]

    X2 = jet.d2X
    X3 = jet.d3X
    # derivatives of c = a1 x a2
    dc = np.stack([np.cross(X2[..., 0, l, :], a2) + np.cross(a1, X2[..., 1, l, :])
                   for l in range(2)], axis=-2)
    d2c = np.empty(c.shape[:-1] + (2, 2, 3))
    for l in range(2):
        for m in range(2):
            d2c[..., l, m, :] = (np.cross(X3[..., 0, l, m, :], a2)
                                 + np.cross(X2[..., 0, l, :], X2[..., 1, m, :])
                                 + np.cross(X2[..., 0, m, :], X2[..., 1, l, :])
                                 + np.cross(a1, X3[..., 1, l, m, :]))
    # derivatives of s = |c|
    ds = np.einsum("...i,...li->...l", n, dc)
    d2s = np.empty(s.shape + (2, 2))
    for l in range(2):
        for m in range(2):
            d2s[..., l, m] = ((_dot(dc[..., m, :], dc[..., l, :]) + _dot(c, d2c[..., l, m, :])) / s
                              - ds[..., l] * ds[..., m] / s)
    s_ = s[..., None]
    dn = (dc - n[..., None, :] * ds[..., :, None]) / s_[..., None]
    d2n = np.empty_like(d2c)
    for l in range(2):
        for m in range(2):
            d2n[..., l, m, :] = (d2c[..., l, m, :] / s_
                                 - (dc[..., l, :] * ds[..., m, None] + dc[..., m, :] * ds[..., l, None]) / s_ ** 2
                                 - c * d2s[..., l, m, None] / s_ ** 2
                                 + 2 * c * (ds[..., l] * ds[..., m])[..., None] / s_ ** 3)
    # time derivative of the normal
    dct = np.cross(jet.dXt[..., 0, :], a2) + np.cross(a1, jet.dXt[..., 1, :])
    dnt = (dct - n * _dot(n, dct)[..., None]) / s_
    return n, dn, d2n, dnt


def sample_geometry(chart, xi1, xi2, t=0.0, delta_reg=DELTA_REG):
    """Evaluate every surface quantity at the given points.

    Raises
    ------
    DegenerateChart
        if ``|a1 x a2| <= delta_reg * max(E, G)`` anywhere.
    """
    jet = chart.jet(xi1, xi2, t) if not isinstance(chart, ChartJet) else chart
    return geometry_from_jet(jet, t, delta_reg)


def geometry_from_jet(jet, t=0.0, delta_reg=DELTA_REG):
    n, dn, d2n, dnt = _normal_jet(jet, delta_reg)
    a = np.stack([jet.dX[..., 0, :], jet.dX[..., 1, :], n], axis=-2)
    da = np.stack([jet.d2X[..., 0, :, :], jet.d2X[..., 1, :, :], dn], axis=-3)
    d2a = np.stack([jet.d3X[..., 0, :, :, :], jet.d3X[..., 1, :, :, :], d2n], axis=-4)
    dadt = np.stack([jet.dXt[..., 0, :], jet.dXt[..., 1, :], dnt], axis=-2)

    a1, a2 = a[..., 0, :], a[..., 1, :]
    E, F, G = _dot(a1, a1), _dot(a1, a2), _dot(a2, a2)
    e = _dot(n, jet.d2X[..., 0, 0, :])
    f = _dot(n, jet.d2X[..., 0, 1, :])
    g = _dot(n, jet.d2X[..., 1, 1, :])
    A0, A1, A2 = area_coefficients(E, F, G, e, f, g)
    KG, Km, kp, km = curvatures(A0, A1, A2)

    ginv = np.stack([np.stack([G, -F], -1), np.stack([-F, E], -1)], -2) / A0[..., None, None]
    # d g_pq / d xi_m = da_p[m].a_q + a_p.da_q[m]
    dgm = np.einsum("...pmi,...qi->...pqm", da[..., :2, :, :], a[..., :2, :])
    dgm = dgm + np.swapaxes(dgm, -3, -2)
    dginv = -np.einsum("...lp,...pqm,...qn->...lnm", ginv, dgm, ginv)

    wn = _dot(jet.Xt, n)
    dwn = np.einsum("...li,...i->...l", jet.dXt, n) + np.einsum("...i,...li->...l", jet.Xt, dn)
    return GeometrySample(t=float(np.asarray(t).flat[0]) if np.ndim(t) else float(t),
                          a=a, da=da, d2a=d2a, dadt=dadt, Xt=jet.Xt,
                          E=E, F=F, G=G, e=e, f=f, g=g, A0=A0, A1=A1, A2=A2,
                          KG=KG, Km=Km, kplus=kp, kminus=km,
                          ginv=ginv, dginv=dginv, wn=wn, dwn=dwn)


def basis_at(chart, xi1, xi2, t=0.0):
    """(a1, a2, a3) at the given point(s)."""
    s = sample_geometry(chart, xi1, xi2, t)
    return s.a[..., 0, :], s.a[..., 1, :], s.a[..., 2, :]


def fundamental_forms(chart, xi1, xi2, t=0.0):
    """First and second fundamental form coefficients (E, F, G, e, f, g)."""
    s = sample_geometry(chart, xi1, xi2, t)
    return s.E, s.F, s.G, s.e, s.f, s.g


def area_coefficients(E, F, G, e, f, g):
    A0 = E * G - F * F
    A1 = -e * G - g * E + 2 * f * F
    A2 = e * g - f * f
    return A0, A1, A2


def area_series(A0, A1, A2, eps, xi3, h):
    """Three-term area factor A(eps) = A0 + tau A1 + tau^2 A2, tau = eps xi3 h."""
    tau = eps * xi3 * h
    return A0 + tau * A1 + tau * tau * A2


def area_direct(E, F, G, e, f, g, eps, xi3, h):
    """Same factor from the perturbed metric products, without expanding."""
    tau = eps * xi3 * h
    return (E - tau * e) * (G - tau * g) - (F - tau * f) ** 2


def curvatures(A0, A1, A2, tol=DISC_TOL):
    """Gaussian, mean and principal curvatures from the area coefficients.

    The principal curvatures are the roots of ``A0 k^2 + A1 k + A2 = 0``.
    Slightly negative discriminants (round-off near umbilic points) are
    clamped to zero; anything below ``-tol`` relative raises.
    """
    A0 = np.asarray(A0, float)
    if np.any(A0 <= 0):
        raise DegenerateChart("area coefficient A0 must be positive")
    KG = A2 / A0
    Km = -A1 / (2 * A0)
    disc = A1 * A1 - 4 * A0 * A2
    ref = A1 * A1 + 4 * np.abs(A0 * A2)
    if np.any(disc < -tol * np.maximum(ref, np.finfo(float).tiny)):
        raise NumericalInconsistency("negative discriminant in principal curvature equation")
    r = np.sqrt(np.maximum(disc, 0.0))
    # numerically stable quadratic roots
    q = -0.5 * (A1 + np.where(A1 >= 0, r, -r))
    with np.errstate(divide="ignore", invalid="ignore"):
        k1 = q / A0
        k2 = np.where(q != 0, A2 / np.where(q != 0, q, 1.0), 0.0)
    kp = np.maximum(k1, k2)
    km = np.minimum(k1, k2)
    return KG, Km, kp, km


def inversion_series(sample, dh1, dh2, order=2):
    """Coefficients of the inverse Jacobian expanded in tau = eps xi3 h.

    Returns ``alpha, beta`` of shape (..., 3, order+1).  Rows 0 and 1 are the
    tangential rows; row 2 is the normal row, whose full value is
    ``(xi3 / h) * sum_n alpha[2, n] tau^n``.
    """
    if order < 0:
        raise ValueError("series order must be >= 0")
    s = sample
    A0, A1, A2 = s.A0, s.A1, s.A2
    shp = A0.shape + (3, order + 1)
    al = np.zeros(shp)
    be = np.zeros(shp)
    al[..., 0, 0] = s.G / A0
    al[..., 1, 0] = -s.F / A0
    be[..., 0, 0] = -s.F / A0
    be[..., 1, 0] = s.E / A0
    al[..., 2, 0] = (dh2 * s.F - dh1 * s.G) / A0
    be[..., 2, 0] = (dh1 * s.F - dh2 * s.E) / A0
    if order >= 1:
        al[..., 0, 1] = -(s.g + al[..., 0, 0] * A1) / A0
        al[..., 1, 1] = (s.f - al[..., 1, 0] * A1) / A0
        be[..., 0, 1] = al[..., 1, 1]
        be[..., 1, 1] = -(s.e + be[..., 1, 0] * A1) / A0
        al[..., 2, 1] = (-dh2 * s.f + dh1 * s.g - al[..., 2, 0] * A1) / A0
        be[..., 2, 1] = (-dh1 * s.f + dh2 * s.e - be[..., 2, 0] * A1) / A0
    for n in range(2, order + 1):
        for c in (al, be):
            c[..., :, n] = -(c[..., :, n - 2] * A2[..., None] + c[..., :, n - 1] * A1[..., None]) / A0[..., None]
    return al, be


def series_sum(coef, tau, order=None):
    """Evaluate a truncated series sum_{n <= order} coef[..., n] tau^n."""
    if order is None:
        order = coef.shape[-1] - 1
    tau = np.asarray(tau, float)
    acc = np.zeros(np.broadcast(coef[..., 0], tau).shape)
    for n in range(order, -1, -1):      # Horner
        acc = acc * tau + coef[..., n]
    return acc


def inverse_coefficients(sample, eps, xi3, h, dh1, dh2):
    """Exact (alpha_i, beta_i, gamma_i), i = 1..3, for finite eps.

    Returns arrays of shape (..., 3) each.
    """
    s = sample
    tau = eps * xi3 * h
    A = area_direct(s.E, s.F, s.G, s.e, s.f, s.g, eps, xi3, h)
    a1 = (s.G - tau * s.g) / A
    b1 = -(s.F - tau * s.f) / A
    a2 = b1
    b2 = (s.E - tau * s.e) / A
    a3 = -(xi3 / h) * (a1 * dh1 + a2 * dh2)
    b3 = -(xi3 / h) * (b1 * dh1 + b2 * dh2)
    z = np.zeros_like(a1)
    alpha = np.stack([a1, a2, a3], -1)
    beta = np.stack([b1, b2, b3], -1)
    gamma = np.stack([z, z, np.broadcast_to(1.0 / (eps * h), z.shape)], -1)
    return alpha, beta, gamma


@dataclass(frozen=True)
class InverseJacobian:
    closed: np.ndarray     # (..., 4, 4) assembled from alpha/beta/gamma and the time column
    numeric: np.ndarray    # (..., 4, 4) numerical inverse of ``jacobian``
    jacobian: np.ndarray   # (..., 4, 4) d(x, t_eps)/d(xi1, xi2, xi3, t)


def thin_jacobian(sample, eps, xi3, h, dh1, dh2, dhdt):
    """Jacobian of (xi1, xi2, xi3, t) -> (x1, x2, x3, t_eps) for the thin domain
    x = X + eps xi3 h a3, t_eps = t.  Columns are the source variables."""
    s = sample
    a3 = s.a[..., 2, :]
    tau = (eps * xi3 * h)[..., None]
    J = np.zeros(s.A0.shape + (4, 4))
    for j in range(2):
        dhj = (dh1, dh2)[j]
        J[..., :3, j] = s.a[..., j, :] + (eps * xi3 * dhj)[..., None] * a3 + tau * s.da[..., 2, j, :]
    J[..., :3, 2] = (eps * h)[..., None] * a3
    J[..., :3, 3] = s.Xt + (eps * xi3 * dhdt)[..., None] * a3 + tau * s.dadt[..., 2, :]
    J[..., 3, 3] = 1.0
    return J


def jacobian_inverse_direct(sample, eps, xi3, h, dh1=0.0, dh2=0.0, dhdt=0.0, cond_max=1e14):
    """Closed-form inverse of the thin-domain Jacobian plus a numerical check.

    Rows 0..2 of ``closed`` are d xi_i / d x (spatial block) followed by
    d xi_i / d t_eps; row 3 is (0, 0, 0, 1).
    """
    s = sample
    shp = s.A0.shape
    eps, xi3, h, dh1, dh2, dhdt = (np.broadcast_to(np.asarray(v, float), shp)
                                   for v in (eps, xi3, h, dh1, dh2, dhdt))
    al, be, ga = inverse_coefficients(s, eps, xi3, h, dh1, dh2)
    a1, a2, a3 = s.a[..., 0, :], s.a[..., 1, :], s.a[..., 2, :]
    K = np.zeros(shp + (4, 4))
    rows = al[..., :, None] * a1[..., None, :] + be[..., :, None] * a2[..., None, :] \
        + ga[..., :, None] * a3[..., None, :]
    K[..., :3, :3] = rows
    tau = (eps * xi3 * h)[..., None]
    mv = s.Xt + tau * s.dadt[..., 2, :]
    tcol = -np.einsum("...ij,...j->...i", al[..., :, None] * a1[..., None, :]
                      + be[..., :, None] * a2[..., None, :], mv)
    tcol[..., 2] += -s.wn / (eps * h) - (xi3 / h) * dhdt
    K[..., :3, 3] = tcol
    K[..., 3, 3] = 1.0

    J = thin_jacobian(s, eps, xi3, h, dh1, dh2, dhdt)
    c = np.linalg.cond(J)
    if np.any(~np.isfinite(c)) or np.any(c > cond_max):
        raise SingularJacobian(f"thin-domain Jacobian ill-conditioned (cond up to {np.nanmax(c):.3e})")
    Jinv = np.linalg.inv(J)
    return InverseJacobian(closed=K, numeric=Jinv, jacobian=J)


def covariant_divergence(w1, w2, sqrtA0, grid):
    """(1/sqrt(A0)) div(sqrt(A0) w) with the grid's finite differences."""
    return grid.divergence(sqrtA0 * w1, sqrtA0 * w2) / sqrtA0

"""Coefficient families of the curved shallow-water momentum balance.

Purely geometric families come from :func:`geometric_coefficients`; the ones
that also involve the gap h (and the friction closure) from
:func:`gap_coefficients`.  Array index layout, 0-based, leading axes = grid:

=========  =====================  =====================================
name       shape                  meaning of trailing indices
=========  =====================  =====================================
B          (2, 2)                 [i, l]
C          (2,)                   [l]  tangential chart velocity
H          (2, 2, 3)              [i, l, k]
I          ()
J          (2, 2)                 [l, m]  (inverse metric)
D          (2,)                   [l]  contracted metric derivative
L          (3, 2, 2)              [k, l, i]
Q          (2, 3)                 [i, k]
R          (2, 2)                 [i, k]
S          (2, 2)                 [i, k]
=========  =====================  =====================================
"""
from dataclasses import dataclass

import numpy as np

from .errors import GapTooSmall


def _dot(u, v):
    return np.einsum("...i,...i->...", u, v)


@dataclass(frozen=True)
class GeometricCoefficients:
    B: np.ndarray
    C: np.ndarray
    H: np.ndarray
    I: np.ndarray
    J: np.ndarray
    J_form: np.ndarray      # J from the first-fundamental-form expression
    D: np.ndarray
    L: np.ndarray
    Q: np.ndarray
    R: np.ndarray
    S: np.ndarray
    S_rest: np.ndarray      # (2, 3): S without its leading (I sqrt(A0) - A1) term, all k
    Nvec: np.ndarray        # a1 x d2 a3 + d1 a3 x a2
    P: np.ndarray           # (2, 3, 3): sum_m ginv[i, m] d_m a_k
    chi1: np.ndarray        # (2, 3): bracket multiplying dh/dxi1 in chi
    chi2: np.ndarray        # (2, 3): bracket multiplying dh/dxi2 in chi
    dual: np.ndarray        # (2, 3): tangential dual basis ginv[i, n] a_n


def geometric_coefficients(s):
    """All chart-only coefficient families at the points of sample ``s``."""
    a, da, d2a = s.a, s.da, s.d2a
    ginv = s.ginv
    a1, a2, a3 = a[..., 0, :], a[..., 1, :], a[..., 2, :]
    sq = np.sqrt(s.A0)

    B = np.empty(s.A0.shape + (2, 2))
    B[..., 0, 0] = s.G * s.e - s.F * s.f
    B[..., 0, 1] = s.G * s.f - s.F * s.g
    B[..., 1, 0] = s.E * s.f - s.F * s.e
    B[..., 1, 1] = s.E * s.g - s.F * s.f

    at = np.einsum("...ni,...i->...n", a[..., :2, :], s.Xt)         # a_n . X_t
    C = np.einsum("...ln,...n->...l", ginv, at)

    # T[n, k, l] = a_n . d_l a_k
    T = np.einsum("...ni,...kli->...nkl", a[..., :2, :], da)
    H = np.einsum("...in,...nkl->...ilk", ginv, T)

    Nvec = np.cross(a1, da[..., 2, 1, :]) + np.cross(da[..., 2, 0, :], a2)
    I = _dot(Nvec, a3)

    J = ginv
    # first-fundamental-form expression: alpha_l alpha_m E + (beta_l alpha_m + alpha_l beta_m) F + beta_l beta_m G
    al, be = ginv[..., :, 0], ginv[..., :, 1]
    J_form = (al[..., :, None] * al[..., None, :] * s.E[..., None, None]
              + (be[..., :, None] * al[..., None, :] + al[..., :, None] * be[..., None, :]) * s.F[..., None, None]
              + be[..., :, None] * be[..., None, :] * s.G[..., None, None])

    # D[l] = sum_m ( d_m ginv[l, m] + ginv[l, 0] H[m, m, 0] + ginv[l, 1] H[m, m, 1] )
    Hmm = H[..., 0, 0, :2] + H[..., 1, 1, :2]                         # sum_m H[m, m, n], n < 2
    D = s.dginv[..., :, 0, 0] + s.dginv[..., :, 1, 1] + np.einsum("...ln,...n->...l", ginv, Hmm)

    # L[k, l, i] = D[l] delta_ki + 2 sum_m H[i, m, k] J[l, m]
    L = 2.0 * np.einsum("...imk,...lm->...kli", H, J)
    for k in range(2):
        L[..., k, :, k] += D

    adt = np.einsum("...ni,...ki->...nk", a[..., :2, :], s.dadt)     # a_n . d_t a_k
    Q = np.einsum("...in,...nk->...ik", ginv, adt) - np.einsum("...ilk,...l->...ik", H, C)
    R = Q[..., :, :2] + H[..., :, :, 2] * s.wn[..., None, None]

    P = np.einsum("...im,...kmc->...ikc", ginv, da)
    Pn = np.einsum("...ikc,...c->...ik", P, a3)
    # second derivatives projected and contracted with J
    d2proj = np.einsum("...in,...nklm,...lm->...ik", ginv,
                       np.einsum("...ni,...klmi->...nklm", a[..., :2, :], d2a), J)
    S_rest = d2proj + np.einsum("...l,...ilk->...ik", D, H) \
        - np.einsum("...c,...ikc->...ik", Nvec, P) / sq[..., None, None]
    lead = ((I * sq - s.A1) / s.A0)[..., None, None] * Pn
    S = lead[..., :2] + S_rest[..., :2]

    chi1 = np.einsum("...ilk,...l->...ik", H, ginv[..., :, 0]) \
        - np.einsum("...c,...ikc->...ik", np.cross(a3, a2), P) / sq[..., None, None]
    chi2 = np.einsum("...ilk,...l->...ik", H, ginv[..., :, 1]) \
        - np.einsum("...c,...ikc->...ik", np.cross(a1, a3), P) / sq[..., None, None]
    dual = np.einsum("...in,...nc->...ic", ginv, a[..., :2, :])
    return GeometricCoefficients(B=B, C=C, H=H, I=I, J=J, J_form=J_form, D=D, L=L,
                                 Q=Q, R=R, S=S, S_rest=S_rest, Nvec=Nvec, P=P,
                                 chi1=chi1, chi2=chi2, dual=dual)


@dataclass(frozen=True)
class GapField:
    """Gap h with the derivatives the coefficients need.

    ``dh`` is (2, ...) = (dh/dxi1, dh/dxi2); ``ddhdt`` likewise holds the
    spatial gradient of dh/dt.
    """

    h: np.ndarray
    dh: tuple
    dhdt: np.ndarray
    ddhdt: tuple
    h0: float = 0.0

    def __post_init__(self):
        h = np.asarray(self.h, float)
        if self.h0 > 0 and np.any(h < self.h0):
            raise GapTooSmall(f"gap minimum {h.min():.6g} below floor h0 = {self.h0:g}")
        if np.any(h <= 0):
            raise GapTooSmall(f"gap must be positive (minimum {h.min():.6g})")

    def dt_h_dh(self):
        """d/dt (h dh/dxi_m), m = 1, 2."""
        return tuple(self.dhdt * self.dh[m] + self.h * self.ddhdt[m] for m in range(2))

    @classmethod
    def static(cls, h, dh1, dh2, h0=0.0):
        z = np.zeros_like(np.asarray(h, float))
        return cls(h=h, dh=(dh1, dh2), dhdt=z, ddhdt=(z, z), h0=h0)


@dataclass(frozen=True)
class GapCoefficients:
    F: np.ndarray        # (2,)
    eta: np.ndarray      # (3,)
    psi: np.ndarray      # (2, 2, 2) [i, j, l]
    chi: np.ndarray      # (2, 3) [i, k]
    kappa: np.ndarray    # (2,)
    kappa_hat: np.ndarray


def zeroth_order_velocity(s, V1, V2):
    """Cartesian zeroth-order fluid velocity on the surface: V_k a_k + wn a3."""
    return (V1[..., None] * s.a[..., 0, :] + V2[..., None] * s.a[..., 1, :]
            + s.wn[..., None] * s.a[..., 2, :])


def eta_field(s, h, dh1, dh2):
    """First-order correction of the upper-wall normal (unnormalized)."""
    a1, a2, a3 = s.a[..., 0, :], s.a[..., 1, :], s.a[..., 2, :]
    h = np.asarray(h, float)[..., None]
    return (np.asarray(dh2, float)[..., None] * np.cross(a1, a3) + h * np.cross(a1, s.da[..., 2, 1, :])
            + np.asarray(dh1, float)[..., None] * np.cross(a3, a2) + h * np.cross(s.da[..., 2, 0, :], a2))


def gap_coefficients(s, geo, gap, V=None, CR=0.0, s0=1, rho0=1.0, f0=None, with_eta=True):
    """Gap-dependent coefficient families.

    Parameters
    ----------
    s, geo : GeometrySample, GeometricCoefficients
    gap : GapField
    V : (V1, V2) or None
        tangential zeroth-order velocity, only needed for friction.
    CR : float
        friction coefficient of the closure ``f_R = rho0 CR |u0| u0`` applied
        on both walls.
    s0 : {-1, 1}
        orientation of the lower wall's outward normal relative to a3.
    f0 : array (..., 2) or None
        tangential body-force components in the local basis.
    """
    h = np.asarray(gap.h, float)
    dh1, dh2 = gap.dh
    ginv = s.ginv

    # body force plus wall friction projected on the tangential dual basis
    F = np.zeros(h.shape + (2,))
    if f0 is not None:
        F += np.asarray(f0, float)[..., :2]
    if CR != 0.0:
        if V is None:
            raise ValueError("friction needs the tangential velocity")
        u0 = zeroth_order_velocity(s, V[0], V[1])
        fR = rho0 * CR * np.sqrt(_dot(u0, u0))[..., None] * u0
        F += (s0 / (rho0 * h))[..., None] * np.einsum("...c,...ic->...i", 2.0 * fR, geo.dual)

    eta = eta_field(s, h, dh1, dh2) if with_eta else None

    # psi[i, j, l] = (1/h) [ (ginv[l] . grad h) delta_ij + dh_j ginv[l, i] ]
    gh = ginv[..., :, 0] * dh1[..., None] + ginv[..., :, 1] * dh2[..., None]      # (.., l)
    dh = np.stack([dh1, dh2], -1)
    psi = np.zeros(h.shape + (2, 2, 2))
    for i in range(2):
        for j in range(2):
            if i == j:
                psi[..., i, j, :] += gh
            psi[..., i, j, :] += dh[..., j, None] * ginv[..., :, i]
    psi /= h[..., None, None, None]

    chi = (dh1[..., None, None] * geo.chi1 + dh2[..., None, None] * geo.chi2) / h[..., None, None]

    th = gap.dt_h_dh()
    kappa = -(ginv[..., :, 0] * th[0][..., None] + ginv[..., :, 1] * th[1][..., None]) / (h * h)[..., None]
    ratio = (s.A1 / s.A0)[..., None]
    for m in range(2):
        kappa += s.dwn[..., m, None] * (geo.L[..., 2, m, :] - ratio * ginv[..., :, m])
    kappa += s.wn[..., None] * (chi[..., :, 2] + geo.S_rest[..., :, 2])

    # grad of (2/h) dh/dt
    g2 = [2.0 * (gap.ddhdt[m] / h - gap.dhdt * gap.dh[m] / (h * h)) for m in range(2)]
    kappa_hat = kappa - (ginv[..., :, 0] * g2[0][..., None] + ginv[..., :, 1] * g2[1][..., None])
    return GapCoefficients(F=F, eta=eta, psi=psi, chi=chi, kappa=kappa, kappa_hat=kappa_hat)


def coefficient_table(s, geo, gapc=None):
    """Flatten every coefficient component into named columns.

    Column names use 1-based indices, e.g. ``H_113`` is H[i=1, l=1, k=3].
    """
    cols = {}

    def put(name, arr, nidx):
        arr = np.asarray(arr)
        if nidx == 0:
            cols[name] = arr
            return
        for idx in np.ndindex(arr.shape[-nidx:]):
            cols[name + "_" + "".join(str(i + 1) for i in idx)] = arr[(Ellipsis,) + idx]

    for nm in ("E", "F", "G", "e", "f", "g", "A0", "A1", "A2", "KG", "Km"):
        put(nm, getattr(s, nm), 0)
    put("B", geo.B, 2)
    put("C", geo.C, 1)
    put("H", geo.H, 3)
    put("I", geo.I, 0)
    put("J", geo.J, 2)
    put("L", geo.L, 3)
    put("Q", geo.Q, 2)
    put("R", geo.R, 2)
    put("S", geo.S, 2)
    if gapc is not None:
        put("Fh", gapc.F, 1)
        put("eta", gapc.eta, 1)
        put("psi", gapc.psi, 3)
        put("chi", gapc.chi, 2)
        put("kappa", gapc.kappa, 1)
        put("kappahat", gapc.kappa_hat, 1)
    return cols

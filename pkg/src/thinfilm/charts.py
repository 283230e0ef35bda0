"""Parametrized lower surfaces X(xi1, xi2, t) with derivative jets.

A chart returns a :class:`ChartJet` holding X and every derivative the
coefficient machinery needs: up to third order in (xi1, xi2), first order in
t and the mixed t/xi derivative.  All arrays broadcast over the leading axes
of the inputs; the trailing axes carry derivative indices and the Cartesian
component.
"""
import re
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class ChartJet:
    X: np.ndarray      # (..., 3)
    dX: np.ndarray     # (..., 2, 3)          dX[l]      = dX/dxi_l
    d2X: np.ndarray    # (..., 2, 2, 3)       d2X[l, m]
    d3X: np.ndarray    # (..., 2, 2, 2, 3)    d3X[l, m, n]
    Xt: np.ndarray     # (..., 3)
    dXt: np.ndarray    # (..., 2, 3)          d2X/dt dxi_l


def _vec(*comps):
    comps = np.broadcast_arrays(*[np.asarray(c, dtype=float) for c in comps])
    return np.stack(comps, axis=-1)


def _sym3(d111, d112, d122, d222):
    # fill a fully symmetric third-derivative tensor from its 4 distinct entries
    shape = d111.shape[:-1] + (2, 2, 2, 3)
    out = np.empty(shape)
    out[..., 0, 0, 0, :] = d111
    out[..., 0, 0, 1, :] = out[..., 0, 1, 0, :] = out[..., 1, 0, 0, :] = d112
    out[..., 0, 1, 1, :] = out[..., 1, 0, 1, :] = out[..., 1, 1, 0, :] = d122
    out[..., 1, 1, 1, :] = d222
    return out


def _sym2(d11, d12, d22):
    shape = d11.shape[:-1] + (2, 2, 3)
    out = np.empty(shape)
    out[..., 0, 0, :] = d11
    out[..., 0, 1, :] = out[..., 1, 0, :] = d12
    out[..., 1, 1, :] = d22
    return out


def _pair(d1, d2):
    return np.stack(np.broadcast_arrays(d1, d2), axis=-2)


class Chart:
    """Base class.  Subclasses implement ``jet``."""

    name = "chart"
    static = True

    def __init__(self, domain=((0.0, 1.0), (0.0, 1.0)), s0=1):
        self.domain = tuple(tuple(float(v) for v in d) for d in domain)
        if s0 not in (-1, 1):
            raise ValueError("orientation sign s0 must be -1 or +1")
        self.s0 = s0

    def jet(self, xi1, xi2, t=0.0):
        raise NotImplementedError

    def X(self, xi1, xi2, t=0.0):
        return self.jet(xi1, xi2, t).X

    def __repr__(self):
        return f"{type(self).__name__}({self.label()})"

    def label(self):
        return self.name


class Plane(Chart):
    name = "plane"

    def jet(self, xi1, xi2, t=0.0):
        xi1, xi2, t = np.broadcast_arrays(*(np.asarray(v, float) for v in (xi1, xi2, t)))
        z = np.zeros_like(xi1)
        o = np.ones_like(xi1)
        zv = _vec(z, z, z)
        return ChartJet(
            X=_vec(xi1, xi2, z),
            dX=_pair(_vec(o, z, z), _vec(z, o, z)),
            d2X=_sym2(zv, zv, zv),
            d3X=_sym3(zv, zv, zv, zv),
            Xt=zv.copy(),
            dXt=_pair(zv, zv),
        )


class TranslatingPlane(Chart):
    """Plane moving rigidly along its normal: X = (xi1, xi2, c t)."""

    name = "translating-plane"
    static = False

    def __init__(self, c=1.0, **kw):
        super().__init__(**kw)
        self.c = float(c)

    def label(self):
        return f"translating-plane({self.c:g})"

    def jet(self, xi1, xi2, t=0.0):
        xi1, xi2, t = np.broadcast_arrays(*(np.asarray(v, float) for v in (xi1, xi2, t)))
        z = np.zeros_like(xi1)
        o = np.ones_like(xi1)
        zv = _vec(z, z, z)
        return ChartJet(
            X=_vec(xi1, xi2, self.c * t),
            dX=_pair(_vec(o, z, z), _vec(z, o, z)),
            d2X=_sym2(zv, zv, zv),
            d3X=_sym3(zv, zv, zv, zv),
            Xt=_vec(z, z, self.c * o),
            dXt=_pair(zv, zv),
        )


class Cylinder(Chart):
    """X = (R cos xi1, R sin xi1, xi2)."""

    name = "cylinder"

    def __init__(self, R=1.0, domain=((0.0, 2 * np.pi), (0.0, 1.0)), **kw):
        super().__init__(domain=domain, **kw)
        self.R = float(R)

    def label(self):
        return f"cylinder({self.R:g})"

    def jet(self, xi1, xi2, t=0.0):
        xi1, xi2, t = np.broadcast_arrays(*(np.asarray(v, float) for v in (xi1, xi2, t)))
        R = self.R
        c, s = np.cos(xi1), np.sin(xi1)
        z = np.zeros_like(xi1)
        o = np.ones_like(xi1)
        zv = _vec(z, z, z)
        return ChartJet(
            X=_vec(R * c, R * s, xi2),
            dX=_pair(_vec(-R * s, R * c, z), _vec(z, z, o)),
            d2X=_sym2(_vec(-R * c, -R * s, z), zv, zv),
            d3X=_sym3(_vec(R * s, -R * c, z), zv, zv, zv),
            Xt=zv.copy(),
            dXt=_pair(zv, zv),
        )


class Sphere(Chart):
    """X = R (sin xi1 cos xi2, sin xi1 sin xi2, cos xi1), poles excluded."""

    name = "sphere"

    def __init__(self, R=1.0, domain=((0.25, np.pi - 0.25), (0.0, 2 * np.pi)), **kw):
        super().__init__(domain=domain, **kw)
        self.R = float(R)

    def label(self):
        return f"sphere({self.R:g})"

    def jet(self, xi1, xi2, t=0.0):
        xi1, xi2, t = np.broadcast_arrays(*(np.asarray(v, float) for v in (xi1, xi2, t)))
        R = self.R
        su, cu = np.sin(xi1), np.cos(xi1)
        sv, cv = np.sin(xi2), np.cos(xi2)
        z = np.zeros_like(xi1)
        zv = _vec(z, z, z)
        X = R * _vec(su * cv, su * sv, cu)
        Xu = R * _vec(cu * cv, cu * sv, -su)
        Xv = R * _vec(-su * sv, su * cv, z)
        Xuv = R * _vec(-cu * sv, cu * cv, z)
        Xvv = R * _vec(-su * cv, -su * sv, z)
        Xuvv = R * _vec(-cu * cv, -cu * sv, z)
        return ChartJet(
            X=X,
            dX=_pair(Xu, Xv),
            d2X=_sym2(-X, Xuv, Xvv),
            d3X=_sym3(-Xu, -Xv, Xuvv, -Xv),
            Xt=zv.copy(),
            dXt=_pair(zv, zv),
        )


class Paraboloid(Chart):
    """Graph surface X = (xi1, xi2, a xi1^2 + b xi2^2)."""

    name = "paraboloid"

    def __init__(self, a=0.5, b=0.25, domain=((-1.0, 1.0), (-1.0, 1.0)), **kw):
        super().__init__(domain=domain, **kw)
        self.a = float(a)
        self.b = float(b)

    def label(self):
        return f"paraboloid({self.a:g},{self.b:g})"

    def jet(self, xi1, xi2, t=0.0):
        xi1, xi2, t = np.broadcast_arrays(*(np.asarray(v, float) for v in (xi1, xi2, t)))
        a, b = self.a, self.b
        z = np.zeros_like(xi1)
        o = np.ones_like(xi1)
        zv = _vec(z, z, z)
        return ChartJet(
            X=_vec(xi1, xi2, a * xi1 ** 2 + b * xi2 ** 2),
            dX=_pair(_vec(o, z, 2 * a * xi1), _vec(z, o, 2 * b * xi2)),
            d2X=_sym2(_vec(z, z, 2 * a * o), zv, _vec(z, z, 2 * b * o)),
            d3X=_sym3(zv, zv, zv, zv),
            Xt=zv.copy(),
            dXt=_pair(zv, zv),
        )


class WavyPlane(Chart):
    """Travelling surface wave X = (xi1, xi2, A sin(k xi1 - w t)).

    Moving and curved at once, so it exercises every time-dependent
    coefficient (tangential chart velocity included).
    """

    name = "wavy-plane"
    static = False

    def __init__(self, amp=0.1, k=2 * np.pi, omega=1.0,
                 domain=((0.0, 1.0), (0.0, 1.0)), **kw):
        super().__init__(domain=domain, **kw)
        self.amp, self.k, self.omega = float(amp), float(k), float(omega)

    def label(self):
        return f"wavy-plane({self.amp:g},{self.k:g},{self.omega:g})"

    def jet(self, xi1, xi2, t=0.0):
        xi1, xi2, t = np.broadcast_arrays(*(np.asarray(v, float) for v in (xi1, xi2, t)))
        A, k, w = self.amp, self.k, self.omega
        ph = k * xi1 - w * t
        s, c = np.sin(ph), np.cos(ph)
        z = np.zeros_like(xi1)
        o = np.ones_like(xi1)
        zv = _vec(z, z, z)
        return ChartJet(
            X=_vec(xi1, xi2, A * s),
            dX=_pair(_vec(o, z, A * k * c), _vec(z, o, z)),
            d2X=_sym2(_vec(z, z, -A * k * k * s), zv, zv),
            d3X=_sym3(_vec(z, z, -A * k ** 3 * c), zv, zv, zv),
            Xt=_vec(z, z, -A * w * c),
            dXt=_pair(_vec(z, z, A * k * w * s), zv),
        )


class FiniteDifferenceChart(Chart):
    """Wraps a position-only callback ``X(xi1, xi2, t) -> (..., 3)``.

    Derivatives come from nested 5-point central differences.  The step for
    an order-k derivative is ``eps**(1/(4+k)) * scale``, which balances the
    fourth-order truncation error against round-off amplification.
    Opt-in only; accuracy is roughly 1e-11 (first), 1e-9 (second) and
    1e-8 (third derivatives) for O(1) charts.
    """

    name = "fd-chart"

    def __init__(self, func, scale=1.0, static=False, name="fd-chart", **kw):
        super().__init__(**kw)
        self.func = func
        self.scale = float(scale)
        self.static = bool(static)
        self.name = name

    @staticmethod
    def _step(order, scale):
        return np.finfo(float).eps ** (1.0 / (4 + order)) * scale

    def _eval(self, xi1, xi2, t):
        return np.asarray(self.func(xi1, xi2, t), dtype=float)

    def _deriv(self, xi1, xi2, t, axes):
        """Mixed derivative along ``axes`` (0 = xi1, 1 = xi2, 2 = t)."""
        hstep = self._step(len(axes), self.scale)
        w = ((-2, 1.0), (-1, -8.0), (1, 8.0), (2, -1.0))
        pts = [((0.0, 0.0, 0.0), 1.0)]
        for ax in axes:
            new = []
            for off, c in pts:
                for k, wk in w:
                    o = list(off)
                    o[ax] += k * hstep
                    new.append((tuple(o), c * wk / (12.0 * hstep)))
            pts = new
        acc = 0.0
        for (d1, d2, dt), c in pts:
            acc = acc + c * self._eval(xi1 + d1, xi2 + d2, t + dt)
        return acc

    def jet(self, xi1, xi2, t=0.0):
        xi1, xi2, t = np.broadcast_arrays(*(np.asarray(v, float) for v in (xi1, xi2, t)))
        D = lambda *ax: self._deriv(xi1, xi2, t, ax)
        X = self._eval(xi1, xi2, t)
        if self.static:
            Xt = np.zeros_like(X)
            dXt = _pair(Xt, Xt)
        else:
            Xt = D(2)
            dXt = _pair(D(0, 2), D(1, 2))
        return ChartJet(
            X=X,
            dX=_pair(D(0), D(1)),
            d2X=_sym2(D(0, 0), D(0, 1), D(1, 1)),
            d3X=_sym3(D(0, 0, 0), D(0, 0, 1), D(0, 1, 1), D(1, 1, 1)),
            Xt=Xt,
            dXt=dXt,
        )


class TabulatedChart(Chart):
    """Static surface given as X samples on a rectangular lattice.

    Each Cartesian component is interpolated with a quintic tensor spline,
    so derivatives up to third order are smooth.
    """

    name = "tabulated"

    def __init__(self, xi1, xi2, X, **kw):
        from scipy.interpolate import RectBivariateSpline

        xi1 = np.asarray(xi1, float)
        xi2 = np.asarray(xi2, float)
        X = np.asarray(X, float)
        if X.shape != (xi1.size, xi2.size, 3):
            raise ValueError("tabulated X must have shape (n1, n2, 3)")
        if xi1.size < 6 or xi2.size < 6:
            raise ValueError("tabulated chart needs at least 6 samples per direction")
        kw.setdefault("domain", ((xi1[0], xi1[-1]), (xi2[0], xi2[-1])))
        super().__init__(**kw)
        self._splines = [RectBivariateSpline(xi1, xi2, X[..., c], kx=5, ky=5, s=0)
                         for c in range(3)]

    def _ev(self, xi1, xi2, dx, dy):
        return _vec(*[sp.ev(xi1, xi2, dx=dx, dy=dy) for sp in self._splines])

    def jet(self, xi1, xi2, t=0.0):
        xi1, xi2, t = np.broadcast_arrays(*(np.asarray(v, float) for v in (xi1, xi2, t)))
        shape = xi1.shape
        u, v = xi1.ravel(), xi2.ravel()
        E = lambda dx, dy: self._ev(u, v, dx, dy).reshape(shape + (3,))
        X = E(0, 0)
        zv = np.zeros_like(X)
        return ChartJet(
            X=X,
            dX=_pair(E(1, 0), E(0, 1)),
            d2X=_sym2(E(2, 0), E(1, 1), E(0, 2)),
            d3X=_sym3(E(3, 0), E(2, 1), E(1, 2), E(0, 3)),
            Xt=zv,
            dXt=_pair(zv, zv),
        )


_NAMED = {
    "plane": (Plane, 0),
    "translating-plane": (TranslatingPlane, 1),
    "cylinder": (Cylinder, 1),
    "sphere": (Sphere, 1),
    "paraboloid": (Paraboloid, 2),
    "wavy-plane": (WavyPlane, 3),
}

_NAME_RE = re.compile(r"^\s*([a-z][a-z\-]*)\s*(?:\((.*)\))?\s*$")


def named_chart(text, domain=None, s0=1):
    """Build a chart from strings like ``"cylinder(1)"`` or ``"paraboloid(0.5,0.25)"``.

    Parameters may be omitted to get the defaults.
    """
    m = _NAME_RE.match(text)
    if not m or m.group(1) not in _NAMED:
        known = ", ".join(sorted(_NAMED))
        raise ValueError(f"unknown chart {text!r}; expected one of: {known}")
    cls, nmax = _NAMED[m.group(1)]
    args = []
    if m.group(2) is not None and m.group(2).strip():
        try:
            args = [float(a) for a in m.group(2).split(",")]
        except ValueError:
            raise ValueError(f"chart parameters must be numbers in {text!r}") from None
    if len(args) > nmax:
        raise ValueError(f"chart {m.group(1)!r} takes at most {nmax} parameter(s)")
    kw = {"s0": s0}
    if domain is not None:
        kw["domain"] = domain
    return cls(*args, **kw)


def chart_names():
    return sorted(_NAMED)

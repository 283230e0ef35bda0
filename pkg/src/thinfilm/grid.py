"""Uniform rectangular grids, nodal fields and finite-difference operators."""
import csv
from dataclasses import dataclass, field

import numpy as np

from . import kernels

QUANTITIES = ("pressure", "gap", "velocity-component", "coefficient", "other")


@dataclass(frozen=True)
class Grid:
    """n1 x n2 nodes on [lo1, hi1] x [lo2, hi2].

    Periodic directions drop the duplicated end node, so the spacing is
    L/n; Dirichlet directions include both ends, spacing L/(n-1).
    """

    n1: int
    n2: int
    domain: tuple = ((0.0, 1.0), (0.0, 1.0))
    periodic: tuple = (False, False)

    def __post_init__(self):
        if self.n1 < 3 or self.n2 < 3:
            raise ValueError("grid needs at least 3 nodes per direction")
        (a, b), (c, d) = self.domain
        if not (b > a and d > c):
            raise ValueError("empty domain")
        object.__setattr__(self, "domain", ((float(a), float(b)), (float(c), float(d))))
        object.__setattr__(self, "periodic", (bool(self.periodic[0]), bool(self.periodic[1])))

    @property
    def shape(self):
        return (self.n1, self.n2)

    @property
    def size(self):
        return self.n1 * self.n2

    def _spacing(self, k):
        lo, hi = self.domain[k]
        n = (self.n1, self.n2)[k]
        return (hi - lo) / (n if self.periodic[k] else n - 1)

    @property
    def d1(self):
        return self._spacing(0)

    @property
    def d2(self):
        return self._spacing(1)

    @property
    def xi1(self):
        return self.domain[0][0] + self.d1 * np.arange(self.n1)

    @property
    def xi2(self):
        return self.domain[1][0] + self.d2 * np.arange(self.n2)

    def mesh(self):
        return np.meshgrid(self.xi1, self.xi2, indexing="ij")

    def boundary_mask(self):
        """True on nodes of Dirichlet edges."""
        m = np.zeros(self.shape, bool)
        if not self.periodic[0]:
            m[0, :] = m[-1, :] = True
        if not self.periodic[1]:
            m[:, 0] = m[:, -1] = True
        return m

    def cell_weights(self):
        """Trapezoid quadrature weights (periodic directions are uniform)."""
        w1 = np.full(self.n1, self.d1)
        w2 = np.full(self.n2, self.d2)
        if not self.periodic[0]:
            w1[[0, -1]] *= 0.5
        if not self.periodic[1]:
            w2[[0, -1]] *= 0.5
        return np.outer(w1, w2)

    def integrate(self, f):
        return float(np.sum(self.cell_weights() * f))

    def with_size(self, n1, n2):
        return Grid(n1, n2, self.domain, self.periodic)

    # finite differences -------------------------------------------------
    def gradient(self, f):
        b = kernels.backend
        return (b.first_derivative(f, self.d1, self.periodic[0], 0),
                b.first_derivative(f, self.d2, self.periodic[1], 1))

    def divergence(self, w1, w2):
        b = kernels.backend
        return (b.first_derivative(w1, self.d1, self.periodic[0], 0)
                + b.first_derivative(w2, self.d2, self.periodic[1], 1))

    def second_derivatives(self, f):
        """(f_11, f_12, f_22)."""
        _, _, f11, f12, f22 = self.derivatives(f)
        return f11, f12, f22

    def derivatives(self, f):
        """(f_1, f_2, f_11, f_12, f_22) in one pass."""
        return kernels.backend.derivatives(f, self.d1, self.d2, *self.periodic)


@dataclass(frozen=True)
class Field:
    """Nodal values on a grid, scalar (n1, n2) or 2-vector (n1, n2, 2)."""

    grid: Grid
    values: np.ndarray
    t: float = 0.0
    quantity: str = "other"
    name: str = "value"
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.shape[:2] != self.grid.shape or v.ndim not in (2, 3):
            raise ValueError(f"field shape {v.shape} does not match grid {self.grid.shape}")
        if v.ndim == 3 and v.shape[2] != 2:
            raise ValueError("vector fields carry exactly 2 components")
        if not np.all(np.isfinite(v)):
            raise ValueError(f"field {self.name!r} contains NaN or Inf")
        if self.quantity not in QUANTITIES:
            raise ValueError(f"unknown quantity tag {self.quantity!r}")
        v = v.copy()
        v.setflags(write=False)
        object.__setattr__(self, "values", v)


def _fmt(x):
    return format(float(x), ".17g")


def write_csv(path, grid, columns, names=None):
    """Row-major nodal table: ``xi1,xi2,<names...>`` with 17 significant digits.

    ``columns`` is a list of (n1, n2) arrays (or a single array).
    """
    if isinstance(columns, np.ndarray) and columns.ndim == 2:
        columns = [columns]
    columns = [np.asarray(c, float) for c in columns]
    if names is None:
        names = ["value"] + [f"value{k + 1}" for k in range(1, len(columns))]
    X1, X2 = grid.mesh()
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["xi1", "xi2", *names])
        flat = [c.ravel() for c in columns]
        for k, (a, b) in enumerate(zip(X1.ravel(), X2.ravel())):
            w.writerow([_fmt(a), _fmt(b), *[_fmt(c[k]) for c in flat]])


def read_csv(path):
    """Read a nodal CSV back.  Returns (xi1 values, xi2 values, {name: (n1, n2) array})."""
    data = np.genfromtxt(path, delimiter=",", names=True)
    names = data.dtype.names
    x1 = np.unique(data[names[0]])
    x2 = np.unique(data[names[1]])
    shape = (x1.size, x2.size)
    if data.size != x1.size * x2.size:
        raise ValueError(f"{path}: nodes do not form a rectangular lattice")
    cols = {n: np.asarray(data[n]).reshape(shape) for n in names[2:]}
    return x1, x2, cols


def write_field(path, f):
    vals = f.values
    if vals.ndim == 2:
        write_csv(path, f.grid, [vals], ["value"])
    else:
        write_csv(path, f.grid, [vals[..., 0], vals[..., 1]], ["value", "value2"])

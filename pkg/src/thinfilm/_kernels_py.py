"""Pure numpy stencil kernels (fallback backend).

Must stay numerically equivalent to ``_ckernels.pyx``; the test suite
compares the two backends node by node.
"""
import numpy as np

# neighbour slots of the 9-point operator, in storage order
OFFSETS = ((0, 0), (1, 0), (-1, 0), (0, 1), (0, -1), (1, 1), (1, -1), (-1, 1), (-1, -1))


def _d1(f, d, periodic, axis):
    f = np.moveaxis(f, axis, 0)
    out = np.empty_like(f)
    if periodic:
        out[1:-1] = (f[2:] - f[:-2]) / (2.0 * d)
        out[0] = (f[1] - f[-1]) / (2.0 * d)
        out[-1] = (f[0] - f[-2]) / (2.0 * d)
    else:
        # third-order one-sided edges, so differencing a derived field
        # again stays second order next to the edge
        out[1:-1] = (f[2:] - f[:-2]) / (2.0 * d)
        if f.shape[0] >= 4:
            out[0] = (-11.0 * f[0] + 18.0 * f[1] - 9.0 * f[2] + 2.0 * f[3]) / (6.0 * d)
            out[-1] = (11.0 * f[-1] - 18.0 * f[-2] + 9.0 * f[-3] - 2.0 * f[-4]) / (6.0 * d)
        else:
            out[0] = (-3.0 * f[0] + 4.0 * f[1] - f[2]) / (2.0 * d)
            out[-1] = (3.0 * f[-1] - 4.0 * f[-2] + f[-3]) / (2.0 * d)
    return np.moveaxis(out, 0, axis)


def _d2(f, d, periodic, axis):
    f = np.moveaxis(f, axis, 0)
    out = np.empty_like(f)
    dd = d * d
    out[1:-1] = (f[2:] - 2.0 * f[1:-1] + f[:-2]) / dd
    if periodic:
        out[0] = (f[1] - 2.0 * f[0] + f[-1]) / dd
        out[-1] = (f[0] - 2.0 * f[-1] + f[-2]) / dd
    elif f.shape[0] >= 4:
        out[0] = (2.0 * f[0] - 5.0 * f[1] + 4.0 * f[2] - f[3]) / dd
        out[-1] = (2.0 * f[-1] - 5.0 * f[-2] + 4.0 * f[-3] - f[-4]) / dd
    else:
        out[0] = out[1]
        out[-1] = out[1]
    return np.moveaxis(out, 0, axis)


def first_derivative(f, d, periodic, axis):
    return _d1(np.ascontiguousarray(f, dtype=float), d, periodic, axis)


def second_derivative(f, d, periodic, axis):
    return _d2(np.ascontiguousarray(f, dtype=float), d, periodic, axis)


def derivatives(f, d1, d2, per1, per2):
    """All first and second derivatives of a 2-D nodal field.

    Returns (f_1, f_2, f_11, f_12, f_22).  The cross derivative is the
    xi2-difference of the xi1-difference, which gives the 4-point product
    stencil in the interior.
    """
    f = np.ascontiguousarray(f, dtype=float)
    f1 = _d1(f, d1, per1, 0)
    f2 = _d1(f, d2, per2, 1)
    f11 = _d2(f, d1, per1, 0)
    f22 = _d2(f, d2, per2, 1)
    f12 = _d1(f1, d2, per2, 1)
    return f1, f2, f11, f12, f22


def _row_nodes(n, periodic):
    return np.arange(n) if periodic else np.arange(1, n - 1)


def reynolds_coo(K11, K12, K22, d1, d2, per1, per2):
    """COO triplets of the conservative 9-point operator div(K grad p).

    Rows exist for every node that is not on a Dirichlet edge; each row has
    9 slots in ``OFFSETS`` order (duplicates are summed by the caller).
    Face coefficients are arithmetic means of nodal values; the cross terms
    use the nodal off-diagonal coefficient at the neighbour where the
    tangential difference is taken.
    """
    K11 = np.ascontiguousarray(K11, dtype=float)
    K12 = np.ascontiguousarray(K12, dtype=float)
    K22 = np.ascontiguousarray(K22, dtype=float)
    n1, n2 = K11.shape
    I = _row_nodes(n1, per1)
    Jn = _row_nodes(n2, per2)
    i, j = np.meshgrid(I, Jn, indexing="ij")
    i = i.ravel()
    j = j.ravel()
    ip = (i + 1) % n1
    im = (i - 1) % n1
    jp = (j + 1) % n2
    jm = (j - 1) % n2

    r1 = 1.0 / (d1 * d1)
    r2 = 1.0 / (d2 * d2)
    c = 1.0 / (4.0 * d1 * d2)
    kE = 0.5 * (K11[i, j] + K11[ip, j]) * r1
    kW = 0.5 * (K11[i, j] + K11[im, j]) * r1
    kN = 0.5 * (K22[i, j] + K22[i, jp]) * r2
    kS = 0.5 * (K22[i, j] + K22[i, jm]) * r2
    vNE = c * (K12[ip, j] + K12[i, jp])
    vSE = -c * (K12[ip, j] + K12[i, jm])
    vNW = -c * (K12[im, j] + K12[i, jp])
    vSW = c * (K12[im, j] + K12[i, jm])
    vC = -(kE + kW + kN + kS)

    row = i * n2 + j
    cols = [row, ip * n2 + j, im * n2 + j, i * n2 + jp, i * n2 + jm,
            ip * n2 + jp, ip * n2 + jm, im * n2 + jp, im * n2 + jm]
    vals = [vC, kE, kW, kN, kS, vNE, vSE, vNW, vSW]
    rows = np.repeat(row, 9)
    cols = np.stack(cols, axis=1).ravel()
    vals = np.stack(vals, axis=1).ravel()
    return rows.astype(np.int64), cols.astype(np.int64), vals

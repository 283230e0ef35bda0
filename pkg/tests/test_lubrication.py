import numpy as np
import pytest
import sympy as sp
from hypothesis import given, strategies as st

import oracles as O
from thinfilm import charts, kernels
from thinfilm.errors import GapTooSmall, NoConvergence, SingularSystem
from thinfilm.grid import Grid
from thinfilm.lubrication import (LubricationProblem, assemble_reynolds, reconstruct_velocity,
                                  solve_lubrication, solve_pressure)

u, v, t = O.u, O.v, O.t


def slider(n, s=1.0, mu=1.0, method="auto"):
    g = Grid(n + 1, 8, ((0, 1), (0, 1)), (False, True))
    X1, _ = g.mesh()
    prob = LubricationProblem(charts.Plane(), g, h=2 - X1, dh=(-np.ones(g.shape), 0), V=(s, 0), mu=mu)
    sol, prof, system = solve_lubrication(prob, method=method)
    return g, sol, prof, system


def test_slider_matches_closed_form():
    g, sol, _, _ = slider(128)
    ref = O.closed_form_slider(2.0, 1.0, 1.0, 1.0)(g.mesh()[0])
    assert np.abs(sol.p - ref).max() / np.abs(ref).max() < 1e-4
    assert (sol.p[1:-1] > 0).all()
    peak = g.xi1[np.argmax(sol.p[:, 0])]
    assert 0 < peak < 1


def test_closed_form_trivial_cases():
    x = np.linspace(0, 1, 11)
    assert np.all(O.closed_form_slider(1.0, 1.0, 1.0, 1.0)(x) == 0)
    assert np.allclose(O.closed_form_slider(2.0, 1.0, 0.0, 1.0)(x), 0)


def test_parallel_plates_zero_pressure():
    g = Grid(33, 5, ((0, 1), (0, 1)), (False, True))
    prob = LubricationProblem(charts.Plane(), g, h=1.0, dh=(0, 0), V=(1, 0))
    sol, _, _ = solve_lubrication(prob)
    np.testing.assert_allclose(sol.p, 0, atol=1e-14)


def test_cg_agrees_with_direct():
    _, a, _, _ = slider(64, method="direct")
    _, b, _, _ = slider(64, method="cg")
    assert b.diagnostics["method"] == "cg" and b.diagnostics["iterations"] > 1
    np.testing.assert_allclose(a.p, b.p, atol=1e-9)


def test_cg_iteration_cap():
    g, _, _, system = slider(64)
    with pytest.raises(NoConvergence):
        solve_pressure(system, method="cg", tol=1e-14, maxiter=2)


def test_backends_give_identical_pressure():
    if not kernels.compiled_available():
        pytest.skip("compiled kernels not built")
    g = Grid(17, 9, ((-1, 1), (-1, 1)))
    X1, X2 = g.mesh()
    prob = LubricationProblem(charts.Paraboloid(), g, h=1 + 0.2 * X1 * X2, dh=(0.2 * X2, 0.2 * X1), V=(1, 0.5))
    a = assemble_reynolds(prob, backend=kernels.get_backend("python"))
    b = assemble_reynolds(prob, backend=kernels.get_backend("cython"))
    assert (a.matrix != b.matrix).nnz == 0
    np.testing.assert_array_equal(a.rhs, b.rhs)


def test_fully_periodic_is_rejected():
    g = Grid(8, 8, periodic=(True, True))
    with pytest.raises(SingularSystem):
        assemble_reynolds(LubricationProblem(charts.Plane(), g, h=1.0, dh=(0, 0)))


def test_gap_floor_and_inputs():
    g = Grid(8, 8)
    with pytest.raises(GapTooSmall):
        assemble_reynolds(LubricationProblem(charts.Plane(), g, h=1e-9, dh=(0, 0), h0=1e-6))
    with pytest.raises(ValueError):
        LubricationProblem(charts.Plane(), g, h=1.0, dh=(0, 0), mu=0.0)
    with pytest.raises(ValueError):
        LubricationProblem(charts.Plane(), g, h=1.0, dh=(0, 0), p_boundary=np.nan)


def test_operator_symmetric_negative_definite():
    g = Grid(12, 10, ((-1, 1), (-1, 1)))
    X1, X2 = g.mesh()
    prob = LubricationProblem(charts.Paraboloid(), g, h=1 + 0.3 * X1 ** 2, dh=(0.6 * X1, 0))
    A = assemble_reynolds(prob).matrix.toarray()
    np.testing.assert_allclose(A, A.T, atol=1e-12)
    assert np.linalg.eigvalsh(A).max() < 0


def test_flat_sine_source_is_laplacian():
    # p* = sin(pi x) sin(pi y), h = 1: the source equals -2 pi^2 p*
    S = O.surface("plane")
    p = sp.sin(sp.pi * u) * sp.sin(sp.pi * v)
    src = O.numeric(O.reynolds_operator_expr(S, sp.Integer(1), p))
    x = np.linspace(0, 1, 7)
    np.testing.assert_allclose(src(x, x[::-1]), -2 * np.pi ** 2 * O.numeric(p)(x, x[::-1]), atol=1e-12)
    assert O.reynolds_operator_expr(S, 1 + u, sp.Integer(3)) == 0


MMS = [
    ("paraboloid", (0.5, 0.25), charts.Paraboloid(), ((-1, 1), (-1, 1)), (False, False), 0.0),
    ("cylinder", (1.0,), charts.Cylinder(1.0), ((0, 2 * np.pi), (0, 1)), (True, False), 0.0),
    ("sphere", (2.0,), charts.Sphere(2.0), ((0.5, 2.6), (0, 2 * np.pi)), (False, True), 0.0),
    ("wavy-plane", (0.1, 2 * sp.pi, 1.0), charts.WavyPlane(0.1, 2 * np.pi, 1.0), ((0, 1), (0, 1)), (True, False), 0.3),
]


@pytest.mark.parametrize("name,params,chart,dom,per,tt", MMS, ids=[m[0] for m in MMS])
def test_reynolds_mms_second_order(name, params, chart, dom, per, tt):
    S = O.surface(name, *params)
    L1 = dom[0][1] - dom[0][0]
    L2 = dom[1][1] - dom[1][0]
    a = 2 * sp.pi * (u - dom[0][0]) / L1
    b = 2 * sp.pi * (v - dom[1][0]) / L2
    h = 1 + 0.2 * sp.sin(a) * sp.cos(b) + 0.1 * t * sp.cos(a)
    p = sp.cos(a + 0.3) * sp.sin(b + 0.5) + 0.5 * sp.sin(a) ** 2
    V = (0.3 + 0.1 * sp.cos(b), 0.2 * sp.sin(a))
    W = (-0.1 * sp.sin(b), 0.1)
    src = O.reynolds_operator_expr(S, h, p) - O.reynolds_rhs_expr(S, h, V, W, mu=1.3)
    errs = []
    for n in (16, 32, 64):
        g = Grid(n if per[0] else n + 1, n if per[1] else n + 1, dom, per)
        X1, X2 = g.mesh()
        ev = lambda e: O.numeric(e)(X1, X2, tt)
        prob = LubricationProblem(chart, g, h=ev(h), dh=(ev(h.diff(u)), ev(h.diff(v))), dhdt=ev(h.diff(t)),
                                  V=tuple(ev(x) for x in V), W=tuple(ev(x) for x in W), mu=1.3,
                                  p_boundary=ev(p), t=tt, source=ev(src))
        sol, _, _ = solve_lubrication(prob)
        errs.append(np.abs(sol.p - ev(p)).max())
    orders = np.log2(np.array(errs[:-1]) / errs[1:])
    assert np.all(np.abs(orders - 2) < 0.3), (errs, orders)


def test_rescaled_pressure_scales_with_eps_cubed():
    g = Grid(33, 5, ((0, 1), (0, 1)), (False, True))
    X1, _ = g.mesh()
    base = dict(chart=charts.Plane(), grid=g, h=2 - X1, dh=(-np.ones(g.shape), 0), V=(1, 0))
    p1 = solve_lubrication(LubricationProblem(**base))[0].p
    pe = solve_lubrication(LubricationProblem(**base, rescale_eps=0.1))[0].p
    np.testing.assert_allclose(pe, p1 / 0.1 ** 2, rtol=1e-9, atol=1e-12)


@given(st.floats(-2, 2), st.floats(-2, 2), st.floats(-2, 2), st.floats(-2, 2), st.floats(0.1, 5))
def test_velocity_wall_values(v1, v2, w1, w2, mu):
    g = Grid(9, 7, ((-1, 1), (-1, 1)))
    X1, X2 = g.mesh()
    prob = LubricationProblem(charts.Paraboloid(), g, h=1 + 0.2 * X1, dh=(0.2, 0), V=(v1, v2), W=(w1, w2), mu=mu)
    sol, prof, _ = solve_lubrication(prob)
    lo, hi = prof.u(0.0), prof.u(1.0)
    for k, (a, b) in enumerate(((v1, w1), (v2, w2))):
        assert np.abs(lo[k] - a).max() <= 1e-14
        assert np.abs(hi[k] - b).max() <= 1e-14


def test_flux_matches_profile_quadrature():
    _, sol, prof, _ = slider(32)
    from scipy.integrate import simpson
    x = np.linspace(0, 1, 5)
    q = simpson(np.stack([prof.u(xx)[0] for xx in x]), x=x, axis=0) * prof.h
    np.testing.assert_allclose(prof.flux()[0], q, rtol=1e-13)
    # constant flux along a 1-D slider
    f = prof.flux()[0][:, 0]
    assert np.ptp(f[2:-2]) < 1e-3 * np.abs(f).max()

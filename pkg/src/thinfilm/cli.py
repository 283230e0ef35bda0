"""Command line: ``thinfilm <geometry|lubricate|shallow> --config FILE``.

Exit status is 0 on success, otherwise the ``exit_code`` of the error family
(2 config, 3 geometry, 4 gap, 5 solver, 6 time stepping, 1 other).
"""
import argparse
import re
import sys
from pathlib import Path

import numpy as np

from . import __version__, kernels
from .charts import TabulatedChart, named_chart
from .coefficients import coefficient_table, geometric_coefficients
from .config import parse_config
from .errors import NoConvergence, ThinFilmError, ValidationError
from .geometry import sample_geometry
from .grid import Grid, read_csv, write_csv
from .lubrication import LubricationProblem, solve_lubrication

_NUM = ".17g"


def _f(x):
    return format(float(x), _NUM)


def _write_kv(path, items):
    with open(path, "w") as fh:
        for k, v in items:
            if isinstance(v, float):
                v = _f(v)
            fh.write(f"{k} = {v}\n")


def _tlabel(t):
    return format(t, ".6f")


# --------------------------------------------------------------------------
# set-up helpers

def build_chart(cfg):
    if "name" in cfg.chart:
        return named_chart(cfg.chart["name"], domain=cfg.domain)
    x1, x2, cols = read_csv(cfg.chart["tabulated"])
    missing = [c for c in ("x", "y", "z") if c not in cols]
    if missing:
        raise ValidationError([("chart.tabulated", f"missing column(s) {', '.join(missing)}")])
    X = np.stack([cols["x"], cols["y"], cols["z"]], -1)
    kw = {} if cfg.domain is None else {"domain": cfg.domain}
    return TabulatedChart(x1, x2, X, **kw)


def build_grid(cfg, chart):
    return Grid(cfg.grid[0], cfg.grid[1], chart.domain, cfg.periodic)


def gap_on_grid(cfg, grid, t):
    """(h, dh1, dh2, dhdt) at the grid nodes."""
    X1, X2 = grid.mesh()
    if "h" in cfg.gap:
        e = cfg.gap["h"]
        return e(X1, X2, t), e.diff("xi1")(X1, X2, t), e.diff("xi2")(X1, X2, t), e.diff("t")(X1, X2, t)
    from scipy.interpolate import RectBivariateSpline
    x1, x2, cols = read_csv(cfg.gap["file"])
    if "h" not in cols:
        raise ValidationError([("gap.file", "missing column h")])
    sp_h = RectBivariateSpline(x1, x2, cols["h"], kx=3, ky=3, s=0)
    ev = lambda dx, dy: sp_h(X1.ravel(), X2.ravel(), dx=dx, dy=dy, grid=False).reshape(X1.shape)
    dhdt = np.zeros(X1.shape)
    if "dhdt" in cols:
        sp_t = RectBivariateSpline(x1, x2, cols["dhdt"], kx=3, ky=3, s=0)
        dhdt = sp_t(X1.ravel(), X2.ravel(), grid=False).reshape(X1.shape)
    return ev(0, 0), ev(1, 0), ev(0, 1), dhdt


def _traceability(path, rows):
    with open(path, "w") as fh:
        fh.write("# output -> quantity and defining relation\n")
        for k, v in rows:
            fh.write(f"{k}: {v}\n")


# --------------------------------------------------------------------------
# pipelines

def run_geometry(cfg, out):
    chart = build_chart(cfg)
    grid = build_grid(cfg, chart)
    X1, X2 = grid.mesh()
    s = sample_geometry(chart, X1, X2, cfg.t)
    names = ["E", "F", "G", "e", "f", "g", "A0", "A1", "A2", "KG", "Km", "kplus", "kminus"]
    write_csv(out / "geometry.csv", grid, [getattr(s, n) for n in names], names)
    files = ["geometry.csv"]
    if cfg.output["coefficients"]:
        tab = coefficient_table(s, geometric_coefficients(s))
        write_csv(out / "coefficients.csv", grid, list(tab.values()), list(tab.keys()))
        files.append("coefficients.csv")
    _write_kv(out / "summary.txt", [
        ("model", "geometry"), ("chart", chart.label()), ("grid", f"{grid.n1}x{grid.n2}"),
        ("t", float(cfg.t)), ("min_A0", float(s.A0.min())),
        ("KG_min", float(s.KG.min())), ("KG_max", float(s.KG.max())),
        ("Km_min", float(s.Km.min())), ("Km_max", float(s.Km.max())),
        ("files", ",".join(files)),
    ])
    _traceability(out / "traceability.txt", [
        ("geometry.csv:E,F,G", "first fundamental form, a_l . a_m"),
        ("geometry.csv:e,f,g", "second fundamental form, a3 . d_l d_m X"),
        ("geometry.csv:A0,A1,A2", "area expansion A(eps) = A0 + eps xi3 h A1 + (eps xi3 h)^2 A2"),
        ("geometry.csv:KG,Km", "KG = A2/A0, Km = -A1/(2 A0)"),
        ("geometry.csv:kplus,kminus", "roots of A0 k^2 + A1 k + A2 = 0"),
        ("coefficients.csv", "geometric coefficient families, 1-based index suffixes"),
    ])
    return 0


def run_lubricate(cfg, out):
    chart = build_chart(cfg)
    grid = build_grid(cfg, chart)
    X1, X2 = grid.mesh()
    t = cfg.t
    lub = cfg.lubricate
    h, dh1, dh2, dhdt = gap_on_grid(cfg, grid, t)
    V = tuple(e(X1, X2, t) for e in lub["V"])
    W = tuple(e(X1, X2, t) for e in lub["W"])
    prob = LubricationProblem(chart=chart, grid=grid, h=h, dh=(dh1, dh2), dhdt=dhdt, V=V, W=W,
                              mu=lub["mu"], p_boundary=lub["p_boundary"](X1, X2, t), t=t,
                              h0=cfg.gap["h0"], rescale_eps=lub.get("rescale_eps"))
    sol, prof, system = solve_lubrication(prob, method=lub["method"], tol=lub["tol"])
    write_csv(out / "pressure.csv", grid, [sol.p], ["p"])
    files = ["pressure.csv"]
    for x in lub["velocity_slices"]:
        u1, u2 = prof.u(x)
        name = f"velocity_xi3={x:g}.csv"
        write_csv(out / name, grid, [u1, u2, np.broadcast_to(prof.u3(x), grid.shape)], ["u1", "u2", "u3"])
        files.append(name)
    if cfg.output["coefficients"]:
        s = system.sample
        tab = coefficient_table(s, geometric_coefficients(s))
        write_csv(out / "coefficients.csv", grid, list(tab.values()), list(tab.keys()))
        files.append("coefficients.csv")
    d = sol.diagnostics
    _write_kv(out / "diagnostics.txt", [
        ("model", "lubricate"), ("chart", chart.label()), ("grid", f"{grid.n1}x{grid.n2}"),
        ("backend", kernels.backend.name),
        ("method", d["method"]), ("unknowns", d["unknowns"]), ("iterations", d["iterations"]),
        ("residual", float(d["residual"])), ("tol", float(lub["tol"])),
        ("p_min", float(sol.p.min())), ("p_max", float(sol.p.max())),
        ("files", ",".join(files)),
    ])
    _traceability(out / "traceability.txt", [
        ("pressure.csv:p", "leading-order pressure, generalized Reynolds equation "
         "(1/sqrt(A0)) div((h^3/sqrt(A0)) M grad p) = 12 mu dh/dt + 12 mu h (A1/A0) wn "
         "- 6 mu grad h . (W - V) + 6 mu h covdiv(W + V)"),
        ("velocity_xi3=<v>.csv:u1,u2", "zeroth-order tangential profile "
         "(1 - xi3) V + xi3 W + (h^2/(2 mu)) (xi3^2 - xi3) ginv grad p"),
        ("velocity_xi3=<v>.csv:u3", "zeroth-order normal velocity, X_t . a3"),
        ("diagnostics.txt", "solver method, iteration count, relative residual"),
    ])
    if d["residual"] > lub["tol"]:
        raise NoConvergence(d["iterations"], d["residual"])
    return 0


def run_shallow(cfg, out):
    from .shallow_water import (ShallowWaterProblem, ShallowWaterState, first_order_fields,
                                integrate, mass, recover_pressure, scaled_output)
    chart = build_chart(cfg)
    grid = build_grid(cfg, chart)
    X1, X2 = grid.mesh()
    sw = cfg.shallow
    pi0e = sw["pi0"]
    f0e = sw["f0"]
    prob = ShallowWaterProblem(
        chart=chart, grid=grid, rho0=sw["rho0"], nu=sw["nu"], CR=sw["CR"], s0=sw["s0"],
        pi0=lambda a, b, t: pi0e(a, b, t),
        f0=None if all(e.is_constant and e(0, 0, 0) == 0 for e in f0e)
        else (lambda a, b, t: (f0e[0](a, b, t), f0e[1](a, b, t))),
        h0=cfg.gap["h0"], cfl=sw["cfl"], visc=sw["visc"])
    h, _, _, _ = gap_on_grid(cfg, grid, 0.0)
    V1, V2 = (e(X1, X2, 0.0) for e in sw["V"])
    state = prob.initialize(ShallowWaterState(0.0, h, V1, V2))
    eps = cfg.output.get("eps")
    snaps = []

    def dump(n, st):
        lab = _tlabel(st.t)
        so = scaled_output(st, eps) if eps else st
        write_csv(out / f"state_{lab}.csv", grid, [so.h, so.V1, so.V2], ["h", "V1", "V2"])
        pf = recover_pressure(prob, st)
        write_csv(out / f"pressure_{lab}.csv", grid, [pf.p0, pf.pi1, pf.p0_long],
                  ["p0", "pi1", "p0_divergence_form"])
        fo = first_order_fields(prob, st)
        write_csv(out / f"first_order_{lab}.csv", grid, [fo.jump1, fo.jump2, fo.u3(1.0)],
                  ["W1_minus_V1", "W2_minus_V2", "u3_at_xi3_1"])
        snaps.append((n, st.t, mass(prob, st), float(np.abs(pf.discrepancy).max())))

    dump(0, state)
    state, hist = integrate(prob, state, sw["t_end"], dt=sw.get("dt"), safety=sw["safety"],
                            every=int(cfg.output["every"]), callback=dump)
    items = [("model", "shallow"), ("chart", chart.label()), ("grid", f"{grid.n1}x{grid.n2}"),
             ("backend", kernels.backend.name), ("gauge", "V^1 = 0"),
             ("steps", len(hist)), ("t_final", float(state.t)),
             ("dt_min", float(min((r["dt"] for r in hist), default=0.0))),
             ("dt_max", float(max((r["dt"] for r in hist), default=0.0))),
             ("cfl_adv_max", float(max((r["cfl_adv"] for r in hist), default=0.0))),
             ("cfl_visc_max", float(max((r["cfl_visc"] for r in hist), default=0.0))),
             ("snapshots", len(snaps))]
    for n, t, m, disc in snaps:
        items.append((f"mass[{n}]", f"{_f(t)} {_f(m)}"))
    for n, t, m, disc in snaps:
        items.append((f"pressure_form_gap[{n}]", _f(disc)))
    for r in hist:
        items.append((f"cfl[{r['step']}]", f"{_f(r['t'])} {_f(r['dt'])} {_f(r['cfl_adv'])} {_f(r['cfl_visc'])}"))
    _write_kv(out / "summary.txt", items)
    _traceability(out / "traceability.txt", [
        ("state_<t>.csv:h", "gap, mass balance dh/dt = -(h/sqrt(A0)) div(sqrt(A0) V) - h (A1/A0) wn"
         + (" (scaled by eps)" if eps else "")),
        ("state_<t>.csv:V1,V2", "depth-averaged tangential velocity, curved shallow-water momentum balance"),
        ("pressure_<t>.csv:p0", "zeroth-order pressure (2 mu/h) dh/dt + pi0"),
        ("pressure_<t>.csv:pi1", "upper-wall pressure, equal to the applied lower-wall pressure pi0"),
        ("pressure_<t>.csv:p0_divergence_form", "-2 mu covdiv(V) - 2 mu (A1/A0) wn + pi0"),
        ("first_order_<t>.csv:W1_minus_V1,W2_minus_V2",
         "first-order tangential jumps -h [ginv grad wn + B V / A0]; gauge V^1 = 0"),
        ("first_order_<t>.csv:u3_at_xi3_1", "first-order normal velocity xi3 dh/dt at xi3 = 1"),
        ("summary.txt:mass[n]", "t and integral of h sqrt(A0) over the parameter domain (reported, not asserted)"),
        ("summary.txt:cfl[n]", "t, dt, advective and viscous CFL fractions"),
    ])
    return 0


PIPELINES = {"geometry": run_geometry, "lubricate": run_lubricate, "shallow": run_shallow}


def _grid_arg(text):
    m = re.fullmatch(r"\s*(\d+)\s*[xX]\s*(\d+)\s*", text)
    if not m:
        raise argparse.ArgumentTypeError("expected N1xN2, e.g. 64x32")
    return int(m.group(1)), int(m.group(2))


def build_parser():
    p = argparse.ArgumentParser(prog="thinfilm", description="Thin-film flow on curved surfaces.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("mode", choices=sorted(PIPELINES))
    p.add_argument("--config", required=True, type=Path)
    p.add_argument("--out", type=Path, default=None, help="output directory (overrides output.dir)")
    p.add_argument("--grid", type=_grid_arg, default=None, help="N1xN2, overrides grid.n")
    p.add_argument("--tol", type=float, default=None, help="linear solver tolerance")
    return p


def run(mode, config, out=None, grid=None, tol=None):
    """Run one pipeline; returns the output directory."""
    cfg = parse_config(config, overrides={"grid": grid, "tol": tol})
    if cfg.model != mode:
        raise ValidationError([("model", f"config is for {cfg.model!r} but mode {mode!r} was requested")])
    outdir = Path(out) if out is not None else (Path(config).parent / cfg.output["dir"])
    outdir.mkdir(parents=True, exist_ok=True)
    PIPELINES[mode](cfg, outdir)
    return outdir


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        run(args.mode, args.config, args.out, args.grid, args.tol)
    except ThinFilmError as exc:
        print(f"thinfilm: {type(exc).__name__}: {exc}", file=sys.stderr)
        return exc.exit_code
    except (ValueError, OSError) as exc:
        print(f"thinfilm: {type(exc).__name__}: {exc}", file=sys.stderr)
        return ThinFilmError.exit_code
    return 0


if __name__ == "__main__":
    sys.exit(main())

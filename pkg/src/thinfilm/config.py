"""Run configuration: TOML file -> validated RunConfig.

Every problem found is collected and reported together as a
ValidationError carrying (field path, message) pairs.
"""
import re
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .errors import ParseError, ValidationError
from .expr import Expr, ExprError

MODELS = ("geometry", "lubricate", "shallow")


@dataclass
class RunConfig:
    model: str
    chart: dict                     # {"name": str} or {"tabulated": Path}
    domain: tuple
    grid: tuple                     # (n1, n2)
    periodic: tuple
    gap: dict = field(default_factory=dict)          # {"h": Expr} or {"file": Path}, "h0", "dhdt"
    lubricate: dict = field(default_factory=dict)
    shallow: dict = field(default_factory=dict)
    output: dict = field(default_factory=dict)
    t: float = 0.0
    source: Path = None


_LOC = re.compile(r"\(at line (\d+), column (\d+)\)")


def _expr(v, path, errs, allow_t=True):
    try:
        e = Expr.parse(v)
    except ExprError as exc:
        col = f" (column {exc.column})" if exc.column else ""
        errs.append((path, f"{exc}{col}"))
        return None
    if not allow_t and e.depends_on("t"):
        errs.append((path, "must not depend on t"))
    return e


def _num(d, key, path, errs, default=None, positive=False, nonneg=False, integer=False):
    if key not in d:
        if default is None:
            errs.append((f"{path}.{key}", "required"))
        return default
    v = d[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        errs.append((f"{path}.{key}", f"expected a number, got {v!r}"))
        return default
    if integer and int(v) != v:
        errs.append((f"{path}.{key}", "expected an integer"))
    if not np.isfinite(v):
        errs.append((f"{path}.{key}", "must be finite"))
    elif positive and v <= 0:
        errs.append((f"{path}.{key}", f"must be positive (got {v})"))
    elif nonneg and v < 0:
        errs.append((f"{path}.{key}", f"must be non-negative (got {v})"))
    return v


def _pair_expr(d, key, path, errs, default=("0", "0")):
    v = d.get(key, list(default))
    if not isinstance(v, (list, tuple)) or len(v) != 2:
        errs.append((f"{path}.{key}", "expected a list of two expressions"))
        return None
    return tuple(_expr(x, f"{path}.{key}[{k}]", errs) for k, x in enumerate(v))


def _unknown_keys(d, allowed, path, errs):
    for k in d:
        if k not in allowed:
            errs.append((f"{path}.{k}" if path else k, "unknown key"))


def load_toml(path):
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ParseError(f"cannot read configuration: {exc.strerror}", path=path) from None
    try:
        return tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        msg = str(exc)
        m = _LOC.search(msg)
        line, col = (int(m.group(1)), int(m.group(2))) if m else (None, None)
        raise ParseError(_LOC.sub("", msg).strip(), line, col, path) from None


def parse_config(path, overrides=None):
    """Read and validate a config file.

    ``overrides`` may hold "grid" (n1, n2) and "tol" from the command line.
    """
    path = Path(path)
    raw = load_toml(path)
    return validate(raw, base=path.parent, source=path, overrides=overrides)


def validate(raw, base=Path("."), source=None, overrides=None):
    errs = []
    overrides = overrides or {}
    _unknown_keys(raw, ("model", "t", "chart", "grid", "gap", "lubricate", "shallow", "output"), "", errs)

    model = raw.get("model")
    if model not in MODELS:
        errs.append(("model", f"expected one of {', '.join(MODELS)}, got {model!r}"))
    t = _num(raw, "t", "", errs, default=0.0)

    # chart ------------------------------------------------------------
    ch = raw.get("chart", {})
    chart = {}
    domain = None
    if not isinstance(ch, dict):
        errs.append(("chart", "expected a table"))
        ch = {}
    _unknown_keys(ch, ("name", "tabulated", "domain"), "chart", errs)
    if ("name" in ch) == ("tabulated" in ch):
        errs.append(("chart", "give exactly one of chart.name or chart.tabulated"))
    elif "name" in ch:
        from .charts import named_chart
        try:
            named_chart(str(ch["name"]))
            chart["name"] = str(ch["name"])
        except ValueError as exc:
            errs.append(("chart.name", str(exc)))
    else:
        p = (base / ch["tabulated"]).resolve()
        if not p.is_file():
            errs.append(("chart.tabulated", f"file not found: {p}"))
        chart["tabulated"] = p
    if "domain" in ch:
        d = ch["domain"]
        ok = (isinstance(d, list) and len(d) == 4
              and all(isinstance(x, (int, float)) and not isinstance(x, bool) for x in d))
        if not ok:
            errs.append(("chart.domain", "expected [lo1, hi1, lo2, hi2]"))
        elif not (d[1] > d[0] and d[3] > d[2]):
            errs.append(("chart.domain", "empty interval"))
        else:
            domain = ((float(d[0]), float(d[1])), (float(d[2]), float(d[3])))

    # grid -------------------------------------------------------------
    gr = raw.get("grid", {})
    _unknown_keys(gr, ("n", "periodic"), "grid", errs)
    n = overrides.get("grid") or gr.get("n")
    shape = None
    if not (isinstance(n, (list, tuple)) and len(n) == 2 and all(isinstance(k, int) and not isinstance(k, bool) for k in n)):
        errs.append(("grid.n", "expected two integers [n1, n2]"))
    elif min(n) < 3:
        errs.append(("grid.n", "at least 3 nodes per direction"))
    else:
        shape = (int(n[0]), int(n[1]))
    per = gr.get("periodic", [False, False])
    if not (isinstance(per, list) and len(per) == 2 and all(isinstance(x, bool) for x in per)):
        errs.append(("grid.periodic", "expected two booleans"))
        per = [False, False]

    # gap --------------------------------------------------------------
    gp = raw.get("gap", {})
    gap = {}
    if model in ("lubricate", "shallow"):
        _unknown_keys(gp, ("h", "file", "h0"), "gap", errs)
        if ("h" in gp) == ("file" in gp):
            errs.append(("gap", "give exactly one of gap.h (expression) or gap.file"))
        elif "h" in gp:
            gap["h"] = _expr(gp["h"], "gap.h", errs, allow_t=(model == "lubricate"))
        else:
            p = (base / gp["file"]).resolve()
            if not p.is_file():
                errs.append(("gap.file", f"file not found: {p}"))
            gap["file"] = p
        gap["h0"] = _num(gp, "h0", "gap", errs, default=1e-8, nonneg=True)

    # lubrication ------------------------------------------------------
    lub = {}
    if model == "lubricate":
        lb = raw.get("lubricate", {})
        _unknown_keys(lb, ("mu", "V", "W", "p_boundary", "method", "tol", "velocity_slices",
                           "rescale_eps", "coefficients"), "lubricate", errs)
        lub["mu"] = _num(lb, "mu", "lubricate", errs, positive=True)
        lub["V"] = _pair_expr(lb, "V", "lubricate", errs)
        lub["W"] = _pair_expr(lb, "W", "lubricate", errs)
        lub["p_boundary"] = _expr(lb.get("p_boundary", "0"), "lubricate.p_boundary", errs)
        lub["method"] = lb.get("method", "auto")
        if lub["method"] not in ("auto", "direct", "cg"):
            errs.append(("lubricate.method", "expected auto, direct or cg"))
        lub["tol"] = overrides.get("tol") or _num(lb, "tol", "lubricate", errs, default=1e-10, positive=True)
        sl = lb.get("velocity_slices", [0.0, 0.5, 1.0])
        if not (isinstance(sl, list) and all(isinstance(x, (int, float)) and 0 <= x <= 1 for x in sl)):
            errs.append(("lubricate.velocity_slices", "expected numbers in [0, 1]"))
            sl = []
        lub["velocity_slices"] = [float(x) for x in sl]
        if "rescale_eps" in lb:
            lub["rescale_eps"] = _num(lb, "rescale_eps", "lubricate", errs, positive=True)
        if shape is not None and all(per):
            errs.append(("grid.periodic", "the pressure problem needs at least one Dirichlet direction"))

    # shallow water ----------------------------------------------------
    sw = {}
    if model == "shallow":
        s = raw.get("shallow", {})
        _unknown_keys(s, ("mode", "rho0", "nu", "CR", "s0", "pi0", "f0", "V", "t_end", "dt",
                          "safety", "cfl", "visc", "boundary"), "shallow", errs)
        mode = s.get("mode", "evolve-h")
        if mode == "prescribed-h":
            errs.append(("shallow.mode", "prescribed gap with the wall pressure as unknown is not "
                         "supported (the constrained variant where h is given and pi0 must be "
                         "solved for); use mode = \"evolve-h\""))
        elif mode != "evolve-h":
            errs.append(("shallow.mode", f"expected \"evolve-h\", got {mode!r}"))
        sw["rho0"] = _num(s, "rho0", "shallow", errs, positive=True)
        sw["nu"] = _num(s, "nu", "shallow", errs, positive=True)
        sw["CR"] = _num(s, "CR", "shallow", errs, default=0.0, nonneg=True)
        s0 = s.get("s0", 1)
        if s0 not in (-1, 1) or isinstance(s0, bool):
            errs.append(("shallow.s0", "must be -1 or 1"))
        sw["s0"] = s0
        sw["pi0"] = _expr(s.get("pi0", "0"), "shallow.pi0", errs)
        sw["f0"] = _pair_expr(s, "f0", "shallow", errs)
        sw["V"] = _pair_expr(s, "V", "shallow", errs)
        sw["t_end"] = _num(s, "t_end", "shallow", errs, positive=True)
        if "dt" in s:
            sw["dt"] = _num(s, "dt", "shallow", errs, positive=True)
        sw["safety"] = _num(s, "safety", "shallow", errs, default=0.9, positive=True)
        if sw["safety"] is not None and sw["safety"] > 1:
            errs.append(("shallow.safety", "must not exceed 1"))
        sw["cfl"] = _num(s, "cfl", "shallow", errs, default=0.4, positive=True)
        sw["visc"] = _num(s, "visc", "shallow", errs, default=0.25, positive=True)
        b = s.get("boundary", "hold")
        if b != "hold":
            errs.append(("shallow.boundary", "only \"hold\" (keep initial edge values) is supported"))

    # output -----------------------------------------------------------
    out = raw.get("output", {})
    _unknown_keys(out, ("dir", "every", "coefficients", "eps"), "output", errs)
    output = {"dir": Path(out.get("dir", "out")), "coefficients": bool(out.get("coefficients", False))}
    if "coefficients" in out and not isinstance(out["coefficients"], bool):
        errs.append(("output.coefficients", "expected true or false"))
    output["every"] = _num(out, "every", "output", errs, default=10, positive=True, integer=True)
    if "eps" in out:
        output["eps"] = _num(out, "eps", "output", errs, positive=True)

    if errs:
        raise ValidationError(errs)
    return RunConfig(model=model, chart=chart, domain=domain, grid=shape, periodic=tuple(per),
                     gap=gap, lubricate=lub, shallow=sw, output=output, t=float(t), source=source)

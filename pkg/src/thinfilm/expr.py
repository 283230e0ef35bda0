"""Tiny arithmetic grammar for closed-form fields.

Accepted: numeric literals, the variables ``xi1``, ``xi2``, ``t``, the
constant ``pi``, binary ``+ - * /``, unary minus, powers (``**``, ``^`` or
``pow(a, b)``) and the functions ``sin``, ``cos``, ``exp``.  Anything else is
rejected at parse time.  Expressions can be evaluated on numpy arrays and
differentiated symbolically, which gives exact derivatives of configured
gap and velocity fields.
"""
import ast
import math

import numpy as np

VARIABLES = ("xi1", "xi2", "t")
FUNCTIONS = ("sin", "cos", "exp")


class ExprError(ValueError):
    def __init__(self, message, column=None):
        self.column = column
        super().__init__(message if column is None else f"{message} (column {column})")


# nodes are tuples: ("num", v) ("var", name) (op, a[, b])

def _num(v):
    return ("num", float(v))


def _is_num(n, v=None):
    return n[0] == "num" and (v is None or n[1] == v)


def _add(a, b):
    if _is_num(a) and _is_num(b):
        return _num(a[1] + b[1])
    if _is_num(a, 0.0):
        return b
    if _is_num(b, 0.0):
        return a
    return ("add", a, b)


def _sub(a, b):
    if _is_num(a) and _is_num(b):
        return _num(a[1] - b[1])
    if _is_num(b, 0.0):
        return a
    if _is_num(a, 0.0):
        return _neg(b)
    return ("sub", a, b)


def _mul(a, b):
    if _is_num(a) and _is_num(b):
        return _num(a[1] * b[1])
    if _is_num(a, 0.0) or _is_num(b, 0.0):
        return _num(0.0)
    if _is_num(a, 1.0):
        return b
    if _is_num(b, 1.0):
        return a
    return ("mul", a, b)


def _div(a, b):
    if _is_num(a, 0.0):
        return _num(0.0)
    if _is_num(b, 1.0):
        return a
    if _is_num(a) and _is_num(b) and b[1] != 0.0:
        return _num(a[1] / b[1])
    return ("div", a, b)


def _neg(a):
    if _is_num(a):
        return _num(-a[1])
    if a[0] == "neg":
        return a[1]
    return ("neg", a)


def _pow(a, b):
    if _is_num(b, 0.0):
        return _num(1.0)
    if _is_num(b, 1.0):
        return a
    if _is_num(a) and _is_num(b):
        return _num(a[1] ** b[1])
    return ("pow", a, b)


def _fn(name, a):
    if _is_num(a):
        return _num(getattr(math, name)(a[1]))
    return (name, a)


_BIN = {ast.Add: _add, ast.Sub: _sub, ast.Mult: _mul, ast.Div: _div, ast.Pow: _pow}


def _convert(node):
    col = getattr(node, "col_offset", None)
    col = None if col is None else col + 1
    if isinstance(node, ast.Expression):
        return _convert(node.body)
    if isinstance(node, ast.Constant):
        if isinstance(node.value, bool) or not isinstance(node.value, (int, float)):
            raise ExprError(f"unsupported literal {node.value!r}", col)
        return _num(node.value)
    if isinstance(node, ast.Name):
        if node.id in VARIABLES:
            return ("var", node.id)
        if node.id == "pi":
            return _num(math.pi)
        raise ExprError(f"unknown name {node.id!r}", col)
    if isinstance(node, ast.UnaryOp):
        if isinstance(node.op, ast.USub):
            return _neg(_convert(node.operand))
        if isinstance(node.op, ast.UAdd):
            return _convert(node.operand)
        raise ExprError("unsupported unary operator", col)
    if isinstance(node, ast.BinOp):
        op = _BIN.get(type(node.op))
        if op is None:
            raise ExprError("unsupported operator", col)
        return op(_convert(node.left), _convert(node.right))
    if isinstance(node, ast.Call):
        if not isinstance(node.func, ast.Name) or node.keywords:
            raise ExprError("unsupported call", col)
        name = node.func.id
        args = [_convert(a) for a in node.args]
        if name in FUNCTIONS:
            if len(args) != 1:
                raise ExprError(f"{name} takes one argument", col)
            return _fn(name, args[0])
        if name == "pow":
            if len(args) != 2:
                raise ExprError("pow takes two arguments", col)
            return _pow(*args)
        raise ExprError(f"unknown function {name!r}", col)
    raise ExprError(f"unsupported syntax ({type(node).__name__})", col)


def _d(n, v):
    kind = n[0]
    if kind == "num":
        return _num(0.0)
    if kind == "var":
        return _num(1.0 if n[1] == v else 0.0)
    if kind == "add":
        return _add(_d(n[1], v), _d(n[2], v))
    if kind == "sub":
        return _sub(_d(n[1], v), _d(n[2], v))
    if kind == "neg":
        return _neg(_d(n[1], v))
    if kind == "mul":
        a, b = n[1], n[2]
        return _add(_mul(_d(a, v), b), _mul(a, _d(b, v)))
    if kind == "div":
        a, b = n[1], n[2]
        return _div(_sub(_mul(_d(a, v), b), _mul(a, _d(b, v))), _pow(b, _num(2.0)))
    if kind == "pow":
        a, b = n[1], n[2]
        db = _d(b, v)
        if _is_num(db, 0.0):
            # constant exponent: b a^(b-1) a'
            return _mul(_mul(b, _pow(a, _sub(b, _num(1.0)))), _d(a, v))
        # general case d(a^b) = a^b (b' log a + b a'/a)
        return _mul(n, _add(_mul(db, ("log", a)), _div(_mul(b, _d(a, v)), a)))
    if kind == "sin":
        return _mul(_fn("cos", n[1]), _d(n[1], v))
    if kind == "cos":
        return _neg(_mul(_fn("sin", n[1]), _d(n[1], v)))
    if kind == "exp":
        return _mul(n, _d(n[1], v))
    if kind == "log":
        return _div(_d(n[1], v), n[1])
    raise AssertionError(kind)


def _eval(n, env):
    kind = n[0]
    if kind == "num":
        return n[1]
    if kind == "var":
        return env[n[1]]
    if kind == "add":
        return _eval(n[1], env) + _eval(n[2], env)
    if kind == "sub":
        return _eval(n[1], env) - _eval(n[2], env)
    if kind == "mul":
        return _eval(n[1], env) * _eval(n[2], env)
    if kind == "div":
        return _eval(n[1], env) / _eval(n[2], env)
    if kind == "neg":
        return -_eval(n[1], env)
    if kind == "pow":
        return np.power(_eval(n[1], env), _eval(n[2], env))
    return getattr(np, kind)(_eval(n[1], env))


_PREC = {"add": 1, "sub": 1, "mul": 2, "div": 2, "neg": 3, "pow": 4}
_SYM = {"add": "+", "sub": "-", "mul": "*", "div": "/", "pow": "**"}


def _str(n, parent=0):
    kind = n[0]
    if kind == "num":
        s = repr(n[1])
        return f"({s})" if n[1] < 0 else s
    if kind == "var":
        return n[1]
    if kind in FUNCTIONS or kind == "log":
        return f"{kind}({_str(n[1])})"
    p = _PREC[kind]
    if kind == "neg":
        s = "-" + _str(n[1], p)
    else:
        s = f"{_str(n[1], p)} {_SYM[kind]} {_str(n[2], p + 1)}"
    return f"({s})" if p < parent or (p == parent and kind != "neg") else s


class Expr:
    """Parsed closed-form expression in (xi1, xi2, t)."""

    def __init__(self, node, source=None):
        self._node = node
        self.source = source if source is not None else _str(node)

    @classmethod
    def parse(cls, text):
        if isinstance(text, (int, float)) and not isinstance(text, bool):
            return cls(_num(text), repr(float(text)))
        if not isinstance(text, str):
            raise ExprError(f"expected an expression string, got {type(text).__name__}")
        src = text.replace("^", "**")
        try:
            tree = ast.parse(src.strip(), mode="eval")
        except SyntaxError as exc:
            raise ExprError(f"syntax error in {text!r}", exc.offset) from None
        return cls(_convert(tree), text)

    def __call__(self, xi1=0.0, xi2=0.0, t=0.0):
        xi1, xi2, t = np.broadcast_arrays(*(np.asarray(v, float) for v in (xi1, xi2, t)))
        with np.errstate(all="ignore"):
            out = _eval(self._node, {"xi1": xi1, "xi2": xi2, "t": t})
        return np.broadcast_to(np.asarray(out, float), xi1.shape).copy()

    def diff(self, var):
        if var not in VARIABLES:
            raise ExprError(f"cannot differentiate with respect to {var!r}")
        return Expr(_d(self._node, var))

    @property
    def is_constant(self):
        return self._node[0] == "num"

    def depends_on(self, var):
        def walk(n):
            if n[0] == "var":
                return n[1] == var
            return any(walk(c) for c in n[1:] if isinstance(c, tuple))
        return walk(self._node)

    def __str__(self):
        return _str(self._node)

    def __repr__(self):
        return f"Expr({self.source!r})"

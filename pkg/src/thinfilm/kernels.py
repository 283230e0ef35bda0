"""Backend selection for the stencil kernels.

The compiled extension is used when it imports; otherwise the numpy
fallback.  ``THINFILM_BACKEND=python`` forces the fallback (handy for
benchmarking and for checking that both give the same numbers).  The thread
count of the compiled kernels comes from ``THINFILM_NUM_THREADS``.
"""
import os

from . import _kernels_py

try:
    from . import _ckernels
except ImportError:  # extension not built
    _ckernels = None

OFFSETS = _kernels_py.OFFSETS


def num_threads():
    try:
        n = int(os.environ.get("THINFILM_NUM_THREADS", "1"))
    except ValueError:
        n = 1
    return max(1, n)


def compiled_available():
    return _ckernels is not None


class _Backend:
    def __init__(self, name):
        self.name = name

    def derivatives(self, f, d1, d2, per1, per2):
        if self.name == "cython":
            return _ckernels.derivatives(f, d1, d2, per1, per2, num_threads())
        return _kernels_py.derivatives(f, d1, d2, per1, per2)

    def first_derivative(self, f, d, periodic, axis):
        if self.name == "cython":
            return _ckernels.first_derivative(f, d, periodic, axis, num_threads())
        return _kernels_py.first_derivative(f, d, periodic, axis)

    def second_derivative(self, f, d, periodic, axis):
        if self.name == "cython":
            return _ckernels.second_derivative(f, d, periodic, axis, num_threads())
        return _kernels_py.second_derivative(f, d, periodic, axis)

    def reynolds_coo(self, K11, K12, K22, d1, d2, per1, per2):
        if self.name == "cython":
            return _ckernels.reynolds_coo(K11, K12, K22, d1, d2, per1, per2, num_threads())
        return _kernels_py.reynolds_coo(K11, K12, K22, d1, d2, per1, per2)


def get_backend(name=None):
    """Return a kernel backend.  ``name`` is "cython", "python" or None (auto)."""
    if name is None:
        name = os.environ.get("THINFILM_BACKEND", "").strip().lower() or None
    if name is None:
        name = "cython" if _ckernels is not None else "python"
    if name not in ("cython", "python"):
        raise ValueError(f"unknown kernel backend {name!r}")
    if name == "cython" and _ckernels is None:
        raise ImportError("compiled kernels are not built; reinstall with a C compiler")
    return _Backend(name)


backend = get_backend()

"""Kernel backend selection.

The compiled Cython kernels are used when the extension imports; otherwise
the numpy fallback is used. Above ``CUTOVER_N`` rows the compiled backend
defers to the numpy kernels, whose BLAS/LAPACK calls win once the per-call
overhead stops dominating (see ``benchmarks/bench_backends.py``).
"""

import contextlib

from . import _pykernels

try:
    from . import _kernels as _compiled
except ImportError:  # pragma: no cover - depends on the build
    _compiled = None

CUTOVER_N = 10

HAVE_COMPILED = _compiled is not None

_active = "compiled" if HAVE_COMPILED else "python"


def available():
    return ("compiled", "python") if HAVE_COMPILED else ("python",)


def active():
    """Name of the backend currently in use."""
    return _active


def set_backend(name):
    """Select ``"compiled"``, ``"python"`` or ``"auto"``."""
    global _active
    if name == "auto":
        name = "compiled" if HAVE_COMPILED else "python"
    if name not in ("compiled", "python"):
        raise ValueError(f"unknown backend {name!r}")
    if name == "compiled" and not HAVE_COMPILED:
        raise RuntimeError("compiled kernels are not built; reinstall with Cython")
    _active = name


@contextlib.contextmanager
def use_backend(name):
    previous = _active
    set_backend(name)
    try:
        yield
    finally:
        set_backend(previous)


def _pick(n):
    if _active == "compiled" and n <= CUTOVER_N:
        return _compiled
    return _pykernels


def cholesky(M, pd_tol):
    return _pick(M.shape[0]).cholesky(M, pd_tol)


def cho_solve(L, B):
    return _pick(L.shape[0]).cho_solve(L, B)


def combine(Ai, Bi, Qi, Aj, Bj, Qj, pd_tol):
    return _pick(Ai.shape[0]).combine(Ai, Bi, Qi, Aj, Bj, Qj, pd_tol)

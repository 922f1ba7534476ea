"""Hot loops of the solver and duality evaluator.

The numba backend is used when numba imports and ``POISSON_CAP_NUMBA`` is not
set to ``0``; otherwise the pure-numpy backend runs. Both expose
``log_pmf_matrix``, ``kl_rows`` and ``ba_solve`` with identical semantics.
"""
import os

from . import _numpy

BACKEND = "numpy"
_impl = _numpy

if os.environ.get("POISSON_CAP_NUMBA", "1") != "0":
    try:
        from . import _numba as _impl  # noqa: F811

        BACKEND = "numba"
    except ImportError:  # pragma: no cover - numba is optional
        _impl = _numpy

log_pmf_matrix = _impl.log_pmf_matrix
kl_rows = _impl.kl_rows
ba_solve = _impl.ba_solve


def backends():
    """Mapping of every importable backend name to its module."""
    out = {"numpy": _numpy}
    try:
        from . import _numba

        out["numba"] = _numba
    except ImportError:  # pragma: no cover
        pass
    return out

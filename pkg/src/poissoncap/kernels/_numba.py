"""numba backend: the kernel bodies compiled with ``njit``."""
from numba import njit

from . import _core

log_pmf_matrix = njit(cache=True)(_core.log_pmf_matrix)
kl_rows = njit(cache=True)(_core.kl_rows)
_core_evaluate = njit(cache=True)(_core._evaluate)
_core_newton = njit(cache=True)(_core._newton_direction)


def _compile_ba():
    # ba_solve calls _evaluate; rebind it to the compiled version for numba
    import types

    g = dict(_core.__dict__)
    g["_evaluate"] = _core_evaluate
    g["_newton_direction"] = _core_newton
    fn = types.FunctionType(_core.ba_solve.__code__, g, "ba_solve")
    return njit(cache=True)(fn)


ba_solve = _compile_ba()

"""Pure-numpy backend: the kernel bodies run uncompiled."""
from ._core import ba_solve, kl_rows, log_pmf_matrix  # noqa: F401

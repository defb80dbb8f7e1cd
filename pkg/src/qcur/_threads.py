"""Thread-count capping via the QCUR_THREADS environment variable.

BLAS libraries read their thread-count variables when the numerics stack is
first imported, so this module must run before numpy does.  The package
__init__ imports it first for exactly that reason.  If numpy was already
imported by the host process the caps are still exported but may not take
effect; reproducibility then depends on the host's own BLAS settings.
"""
import os

_BLAS_VARS = (
    "OMP_NUM_THREADS",
    "OPENBLAS_NUM_THREADS",
    "MKL_NUM_THREADS",
    "NUMEXPR_NUM_THREADS",
    "VECLIB_MAXIMUM_THREADS",
)


def apply_thread_cap() -> int | None:
    """Export BLAS thread caps from QCUR_THREADS.  Returns the cap, if any.

    Variables the user already set explicitly are left alone.
    """
    raw = os.environ.get("QCUR_THREADS")
    if raw is None:
        return None
    try:
        cap = int(raw)
    except ValueError:
        return None
    if cap < 1:
        return None
    for var in _BLAS_VARS:
        os.environ.setdefault(var, str(cap))
    return cap


apply_thread_cap()

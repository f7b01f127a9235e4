"""Backend selection for the hot kernels.

Set ``NKCOLLAB_BACKEND=numpy`` (or ``NKCOLLAB_DISABLE_NUMBA=1``) before import
to force the pure-numpy path. The default is ``numba`` when it imports cleanly.
"""

import os


def _noop_jit(*args, **kwargs):
    if len(args) == 1 and callable(args[0]) and not kwargs:
        return args[0]

    def wrap(f):
        return f

    return wrap


def _have_numba():
    try:
        import numba  # noqa: F401

        return True
    except ImportError:
        return False


HAVE_NUMBA = _have_numba()


def _requested_backend():
    if os.environ.get("NKCOLLAB_DISABLE_NUMBA", "").strip() not in ("", "0"):
        return "numpy"
    name = os.environ.get("NKCOLLAB_BACKEND", "numba").strip().lower()
    if name not in ("numba", "numpy"):
        raise ValueError(f"NKCOLLAB_BACKEND must be 'numba' or 'numpy', got {name!r}")
    return name


BACKEND = _requested_backend()
if BACKEND == "numba" and not HAVE_NUMBA:
    BACKEND = "numpy"

if HAVE_NUMBA:
    from numba import njit
else:
    njit = _noop_jit

"""Hot numeric kernels with selectable backend.

Two interchangeable implementations live here: a numba @njit one
(`numba_impl`) and a pure-numpy one (`numpy_impl`).  The active backend is
chosen once at import time from the environment variable ``QFAIR_KERNELS``:

  * ``auto`` (default) — numba when it imports, numpy otherwise,
  * ``numba``          — require numba, fail loudly if missing,
  * ``numpy``          — force the pure-numpy path.

``benchmarks/kernel_benchmark.py`` times the two implementations against
each other; both are covered by the same unit tests.
"""

import os
import warnings

from . import numpy_impl

_choice = os.environ.get("QFAIR_KERNELS", "auto").lower()

if _choice not in ("auto", "numba", "numpy"):
    raise ValueError(f"QFAIR_KERNELS must be auto|numba|numpy, got {_choice!r}")

if _choice == "numpy":
    _impl = numpy_impl
    BACKEND = "numpy"
else:
    try:
        from . import numba_impl as _impl
        BACKEND = "numba"
    except ImportError as exc:
        if _choice == "numba":
            raise
        warnings.warn(f"numba unavailable ({exc}); falling back to numpy kernels")
        _impl = numpy_impl
        BACKEND = "numpy"

apply_1q = _impl.apply_1q
apply_2q = _impl.apply_2q
mpo_step = _impl.mpo_step

# Dense k-qubit operator application has no tight loop worth jitting; the
# numpy version is shared by both backends.
apply_kq = numpy_impl.apply_kq

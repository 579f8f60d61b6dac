"""Hot grid kernels with a numba fast path and a pure-numpy fallback.

The backend is selected by the environment variable ``TRIODE_LAB_BACKEND``
(``numba`` or ``numpy``).  Unset, numba is used when importable.  Both
backends implement the same cell-centered quadrature, so results agree to
rounding; the benchmark script compares their throughput.
"""

from __future__ import annotations

import os

from . import numpy_backend

try:  # pragma: no cover - exercised indirectly
    from . import numba_backend

    _HAS_NUMBA = True
except ImportError:  # pragma: no cover
    numba_backend = None
    _HAS_NUMBA = False

_ENV = "TRIODE_LAB_BACKEND"


def backend_name() -> str:
    choice = os.environ.get(_ENV, "").strip().lower()
    if choice == "numpy":
        return "numpy"
    if choice == "numba":
        if not _HAS_NUMBA:
            raise RuntimeError("TRIODE_LAB_BACKEND=numba but numba is unavailable")
        return "numba"
    if choice:
        raise RuntimeError(f"unknown {_ENV}={choice!r} (want numba or numpy)")
    return "numba" if _HAS_NUMBA else "numpy"


def get_backend():
    return numba_backend if backend_name() == "numba" else numpy_backend


def energy(values, cell_inside, h, eps, coeffs, bump):
    return get_backend().energy(values, cell_inside, h, eps, coeffs, bump)


def energy_and_grad(values, cell_inside, interior, h, eps, coeffs, bump):
    return get_backend().energy_and_grad(
        values, cell_inside, interior, h, eps, coeffs, bump
    )

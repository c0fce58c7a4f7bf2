"""Hot numerical kernels with a compiled backend and a numpy fallback.

The compiled extension ``_ckernels`` is used when it imports; otherwise (or
when ``WANDERING_LAB_PURE=1`` is set) the numpy versions in ``_pykernels``
are used. Both expose the same functions with the same signatures.
"""

import os

from . import _pykernels

BACKEND = "python"
_impl = _pykernels

if os.environ.get("WANDERING_LAB_PURE", "") not in ("1", "true", "yes"):
    try:
        from . import _ckernels as _impl  # noqa: F811
        BACKEND = "cython"
    except ImportError:
        _impl = _pykernels

green_escape = _impl.green_escape
blaschke_eval = _impl.blaschke_eval

__all__ = ["BACKEND", "green_escape", "blaschke_eval", "available_backends", "get_backend"]


def available_backends():
    """Names of the importable backends, fallback first."""
    names = ["python"]
    try:
        from . import _ckernels  # noqa: F401
        names.append("cython")
    except ImportError:
        pass
    return names


def get_backend(name):
    """Return the kernel module for ``name`` ("python" or "cython")."""
    if name == "python":
        return _pykernels
    if name == "cython":
        from . import _ckernels
        return _ckernels
    raise ValueError(f"unknown kernel backend {name!r}")

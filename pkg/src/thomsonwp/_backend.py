"""Pick the compiled kernels when available, else the pure-Python twins."""
import os

from . import _pykernels

NAME = "python"
kernels = _pykernels

if os.environ.get("THOMSONWP_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _kernels as _compiled
    except ImportError:  # extension not built
        pass
    else:
        kernels = _compiled
        NAME = "cython"


def get(name=None):
    """Kernel module by name ('cython' or 'python'); None gives the active one."""
    if name is None:
        return kernels
    if name == "python":
        return _pykernels
    if name == "cython":
        from . import _kernels

        return _kernels
    raise ValueError(f"unknown backend {name!r}")

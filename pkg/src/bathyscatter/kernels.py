"""Backend selection for the hot numerical kernels.

The compiled extension is used when it was built; set
``BATHYSCATTER_PURE_PYTHON=1`` to force the numpy fallback.
"""
import os

from . import _kernels_py

BACKEND = "python"
_impl = _kernels_py

if os.environ.get("BATHYSCATTER_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _ckernels as _impl  # noqa: F811
        BACKEND = "cython"
    except ImportError:
        _impl = _kernels_py

hankel1_0 = _impl.hankel1_0
dense_from_table = _impl.dense_from_table


def backends():
    """Available backends as ``{name: module}``."""
    out = {"python": _kernels_py}
    try:
        from . import _ckernels
        out["cython"] = _ckernels
    except ImportError:
        pass
    return out

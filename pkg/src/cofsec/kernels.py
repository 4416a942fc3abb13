"""Kernel backend selection.

The compiled extension is used when it was built; otherwise, or when
``COFSEC_PURE_PYTHON=1`` is set, the pure-Python kernels are used.
"""

import os

from . import _kernels_py

BACKEND = "python"
lll_reduce_gram = _kernels_py.lll_reduce_gram
successive_sigma2 = _kernels_py.successive_sigma2

if os.environ.get("COFSEC_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _kernels as _compiled
    except ImportError:
        _compiled = None
    else:
        BACKEND = "cython"
        lll_reduce_gram = _compiled.lll_reduce_gram
        successive_sigma2 = _compiled.successive_sigma2
else:
    _compiled = None


def backends():
    """Available kernel implementations keyed by name."""
    out = {"python": _kernels_py}
    if _compiled is not None:
        out["cython"] = _compiled
    return out

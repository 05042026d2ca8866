"""Hot numeric kernels with a compiled core and a pure numpy fallback.

The Cython extension ``_core`` is preferred when it was built; otherwise
(or when the ``VARPROD_PURE_PYTHON`` environment variable is set to a
non-empty value) the numpy reference implementation ``_ref`` is used.
``BACKEND`` records which one is active.
"""

import os

from . import _ref

if os.environ.get("VARPROD_PURE_PYTHON"):
    _impl = _ref
    BACKEND = "python"
else:
    try:
        from . import _core as _impl
        BACKEND = "compiled"
    except ImportError:
        _impl = _ref
        BACKEND = "python"

var1_recursion = _impl.var1_recursion
var1_recursion_batch = _impl.var1_recursion_batch
acvf_biased = _impl.acvf_biased
acvf_biased_batch = _impl.acvf_biased_batch
ccvf_biased = _impl.ccvf_biased

__all__ = [
    "BACKEND",
    "var1_recursion",
    "var1_recursion_batch",
    "acvf_biased",
    "acvf_biased_batch",
    "ccvf_biased",
]

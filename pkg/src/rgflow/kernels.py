"""Backend selection for the hot kernels.

The compiled extension is used when it imports; otherwise the numpy/scipy
versions take over.  ``RGFLOW_KERNELS=python`` forces the fallback.
"""

import os

from . import _pykernels

if os.environ.get("RGFLOW_KERNELS", "").lower() == "python":
    _impl = _pykernels
else:
    try:
        from . import _ckernels as _impl
    except ImportError:  # extension not built
        _impl = _pykernels

BACKEND = _impl.BACKEND
series_eval = _impl.series_eval
weighted_sup = _impl.weighted_sup
cn_imex_run = _impl.cn_imex_run


def backends():
    """All importable backends, keyed by name (used by tests and benchmarks)."""
    found = {"python": _pykernels}
    try:
        from . import _ckernels

        found["cython"] = _ckernels
    except ImportError:
        pass
    return found

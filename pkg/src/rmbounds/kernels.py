"""Backend selection for the numerical kernels.

The compiled extension is used when it is importable; otherwise the numpy
fallback is loaded. Set ``RMB_PURE_PYTHON=1`` to force the fallback.
"""
import os

from rmbounds import _pykernels

if os.environ.get("RMB_PURE_PYTHON", "") not in ("", "0"):
    _impl = _pykernels
else:
    try:
        from rmbounds import _ckernels as _impl
    except ImportError:  # extension not built
        _impl = _pykernels

BACKEND = "python" if _impl is _pykernels else "cython"

power_1d = _impl.power_1d
dpower_1d = _impl.dpower_1d
power_2d = _impl.power_2d
sinc_series = _impl.sinc_series
blockage_counts = _impl.blockage_counts


def available_backends():
    """Return the importable backend modules keyed by name."""
    backends = {"python": _pykernels}
    try:
        from rmbounds import _ckernels
    except ImportError:
        pass
    else:
        backends["cython"] = _ckernels
    return backends

"""LSTM kernel backends: compiled core with a pure-NumPy fallback.

The compiled extension is preferred when present; set POWERCAST_KERNEL to
"numpy" or "cython" to force a backend (forcing "cython" raises if the
extension was not built).
"""

import os

from . import numpy_backend

_forced = os.environ.get("POWERCAST_KERNEL", "").strip().lower()

if _forced == "numpy":
    _impl = numpy_backend
    BACKEND = "numpy"
else:
    try:
        from . import _core as _impl

        BACKEND = "cython"
    except ImportError:
        if _forced == "cython":
            raise
        _impl = numpy_backend
        BACKEND = "numpy"

lstm_forward = _impl.lstm_forward
lstm_backward = _impl.lstm_backward


def available_backends():
    """Map of importable backend name -> module (for tests and benchmarks)."""
    backends = {"numpy": numpy_backend}
    try:
        from . import _core

        backends["cython"] = _core
    except ImportError:
        pass
    return backends

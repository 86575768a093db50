"""Kernel backend selection.

The compiled Cython core is used when importable; the pure-numpy
fallback otherwise.  Set ``EOCALIB_PURE=1`` in the environment to force
the fallback (used by the benchmark and the backend-parity tests).
"""

import os

from . import _fallback

if os.environ.get("EOCALIB_PURE"):
    _impl = _fallback
    BACKEND = "python"
else:
    try:
        from . import _core as _impl

        BACKEND = "compiled"
    except ImportError:
        _impl = _fallback
        BACKEND = "python"

km_curve = _impl.km_curve
calibration_sums = _impl.calibration_sums


def backend():
    """Name of the active backend: ``"compiled"`` or ``"python"``."""
    return BACKEND

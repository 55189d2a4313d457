"""Backend selection for the hot loops.

The compiled extension ``_ckernels`` is used when it imports; otherwise,
or when ``WAVECHAOS_PURE_PYTHON=1`` is set, the NumPy fallback in
``_pykernels`` is used.  ``BACKEND`` names the active choice.
"""
import os

from . import _pykernels

if os.environ.get("WAVECHAOS_PURE_PYTHON", "") not in ("", "0"):
    _impl = _pykernels
    BACKEND = "python"
else:
    try:
        from . import _ckernels as _impl
        BACKEND = "cython"
    except ImportError:
        _impl = _pykernels
        BACKEND = "python"

modulus_window_sum = _impl.modulus_window_sum
ks_sup = _impl.ks_sup
sign_split_sum = _impl.sign_split_sum

__all__ = ["BACKEND", "modulus_window_sum", "ks_sup", "sign_split_sum"]

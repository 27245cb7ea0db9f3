"""Kernel backend selection.

The compiled ``_ufcore`` extension is used when importable; otherwise, or when
``COMPASS_FT_PURE_PYTHON`` is set to a non-empty value, the pure-Python
twins in ``_pure`` are used. Both expose ``uf_decode``, ``make_decoder`` and
``matching_dp`` with identical results.
"""

import os

from . import _pure
from ._pure import KernelError

if os.environ.get("COMPASS_FT_PURE_PYTHON"):
    _impl = _pure
else:
    try:
        from . import _ufcore as _impl
    except ImportError:  # extension not built
        _impl = _pure

BACKEND = "python" if _impl is _pure else "cython"

uf_decode = _impl.uf_decode
make_decoder = _impl.make_decoder
matching_dp = _impl.matching_dp

__all__ = ["BACKEND", "KernelError", "uf_decode", "make_decoder", "matching_dp"]

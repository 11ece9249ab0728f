"""Backend selection for the hot decoding loops.

The compiled Cython module is used when it imports; otherwise the numpy
implementation is used.  Set ``GNCOSET_BACKEND=python`` to force the
fallback (``cython`` forces the extension and fails loudly if missing).
"""
from __future__ import annotations

import os

from . import _pykernels

_forced = os.environ.get("GNCOSET_BACKEND", "").strip().lower()

try:
    from . import _ckernels
except ImportError:
    _ckernels = None
    if _forced == "cython":
        raise

if _ckernels is not None and _forced != "python":
    backend = _ckernels
    BACKEND = "cython"
else:
    backend = _pykernels
    BACKEND = "python"


def get_backend(name: str | None = None):
    """Return the kernel module called ``name`` (``None`` = the active one)."""
    if name is None:
        return backend
    if name == "python":
        return _pykernels
    if name == "cython":
        if _ckernels is None:
            raise ImportError("compiled kernels are not built")
        return _ckernels
    raise ValueError(f"unknown backend {name!r}")


def available_backends() -> list[str]:
    return ["python"] + (["cython"] if _ckernels is not None else [])

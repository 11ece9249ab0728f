"""Hard-output successive-cancellation decoding of one component code."""
from __future__ import annotations

import math

import numpy as np

from . import kernels
from ._pykernels import EXACT, LLR_MAX, MINSUM

__all__ = ["LLR_MAX", "check_node", "variable_node", "sc_decode", "frozen_mask"]

_KERNELS = {"minsum": MINSUM, "exact": EXACT}


def check_node(a: float, b: float, kernel: str = "minsum") -> float:
    """SC f-function: LLR of the XOR of two bits."""
    if kernel == "exact":
        p = math.tanh(a / 2.0) * math.tanh(b / 2.0)
        p = min(max(p, -1.0 + 1e-15), 1.0 - 1e-15)
        return 2.0 * math.atanh(p)
    if a == 0.0 or b == 0.0:
        return 0.0
    sign = 1.0 if (a > 0.0) == (b > 0.0) else -1.0
    return sign * min(abs(a), abs(b))


def variable_node(a: float, b: float, u_hat: int) -> float:
    """SC g-function once the upper bit ``u_hat`` is known."""
    return b + (1 - 2 * u_hat) * a


def frozen_mask(frozen, length: int) -> np.ndarray:
    mask = np.zeros(length, dtype=np.uint8)
    idx = list(frozen)
    if idx and (min(idx) < 0 or max(idx) >= length):
        raise ValueError(f"frozen index out of range for length {length}")
    mask[idx] = 1
    return mask


def sc_decode(llrs, frozen, kernel: str = "minsum") -> np.ndarray:
    """Decode one component word and return the re-encoded hard codeword.

    Frozen decisions are forced to 0 and a decision LLR of exactly 0 maps
    to bit 0.  Inputs are clamped to ``[-LLR_MAX, LLR_MAX]``.
    """
    llrs = np.asarray(llrs, dtype=np.float64)
    if llrs.ndim != 1:
        raise ValueError("expected a 1-D LLR vector")
    length = llrs.size
    if length < 1 or length & (length - 1):
        raise ValueError(f"length must be a power of two, got {length}")
    mask = frozen_mask(frozen, length)
    try:
        code = _KERNELS[kernel]
    except KeyError:
        raise ValueError(f"unknown kernel {kernel!r}") from None
    return kernels.backend.sc_decode_batch(llrs[None, :], mask, code)[0]

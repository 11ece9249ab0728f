"""Pure numpy implementation of the decoding kernels.

This is the fallback backend used when the compiled extension is not
available, and the reference the compiled kernels are tested against.
Both backends expose the same two entry points, ``sc_decode_batch`` and
``decode_frames``.
"""
from __future__ import annotations

import numpy as np

from .code import kronecker_transform

LLR_MAX = 128.0

COLS = 0
ROWS = 1

MINSUM = 0
EXACT = 1

# Keeps tanh(x/2) away from +-1 in the exact kernel.
_ATANH_LIMIT = 1.0 - 1e-15


def _f_minsum(a, b):
    return np.sign(a) * np.sign(b) * np.minimum(np.abs(a), np.abs(b))


def _f_exact(a, b):
    prod = np.tanh(a / 2.0) * np.tanh(b / 2.0)
    return 2.0 * np.arctanh(np.clip(prod, -_ATANH_LIMIT, _ATANH_LIMIT))


def _sc(llr: np.ndarray, frozen: np.ndarray, f) -> np.ndarray:
    length = llr.shape[1]
    if length == 1:
        bits = (llr[:, 0] < 0.0) & (frozen[0] == 0)
        return bits.astype(np.uint8)[:, None]
    h = length // 2
    left, right = llr[:, :h], llr[:, h:]
    upper = _sc(f(left, right), frozen[:h], f)
    lower = _sc(right + (1.0 - 2.0 * upper) * left, frozen[h:], f)
    return np.concatenate([upper ^ lower, lower], axis=1)


def sc_decode_batch(llr, frozen_mask, kernel: int = MINSUM) -> np.ndarray:
    """SC-decode every row of ``llr`` and return the re-encoded codewords."""
    llr = np.clip(np.asarray(llr, dtype=np.float64), -LLR_MAX, LLR_MAX)
    frozen_mask = np.asarray(frozen_mask, dtype=np.uint8)
    if llr.ndim != 2 or llr.shape[1] != frozen_mask.size:
        raise ValueError("llr must have shape (batch, len(frozen_mask))")
    if llr.shape[0] == 0:
        return np.zeros(llr.shape, dtype=np.uint8)
    return _sc(llr, frozen_mask, _f_exact if kernel == EXACT else _f_minsum)


def _syndrome_ok(words: np.ndarray, frozen_mask: np.ndarray) -> np.ndarray:
    u = kronecker_transform(words)
    return ~(u[:, frozen_mask.astype(bool)].any(axis=1))


def iterate(l_ch, ho_prev, ho_prev2, e_col, e_row, t, graph, col_frozen, row_frozen,
            alpha, beta, gamma, sigma2, kernel=MINSUM):
    """Run decoding iteration ``t`` (1-based) on ``graph``.

    All matrices are ``S x S`` in codeword coordinates.  Returns the new
    hard-output matrix, the new error flags of ``graph`` and the number of
    SC activations.  Inputs are not modified.
    """
    if graph == COLS:
        # components are columns; bit j of column i sits in row j, which
        # the row graph flagged as e_row[j]
        comp_prev = ho_prev.T
        frozen = col_frozen
        other = e_row[:, None]
    else:
        comp_prev = ho_prev
        frozen = row_frozen
        other = e_col[None, :]
    s = ho_prev.shape[0]
    if t == 1:
        err = np.ones(s, dtype=bool)
    else:
        err = ~_syndrome_ok(comp_prev, frozen)

    new = ho_prev.copy()
    if err.any():
        k = t - 1
        scale = 2.0 / sigma2
        hp = 1.0 - 2.0 * ho_prev.astype(np.float64)
        hp2 = 1.0 - 2.0 * ho_prev2.astype(np.float64)
        fail = l_ch + scale * (alpha[k] * hp - beta[k] * hp2)
        ok = l_ch + scale * gamma[k] * hp
        llr = np.clip(np.where(other.astype(bool), fail, ok), -LLR_MAX, LLR_MAX)
        if graph == COLS:
            llr = llr.T
        active = np.flatnonzero(err)
        decoded = sc_decode_batch(llr[active], frozen, kernel)
        if graph == COLS:
            new[:, active] = decoded.T
        else:
            new[active, :] = decoded
    return new, err.astype(np.uint8), int(err.sum())


def decode_frames(llr_ch, col_frozen, row_frozen, alpha, beta, gamma, t_max, sigma2,
                  start_rows=True, early_exit=False, kernel=MINSUM):
    """Decode a batch of frames.

    Returns ``(codewords, activations, iterations)`` with shapes
    ``(F, N)``, ``(F, t_max)`` and ``(F,)``.
    """
    llr_ch = np.atleast_2d(np.asarray(llr_ch, dtype=np.float64))
    col_frozen = np.asarray(col_frozen, dtype=np.uint8)
    row_frozen = np.asarray(row_frozen, dtype=np.uint8)
    alpha = np.asarray(alpha, dtype=np.float64)
    beta = np.asarray(beta, dtype=np.float64)
    gamma = np.asarray(gamma, dtype=np.float64)
    frames, n_bits = llr_ch.shape
    s = col_frozen.size
    if s * s != n_bits:
        raise ValueError("frozen masks do not match the frame length")
    out = np.zeros((frames, n_bits), dtype=np.uint8)
    acts = np.zeros((frames, t_max), dtype=np.int32)
    iters = np.zeros(frames, dtype=np.int32)
    first = ROWS if start_rows else COLS
    for f in range(frames):
        l_ch = llr_ch[f].reshape(s, s)
        ho_prev = np.zeros((s, s), dtype=np.uint8)
        ho_prev2 = np.zeros((s, s), dtype=np.uint8)
        flags = [np.zeros(s, dtype=np.uint8), np.zeros(s, dtype=np.uint8)]
        t = 0
        for t in range(1, t_max + 1):
            graph = first if t % 2 else 1 - first
            new, err, a = iterate(l_ch, ho_prev, ho_prev2, flags[COLS], flags[ROWS], t, graph,
                                  col_frozen, row_frozen, alpha, beta, gamma, sigma2, kernel)
            flags[graph] = err
            ho_prev2, ho_prev = ho_prev, new
            acts[f, t - 1] = a
            if early_exit and t >= 3 and a == 0 and acts[f, t - 2] == 0:
                break
        out[f] = ho_prev.reshape(-1)
        iters[f] = t
    return out, acts, iters

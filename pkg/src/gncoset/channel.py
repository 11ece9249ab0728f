"""BPSK/AWGN channel, Monte-Carlo BLER estimation and SNR@targetBLER search.

Randomness is organised around fixed blocks of ``BLOCK_FRAMES`` frames.
Block ``b`` of seed ``s`` always draws its information bits and its noise
from two Philox streams keyed by ``s`` with counter ``b``, so a frame sees
the same data and the same standard-normal noise whatever the SNR, the
damping schedule or the number of workers (common random numbers).
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .code import CodeSpec, encode, extract_info
from .decoder import DampingSchedule, Graph, decode_batch

__all__ = [
    "ChannelParams",
    "BlerPoint",
    "StopRule",
    "SnrSearch",
    "transmit",
    "frame_block",
    "estimate_bler",
    "snr_at_target_bler",
    "BLER_CSV_HEADER",
]

BLOCK_FRAMES = 128

_INFO_STREAM = 0
_NOISE_STREAM = 1


@dataclass(frozen=True)
class ChannelParams:
    es_n0_db: float

    @property
    def sigma2(self) -> float:
        return 1.0 / (2.0 * 10.0 ** (self.es_n0_db / 10.0))


def transmit(codeword, params: ChannelParams, rng: np.random.Generator) -> np.ndarray:
    """BPSK-modulate, add white Gaussian noise and return channel LLRs ``2y/sigma2``."""
    x = np.asarray(codeword, dtype=np.uint8)
    sigma2 = params.sigma2
    y = (1.0 - 2.0 * x) + math.sqrt(sigma2) * rng.standard_normal(x.shape)
    return 2.0 * y / sigma2


def _stream(seed: int, stream: int, block: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(key=seed, counter=[0, 0, stream, block]))


def frame_block(seed: int, block: int, frames: int, spec: CodeSpec):
    """Information bits ``(frames, K)`` and unit-variance noise ``(frames, N)`` of one block."""
    info = _stream(seed, _INFO_STREAM, block).integers(0, 2, size=(frames, spec.K), dtype=np.uint8)
    noise = _stream(seed, _NOISE_STREAM, block).standard_normal((frames, spec.N))
    return info, noise


@dataclass(frozen=True)
class StopRule:
    max_frames: int = 100_000
    target_block_errors: int = 50

    def __post_init__(self):
        if self.max_frames < 1:
            raise ValueError("max_frames must be >= 1")
        if self.target_block_errors < 1:
            raise ValueError("target_block_errors must be >= 1")


BLER_CSV_HEADER = "es_n0_db,frames,block_errors,bit_errors,bler,stderr,sc_activation_rate,seed"


@dataclass(frozen=True)
class BlerPoint:
    es_n0_db: float
    frames: int
    block_errors: int
    bit_errors: int
    sc_activation_rate: float
    seed: int

    @property
    def bler(self) -> float:
        return self.block_errors / self.frames

    @property
    def stderr(self) -> float:
        p = self.bler
        return math.sqrt(p * (1.0 - p) / self.frames)

    def csv_row(self) -> str:
        return (f"{self.es_n0_db!r},{self.frames},{self.block_errors},{self.bit_errors},"
                f"{self.bler!r},{self.stderr!r},{self.sc_activation_rate!r},{self.seed}")


def _simulate_block(spec, sched, t_max, sigma2, seed, block, frames, decode_kw):
    info, noise = frame_block(seed, block, frames, spec)
    x = encode(info, spec)
    y = (1.0 - 2.0 * x) + math.sqrt(sigma2) * noise
    words, acts, _ = decode_batch(2.0 * y / sigma2, spec, sched, t_max, sigma2, **decode_kw)
    wrong = extract_info(words, spec) != info
    return wrong.any(axis=1), wrong.sum(axis=1), acts.sum(axis=1)


def estimate_bler(spec: CodeSpec, sched: DampingSchedule, t_max: int, params: ChannelParams,
                  stop: StopRule = StopRule(), seed: int = 0, *, workers: int = 1,
                  start_graph: Graph = Graph.ROWS, early_exit: bool = False,
                  kernel: str = "minsum", backend: str | None = None) -> BlerPoint:
    """Simulate frames until ``stop.target_block_errors`` errors or ``stop.max_frames`` frames.

    Blocks may be decoded concurrently but are reduced in block order and
    the run is cut at the exact frame that reaches the error target, so
    the result does not depend on ``workers``.
    """
    decode_kw = dict(start_graph=start_graph, early_exit=early_exit, kernel=kernel, backend=backend)
    sigma2 = params.sigma2
    n_blocks = -(-stop.max_frames // BLOCK_FRAMES)

    def run(block):
        frames = min(BLOCK_FRAMES, stop.max_frames - block * BLOCK_FRAMES)
        return _simulate_block(spec, sched, t_max, sigma2, seed, block, frames, decode_kw)

    frames = errors = bit_errors = activations = 0
    pool = ThreadPoolExecutor(workers) if workers > 1 else None
    try:
        block = 0
        done = False
        while block < n_blocks and not done:
            window = range(block, min(n_blocks, block + max(workers, 1)))
            results = pool.map(run, window) if pool else map(run, window)
            for blk_err, blk_bits, blk_acts in results:
                need = stop.target_block_errors - errors
                cum = np.cumsum(blk_err)
                hit = np.flatnonzero(cum >= need)
                cut = int(hit[0]) + 1 if hit.size else blk_err.size
                frames += cut
                errors += int(cum[cut - 1])
                bit_errors += int(blk_bits[:cut].sum())
                activations += int(blk_acts[:cut].sum())
                if hit.size:
                    done = True
                    break
            block = window.stop
    finally:
        if pool:
            pool.shutdown()
    return BlerPoint(
        es_n0_db=float(params.es_n0_db),
        frames=frames,
        block_errors=errors,
        bit_errors=bit_errors,
        sc_activation_rate=activations / (frames * t_max * spec.sqrt_n),
        seed=seed,
    )


class SnrSearch(NamedTuple):
    snr_db: float
    bracketed: bool
    evaluations: int


def snr_at_target_bler(spec: CodeSpec, sched: DampingSchedule, t_max: int, target_bler: float,
                       snr_lo: float, snr_hi: float, tol_db: float, seed: int = 0,
                       stop: StopRule = StopRule(), **decode_kw) -> SnrSearch:
    """Bisect for the lowest Es/N0 whose estimated BLER is at most ``target_bler``.

    Every probe uses the same seed, hence the same frames.  When the
    target is not met at ``snr_hi`` (or already met at ``snr_lo``) that
    endpoint is returned with ``bracketed=False``.
    """
    if not snr_lo < snr_hi:
        raise ValueError("snr_lo must be below snr_hi")
    if not 0.0 < target_bler <= 1.0:
        raise ValueError("target_bler must lie in (0, 1]")
    if tol_db <= 0:
        raise ValueError("tol_db must be positive")

    evals = 0

    def meets(snr):
        nonlocal evals
        evals += 1
        point = estimate_bler(spec, sched, t_max, ChannelParams(snr), stop, seed, **decode_kw)
        return point.bler <= target_bler

    if meets(snr_lo):
        return SnrSearch(float(snr_lo), False, evals)
    if not meets(snr_hi):
        return SnrSearch(float(snr_hi), False, evals)
    lo, hi = float(snr_lo), float(snr_hi)
    while hi - lo > tol_db:
        mid = 0.5 * (lo + hi)
        if meets(mid):
            hi = mid
        else:
            lo = mid
    return SnrSearch(0.5 * (lo + hi), True, evals)

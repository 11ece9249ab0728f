"""Iterative parallel decoding on the column graph and the stage-permuted row graph.

Each iteration decodes every component of one graph: a component whose
previous hard output already passes the syndrome check is copied forward,
the others get LLRs rebuilt from the channel and the hard outputs of the
two previous iterations and are SC-decoded.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace
from importlib import resources
from pathlib import Path

import numpy as np

from . import kernels
from ._pykernels import COLS as _COLS, EXACT, LLR_MAX, MINSUM, ROWS as _ROWS, iterate
from .code import CodeSpec, extract_info

__all__ = [
    "Graph",
    "DampingSchedule",
    "DecoderState",
    "DecodeResult",
    "generate_llr",
    "initial_state",
    "decode_iteration",
    "parallel_decode",
    "decode_batch",
    "default_schedule",
    "load_schedule",
    "save_schedule",
    "format_schedule",
]


class Graph(enum.IntEnum):
    COLS = _COLS  # graph G, components are codeword-matrix columns
    ROWS = _ROWS  # graph G_pi, components are rows


_KERNELS = {"minsum": MINSUM, "exact": EXACT}


@dataclass(frozen=True)
class DampingSchedule:
    """Damping factors ``(alpha_t, beta_t, gamma_t)`` for ``t = 1..t_max``.

    Stored 0-based: ``alpha[0]`` is the factor of iteration 1.  The first
    iteration has no history, so its factors and ``beta`` of iteration 2
    are structurally zero.
    """

    alpha: tuple[float, ...]
    beta: tuple[float, ...]
    gamma: tuple[float, ...]

    def __post_init__(self):
        a, b, g = (tuple(float(x) for x in v) for v in (self.alpha, self.beta, self.gamma))
        if not (len(a) == len(b) == len(g)) or not a:
            raise ValueError("alpha, beta and gamma must have the same non-zero length")
        if not all(math.isfinite(x) for x in a + b + g):
            raise ValueError("damping factors must be finite")
        if a[0] or b[0] or g[0] or (len(b) > 1 and b[1]):
            raise ValueError("alpha_1, beta_1, gamma_1 and beta_2 must be 0")
        object.__setattr__(self, "alpha", a)
        object.__setattr__(self, "beta", b)
        object.__setattr__(self, "gamma", g)

    @property
    def t_max(self) -> int:
        return len(self.alpha)

    @classmethod
    def zeros(cls, t_max: int) -> "DampingSchedule":
        z = (0.0,) * t_max
        return cls(z, z, z)

    @staticmethod
    def free_mask(t_max: int) -> np.ndarray:
        """Boolean mask over ``to_vector()`` marking the trainable factors."""
        mask = np.ones(3 * t_max, dtype=bool)
        mask[[0, t_max, 2 * t_max]] = False
        if t_max > 1:
            mask[t_max + 1] = False
        return mask

    def to_vector(self) -> np.ndarray:
        return np.array(self.alpha + self.beta + self.gamma, dtype=np.float64)

    @classmethod
    def from_vector(cls, vec) -> "DampingSchedule":
        vec = np.asarray(vec, dtype=np.float64)
        if vec.ndim != 1 or vec.size % 3:
            raise ValueError("vector length must be a multiple of 3")
        t = vec.size // 3
        return cls(tuple(vec[:t]), tuple(vec[t:2 * t]), tuple(vec[2 * t:]))

    def truncated(self, t_max: int) -> "DampingSchedule":
        if t_max > self.t_max:
            raise ValueError(f"schedule has only {self.t_max} iterations")
        return DampingSchedule(self.alpha[:t_max], self.beta[:t_max], self.gamma[:t_max])


def format_schedule(sched: DampingSchedule) -> str:
    lines = ["t,alpha,beta,gamma"]
    for t in range(sched.t_max):
        lines.append(f"{t + 1},{sched.alpha[t]!r},{sched.beta[t]!r},{sched.gamma[t]!r}")
    return "\n".join(lines) + "\n"


def save_schedule(sched: DampingSchedule, path) -> None:
    Path(path).write_text(format_schedule(sched))


def parse_schedule(text: str) -> DampingSchedule:
    rows = []
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("#") or line.startswith("t,"):
            continue
        parts = [p.strip() for p in line.split(",")]
        if len(parts) != 4:
            raise ValueError(f"expected 't,alpha,beta,gamma', got {line!r}")
        rows.append((int(parts[0]), float(parts[1]), float(parts[2]), float(parts[3])))
    if [r[0] for r in rows] != list(range(1, len(rows) + 1)):
        raise ValueError("schedule rows must be numbered 1..t_max in order")
    _, a, b, g = zip(*rows) if rows else ((), (), (), ())
    return DampingSchedule(a, b, g)


def load_schedule(path) -> DampingSchedule:
    return parse_schedule(Path(path).read_text())


def default_schedule() -> DampingSchedule:
    """The eight-iteration schedule shipped as ``schedules/paper_t8.csv``."""
    text = resources.files("gncoset").joinpath("schedules/paper_t8.csv").read_text()
    return parse_schedule(text)


def generate_llr(l_ch: float, ho_prev_bit: int, ho_prev2_bit: int, e_flag: int, t: int,
                 sched: DampingSchedule, sigma2: float) -> float:
    """Soft input for one code bit at iteration ``t`` (1-based).

    ``e_flag`` is the other graph's error flag for the component that
    produced the bit in the previous iteration.
    """
    if not 1 <= t <= sched.t_max:
        raise ValueError(f"t must lie in [1, {sched.t_max}]")
    if sigma2 <= 0:
        raise ValueError("sigma2 must be positive")
    scale = 2.0 / sigma2
    k = t - 1
    hp = 1.0 - 2.0 * ho_prev_bit
    if e_flag:
        hp2 = 1.0 - 2.0 * ho_prev2_bit
        value = l_ch + scale * (sched.alpha[k] * hp - sched.beta[k] * hp2)
    else:
        value = l_ch + scale * sched.gamma[k] * hp
    return min(max(value, -LLR_MAX), LLR_MAX)


@dataclass
class DecoderState:
    """Hard outputs of the last two iterations plus the error flags of both graphs."""

    ho_prev: np.ndarray
    ho_prev2: np.ndarray
    e_col: np.ndarray
    e_row: np.ndarray
    t: int = 0
    activations: int = 0
    trace: list = field(default_factory=list)


def initial_state(spec: CodeSpec) -> DecoderState:
    # zero matrices stand in for the missing t=0 / t=-1 hard outputs
    s = spec.sqrt_n
    return DecoderState(
        ho_prev=np.zeros((s, s), dtype=np.uint8),
        ho_prev2=np.zeros((s, s), dtype=np.uint8),
        e_col=np.zeros(s, dtype=np.uint8),
        e_row=np.zeros(s, dtype=np.uint8),
    )


def decode_iteration(state: DecoderState, graph: Graph, channel_llrs, spec: CodeSpec,
                     sched: DampingSchedule, sigma2: float, kernel: str = "minsum") -> DecoderState:
    """Advance ``state`` by one iteration on ``graph``; ``state`` is left untouched."""
    if state.t >= sched.t_max:
        raise ValueError("schedule exhausted")
    s = spec.sqrt_n
    l_ch = np.asarray(channel_llrs, dtype=np.float64)
    if l_ch.shape != (spec.N,):
        raise ValueError(f"expected {spec.N} channel LLRs")
    t = state.t + 1
    new, err, acts = iterate(
        l_ch.reshape(s, s), state.ho_prev, state.ho_prev2, state.e_col, state.e_row, t,
        int(graph), spec.col_frozen_mask, spec.row_frozen_mask,
        np.asarray(sched.alpha), np.asarray(sched.beta), np.asarray(sched.gamma),
        sigma2, _KERNELS[kernel],
    )
    flags = {"e_col": err} if graph == Graph.COLS else {"e_row": err}
    return replace(
        state,
        ho_prev=new,
        ho_prev2=state.ho_prev,
        t=t,
        activations=state.activations + acts,
        trace=state.trace + [(Graph(graph), acts, s - acts)],
        **flags,
    )


@dataclass(frozen=True)
class DecodeResult:
    codeword: np.ndarray
    info: np.ndarray
    iterations_run: int
    sc_activations: int
    components_skipped: int
    per_iteration_trace: list


def _check_run_args(sched: DampingSchedule, t_max: int, sigma2: float) -> None:
    if t_max < 1:
        raise ValueError("t_max must be >= 1")
    if sched.t_max < t_max:
        raise ValueError(f"schedule covers {sched.t_max} iterations, t_max={t_max}")
    if not sigma2 > 0:
        raise ValueError("sigma2 must be positive")


def decode_batch(channel_llrs, spec: CodeSpec, sched: DampingSchedule, t_max: int, sigma2: float,
                 start_graph: Graph = Graph.ROWS, early_exit: bool = False,
                 kernel: str = "minsum", backend: str | None = None):
    """Decode a ``(frames, N)`` array of channel LLRs.

    Returns ``(codewords, activations, iterations)``; ``activations`` has
    one column per iteration (zero past an early exit).
    """
    _check_run_args(sched, t_max, sigma2)
    llrs = np.atleast_2d(np.asarray(channel_llrs, dtype=np.float64))
    if llrs.shape[1] != spec.N:
        raise ValueError(f"expected {spec.N} LLRs per frame, got {llrs.shape[1]}")
    impl = kernels.get_backend(backend)
    return impl.decode_frames(
        llrs, spec.col_frozen_mask, spec.row_frozen_mask,
        np.asarray(sched.alpha[:t_max]), np.asarray(sched.beta[:t_max]),
        np.asarray(sched.gamma[:t_max]), t_max, sigma2,
        start_graph == Graph.ROWS, early_exit, _KERNELS[kernel],
    )


def parallel_decode(channel_llrs, spec: CodeSpec, sched: DampingSchedule, t_max: int, sigma2: float,
                    start_graph: Graph = Graph.ROWS, early_exit: bool = False,
                    kernel: str = "minsum", backend: str | None = None) -> DecodeResult:
    """Decode one frame for ``t_max`` iterations, alternating graphs."""
    llrs = np.asarray(channel_llrs, dtype=np.float64)
    if llrs.shape != (spec.N,):
        raise ValueError(f"expected {spec.N} channel LLRs")
    words, acts, iters = decode_batch(llrs[None, :], spec, sched, t_max, sigma2,
                                      start_graph, early_exit, kernel, backend)
    ran = int(iters[0])
    s = spec.sqrt_n
    trace = []
    for t in range(1, ran + 1):
        graph = start_graph if t % 2 else Graph(1 - start_graph)
        a = int(acts[0, t - 1])
        trace.append((graph, a, s - a))
    total = int(acts[0].sum())
    return DecodeResult(
        codeword=words[0],
        info=extract_info(words[0], spec),
        iterations_run=ran,
        sc_activations=total,
        components_skipped=ran * s - total,
        per_iteration_trace=trace,
    )

"""G_N-coset code definition, encoding and information-set construction.

Conventions used throughout the package:

* bit vectors are ``uint8`` numpy arrays with values in {0, 1};
* indices are 0-based;
* a length-``N`` vector is viewed as a ``sqrt(N) x sqrt(N)`` matrix in
  row-major order, i.e. index ``k`` is cell ``(k // S, k % S)`` with
  ``S = sqrt(N)``.  Column components (graph G) are the columns of that
  matrix and row components (graph G_pi) are its rows.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Iterable

import numpy as np
from scipy.optimize import brentq

__all__ = [
    "CodeSpec",
    "kronecker_transform",
    "encode",
    "extract_info",
    "derive_component_frozen_sets",
    "syndrome_check",
    "construct_gaussian_approx",
    "construct_product_gaussian_approx",
    "load_code_spec",
    "save_code_spec",
    "format_code_spec",
]


def _log2_exact(length: int) -> int:
    if length < 1 or length & (length - 1):
        raise ValueError(f"length must be a power of two, got {length}")
    return length.bit_length() - 1


def kronecker_transform(v) -> np.ndarray:
    """Return ``v @ F^{(x)m}`` over GF(2), ``F = [[1, 0], [1, 1]]``.

    Works on the last axis, so a batch of shape ``(..., 2**m)`` is
    transformed row by row.  The transform is its own inverse.
    """
    x = np.array(v, dtype=np.uint8, copy=True)
    if x.ndim == 0:
        raise ValueError("expected a vector")
    length = x.shape[-1]
    m = _log2_exact(length)
    lead = x.shape[:-1]
    h = 1
    for _ in range(m):
        blocks = x.reshape(lead + (length // (2 * h), 2, h))
        blocks[..., 0, :] ^= blocks[..., 1, :]
        h *= 2
    return x


def derive_component_frozen_sets(n: int, info_set: Iterable[int]) -> tuple[frozenset, frozenset]:
    """Frozen positions of the column and row component codes.

    A column of the partially encoded array is identically zero when the
    matching row of the u-matrix carries no information bit, and likewise
    for rows.  Returns ``(col_frozen, row_frozen)``.
    """
    if n % 2:
        raise ValueError(f"n must be even, got {n}")
    s = 1 << (n // 2)
    mask = np.zeros(s * s, dtype=bool)
    idx = np.fromiter(info_set, dtype=np.int64)
    mask[idx] = True
    m = mask.reshape(s, s)
    col_frozen = frozenset(int(r) for r in np.flatnonzero(~m.any(axis=1)))
    row_frozen = frozenset(int(c) for c in np.flatnonzero(~m.any(axis=0)))
    return col_frozen, row_frozen


@dataclass(frozen=True)
class CodeSpec:
    """An (N, K) G_N-coset code with ``N = 2**n`` and information set ``info_set``."""

    n: int
    info_set: tuple[int, ...] = field(default=())

    def __post_init__(self):
        if not isinstance(self.n, (int, np.integer)) or self.n < 2 or self.n % 2:
            raise ValueError(f"n must be an even integer >= 2, got {self.n!r}")
        info = tuple(sorted(int(i) for i in set(self.info_set)))
        if len(info) != len(tuple(self.info_set)):
            raise ValueError("info_set contains duplicates")
        if not info:
            raise ValueError("info_set must be non-empty")
        if info[0] < 0 or info[-1] >= (1 << self.n):
            raise ValueError(f"info_set indices must lie in [0, {1 << self.n})")
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "info_set", info)

    @property
    def N(self) -> int:
        return 1 << self.n

    @property
    def K(self) -> int:
        return len(self.info_set)

    @property
    def sqrt_n(self) -> int:
        return 1 << (self.n // 2)

    @property
    def rate(self) -> float:
        return self.K / self.N

    @cached_property
    def info_index(self) -> np.ndarray:
        return np.asarray(self.info_set, dtype=np.intp)

    @cached_property
    def _frozen_sets(self):
        return derive_component_frozen_sets(self.n, self.info_set)

    @property
    def col_frozen(self) -> frozenset:
        return self._frozen_sets[0]

    @property
    def row_frozen(self) -> frozenset:
        return self._frozen_sets[1]

    @cached_property
    def col_frozen_mask(self) -> np.ndarray:
        return _mask(self.col_frozen, self.sqrt_n)

    @cached_property
    def row_frozen_mask(self) -> np.ndarray:
        return _mask(self.row_frozen, self.sqrt_n)


def _mask(indices, length: int) -> np.ndarray:
    m = np.zeros(length, dtype=np.uint8)
    m[list(indices)] = 1
    return m


def encode(info, spec: CodeSpec) -> np.ndarray:
    """Scatter ``info`` onto the information set and apply the transform.

    Accepts a single vector of length K or a batch of shape ``(B, K)``.
    """
    info = np.asarray(info, dtype=np.uint8)
    if info.shape[-1] != spec.K:
        raise ValueError(f"expected {spec.K} information bits, got {info.shape[-1]}")
    u = np.zeros(info.shape[:-1] + (spec.N,), dtype=np.uint8)
    u[..., spec.info_index] = info
    return kronecker_transform(u)


def extract_info(codeword, spec: CodeSpec) -> np.ndarray:
    codeword = np.asarray(codeword, dtype=np.uint8)
    if codeword.shape[-1] != spec.N:
        raise ValueError(f"expected a codeword of length {spec.N}, got {codeword.shape[-1]}")
    return kronecker_transform(codeword)[..., spec.info_index]


def syndrome_check(v, frozen) -> bool:
    """True when ``v`` lies in the component code with the given frozen set."""
    u = kronecker_transform(v)
    idx = list(frozen)
    return not u[idx].any() if idx else True


# Gaussian approximation of density evolution.  phi is the usual two-piece
# fit of 1 - E[tanh(L/2)] for L ~ N(m, 2m); it is evaluated in the log
# domain so that the mean-LLR recursion stays finite for large n.
_PHI_SWITCH = 10.0
_PHI_A, _PHI_B, _PHI_C = 0.4527, 0.86, 0.0218


def _log_phi(x: float) -> float:
    if x <= 0.0:
        return 0.0
    if x < _PHI_SWITCH:
        return -_PHI_A * x**_PHI_B + _PHI_C
    return 0.5 * math.log(math.pi / x) - x / 4.0 + math.log1p(-10.0 / (7.0 * x))


_LOG_PHI_AT_SWITCH = _log_phi(_PHI_SWITCH)


def _inv_log_phi(y: float) -> float:
    if y >= _PHI_C:
        return 0.0
    if y >= _LOG_PHI_AT_SWITCH:
        return ((_PHI_C - y) / _PHI_A) ** (1.0 / _PHI_B)
    hi = 2.0 * _PHI_SWITCH
    while _log_phi(hi) > y:
        hi *= 2.0
    return brentq(lambda x: _log_phi(x) - y, _PHI_SWITCH, hi, xtol=1e-12, rtol=1e-14)


def _check_node_mean(m: float) -> float:
    lp = min(_log_phi(m), 0.0)
    phi = math.exp(lp)
    # 1 - (1 - phi)^2 = phi * (2 - phi)
    return _inv_log_phi(lp + math.log(2.0 - phi))


def gaussian_approx_means(n: int, design_snr_db: float) -> np.ndarray:
    """Mean LLR of every synthetic channel ``u_i`` for BPSK over AWGN."""
    sigma2 = 1.0 / (2.0 * 10.0 ** (design_snr_db / 10.0))
    means = np.array([2.0 / sigma2])
    for _ in range(n):
        nxt = np.empty(2 * means.size)
        nxt[0::2] = [_check_node_mean(m) for m in means]
        nxt[1::2] = 2.0 * means
        means = nxt
    return means


def construct_gaussian_approx(n: int, K: int, design_snr_db: float) -> CodeSpec:
    """Polar construction: pick the K most reliable u-indices (lower index wins ties)."""
    N = 1 << n
    if not 0 < K <= N:
        raise ValueError(f"K must be in [1, {N}], got {K}")
    means = gaussian_approx_means(n, design_snr_db)
    order = np.lexsort((np.arange(N), -means))
    return CodeSpec(n, tuple(int(i) for i in order[:K]))


def construct_product_gaussian_approx(n: int, K: int, design_snr_db: float) -> CodeSpec:
    """Product-structured construction suited to the parallel decoder.

    The component information set ``I`` is the ``ceil(sqrt(K))`` most
    reliable indices of a length-``sqrt(N)`` polar code; ``A`` is then the
    ``K`` most reliable (full-length Gaussian approximation) positions of
    ``I x I``.  Every row and column outside ``I`` is fully frozen, so
    both component graphs see genuine ``(sqrt(N), |I|)`` codes.
    """
    if n % 2:
        raise ValueError(f"n must be even, got {n}")
    N = 1 << n
    if not 0 < K <= N:
        raise ValueError(f"K must be in [1, {N}], got {K}")
    s = 1 << (n // 2)
    k_comp = math.isqrt(K - 1) + 1
    comp_means = gaussian_approx_means(n // 2, design_snr_db)
    comp = np.sort(np.lexsort((np.arange(s), -comp_means))[:k_comp])
    cells = (comp[:, None] * s + comp[None, :]).ravel()
    means = gaussian_approx_means(n, design_snr_db)[cells]
    order = np.lexsort((cells, -means))
    return CodeSpec(n, tuple(int(i) for i in cells[order[:K]]))


def format_code_spec(spec: CodeSpec) -> str:
    return f"n={spec.n}\nK={spec.K}\nA={','.join(str(i) for i in spec.info_set)}\n"


def save_code_spec(spec: CodeSpec, path) -> None:
    Path(path).write_text(format_code_spec(spec))


def load_code_spec(path) -> CodeSpec:
    """Read the three-line ``n=/K=/A=`` text format and validate it."""
    fields = {}
    for line in Path(path).read_text().splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise ValueError(f"malformed line in code spec: {line!r}")
        fields[key.strip()] = value.strip()
    try:
        n = int(fields["n"])
        k = int(fields["K"])
        info = tuple(int(tok) for tok in fields["A"].split(",") if tok.strip())
    except KeyError as exc:
        raise ValueError(f"code spec is missing field {exc.args[0]}") from None
    if list(info) != sorted(info):
        raise ValueError("A must be listed in ascending order")
    spec = CodeSpec(n, info)
    if spec.K != k:
        raise ValueError(f"K={k} does not match |A|={spec.K}")
    return spec

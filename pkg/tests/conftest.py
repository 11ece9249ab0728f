import itertools

import numpy as np
import pytest

from gncoset.kernels import available_backends


def generator_matrix(m: int) -> np.ndarray:
    """F^{(x)m} built directly with np.kron; independent of the butterfly."""
    g = np.array([[1]], dtype=np.uint8)
    f = np.array([[1, 0], [1, 1]], dtype=np.uint8)
    for _ in range(m):
        g = np.kron(g, f) % 2
    return g.astype(np.uint8)


def component_codewords(length: int, frozen) -> set:
    """Every word ``w G`` with ``w`` zero on ``frozen``, by enumeration."""
    g = generator_matrix(length.bit_length() - 1)
    free = [i for i in range(length) if i not in set(frozen)]
    words = set()
    for bits in itertools.product((0, 1), repeat=len(free)):
        w = np.zeros(length, dtype=np.int64)
        w[free] = bits
        words.add(tuple((w @ g) % 2))
    return words


@pytest.fixture(params=available_backends())
def backend(request):
    return request.param


ACCEPTANCE_LINES: list = []


@pytest.fixture
def criterion():
    """Record one PASS/FAIL line per acceptance criterion."""

    def record(number: int, name: str, passed: bool, detail: str = "") -> bool:
        line = f"criterion {number} [{'PASS' if passed else 'FAIL'}] {name}" + (f": {detail}" if detail else "")
        ACCEPTANCE_LINES.append(line)
        print(line)
        return passed

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1])):
            terminalreporter.write_line(line)

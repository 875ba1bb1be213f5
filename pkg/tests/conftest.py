from __future__ import annotations

import numpy as np
import pytest

from lacunary_su11.product import CoefficientSequence, LacunarySequence


def random_instance(rng: np.random.Generator, q_choices=(2, 3), n_max: int = 18, f_max: float = 0.95,
                    full_window: bool = False):
    """Random (coeffs, freqs, M, N) with |F_j| < f_max and geometric-ceil frequencies."""
    q = q_choices[int(rng.integers(len(q_choices)))]
    N = int(rng.integers(1, n_max + 1))
    M = 0 if full_window else int(rng.integers(0, N))
    freqs = LacunarySequence.geometric(q, N)
    r = f_max * np.sqrt(rng.random(N))
    F = r * np.exp(2j * np.pi * rng.random(N))
    return CoefficientSequence.from_f(F), freqs, M, N


def jittered_sequence(rng: np.random.Generator, count: int, q: float = 3.0) -> LacunarySequence:
    """Integer sequence with every ratio at least q (ceil(q m) plus a small random jitter)."""
    m = [int(rng.integers(1, 4))]
    for _ in range(count - 1):
        m.append(int(np.ceil(q * m[-1])) + int(rng.integers(0, 3)))
    return LacunarySequence(m, q=q)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# one line per acceptance criterion, echoed in the terminal summary
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)

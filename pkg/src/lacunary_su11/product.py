"""Finite lacunary SU(1,1) products as pairs of sparse trigonometric polynomials.

The window convention is half-open: the pair for ``(M, N]`` is the ordered
product of the factors ``j = M+1, ..., N`` (1-based indices), so ``(0, N]`` is
the N-th partial product and ``(M, M]`` is the identity.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from .config import BUDGET, TOL
from .errors import BudgetExceededError, GridTooCoarseError, InvalidInputError
from .su11 import CoefficientPair, from_f, make_coefficient
from .trigpoly import _FREQ_LIMIT, TrigPoly, _combine


def as_fraction(q) -> Fraction:
    if isinstance(q, Fraction):
        return q
    if isinstance(q, int):
        return Fraction(q)
    if isinstance(q, str):
        return Fraction(q.strip())
    # go through repr so 2.5 -> 5/2 rather than the binary expansion
    return Fraction(repr(float(q)))


class LacunarySequence:
    """Strictly increasing positive integer frequencies with ``m_{j+1} >= q m_j``."""

    def __init__(self, frequencies: Iterable[int], q=None):
        freqs = tuple(int(m) for m in frequencies)
        if not freqs:
            raise InvalidInputError("a lacunary sequence needs at least one frequency")
        if freqs[0] <= 0:
            raise InvalidInputError("frequencies must be positive")
        if any(m >= _FREQ_LIMIT for m in freqs):
            raise InvalidInputError("frequency too large")
        for lo, hi in zip(freqs, freqs[1:]):
            if hi <= lo:
                raise InvalidInputError(f"frequencies must be strictly increasing ({lo} then {hi})")
        self.frequencies = freqs
        self.certified = self._min_ratio(freqs)
        if q is None:
            self.q = self.certified if self.certified is not None else Fraction(2)
        else:
            self.q = as_fraction(q)
            if self.q <= 1:
                raise InvalidInputError(f"q must exceed 1, got {q}")
            for lo, hi in zip(freqs, freqs[1:]):
                # exact integer test of hi >= q * lo
                if hi * self.q.denominator < self.q.numerator * lo:
                    raise InvalidInputError(f"sequence is not {q}-lacunary: {hi} < {q} * {lo}")

    @staticmethod
    def _min_ratio(freqs) -> Fraction | None:
        if len(freqs) < 2:
            return None
        return min(Fraction(hi, lo) for lo, hi in zip(freqs, freqs[1:]))

    @classmethod
    def geometric(cls, q, count: int) -> "LacunarySequence":
        """``m_1 = 1`` and ``m_{j+1} = ceil(q m_j)``."""
        qf = as_fraction(q)
        if qf <= 1:
            raise InvalidInputError(f"q must exceed 1, got {q}")
        if count < 1:
            raise InvalidInputError("count must be at least 1")
        freqs = [1]
        for _ in range(count - 1):
            freqs.append(math.ceil(qf * freqs[-1]))
        return cls(freqs, qf)

    def __len__(self) -> int:
        return len(self.frequencies)

    def __getitem__(self, j: int) -> int:
        """1-based access: ``seq[j]`` is ``m_j``."""
        if not 1 <= j <= len(self.frequencies):
            raise IndexError(f"frequency index {j} outside 1..{len(self.frequencies)}")
        return self.frequencies[j - 1]

    def window(self, M: int, N: int) -> tuple[int, ...]:
        return self.frequencies[M:N]

    def __repr__(self) -> str:
        return f"LacunarySequence({list(self.frequencies)}, q={self.q})"


class CoefficientSequence:
    """Coefficient pairs ``(A_j, B_j)`` for ``j = 1..J``."""

    def __init__(self, pairs: Sequence[CoefficientPair]):
        self.pairs = tuple(pairs)
        self.A = np.array([p.A for p in self.pairs], dtype=float)
        self.B = np.array([complex(p.B) for p in self.pairs], dtype=complex)

    @classmethod
    def from_b(cls, values: Iterable[complex]) -> "CoefficientSequence":
        return cls([make_coefficient(b) for b in values])

    @classmethod
    def from_f(cls, values: Iterable[complex]) -> "CoefficientSequence":
        return cls([from_f(f) for f in values])

    def __len__(self) -> int:
        return len(self.pairs)

    def __getitem__(self, j: int) -> CoefficientPair:
        """1-based access."""
        if not 1 <= j <= len(self.pairs):
            raise IndexError(f"coefficient index {j} outside 1..{len(self.pairs)}")
        return self.pairs[j - 1]

    def window(self, M: int, N: int) -> tuple[np.ndarray, np.ndarray]:
        return self.A[M:N], self.B[M:N]

    def prod_A(self, M: int, N: int) -> float:
        return math.prod(self.A[M:N].tolist())

    def sum_log_A(self, M: int, N: int) -> float:
        return math.fsum(np.log(self.A[M:N]).tolist())

    def energy_product(self, M: int, N: int) -> float:
        """``prod (A_j^2 + |B_j|^2)`` over the window."""
        A, B = self.window(M, N)
        return math.prod((A * A + np.abs(B) ** 2).tolist())

    def energy_excess(self, M: int, N: int) -> float:
        """``prod (A_j^2 + |B_j|^2) - prod A_j^2`` without cancellation."""
        A, B = self.window(M, N)
        F2 = (np.abs(B) / A) ** 2
        return math.prod((A * A).tolist()) * math.expm1(math.fsum(np.log1p(F2).tolist()))

    def sum_b_sq(self, M: int, N: int) -> float:
        return math.fsum((np.abs(self.B[M:N]) ** 2).tolist())

    def __repr__(self) -> str:
        return f"CoefficientSequence(<{len(self)} pairs>)"


def _check_window(coeffs: CoefficientSequence, freqs: LacunarySequence | None, M: int, N: int) -> None:
    if not (0 <= M <= N):
        raise InvalidInputError(f"window ({M}, {N}] must satisfy 0 <= M <= N")
    if N > len(coeffs) or (freqs is not None and N > len(freqs)):
        raise InvalidInputError(f"window ({M}, {N}] exceeds the available sequence length")


@dataclass(frozen=True)
class TrigPolyPair:
    """First row ``(a, b)`` of the product over the window ``(M, N]``."""

    a: TrigPoly
    b: TrigPoly
    M: int = 0
    N: int = 0

    @classmethod
    def identity(cls, M: int = 0) -> "TrigPolyPair":
        return cls(TrigPoly.constant(1.0), TrigPoly(), M, M)

    def evaluate(self, t):
        return self.a.evaluate(t), self.b.evaluate(t)

    def evaluate_grid(self, size: int):
        return self.a.evaluate_grid(size), self.b.evaluate_grid(size)

    def max_abs_freq(self) -> int:
        return max(self.a.max_abs_freq(), self.b.max_abs_freq())

    def default_grid(self) -> int:
        return 4 * self.max_abs_freq() + 4

    def compose(self, other: "TrigPolyPair") -> "TrigPolyPair":
        """Product of ``self`` over ``(M, K]`` and ``other`` over ``(K, N]``."""
        if other.M != self.N:
            raise InvalidInputError(f"cannot compose ({self.M},{self.N}] with ({other.M},{other.N}]")
        a = self.a * other.a + self.b * other.b.conj_reflect()
        b = self.a * other.b + self.b * other.a.conj_reflect()
        return TrigPolyPair(a, b, self.M, other.N)

    def to_json_obj(self) -> dict:
        return {"M": self.M, "N": self.N, "a": self.a.to_json_obj(), "b": self.b.to_json_obj()}

    @classmethod
    def from_json_obj(cls, obj) -> "TrigPolyPair":
        try:
            M, N = int(obj["M"]), int(obj["N"])
            a, b = obj["a"], obj["b"]
        except (KeyError, TypeError, ValueError) as exc:
            raise InvalidInputError(f"malformed pair JSON: {exc}") from None
        if not 0 <= M <= N:
            raise InvalidInputError(f"pair window ({M}, {N}] is invalid")
        return cls(TrigPoly.from_json_obj(a), TrigPoly.from_json_obj(b), M, N)


def partial_product(coeffs: CoefficientSequence, freqs: LacunarySequence, M: int, N: int,
                    prune: float | None = None) -> TrigPolyPair:
    """Build ``(a_{M,N}, b_{M,N})`` factor by factor, left to right.

    Each step applies
    ``a <- A a + conj(B) e(-m t) b`` and ``b <- B e(m t) a + A b``.
    """
    _check_window(coeffs, freqs, M, N)
    if N - M > BUDGET.max_factors:
        raise BudgetExceededError(f"window of {N - M} factors exceeds the cap of {BUDGET.max_factors}")
    prune = TOL.prune if prune is None else prune
    fa = np.zeros(1, np.int64)
    ca = np.ones(1, complex)
    fb = np.empty(0, np.int64)
    cb = np.empty(0, complex)
    bound = 0
    for j in range(M + 1, N + 1):
        A = float(coeffs.A[j - 1])
        B = complex(coeffs.B[j - 1])
        m = int(freqs[j])
        bound += m
        if bound >= _FREQ_LIMIT:
            raise BudgetExceededError("frequency range exceeds 2^62")
        new_fa = np.concatenate((fa, fb - m))
        new_ca = np.concatenate((ca * A, cb * B.conjugate()))
        new_fb = np.concatenate((fa + m, fb))
        new_cb = np.concatenate((ca * B, cb * A))
        fa, ca = _combine(new_fa, new_ca, prune)
        fb, cb = _combine(new_fb, new_cb, prune)
    return TrigPolyPair(TrigPoly(fa, ca, _trusted=True), TrigPoly(fb, cb, _trusted=True), M, N)


def pointwise_product(coeffs: CoefficientSequence, freqs: LacunarySequence, M: int, N: int, t):
    """First row of the window product evaluated directly as 2x2 matrices at ``t``.

    Independent of the polynomial expansion; used as its oracle and for
    pointwise experiments.  Returns ``(a, b)`` arrays shaped like ``t``.
    """
    _check_window(coeffs, freqs, M, N)
    t = np.asarray(t, dtype=float)
    a = np.ones(t.shape, dtype=complex)
    b = np.zeros(t.shape, dtype=complex)
    for j in range(M + 1, N + 1):
        A = float(coeffs.A[j - 1])
        B = complex(coeffs.B[j - 1])
        e = np.exp(2j * np.pi * np.fmod(freqs[j] * t, 1.0))
        a, b = a * A + b * np.conj(B * e), a * B * e + b * A
    return a, b


def pointwise_ladder(coeffs: CoefficientSequence, freqs: LacunarySequence, N: int, t):
    """Partial products ``g_0(t), ..., g_N(t)`` as arrays of shape ``(N + 1,) + t.shape``."""
    _check_window(coeffs, freqs, 0, N)
    t = np.asarray(t, dtype=float)
    a = np.ones((N + 1,) + t.shape, dtype=complex)
    b = np.zeros((N + 1,) + t.shape, dtype=complex)
    for j in range(1, N + 1):
        A = float(coeffs.A[j - 1])
        B = complex(coeffs.B[j - 1])
        e = np.exp(2j * np.pi * np.fmod(freqs[j] * t, 1.0))
        a[j] = a[j - 1] * A + b[j - 1] * np.conj(B * e)
        b[j] = a[j - 1] * B * e + b[j - 1] * A
    return a, b


# -- identities ----------------------------------------------------------------

def s_mn(coeffs: CoefficientSequence, M: int, N: int) -> float:
    """``sum_{j=M+1}^{N} log(A_j^2 + |B_j|^2)``."""
    _check_window(coeffs, None, M, N)
    A, B = coeffs.window(M, N)
    # log(A^2 + |B|^2) = log1p(2 |B|^2) since A^2 = 1 + |B|^2
    return math.fsum(np.log1p(2.0 * np.abs(B) ** 2).tolist())


def _relative(lhs: float, rhs: float) -> float:
    if rhs == 0.0:
        return abs(lhs)
    return abs(lhs - rhs) / abs(rhs)


@dataclass(frozen=True)
class IdentityCheck:
    lhs: float
    rhs: float
    residual: float

    def ok(self, tol: float = TOL.identity_rel) -> bool:
        return self.residual <= tol


def energy_identity(pair: TrigPolyPair, coeffs: CoefficientSequence) -> IdentityCheck:
    """``||a||^2 + ||b||^2`` against ``prod (A_j^2 + |B_j|^2)``."""
    lhs = pair.a.l2_norm_sq() + pair.b.l2_norm_sq()
    rhs = coeffs.energy_product(pair.M, pair.N)
    return IdentityCheck(lhs, rhs, _relative(lhs, rhs))


def energy_identity_residual(pair: TrigPolyPair, coeffs: CoefficientSequence) -> float:
    return energy_identity(pair, coeffs).residual


def centered_identity(pair: TrigPolyPair, coeffs: CoefficientSequence) -> IdentityCheck:
    """``||a - mean(a)||^2 + ||b||^2`` against ``prod (A^2 + |B|^2) - prod A^2``."""
    a0 = pair.a.mean()
    lhs = (pair.a - a0).l2_norm_sq() + pair.b.l2_norm_sq()
    rhs = coeffs.energy_excess(pair.M, pair.N)
    return IdentityCheck(lhs, rhs, _relative(lhs, rhs))


def centered_identity_residual(pair: TrigPolyPair, coeffs: CoefficientSequence) -> float:
    return centered_identity(pair, coeffs).residual


def shifted_energy(pair: TrigPolyPair, coeffs: CoefficientSequence) -> IdentityCheck:
    """``||a - A_{M+1}...A_N||^2 + ||b||^2`` against the same excess product."""
    lhs = (pair.a - coeffs.prod_A(pair.M, pair.N)).l2_norm_sq() + pair.b.l2_norm_sq()
    rhs = coeffs.energy_excess(pair.M, pair.N)
    return IdentityCheck(lhs, rhs, _relative(lhs, rhs))


@dataclass(frozen=True)
class GapReport:
    gap_a: float
    gap_b: float
    union_gap: float
    required: int

    @property
    def gap(self) -> float:
        """Per-polynomial minimum separation."""
        return min(self.gap_a, self.gap_b)

    @property
    def ok(self) -> bool:
        return self.gap >= self.required

    @property
    def union_ok(self) -> bool:
        return self.union_gap >= self.required


def min_gap_check(pair: TrigPolyPair, freqs: LacunarySequence) -> GapReport:
    """Frequency separation of the window pair against ``m_{M+1}``."""
    required = freqs[pair.M + 1] if pair.N > pair.M else 0
    union = TrigPoly(np.concatenate((pair.a.freqs, pair.b.freqs)),
                     np.ones(len(pair.a) + len(pair.b)))
    # coinciding a/b frequencies collapse in the union; report gap 0 for them
    collided = len(union) < len(pair.a) + len(pair.b)
    union_gap = 0 if collided else union.min_gap()
    return GapReport(pair.a.min_gap(), pair.b.min_gap(), union_gap, required)


def nonlinear_parseval(pair: TrigPolyPair, coeffs: CoefficientSequence,
                       grid_points: int | None = None) -> IdentityCheck:
    """Trapezoid average of ``log|a|`` against ``sum log A_j``; residual is absolute."""
    required = 4 * pair.a.max_abs_freq() + 4
    if grid_points is None:
        grid_points = required
    if grid_points < required:
        raise GridTooCoarseError(f"grid of {grid_points} points is below the required {required}")
    vals = pair.a.evaluate_grid(grid_points)
    lhs = float(np.mean(np.log(np.abs(vals))))
    rhs = coeffs.sum_log_A(pair.M, pair.N)
    return IdentityCheck(lhs, rhs, abs(lhs - rhs))


def nonlinear_parseval_residual(pair, coeffs, grid_points: int | None = None) -> float:
    return nonlinear_parseval(pair, coeffs, grid_points).residual


def determinant_residual(pair: TrigPolyPair, t) -> float:
    """``max |  |a(t)|^2 - |b(t)|^2 - 1 |`` over the given points."""
    a, b = pair.evaluate(np.atleast_1d(t))
    return float(np.max(np.abs(np.abs(a) ** 2 - np.abs(b) ** 2 - 1.0)))

"""SU(1,1) group elements, coefficient normalizations and the metric rho.

A group element is stored by its first row ``(a, b)``; the full matrix is
``[[a, b], [conj(b), conj(a)]]`` with ``|a|^2 - |b|^2 = 1``.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .config import TOL
from .errors import DomainError, InvalidInputError

TWO_PI = 2.0 * math.pi


def _finite(z: complex) -> bool:
    return math.isfinite(z.real) and math.isfinite(z.imag)


@dataclass(frozen=True)
class CoefficientPair:
    """One factor's coefficients ``A > 0`` and ``B`` with ``A^2 - |B|^2 = 1``."""

    A: float
    B: complex

    def __post_init__(self):
        if not (math.isfinite(self.A) and _finite(complex(self.B))):
            raise InvalidInputError("coefficients must be finite")
        if self.A <= 0:
            raise DomainError(f"A must be positive, got {self.A}")
        B2 = abs(self.B) ** 2
        if abs(self.A * self.A - B2 - 1.0) > TOL.invariant_rel * self.A * self.A:
            raise DomainError(f"A^2 - |B|^2 != 1 for A={self.A!r}, B={self.B!r}")

    @property
    def F(self) -> complex:
        return complex(self.B) / self.A

    def growth(self) -> float:
        """``A^2 + |B|^2``, the per-factor energy multiplier."""
        return self.A * self.A + abs(self.B) ** 2


def make_coefficient(B: complex) -> CoefficientPair:
    B = complex(B)
    if not _finite(B):
        raise InvalidInputError(f"B must be finite, got {B!r}")
    return CoefficientPair(math.hypot(1.0, abs(B)), B)


def from_f(F: complex) -> CoefficientPair:
    """Build ``(A, B)`` from a Verblunsky-type parameter ``F`` in the open unit disk."""
    F = complex(F)
    if not _finite(F):
        raise InvalidInputError(f"F must be finite, got {F!r}")
    r = abs(F)
    if r >= 1.0:
        raise DomainError(f"|F| must be < 1, got {r}")
    # (1 - r)(1 + r) keeps precision when r is close to 1
    A = 1.0 / math.sqrt((1.0 - r) * (1.0 + r))
    return CoefficientPair(A, F * A)


@dataclass(frozen=True)
class SU11Matrix:
    a: complex
    b: complex

    def as_array(self) -> np.ndarray:
        a, b = complex(self.a), complex(self.b)
        return np.array([[a, b], [b.conjugate(), a.conjugate()]], dtype=complex)

    def determinant(self) -> float:
        return abs(self.a) ** 2 - abs(self.b) ** 2

    def inverse(self) -> "SU11Matrix":
        # determinant is 1, so the adjugate is the inverse
        return SU11Matrix(complex(self.a).conjugate(), -complex(self.b))

    def __matmul__(self, other: "SU11Matrix") -> "SU11Matrix":
        return mul(self, other)


IDENTITY = SU11Matrix(1.0 + 0j, 0j)


def factor_at(c: CoefficientPair, m: int, t: float) -> SU11Matrix:
    """The factor ``[[A, B e(m t)], [conj(B) e(-m t), A]]`` at the torus point ``t``."""
    # reduce m*t modulo 1 before scaling so large frequencies keep their phase
    phase = math.fmod(m * t, 1.0)
    return SU11Matrix(complex(c.A), complex(c.B) * cmath.exp(1j * TWO_PI * phase))


def mul(G1: SU11Matrix, G2: SU11Matrix) -> SU11Matrix:
    a1, b1, a2, b2 = complex(G1.a), complex(G1.b), complex(G2.a), complex(G2.b)
    return SU11Matrix(a1 * a2 + b1 * b2.conjugate(), a1 * b2 + b1 * a2.conjugate())


def op_norm(M) -> float:
    """Spectral norm of a 2x2 complex matrix from the eigenvalues of ``M M^*``.

    The Hermitian form ``mean +- hypot(half_difference, |offdiag|)`` avoids the
    cancellation of the trace/determinant formula when the singular values
    nearly coincide.
    """
    M = np.asarray(M, dtype=complex)
    if M.shape != (2, 2):
        raise InvalidInputError(f"expected a 2x2 matrix, got shape {M.shape}")
    row0 = float(abs(M[0, 0]) ** 2 + abs(M[0, 1]) ** 2)
    row1 = float(abs(M[1, 0]) ** 2 + abs(M[1, 1]) ** 2)
    off = abs(M[0, 0] * np.conj(M[1, 0]) + M[0, 1] * np.conj(M[1, 1]))
    return math.sqrt(0.5 * (row0 + row1) + math.hypot(0.5 * (row0 - row1), off))


def rho(G1: SU11Matrix, G2: SU11Matrix) -> float:
    """``log(1 + ||G1^{-1} G2 - I||_op)``."""
    Q = mul(G1.inverse(), G2).as_array() - np.eye(2)
    return math.log1p(op_norm(Q))


def rho_explicit(G: SU11Matrix) -> float:
    """Distance from the identity through ``log(1 + |a - 1| + |b|)``."""
    return math.log1p(abs(complex(G.a) - 1.0) + abs(G.b))


# -- vectorized helpers over arrays of group elements ---------------------------

def quotient_arrays(a1, b1, a2, b2):
    """Entries of ``G1^{-1} G2`` elementwise for arrays of first rows."""
    a1c = np.conj(a1)
    return a1c * a2 - b1 * np.conj(b2), a1c * b2 - b1 * np.conj(a2)


def rho_arrays(a1, b1, a2, b2) -> np.ndarray:
    qa, qb = quotient_arrays(a1, b1, a2, b2)
    return np.log1p(np.abs(qa - 1.0) + np.abs(qb))


def rho_from_identity(a, b) -> np.ndarray:
    return np.log1p(np.abs(np.asarray(a) - 1.0) + np.abs(b))

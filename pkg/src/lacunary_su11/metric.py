"""The d_p distance between SU(1,1)-valued functions on the torus, C_p and bound checks."""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable

import numpy as np
from scipy import integrate, special

from .config import TOL
from .errors import DivergentIntegralError, DomainError, GridTooCoarseError, InvalidInputError
from .product import (
    CoefficientSequence,
    IdentityCheck,
    LacunarySequence,
    TrigPolyPair,
    partial_product,
    s_mn,
    shifted_energy,
)
from .su11 import rho_arrays, rho_from_identity


@dataclass(frozen=True)
class TorusGrid:
    """Uniform grid ``t_k = k / size`` with equal trapezoid weights."""

    size: int

    def __post_init__(self):
        if int(self.size) < 1:
            raise InvalidInputError("grid size must be positive")

    @property
    def points(self) -> np.ndarray:
        return np.arange(self.size) / self.size

    @classmethod
    def for_pairs(cls, *pairs: TrigPolyPair) -> "TorusGrid":
        return cls(max(p.default_grid() for p in pairs))

    def require(self, *pairs: TrigPolyPair) -> None:
        need = max(2 * p.max_abs_freq() + 1 for p in pairs)
        if self.size < need:
            raise GridTooCoarseError(f"grid of {self.size} points is below the required {need}")


@dataclass(frozen=True)
class DpValue:
    p: float
    value: float

    @property
    def convention(self) -> str:
        return "norm" if self.p >= 1 else "pth-power"

    def __float__(self) -> float:
        return self.value


def _check_p(p: float) -> float:
    p = float(p)
    if not (p > 0 and math.isfinite(p)):
        raise InvalidInputError(f"p must be a positive finite number, got {p}")
    return p


def lp_quasinorm(values: np.ndarray, p: float) -> DpValue:
    """L^p norm for ``p >= 1``, its p-th power for ``0 < p < 1``, under the uniform measure."""
    p = _check_p(p)
    moment = float(np.mean(np.asarray(values, dtype=float) ** p))
    return DpValue(p, moment ** (1.0 / p) if p >= 1 else moment)


def d_p_pointwise(a1: complex, b1: complex, a2: complex, b2: complex) -> float:
    """rho between two SU(1,1) elements given by their first rows."""
    for a, b in ((a1, b1), (a2, b2)):
        det = abs(a) ** 2 - abs(b) ** 2
        if abs(det - 1.0) > TOL.pointwise_abs * max(1.0, abs(a) ** 2):
            raise DomainError(f"|a|^2 - |b|^2 = {det!r}, not 1")
    return float(rho_arrays(np.complex128(a1), np.complex128(b1), np.complex128(a2), np.complex128(b2)))


def rho_profile(pairL: TrigPolyPair, pairR: TrigPolyPair, grid: TorusGrid) -> np.ndarray:
    grid.require(pairL, pairR)
    aL, bL = pairL.evaluate_grid(grid.size)
    aR, bR = pairR.evaluate_grid(grid.size)
    return rho_arrays(aL, bL, aR, bR)


def d_p_between(pairL: TrigPolyPair, pairR: TrigPolyPair, p: float,
                grid: TorusGrid | None = None) -> DpValue:
    """d_p of two pair-valued functions, computed pointwise on a grid."""
    grid = grid or TorusGrid.for_pairs(pairL, pairR)
    return lp_quasinorm(rho_profile(pairL, pairR, grid), p)


def identity_profile(pair: TrigPolyPair, grid: TorusGrid) -> np.ndarray:
    grid.require(pair)
    a, b = pair.evaluate_grid(grid.size)
    return rho_from_identity(a, b)


def d_p_identity(pair: TrigPolyPair, p: float, grid: TorusGrid | None = None) -> DpValue:
    """``d_p(I, g)`` through ``log(1 + |a - 1| + |b|)``."""
    grid = grid or TorusGrid.for_pairs(pair)
    return lp_quasinorm(identity_profile(pair, grid), p)


def d_p_window(coeffs: CoefficientSequence, freqs: LacunarySequence, M: int, N: int, p: float,
               grid: TorusGrid | None = None) -> DpValue:
    """Distance between the partial products over ``(0, M]`` and ``(0, N]``.

    By left invariance this equals ``d_p(I, window (M, N])``, so only the
    quotient window is expanded.
    """
    return d_p_identity(partial_product(coeffs, freqs, M, N), p, grid)


# -- C_p ----------------------------------------------------------------------

def _cp_tail(p: float, U: float) -> float:
    # 4p int_U^inf u^{p-1} e^{-2u} du, the leading term of the tail series
    return 4.0 * p * math.gamma(p) * special.gammaincc(p, 2.0 * U) / 2.0 ** p


@lru_cache(maxsize=64)
def c_p(p: float, rel_tol: float = TOL.cp_rel) -> float:
    """``int_0^inf 4 da / (e^{a^{1/p}} - 1)^2`` for ``p > 2``.

    Substituting ``a = u^p`` gives ``4p int_0^inf u^{p-1} / (e^u - 1)^2 du``;
    the ``u^{p-3}`` endpoint behaviour is handled by an algebraic quadrature
    weight on ``(0, U]`` and the remainder beyond ``U`` is added analytically.
    """
    p = float(p)
    if not p > 2:
        raise DivergentIntegralError(f"C_p needs p > 2 (the integrand behaves like 4 a^(-2/p) at 0); got p={p}")
    # tail bound with the (1 - e^{-U})^{-2} factor, which is < 1.01 for U >= 6
    U = max(8.0, 2.0 * p)
    while 1.01 * _cp_tail(p, U) > 0.25 * rel_tol * _cp_tail(p, 0.0):
        U *= 1.5

    def smooth(u):
        # 4p (u / expm1(u))^2, finite and analytic at u = 0
        r = u / math.expm1(u) if u > 0 else 1.0
        return 4.0 * p * r * r

    head, _ = integrate.quad(smooth, 0.0, U, weight="alg", wvar=(p - 3.0, 0.0),
                             epsabs=0.0, epsrel=rel_tol * 1e-2, limit=400)
    return float(head + _cp_tail(p, U))


# -- bound checks -----------------------------------------------------------------

@dataclass(frozen=True)
class BoundCheck:
    lhs: float
    rhs: float
    ok: bool


def cauchy_bound_check(coeffs: CoefficientSequence, freqs: LacunarySequence, M: int, N: int, p: float,
                       grid: TorusGrid | None = None, pair: TrigPolyPair | None = None) -> BoundCheck:
    """``d_p(g_M, g_N)^p <= (e^{S_{M,N}} - 1) C_p`` for ``p > 2``."""
    if pair is None:
        pair = partial_product(coeffs, freqs, M, N)
    grid = grid or TorusGrid.for_pairs(pair)
    profile = identity_profile(pair, grid)
    lhs = float(np.mean(profile ** p))
    rhs = math.expm1(s_mn(coeffs, pair.M, pair.N)) * c_p(p)
    return BoundCheck(lhs, rhs, lhs <= rhs * (1.0 + TOL.bound_slack))


def shifted_energy_check(coeffs: CoefficientSequence, freqs: LacunarySequence, M: int, N: int) -> IdentityCheck:
    return shifted_energy(partial_product(coeffs, freqs, M, N), coeffs)


def metric_upper_bound(S: float, p: float) -> float:
    """Upper bound for the stored d_p value of a window with energy sum ``S``.

    Direct for ``p > 2``; through L^p monotonicity and the ``p = 4`` bound otherwise.
    """
    excess = math.expm1(S)
    if p > 2:
        return (excess * c_p(p)) ** (1.0 / p)
    d4 = (excess * c_p(4.0)) ** 0.25
    return d4 if p >= 1 else d4 ** p


# -- CSV ----------------------------------------------------------------------

PROFILE_COLUMNS = ("t", "rho")
METRIC_COLUMNS = ("M", "N", "p", "d_p", "bound")


def fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, str):
        return x
    return format(float(x), ".17g")


def write_csv(path, columns: Iterable[str], rows: Iterable[Iterable], header: str | None = None) -> None:
    with open(path, "w", newline="") as fh:
        if header:
            fh.write(header + "\n")
        w = csv.writer(fh)
        w.writerow(list(columns))
        for row in rows:
            w.writerow([fmt(x) for x in row])

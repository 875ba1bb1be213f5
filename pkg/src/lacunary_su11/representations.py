"""Signed two-block representations of integers by lacunary frequencies.

A representation of ``n`` over the window ``(M, N]`` is a pair of index blocks
``P = (j_1 < ... < j_J)`` and ``Q = (k_1 < ... < k_K)``, both of odd length, with

    n = (m_{j_1} - m_{j_2} + ... + m_{j_J}) - (m_{k_1} - m_{k_2} + ... + m_{k_K}).

The in-block sign of an index is fixed by its rank inside the block, so ``P``
alone determines the value of its parenthesis.  Exactly these block values are
the frequencies of ``b`` over the window, so ``n`` ranges over the differences
``n_2 - n_1`` of frequencies of ``b``.

A representation is *shortened* when no index sits in both blocks with the same
in-block sign (such a pair would cancel).  Its coefficient vector
``c_j in {-2, ..., 2}`` (net multiple of ``m_j``) identifies the representation
up to moving single terms between the blocks.

Blocks are enumerated as bitmasks over the window and the two sides of
``n = P - Q`` are joined on their values (meet in the middle).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from scipy import fft as sp_fft

from .config import BUDGET, TOL
from .errors import BudgetExceededError, InvalidInputError
from .product import CoefficientSequence, LacunarySequence, TrigPolyPair
from .trigpoly import TrigPoly, autocorrelation


@dataclass(frozen=True)
class Blocks:
    """All alternating-sign blocks of the window with their values."""

    mask: np.ndarray
    pos: np.ndarray  # bitmask of indices carrying +
    neg: np.ndarray  # bitmask of indices carrying -
    value: np.ndarray
    key: np.ndarray  # sum_j sign_j * 5^j
    size: np.ndarray


def _window_size(M: int, N: int, freqs: LacunarySequence) -> int:
    if not 0 <= M <= N <= len(freqs):
        raise InvalidInputError(f"window ({M}, {N}] is outside 0..{len(freqs)}")
    return N - M


def enumerate_blocks(freqs: LacunarySequence, M: int, N: int, parity: str = "odd",
                     max_size: int | None = None) -> Blocks:
    """Every block of the given length parity (odd for b, even for a), signs alternating from +."""
    w = _window_size(M, N, freqs)
    if w > BUDGET.enumeration_window:
        raise BudgetExceededError(f"window of {w} indices exceeds the enumeration budget "
                                  f"{BUDGET.enumeration_window}")
    m = np.array(freqs.window(M, N), dtype=np.int64)
    masks = np.arange(1 << w, dtype=np.int64)
    count = np.zeros_like(masks)
    value = np.zeros_like(masks)
    pos = np.zeros_like(masks)
    neg = np.zeros_like(masks)
    key = np.zeros_like(masks)
    for j in range(w):
        bit = (masks >> j) & 1
        plus = bit & (1 - (count & 1))
        minus = bit - plus
        value += (plus - minus) * m[j]
        pos |= plus << j
        neg |= minus << j
        key += (plus - minus) * 5 ** j
        count += bit
    keep = (count & 1) == (1 if parity == "odd" else 0)
    if max_size is not None:
        keep &= count <= max_size
    return Blocks(masks[keep], pos[keep], neg[keep], value[keep], key[keep], count[keep])


def decode_key(key: int, w: int) -> tuple[int, ...]:
    """Invert the balanced base-5 coefficient encoding."""
    digits = []
    k = int(key)
    for _ in range(w):
        r = k % 5
        if r > 2:
            r -= 5
        digits.append(r)
        k = (k - r) // 5
    if k != 0:
        raise InvalidInputError("key does not fit the window")
    return tuple(digits)


@dataclass(frozen=True)
class SignedRepresentation:
    plus: tuple[int, ...]
    minus: tuple[int, ...]
    value: int
    coefficients: tuple[int, ...] = field(repr=False)
    shortened: bool
    M: int = 0

    @property
    def J(self) -> int:
        return len(self.plus)

    @property
    def K(self) -> int:
        return len(self.minus)

    def signed_terms(self) -> dict[int, int]:
        """Net multiple of ``m_j`` for each index that does not cancel."""
        return {self.M + 1 + i: c for i, c in enumerate(self.coefficients) if c}

    def to_json_obj(self) -> dict:
        return {"plus": list(self.plus), "minus": list(self.minus), "value": self.value,
                "shortened": self.shortened, "signed_terms": {str(k): v for k, v in self.signed_terms().items()}}


def _odd_bound(x: int | None, w: int, name: str) -> int:
    if x is None:
        return w if w % 2 else max(w - 1, 1)
    if x < 1 or x % 2 == 0:
        raise InvalidInputError(f"{name} must be a positive odd integer, got {x}")
    return x


def _indices(mask: int, M: int, w: int) -> tuple[int, ...]:
    return tuple(M + 1 + j for j in range(w) if (mask >> j) & 1)


def enumerate_representations(n: int, freqs: LacunarySequence, M: int, N: int,
                              max_j: int | None = None, max_k: int | None = None,
                              shortened_only: bool = False) -> list[SignedRepresentation]:
    """All two-block representations of ``n`` with indices in ``(M, N]``."""
    w = _window_size(M, N, freqs)
    max_j = _odd_bound(max_j, w, "max_j")
    max_k = _odd_bound(max_k, w, "max_k")
    if w == 0:
        return []
    P = enumerate_blocks(freqs, M, N, "odd", max_j)
    Q = enumerate_blocks(freqs, M, N, "odd", max_k)
    order = np.argsort(Q.value, kind="stable")
    qv = Q.value[order]
    target = P.value - int(n)
    lo = np.searchsorted(qv, target, "left")
    hi = np.searchsorted(qv, target, "right")
    out = []
    for i in np.flatnonzero(hi > lo):
        for qi in order[lo[i]:hi[i]]:
            shortened = ((P.pos[i] & Q.pos[qi]) | (P.neg[i] & Q.neg[qi])) == 0
            if shortened_only and not shortened:
                continue
            out.append(SignedRepresentation(
                plus=_indices(int(P.mask[i]), M, w),
                minus=_indices(int(Q.mask[qi]), M, w),
                value=int(n),
                coefficients=decode_key(int(P.key[i] - Q.key[qi]), w),
                shortened=bool(shortened),
                M=M,
            ))
    out.sort(key=lambda r: (r.plus, r.minus))
    return out


# -- all-pairs scans --------------------------------------------------------------

def _shortened_scan(freqs: LacunarySequence, M: int, N: int, max_j=None, max_k=None):
    """Distinct ``(n, coefficient key)`` over all shortened representations, sorted."""
    w = _window_size(M, N, freqs)
    if w > BUDGET.pair_scan_window:
        raise BudgetExceededError(f"window of {w} indices exceeds the pair-scan budget "
                                  f"{BUDGET.pair_scan_window}")
    max_j = _odd_bound(max_j, w, "max_j")
    max_k = _odd_bound(max_k, w, "max_k")
    if w == 0:
        return np.empty(0, np.int64), np.empty(0, np.int64)
    P = enumerate_blocks(freqs, M, N, "odd", max_j)
    Q = enumerate_blocks(freqs, M, N, "odd", max_k)
    rows = max(1, (1 << 22) // max(1, Q.mask.size))
    ns, ks = [], []
    for s in range(0, P.mask.size, rows):
        sl = slice(s, s + rows)
        ok = ((P.pos[sl, None] & Q.pos[None, :]) | (P.neg[sl, None] & Q.neg[None, :])) == 0
        n = (P.value[sl, None] - Q.value[None, :])[ok]
        k = (P.key[sl, None] - Q.key[None, :])[ok]
        n, k = _unique_pairs(n, k)
        ns.append(n)
        ks.append(k)
    return _unique_pairs(np.concatenate(ns), np.concatenate(ks))


def _unique_pairs(n: np.ndarray, k: np.ndarray):
    if n.size == 0:
        return n, k
    order = np.lexsort((k, n))
    n, k = n[order], k[order]
    keep = np.ones(n.size, bool)
    keep[1:] = (n[1:] != n[:-1]) | (k[1:] != k[:-1])
    return n[keep], k[keep]


def _certified_ratio(freqs: LacunarySequence, M: int, N: int) -> Fraction | None:
    window = freqs.window(M, N)
    if len(window) < 2:
        return None
    return min(Fraction(hi, lo) for lo, hi in zip(window, window[1:]))


@dataclass
class UniquenessReport:
    M: int
    N: int
    values: int  # integers with at least one shortened representation
    violations: list[tuple[int, list[tuple[int, ...]]]]
    ratio: Fraction | None
    violation_count: int = 0

    @property
    def theorem_mode(self) -> bool:
        """True when the window is certified 3-lacunary, so violations would refute the claim."""
        return self.ratio is None or self.ratio >= 3

    @property
    def ok(self) -> bool:
        return not self.violations


def uniqueness_check(freqs: LacunarySequence, M: int, N: int, max_j=None, max_k=None,
                     limit: int | None = 50) -> UniquenessReport:
    """Find integers with two shortened representations that differ beyond reshuffling.

    For windows with ratio below 3 the result is diagnostic only.  At most
    ``limit`` violations are materialized.
    """
    w = N - M
    n, k = _shortened_scan(freqs, M, N, max_j, max_k)
    starts = np.flatnonzero(np.concatenate(([True], n[1:] != n[:-1]))) if n.size else np.empty(0, int)
    counts = np.diff(np.append(starts, n.size))
    violations = []
    for s, c in zip(starts[counts > 1], counts[counts > 1]):
        if limit is not None and len(violations) >= limit:
            break
        violations.append((int(n[s]), [decode_key(int(x), w) for x in k[s:s + c]]))
    return UniquenessReport(M, N, int(starts.size), violations, _certified_ratio(freqs, M, N),
                            int(np.count_nonzero(counts > 1)))


@dataclass(frozen=True)
class PartitionTriple:
    S0: tuple[int, ...]
    S1: tuple[int, ...]
    S2: tuple[int, ...]
    ambiguous: bool = False

    def to_json_obj(self) -> dict:
        return {"S0": list(self.S0), "S1": list(self.S1), "S2": list(self.S2)}


def _partition_from_coefficients(coeffs: tuple[int, ...], M: int) -> tuple[tuple[int, ...], ...]:
    groups: tuple[list[int], list[int], list[int]] = ([], [], [])
    for i, c in enumerate(coeffs):
        groups[abs(c)].append(M + 1 + i)
    return tuple(tuple(g) for g in groups)


def classify_partition(n: int, freqs: LacunarySequence, M: int, N: int) -> PartitionTriple:
    """Split the window by how often ``m_j`` occurs in the shortened representation of ``n``."""
    reps = enumerate_representations(n, freqs, M, N, shortened_only=True)
    if not reps:
        return PartitionTriple(tuple(range(M + 1, N + 1)), (), ())
    distinct = sorted({r.coefficients for r in reps})
    S0, S1, S2 = _partition_from_coefficients(distinct[0], M)
    return PartitionTriple(S0, S1, S2, ambiguous=len(distinct) > 1)


@dataclass
class MultiplicityReport:
    M: int
    N: int
    partitions: int
    max_count: int  # largest number of n sharing one partition
    worst_ratio: float  # max over partitions of count / 2^{|S1|}
    violations: list[tuple[PartitionTriple, int, int]]  # (partition, count, bound)
    ambiguous: int  # integers whose shortened representation is not unique

    @property
    def ok(self) -> bool:
        return not self.violations


def multiplicity_bound_check(freqs: LacunarySequence, M: int, N: int) -> MultiplicityReport:
    """Group representable integers by partition triple and compare counts with ``2^{|S1|}``."""
    w = N - M
    n, k = _shortened_scan(freqs, M, N)
    if n.size == 0:
        return MultiplicityReport(M, N, 0, 0, 0.0, [], 0)
    starts = np.flatnonzero(np.concatenate(([True], n[1:] != n[:-1])))
    counts = np.diff(np.append(starts, n.size))
    unique = starts[counts == 1]
    ambiguous = int(np.count_nonzero(counts > 1))
    # partition key: sum |c_j| 3^j from the balanced base-5 digits
    digits = np.zeros((unique.size, w), dtype=np.int64)
    rem = k[unique].copy()
    for j in range(w):
        r = rem % 5
        r = np.where(r > 2, r - 5, r)
        digits[:, j] = r
        rem = (rem - r) // 5
    absd = np.abs(digits)
    pkey = absd @ (3 ** np.arange(w, dtype=np.int64))
    s1 = np.count_nonzero(absd == 1, axis=1)
    order = np.argsort(pkey, kind="stable")
    pkey, s1, absd = pkey[order], s1[order], absd[order]
    gstart = np.flatnonzero(np.concatenate(([True], pkey[1:] != pkey[:-1])))
    gcount = np.diff(np.append(gstart, pkey.size))
    bound = 2 ** s1[gstart]
    violations = []
    for g in np.flatnonzero(gcount > bound):
        S0, S1, S2 = _partition_from_coefficients(tuple(int(x) for x in absd[gstart[g]]), M)
        violations.append((PartitionTriple(S0, S1, S2), int(gcount[g]), int(bound[g])))
    return MultiplicityReport(M, N, int(gstart.size), int(gcount.max()),
                              float(np.max(gcount / bound)), violations, ambiguous)


# -- Fourier coefficients of b --------------------------------------------------------

def autocorrelation_l2(b: TrigPoly) -> float:
    """``sum_n |sum_{n2 - n1 = n} D_{n1} conj(D_{n2})|^2`` by sparse convolution."""
    return autocorrelation(b).l2_norm_sq()


def autocorrelation_l2_quadrature(b: TrigPoly) -> float:
    """The same quantity as ``int |b|^4`` on a grid fine enough to be exact."""
    if b.is_zero():
        return 0.0
    size = sp_fft.next_fast_len(2 * b.span() + 1)
    # shift to start at frequency 0 so the grid only has to cover the span
    vals = b.shift(-int(b.freqs[0])).evaluate_grid(size)
    return float(np.mean((vals.real ** 2 + vals.imag ** 2) ** 2))


@dataclass(frozen=True)
class AutocorrelationCheck:
    lhs: float
    rhs: float
    ok: bool


def autocorrelation_bound_check(pair: TrigPolyPair, coeffs: CoefficientSequence) -> AutocorrelationCheck:
    """Autocorrelation energy of ``b`` against ``exp(8 sum |B_j|^2)`` over the pair's window."""
    lhs = autocorrelation_l2(pair.b)
    x = 8.0 * coeffs.sum_b_sq(pair.M, pair.N)
    rhs = math.exp(x) if x < 709.0 else math.inf
    return AutocorrelationCheck(lhs, rhs, lhs <= rhs * (1.0 + TOL.autocorrelation_slack))

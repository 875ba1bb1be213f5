"""Sparse trigonometric polynomials over integer frequencies.

A :class:`TrigPoly` stores ``sum_n c_n e^{2 pi i n t}`` as a sorted ``int64``
frequency array and a matching ``complex128`` coefficient array.  Only nonzero
coefficients are kept.  All reductions run in ascending-frequency order so that
results are reproducible bit for bit.
"""
from __future__ import annotations

import json
import math
from typing import Iterable, Mapping

import numpy as np

from .config import BUDGET, TOL
from .errors import BudgetExceededError, FrequencyOverflowError, InvalidInputError

_FREQ_LIMIT = 1 << 62


def _check_freq_bound(bound: int) -> None:
    if bound >= _FREQ_LIMIT:
        raise FrequencyOverflowError(f"frequency magnitude {bound} exceeds 2^62")


def _combine(freqs: np.ndarray, coeffs: np.ndarray, prune: float) -> tuple[np.ndarray, np.ndarray]:
    """Sum coefficients sharing a frequency and drop (near-)zero terms."""
    if freqs.size == 0:
        return np.empty(0, np.int64), np.empty(0, complex)
    order = np.argsort(freqs, kind="stable")
    f = freqs[order]
    c = coeffs[order]
    starts = np.flatnonzero(np.concatenate(([True], f[1:] != f[:-1])))
    if starts.size != f.size:
        c = np.add.reduceat(c, starts)
        f = f[starts]
    keep = np.abs(c) > prune
    if not keep.all():
        f, c = f[keep], c[keep]
    return f, c


class TrigPoly:
    """Immutable sparse trigonometric polynomial."""

    __slots__ = ("freqs", "coeffs")

    def __init__(self, freqs=(), coeffs=(), *, prune: float | None = None, _trusted: bool = False):
        f = np.asarray(freqs, dtype=np.int64).reshape(-1)
        c = np.asarray(coeffs, dtype=complex).reshape(-1)
        if f.shape != c.shape:
            raise InvalidInputError("frequency and coefficient arrays differ in length")
        if not _trusted:
            if not np.all(np.isfinite(c)):
                raise InvalidInputError("coefficients must be finite")
            f, c = _combine(f, c, TOL.prune if prune is None else prune)
        f.flags.writeable = False
        c.flags.writeable = False
        object.__setattr__(self, "freqs", f)
        object.__setattr__(self, "coeffs", c)

    def __setattr__(self, name, value):
        raise AttributeError("TrigPoly is immutable")

    # -- constructors ----------------------------------------------------------

    @classmethod
    def zero(cls) -> "TrigPoly":
        return cls()

    @classmethod
    def constant(cls, c: complex) -> "TrigPoly":
        return cls([0], [c])

    @classmethod
    def monomial(cls, n: int, c: complex = 1.0) -> "TrigPoly":
        _check_freq_bound(abs(int(n)))
        return cls([n], [c])

    @classmethod
    def from_terms(cls, terms: Mapping[int, complex] | Iterable[tuple[int, complex]]) -> "TrigPoly":
        items = list(terms.items()) if isinstance(terms, Mapping) else list(terms)
        if not items:
            return cls()
        for n, _ in items:
            _check_freq_bound(abs(int(n)))
        return cls([int(n) for n, _ in items], [complex(c) for _, c in items])

    # -- basic queries ---------------------------------------------------------

    def __len__(self) -> int:
        return int(self.freqs.size)

    def is_zero(self) -> bool:
        return self.freqs.size == 0

    def terms(self) -> dict[int, complex]:
        return {int(n): complex(c) for n, c in zip(self.freqs, self.coeffs)}

    def coefficient(self, n: int) -> complex:
        i = int(np.searchsorted(self.freqs, n))
        if i < self.freqs.size and self.freqs[i] == n:
            return complex(self.coeffs[i])
        return 0j

    def max_abs_freq(self) -> int:
        if self.is_zero():
            return 0
        return int(max(abs(int(self.freqs[0])), abs(int(self.freqs[-1]))))

    def span(self) -> int:
        """``max(freq) - min(freq)``; zero for empty or single-term polynomials."""
        if self.freqs.size < 2:
            return 0
        return int(self.freqs[-1]) - int(self.freqs[0])

    def mean(self) -> complex:
        """Integral over the torus, i.e. the frequency-0 coefficient."""
        return self.coefficient(0)

    def l2_norm_sq(self) -> float:
        return float(np.sum(self.coeffs.real ** 2 + self.coeffs.imag ** 2))

    def support(self) -> tuple[list[int], float]:
        """Sorted frequencies and the minimum gap between consecutive ones."""
        freqs = [int(n) for n in self.freqs]
        return freqs, self.min_gap()

    def min_gap(self) -> float:
        if self.freqs.size < 2:
            return math.inf
        return int(np.min(np.diff(self.freqs)))

    # -- algebra ---------------------------------------------------------------

    def __neg__(self) -> "TrigPoly":
        return TrigPoly(self.freqs, -self.coeffs, _trusted=True)

    def __add__(self, other) -> "TrigPoly":
        if not isinstance(other, TrigPoly):
            other = TrigPoly.constant(other)
        return TrigPoly(
            np.concatenate((self.freqs, other.freqs)),
            np.concatenate((self.coeffs, other.coeffs)),
        )

    __radd__ = __add__

    def __sub__(self, other) -> "TrigPoly":
        if not isinstance(other, TrigPoly):
            other = TrigPoly.constant(other)
        return self + (-other)

    def __rsub__(self, other) -> "TrigPoly":
        return (-self) + other

    def scale(self, c: complex) -> "TrigPoly":
        c = complex(c)
        if c == 0:
            return TrigPoly()
        return TrigPoly(self.freqs, self.coeffs * c)

    def shift(self, k: int) -> "TrigPoly":
        """Multiply by ``e^{2 pi i k t}``."""
        k = int(k)
        _check_freq_bound(self.max_abs_freq() + abs(k))
        return TrigPoly(self.freqs + k, self.coeffs, _trusted=True)

    def conj_reflect(self) -> "TrigPoly":
        """The polynomial ``t -> conj(p(t))``: coefficient ``conj(c_{-n})`` at ``n``."""
        return TrigPoly(-self.freqs[::-1], np.conj(self.coeffs[::-1]), _trusted=True)

    def __mul__(self, other) -> "TrigPoly":
        if isinstance(other, TrigPoly):
            return multiply(self, other)
        return self.scale(other)

    __rmul__ = __mul__

    def autocorrelation(self) -> "TrigPoly":
        return autocorrelation(self)

    # -- evaluation ------------------------------------------------------------

    def evaluate(self, t):
        """Value at torus point(s) ``t``; scalar in, scalar out."""
        t_arr = np.asarray(t, dtype=float)
        scalar = t_arr.ndim == 0
        t_arr = np.atleast_1d(t_arr)
        if self.is_zero():
            out = np.zeros(t_arr.shape, dtype=complex)
        else:
            out = np.empty(t_arr.shape, dtype=complex)
            fr = self.freqs.astype(float)
            for i, ti in enumerate(t_arr.ravel()):
                phase = np.fmod(fr * ti, 1.0)
                out.flat[i] = np.sum(self.coeffs * np.exp(2j * np.pi * phase))
        return complex(out[0]) if scalar else out

    def evaluate_grid(self, size: int) -> np.ndarray:
        """Values at ``t_k = k / size`` for ``k = 0..size-1`` (exact aliasing, via FFT)."""
        size = int(size)
        if size < 1:
            raise InvalidInputError("grid size must be positive")
        if size > BUDGET.max_grid:
            raise BudgetExceededError(f"grid of {size} points exceeds budget {BUDGET.max_grid}")
        bins_re = np.bincount(self.freqs % size, weights=self.coeffs.real, minlength=size)
        bins_im = np.bincount(self.freqs % size, weights=self.coeffs.imag, minlength=size)
        return np.fft.ifft(bins_re + 1j * bins_im) * size

    # -- comparison / serialization --------------------------------------------

    def allclose(self, other: "TrigPoly", rtol: float = 1e-12, atol: float = 0.0) -> bool:
        f = np.union1d(self.freqs, other.freqs)
        return bool(np.allclose(_dense_on(self, f), _dense_on(other, f), rtol=rtol, atol=atol))

    def __eq__(self, other) -> bool:
        if not isinstance(other, TrigPoly):
            return NotImplemented
        return np.array_equal(self.freqs, other.freqs) and np.array_equal(self.coeffs, other.coeffs)

    __hash__ = None

    def __repr__(self) -> str:
        if len(self) <= 6:
            return f"TrigPoly({self.terms()})"
        return f"TrigPoly(<{len(self)} terms, freqs {int(self.freqs[0])}..{int(self.freqs[-1])}>)"

    def to_json_obj(self) -> dict:
        return {"terms": [[int(n), float(c.real), float(c.imag)] for n, c in zip(self.freqs, self.coeffs)]}

    @classmethod
    def from_json_obj(cls, obj: Mapping) -> "TrigPoly":
        try:
            terms = obj["terms"]
            items = [(int(n), complex(float(re), float(im))) for n, re, im in terms]
        except (KeyError, TypeError, ValueError) as exc:
            raise InvalidInputError(f"malformed TrigPoly JSON: {exc}") from None
        freqs = [n for n, _ in items]
        if len(set(freqs)) != len(freqs):
            raise InvalidInputError("duplicate frequency in TrigPoly JSON")
        return cls.from_terms(items)

    def to_json(self) -> str:
        return json.dumps(self.to_json_obj())


def _dense_on(p: TrigPoly, f: np.ndarray) -> np.ndarray:
    out = np.zeros(f.size, dtype=complex)
    idx = np.searchsorted(f, p.freqs)
    out[idx] = p.coeffs
    return out


def _convolve(f1, c1, f2, c2) -> TrigPoly:
    if f1.size == 0 or f2.size == 0:
        return TrigPoly()
    bound = max(abs(int(f1[0])), abs(int(f1[-1]))) + max(abs(int(f2[0])), abs(int(f2[-1])))
    _check_freq_bound(bound)
    pairs = f1.size * f2.size
    if pairs > BUDGET.max_pairs:
        raise BudgetExceededError(f"convolution of {pairs} term pairs exceeds budget {BUDGET.max_pairs}")
    # chunk rows so each block stays around 4M pairs
    rows = max(1, (1 << 22) // f2.size)
    parts_f, parts_c = [], []
    for start in range(0, f1.size, rows):
        ff = (f1[start:start + rows, None] + f2[None, :]).ravel()
        cc = (c1[start:start + rows, None] * c2[None, :]).ravel()
        ff, cc = _combine(ff, cc, -1.0)
        parts_f.append(ff)
        parts_c.append(cc)
    return TrigPoly(np.concatenate(parts_f), np.concatenate(parts_c))


def multiply(p: TrigPoly, q: TrigPoly) -> TrigPoly:
    """Exact product: coefficient at ``n`` is ``sum_{n1 + n2 = n} p(n1) q(n2)``."""
    return _convolve(p.freqs, p.coeffs, q.freqs, q.coeffs)


def autocorrelation(p: TrigPoly) -> TrigPoly:
    """Coefficient at ``n`` is ``sum_{n2 - n1 = n} p(n1) conj(p(n2))``.

    This is the Fourier series of ``t -> |p(-t)|^2``; its frequency-0 term is
    ``p.l2_norm_sq()``.
    """
    return _convolve(-p.freqs[::-1], p.coeffs[::-1], p.freqs, np.conj(p.coeffs))


def evaluate(p: TrigPoly, t):
    return p.evaluate(t)

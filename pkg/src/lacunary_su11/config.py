"""Central tolerance and budget settings."""
from __future__ import annotations

import os
from dataclasses import dataclass


@dataclass(frozen=True)
class Tolerances:
    # |A^2 - |B|^2 - 1| <= invariant_rel * A^2
    invariant_rel: float = 1e-12
    # relative residual for the coefficient-level energy identities
    identity_rel: float = 1e-12
    # pointwise |a|^2 - |b|^2 = 1 and matrix-oracle agreement
    pointwise_abs: float = 1e-10
    cp_rel: float = 1e-8
    bound_slack: float = 1e-6
    autocorrelation_slack: float = 1e-9
    # coefficient pruning threshold for TrigPoly; 0 keeps every nonzero term
    prune: float = 0.0
    # trend thresholds for the convergence experiments
    metric_converged: float = 1e-3
    metric_divergent: float = 1e-2
    pointwise_converged: float = 1e-6


@dataclass(frozen=True)
class Budgets:
    max_factors: int = 24
    # window size for single-target signed-block enumeration (2^w subsets)
    enumeration_window: int = 22
    # window size for all-pairs uniqueness/multiplicity scans (4^(w-1) pairs)
    pair_scan_window: int = 13
    # largest uniform torus grid we are willing to build
    max_grid: int = 1 << 25
    # largest sparse convolution (number of term pairs)
    max_pairs: int = 1 << 27


TOL = Tolerances()
BUDGET = Budgets()

THREADS_ENV = "LACUNARY_THREADS"


def default_threads() -> int:
    raw = os.environ.get(THREADS_ENV)
    if raw is None:
        return 1
    try:
        n = int(raw)
    except ValueError:
        return 1
    return max(1, n)

"""Coefficient families and the desk-scale convergence experiments.

Three experiments are provided:

* ``theorem1_experiment`` measures d_p over a ladder of windows ``(M, M + w]``.
* ``theorem2_experiment`` follows partial products at random torus points and
  records how far the last few partial products are from the final one.
* ``theorem3_experiment`` does the same for divergent families and also
  evaluates the set-restricted energy inequality on sample sets ``E``.

Verdicts are threshold diagnostics on finite windows, not statements about
the limit.
"""
from __future__ import annotations

import configparser
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from pathlib import Path

import numpy as np
from scipy import fft as sp_fft

from .config import BUDGET, TOL, default_threads
from .errors import InvalidInputError
from .metric import c_p, d_p_identity, fmt, metric_upper_bound, write_csv
from .product import (
    CoefficientSequence,
    LacunarySequence,
    as_fraction,
    partial_product,
    pointwise_ladder,
    pointwise_product,
    s_mn,
)
from .representations import autocorrelation_l2
from .su11 import make_coefficient, rho_arrays

SCHEMA = "v1"
KINDS = ("zero", "constant", "geometric-decay", "power-decay", "random-phase-l2", "random-phase-divergent")

METRIC_ROW_COLUMNS = ("M", "N", "p", "d_p", "S", "expm1_S", "bound", "ok")
POINTWISE_COLUMNS = ("t", "N", "abs_a", "abs_b", "rho_prev")
INEQUALITY_COLUMNS = ("set", "M", "N", "measure", "lhs", "integral", "cross_term", "rhs_bound", "ok")


# -- frequency and coefficient families ---------------------------------------------

def generate_lacunary(q, count: int, mode: str = "geometric-ceil", values=None) -> LacunarySequence:
    """``m_1 = 1, m_{j+1} = ceil(q m_j)``, or a validated custom list."""
    if mode == "geometric-ceil":
        if int(count) < 1:
            raise InvalidInputError("count must be at least 1")
        return LacunarySequence.geometric(q, int(count))
    if mode == "custom-list":
        if values is None:
            raise InvalidInputError("custom-list mode needs values")
        return LacunarySequence(values, q=q)
    raise InvalidInputError(f"unknown lacunary mode {mode!r}")


@dataclass(frozen=True)
class CoefficientSpec:
    """Magnitude law for ``|B_j|`` plus a phase rule.

    constant: ``c``; geometric-decay: ``c ratio^(j-1)``; power-decay:
    ``c j^(-beta)``; random-phase-l2: ``c / j``; random-phase-divergent:
    ``c / sqrt(j)``.  Phases are uniform on the circle unless ``phases`` is
    "zero"; the random-phase kinds always draw them.
    """

    kind: str = "zero"
    c: float = 0.5
    ratio: float = 0.5
    beta: float = 1.0
    seed: int = 0
    phases: str = "random"

    def __post_init__(self):
        if self.kind not in KINDS:
            raise InvalidInputError(f"unknown coefficient kind {self.kind!r}; expected one of {KINDS}")
        if self.phases not in ("random", "zero"):
            raise InvalidInputError(f"phases must be 'random' or 'zero', got {self.phases!r}")
        for name in ("c", "ratio", "beta"):
            v = getattr(self, name)
            if not math.isfinite(v) or v < 0:
                raise InvalidInputError(f"{name} must be a finite non-negative number, got {v}")
        if not 0 <= int(self.seed) < 2 ** 64:
            raise InvalidInputError("seed must be a 64-bit unsigned integer")

    @property
    def is_l2(self) -> bool:
        """Analytic classification of ``sum |B_j|^2 < inf``."""
        if self.kind == "zero" or self.c == 0:
            return True
        return {
            "constant": False,
            "geometric-decay": self.ratio < 1,
            "power-decay": self.beta > 0.5,
            "random-phase-l2": True,
            "random-phase-divergent": False,
        }[self.kind]

    def magnitudes(self, count: int) -> np.ndarray:
        j = np.arange(1, count + 1, dtype=float)
        if self.kind == "zero":
            return np.zeros(count)
        if self.kind == "constant":
            return np.full(count, self.c)
        if self.kind == "geometric-decay":
            with np.errstate(under="ignore", over="ignore"):
                return self.c * self.ratio ** (j - 1)
        if self.kind == "power-decay":
            return self.c * j ** (-self.beta)
        if self.kind == "random-phase-l2":
            return self.c / j
        return self.c / np.sqrt(j)

    def _streams(self):
        # independent child streams: phases, torus samples
        return [np.random.default_rng(s) for s in np.random.SeedSequence(int(self.seed)).spawn(2)]

    def phases_for(self, count: int) -> np.ndarray:
        if self.phases == "zero" and not self.kind.startswith("random-phase"):
            return np.zeros(count)
        # draws are sequential, so a longer sequence extends a shorter one
        return self._streams()[0].random(count)

    def torus_samples(self, count: int) -> np.ndarray:
        return self._streams()[1].random(count)

    def to_dict(self) -> dict:
        return asdict(self)


def generate_coefficients(spec: CoefficientSpec, count: int) -> CoefficientSequence:
    mags = spec.magnitudes(count)
    theta = spec.phases_for(count)
    B = mags * np.exp(2j * np.pi * theta)
    seq = CoefficientSequence([make_coefficient(complex(x)) for x in B])
    seq.l2 = spec.is_l2
    return seq


def trend_check(spec: CoefficientSpec, terms: int = 1 << 16, threshold: float = 0.97) -> bool:
    """Numerical ℓ² classification from partial sums of ``log(A^2 + |B|^2)``.

    Compares the increments over the last two dyadic blocks.  Summable
    sequences shrink by a fixed factor per block (``2^(1 - 2 beta)`` for power
    laws); divergent ones do not.  Power laws with ``beta`` just above 1/2
    shrink too slowly to resolve and read as divergent.
    """
    # cap growing magnitudes; the increments then stay constant, which still reads as divergent
    inc = np.log1p(2.0 * np.minimum(spec.magnitudes(terms), 1e150) ** 2)
    k = int(math.log2(terms))
    last = math.fsum(inc[2 ** (k - 1):2 ** k])
    prev = math.fsum(inc[2 ** (k - 2):2 ** (k - 1)])
    if last == 0.0:
        return True
    return last < threshold * prev


# -- experiment configuration and reports --------------------------------------------

@dataclass
class ExperimentConfig:
    theorem: int
    spec: CoefficientSpec
    q: Fraction = Fraction(2)
    n_max: int = 20
    p_list: tuple[float, ...] = (1.0,)
    samples: int = 256
    window: int = 8
    step: int = 2
    threads: int | None = None

    def __post_init__(self):
        if self.theorem not in (1, 2, 3):
            raise InvalidInputError(f"theorem must be 1, 2 or 3, got {self.theorem}")
        self.q = as_fraction(self.q)
        if self.q <= 1:
            raise InvalidInputError("q must exceed 1")
        if self.n_max < 1:
            raise InvalidInputError("n_max must be positive")
        if self.window < 1 or self.step < 1:
            raise InvalidInputError("window and step must be positive")
        if self.samples < 1:
            raise InvalidInputError("samples must be positive")
        if any(not (p > 0 and math.isfinite(p)) for p in self.p_list):
            raise InvalidInputError("every p must be positive and finite")
        if self.threads is not None and self.threads < 1:
            raise InvalidInputError("threads must be positive")

    def echo(self) -> dict:
        return {
            "theorem": self.theorem,
            "q": str(self.q),
            "n_max": self.n_max,
            "p": list(self.p_list),
            "samples": self.samples,
            "window": self.window,
            "step": self.step,
            "coefficients": self.spec.to_dict(),
            "l2": self.spec.is_l2,
        }


_EXPERIMENT_KEYS = {"theorem", "q", "n_max", "p", "samples", "window", "step", "threads"}
_COEFF_KEYS = {"kind", "c", "ratio", "beta", "seed", "phases"}


def _parse_number(section: str, key: str, raw: str, kind=float):
    try:
        return kind(raw)
    except ValueError:
        raise InvalidInputError(f"[{section}] {key} = {raw!r} is not a valid {kind.__name__}") from None


def load_config(path) -> ExperimentConfig:
    """Read an INI config with ``[experiment]`` and ``[coefficients]`` sections."""
    parser = configparser.ConfigParser(interpolation=None)
    try:
        with open(path) as fh:
            parser.read_file(fh)
    except OSError as exc:
        raise InvalidInputError(f"cannot read config {path}: {exc.strerror}") from None
    except configparser.Error as exc:
        raise InvalidInputError(f"malformed config {path}: {exc}") from None
    return config_from_parser(parser)


def config_from_parser(parser: configparser.ConfigParser) -> ExperimentConfig:
    extra = set(parser.sections()) - {"experiment", "coefficients"}
    if extra:
        raise InvalidInputError(f"unknown config section(s): {sorted(extra)}")
    if not parser.has_section("experiment"):
        raise InvalidInputError("config needs an [experiment] section")
    exp = dict(parser["experiment"])
    coef = dict(parser["coefficients"]) if parser.has_section("coefficients") else {}
    for section, keys, allowed in (("experiment", exp, _EXPERIMENT_KEYS), ("coefficients", coef, _COEFF_KEYS)):
        unknown = set(keys) - allowed
        if unknown:
            raise InvalidInputError(f"unknown key(s) in [{section}]: {sorted(unknown)}")
    if "theorem" not in exp:
        raise InvalidInputError("[experiment] theorem is required")

    spec_kwargs = {}
    for key in ("c", "ratio", "beta"):
        if key in coef:
            spec_kwargs[key] = _parse_number("coefficients", key, coef[key])
    if "seed" in coef:
        spec_kwargs["seed"] = _parse_number("coefficients", "seed", coef["seed"], int)
    for key in ("kind", "phases"):
        if key in coef:
            spec_kwargs[key] = coef[key].strip()
    spec = CoefficientSpec(**spec_kwargs)

    kwargs: dict = {"theorem": _parse_number("experiment", "theorem", exp["theorem"], int), "spec": spec}
    if "q" in exp:
        try:
            kwargs["q"] = as_fraction(exp["q"])
        except (ValueError, ZeroDivisionError):
            raise InvalidInputError(f"[experiment] q = {exp['q']!r} is not a number") from None
    for key in ("n_max", "samples", "window", "step", "threads"):
        if key in exp:
            kwargs[key] = _parse_number("experiment", key, exp[key], int)
    if "p" in exp:
        kwargs["p_list"] = tuple(_parse_number("experiment", "p", x.strip()) for x in exp["p"].split(",") if x.strip())
    return ExperimentConfig(**kwargs)


@dataclass
class ExperimentReport:
    config: dict
    rows: list[dict] = field(default_factory=list)
    pointwise: list[dict] = field(default_factory=list)
    inequality: list[dict] = field(default_factory=list)
    summary: dict = field(default_factory=dict)

    def to_json_obj(self) -> dict:
        return {"schema": SCHEMA, "config": self.config, "summary": self.summary, "rows": self.rows,
                "pointwise": self.pointwise, "inequality": self.inequality}

    def to_json(self) -> str:
        return json.dumps(self.to_json_obj(), indent=1, sort_keys=True)

    def header(self) -> str:
        return "# " + json.dumps(self.config, sort_keys=True)

    def write(self, out_dir, formats=("csv", "json"), stem: str = "report") -> list[Path]:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        written = []
        if "json" in formats:
            path = out / f"{stem}.json"
            path.write_text(self.to_json() + "\n")
            written.append(path)
        if "csv" in formats:
            for name, columns, rows in (("metric", METRIC_ROW_COLUMNS, self.rows),
                                        ("pointwise", POINTWISE_COLUMNS, self.pointwise),
                                        ("inequality", INEQUALITY_COLUMNS, self.inequality)):
                if not rows:
                    continue
                path = out / f"{stem}_{name}.csv"
                write_csv(path, columns, ([r[c] for c in columns] for r in rows), header=self.header())
                written.append(path)
        return written

    def verdict_line(self) -> str:
        parts = [f"theorem{self.config['theorem']}"]
        for key in sorted(self.summary):
            v = self.summary[key]
            parts.append(f"{key}={fmt(v) if isinstance(v, (int, float, bool)) else v}")
        return " ".join(parts)


def _threads(config: ExperimentConfig) -> int:
    return config.threads if config.threads is not None else default_threads()


def _ordered_map(fn, items, threads: int) -> list:
    if threads <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


def window_ladder(n_max: int, window: int, step: int) -> list[tuple[int, int]]:
    """``(M, M + window)`` for ``M = 0, step, 2 step, ...`` while ``M + window <= n_max``."""
    w = min(window, n_max, BUDGET.max_factors)
    return [(M, M + w) for M in range(0, n_max - w + 1, step)]


def _classify(tail: float, floor: float) -> str:
    if tail < TOL.metric_converged:
        return "yes"
    if floor >= TOL.metric_divergent:
        return "no"
    return "inconclusive"


# -- experiment 1: metric convergence ------------------------------------------------------

def theorem1_experiment(config: ExperimentConfig) -> ExperimentReport:
    if config.q < 2:
        raise InvalidInputError("the metric experiment needs q >= 2")
    spec = config.spec
    freqs = generate_lacunary(config.q, config.n_max)
    coeffs = generate_coefficients(spec, config.n_max)
    ladder = window_ladder(config.n_max, config.window, config.step)

    def cell(MN):
        M, N = MN
        pair = partial_product(coeffs, freqs, M, N)
        S = s_mn(coeffs, M, N)
        out = []
        for p in config.p_list:
            d = d_p_identity(pair, p).value
            bound = metric_upper_bound(S, p)
            if p > 2:
                ok = d ** p <= math.expm1(S) * c_p(p) * (1.0 + TOL.bound_slack)
            else:
                ok = d <= bound * (1.0 + TOL.bound_slack)
            out.append({"M": M, "N": N, "p": float(p), "d_p": d, "S": S, "expm1_S": math.expm1(S),
                        "bound": bound, "ok": bool(ok)})
        return out

    rows = [r for cells in _ordered_map(cell, ladder, _threads(config)) for r in cells]
    summary: dict = {"l2": spec.is_l2, "audit_ok": all(r["ok"] for r in rows)}
    for p in config.p_list:
        vals = [r["d_p"] for r in rows if r["p"] == float(p)]
        tail, floor = vals[-1], min(vals)
        tag = fmt(float(p))
        summary[f"tail_d{tag}"] = tail
        summary[f"floor_d{tag}"] = floor
        summary[f"cauchy_trend_d{tag}"] = _classify(tail, floor)
    return ExperimentReport(config.echo(), rows=rows, summary=summary)


# -- experiments 2 and 3: pointwise behaviour --------------------------------------------------

def _pointwise_part(config: ExperimentConfig, coeffs, freqs, report: ExperimentReport) -> np.ndarray:
    """Fill pointwise rows and return the tail increment for each sample point."""
    t = config.spec.torus_samples(config.samples)
    N = config.n_max
    chunks = np.array_split(np.arange(t.size), max(1, min(_threads(config), t.size)))

    def run(idx):
        return pointwise_ladder(coeffs, freqs, N, t[idx])

    parts = _ordered_map(run, chunks, _threads(config))
    a = np.concatenate([p[0] for p in parts], axis=1)
    b = np.concatenate([p[1] for p in parts], axis=1)
    step_rho = rho_arrays(a[:-1], b[:-1], a[1:], b[1:])
    lo = max(0, N - config.window)
    tail = np.max(rho_arrays(a[lo:N], b[lo:N], a[N][None, :], b[N][None, :]), axis=0)
    for i in range(t.size):
        for n in range(1, N + 1):
            report.pointwise.append({"t": float(t[i]), "N": n, "abs_a": float(abs(a[n, i])),
                                     "abs_b": float(abs(b[n, i])), "rho_prev": float(step_rho[n - 1, i])})
    return tail


def _pointwise_summary(tail: np.ndarray, spec: CoefficientSpec) -> dict:
    converged = int(np.count_nonzero(tail < TOL.pointwise_converged))
    return {
        "l2": spec.is_l2,
        "converged": converged,
        "samples": int(tail.size),
        "converged_fraction": converged / tail.size,
        "median_tail": float(np.median(tail)),
        "max_tail": float(np.max(tail)),
    }


def theorem2_experiment(config: ExperimentConfig) -> ExperimentReport:
    """Pointwise Cauchy increments at random torus points.

    Divergent specs are accepted as controls; the report marks them so.
    """
    if config.q < 2:
        raise InvalidInputError("the pointwise experiment needs q >= 2")
    freqs = generate_lacunary(config.q, config.n_max)
    coeffs = generate_coefficients(config.spec, config.n_max)
    report = ExperimentReport(config.echo())
    tail = _pointwise_part(config, coeffs, freqs, report)
    report.summary = _pointwise_summary(tail, config.spec)
    report.summary["role"] = "theorem" if config.spec.is_l2 else "control"
    return report


def indicator_tail(mask: np.ndarray, cutoff: int) -> float:
    """``sum_{|k| >= cutoff} |hat 1_E(k)|^2`` for the grid measure of a point set."""
    G = mask.size
    hat = np.fft.fft(mask.astype(float)) / G
    k = np.fft.fftfreq(G, d=1.0 / G)
    sel = np.abs(k) >= cutoff
    return float(np.sum(np.abs(hat[sel]) ** 2))


def set_energy_inequality(coeffs: CoefficientSequence, freqs: LacunarySequence, M: int, N: int,
                          sets=("below-median", "arc")) -> list[dict]:
    """``|E| sum |B_j|^2 <= int_E |b|^2 + e^{4 sum |B_j|^2} (sum_{|k| >= m_{M+1}} |hat 1_E(k)|^2)^(1/2)``.

    ``E`` is a union of grid cells.  The cross term is also evaluated with the
    actual autocorrelation energy of ``b`` in place of its exponential bound.
    """
    pair = partial_product(coeffs, freqs, M, N)
    b = pair.b
    G = sp_fft.next_fast_len(max(2 * pair.max_abs_freq() + 1, 2 * b.span() + 1, 64))
    vals = np.abs(b.evaluate_grid(G)) ** 2
    sum_b = coeffs.sum_b_sq(M, N)
    cutoff = int(freqs[M + 1])
    auto = autocorrelation_l2(b)
    rows = []
    for name in sets:
        if name == "below-median":
            mask = vals <= np.median(vals)
        elif name == "arc":
            mask = np.arange(G) < G // 4
        else:
            raise InvalidInputError(f"unknown set {name!r}")
        measure = float(np.count_nonzero(mask)) / G
        integral = float(np.sum(vals[mask])) / G
        tail = indicator_tail(mask, cutoff)
        cross = math.sqrt(auto) * math.sqrt(tail)
        rhs = integral + math.exp(4.0 * sum_b) * math.sqrt(tail)
        lhs = measure * sum_b
        slack = TOL.bound_slack * max(1.0, rhs)
        rows.append({"set": name, "M": M, "N": N, "measure": measure, "lhs": lhs, "integral": integral,
                     "cross_term": cross, "rhs_bound": rhs,
                     "ok": bool(lhs <= integral + cross + slack and integral + cross <= rhs + slack)})
    return rows


def theorem3_experiment(config: ExperimentConfig) -> ExperimentReport:
    """Contrapositive check for divergent families, plus the set-energy inequality."""
    spec = config.spec
    if spec.kind == "zero" or spec.c == 0:
        raise InvalidInputError("the divergence experiment needs nonzero coefficients")
    if config.q < 3:
        raise InvalidInputError("the divergence experiment needs q >= 3")
    freqs = generate_lacunary(config.q, config.n_max)
    coeffs = generate_coefficients(spec, config.n_max)
    report = ExperimentReport(config.echo())
    tail = _pointwise_part(config, coeffs, freqs, report)
    M = max(0, config.n_max - config.window)
    report.inequality = set_energy_inequality(coeffs, freqs, M, config.n_max)
    report.summary = _pointwise_summary(tail, spec)
    report.summary["role"] = "control" if spec.is_l2 else "theorem"
    report.summary["inequality_ok"] = all(r["ok"] for r in report.inequality)
    return report


def run_experiment(config: ExperimentConfig) -> ExperimentReport:
    return {1: theorem1_experiment, 2: theorem2_experiment, 3: theorem3_experiment}[config.theorem](config)


def tail_increment(coeffs: CoefficientSequence, freqs: LacunarySequence, n_max: int, window: int, t) -> np.ndarray:
    """``max_{n_max - window <= M' < n_max} rho(g_{M'}(t), g_{n_max}(t))`` via direct matrix products."""
    aN, bN = pointwise_product(coeffs, freqs, 0, n_max, t)
    out = np.zeros(np.shape(t))
    for M in range(max(0, n_max - window), n_max):
        aM, bM = pointwise_product(coeffs, freqs, 0, M, t)
        out = np.maximum(out, rho_arrays(aM, bM, aN, bN))
    return out

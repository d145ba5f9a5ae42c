"""Seeded Monte Carlo study of thick-null decision rules.

Each case draws a true mean, population sd, sample size and MPSD, generates a
normal sample and records the verdict of every configured rule.  Case ``i``
uses its own counter-based Philox stream keyed by ``(seed, i)``, so a study
gives bit-identical results whatever the chunking or worker count.
"""

from __future__ import annotations

import math
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Iterator, Mapping, Optional, Sequence

import numpy as np

from .decisions import (
    DecisionConfig,
    Method,
    SampleStats,
    Verdict,
    decide_batch,
    method_kind,
)
from .numerics import (
    DEFAULT_QUADRATURE,
    DomainError,
    QuadratureSpec,
    check_probability,
    normal_cdf,
    normal_quantile,
)
from .priors import DiscreteUniform, Prior

__all__ = [
    "ScenarioConfig",
    "CaseSpec",
    "CaseResult",
    "StudyResults",
    "DEFAULT_METHODS",
    "POWER_CATEGORIES",
    "main_scenario",
    "normal_mu_scenario",
    "case_stream",
    "nominal_power",
    "power_category",
    "power_categories",
    "sample_case",
    "run_case",
    "run_study",
]

DEFAULT_METHODS = ("conventional", "small_alpha", "mesp", "distance_only", "interval_based", "thick_t")
POWER_CATEGORIES = ("High", "Medium", "Low")
MU_LAWS = ("integer-uniform", "normal")

_U64 = 2**64


def _check_range(name, bounds):
    lo, hi = bounds
    if int(lo) != lo or int(hi) != hi or hi < lo:
        raise DomainError(f"{name} must be an integer range with lo <= hi, got {bounds}")


@dataclass(frozen=True)
class ScenarioConfig:
    """Sampling laws of one simulation scenario.

    ``mu_law`` is ``"integer-uniform"`` (true means uniform on the integers
    of ``mu_range``) or ``"normal"`` (continuous, mean ``mu0``, sd ``mu_sd``).
    All other integer ranges include both endpoints.
    """

    mu0: float = 100.0
    mu_law: str = "integer-uniform"
    mu_range: tuple = (75, 125)
    mu_sd: float = 50.0 / math.sqrt(12.0)
    sigma_range: tuple = (4, 60)
    n_range: tuple = (5, 100)
    mpsd_range: tuple = (2, 20)
    cases: int = 100_000
    seed: int = 0
    power_alpha: float = 0.05

    def __post_init__(self):
        for name in ("mu_range", "sigma_range", "n_range", "mpsd_range"):
            object.__setattr__(self, name, tuple(int(v) for v in getattr(self, name)))
            _check_range(name, getattr(self, name))
        if self.mu_law not in MU_LAWS:
            raise DomainError(f"mu_law must be one of {MU_LAWS}")
        if not (math.isfinite(self.mu0) and self.mu_sd > 0):
            raise DomainError("mu0 must be finite and mu_sd positive")
        if self.sigma_range[0] <= 0:
            raise DomainError("sigma must be positive")
        if self.n_range[0] < 2:
            raise DomainError("sample sizes must be at least 2")
        if self.mpsd_range[0] < 0:
            raise DomainError("mpsd must be nonnegative")
        if int(self.cases) != self.cases or self.cases < 1:
            raise DomainError("cases must be a positive integer")
        if int(self.seed) != self.seed or not 0 <= self.seed < _U64:
            raise DomainError("seed must be an unsigned 64-bit integer")
        check_probability(self.power_alpha, "power_alpha", open_interval=True)


def main_scenario(seed: int = 0, cases: int = 100_000) -> ScenarioConfig:
    return ScenarioConfig(seed=seed, cases=cases)


def normal_mu_scenario(seed: int = 0, cases: int = 100_000) -> ScenarioConfig:
    """True means drawn from N(mu0, 50 / sqrt(12)) instead of the integer grid."""
    return ScenarioConfig(mu_law="normal", seed=seed, cases=cases)


@dataclass(frozen=True)
class CaseSpec:
    case_index: int
    mu: float
    sigma: float
    n: int
    mpsd: float


@dataclass(frozen=True)
class CaseResult:
    spec: CaseSpec
    null_true: bool
    stats: SampleStats
    nominal_power: float
    relative_mpsd: float
    verdicts: dict = field(default_factory=dict)
    degenerate: bool = False


def case_stream(seed: int, case_index: int) -> np.random.Generator:
    """Independent random stream for one case."""
    return np.random.Generator(np.random.Philox(key=int(seed), counter=[0, 0, 0, int(case_index)]))


def nominal_power(sigma, n, mpsd, alpha=0.05):
    """Power of the two-sided one-sample z-test to detect a shift of ``mpsd``."""
    sigma = np.asarray(sigma, dtype=float)
    mpsd = np.asarray(mpsd, dtype=float)
    if np.any(sigma <= 0) or np.any(mpsd <= 0):
        raise DomainError("sigma and mpsd must be positive")
    delta = mpsd * np.sqrt(np.asarray(n, dtype=float)) / sigma
    z = normal_quantile(1.0 - alpha / 2.0)
    power = normal_cdf(delta - z) + normal_cdf(-delta - z)
    return float(power) if np.ndim(power) == 0 else power


def power_category(power: float) -> str:
    check_probability(power, "power")
    if power >= 0.80:
        return "High"
    if power >= 0.30:
        return "Medium"
    return "Low"


def power_categories(power) -> np.ndarray:
    power = np.asarray(power, dtype=float)
    return np.where(power >= 0.80, "High", np.where(power >= 0.30, "Medium", "Low"))


def sample_case(stream: np.random.Generator, cfg: ScenarioConfig, index: int) -> CaseSpec:
    if cfg.mu_law == "integer-uniform":
        mu = float(stream.integers(cfg.mu_range[0], cfg.mu_range[1], endpoint=True))
    else:
        mu = float(stream.normal(cfg.mu0, cfg.mu_sd))
    sigma = float(stream.integers(cfg.sigma_range[0], cfg.sigma_range[1], endpoint=True))
    n = int(stream.integers(cfg.n_range[0], cfg.n_range[1], endpoint=True))
    mpsd = float(stream.integers(cfg.mpsd_range[0], cfg.mpsd_range[1], endpoint=True))
    return CaseSpec(int(index), mu, sigma, n, mpsd)


def _sample_stats(stream, spec):
    x = stream.normal(spec.mu, spec.sigma, spec.n)
    return float(x.mean()), float(x.std(ddof=1))


_COLUMNS = ("case_index", "mu", "sigma", "n", "mpsd", "mean", "sd")


def _simulate(cfg: ScenarioConfig, start: int, stop: int) -> dict:
    cols = {name: np.empty(stop - start) for name in _COLUMNS}
    for row, i in enumerate(range(start, stop)):
        stream = case_stream(cfg.seed, i)
        spec = sample_case(stream, cfg, i)
        mean, sd = _sample_stats(stream, spec)
        for name, value in zip(_COLUMNS, (i, spec.mu, spec.sigma, spec.n, spec.mpsd, mean, sd)):
            cols[name][row] = value
    cols["case_index"] = cols["case_index"].astype(np.int64)
    cols["n"] = cols["n"].astype(np.int64)
    return cols


@dataclass
class StudyResults:
    """Column store of a simulated study; iterate it to get :class:`CaseResult` values."""

    mu0: float
    methods: tuple
    case_index: np.ndarray
    mu: np.ndarray
    sigma: np.ndarray
    n: np.ndarray
    mpsd: np.ndarray
    mean: np.ndarray
    sd: np.ndarray
    nominal_power: np.ndarray
    reject: dict
    p_value: dict
    decision: DecisionConfig = DecisionConfig()

    def __len__(self):
        return int(self.case_index.size)

    @property
    def null_true(self) -> np.ndarray:
        return np.abs(self.mu - self.mu0) <= self.mpsd

    @property
    def relative_mpsd(self) -> np.ndarray:
        return self.mpsd / self.sigma

    @property
    def degenerate(self) -> np.ndarray:
        return self.sd == 0

    @property
    def power_category(self) -> np.ndarray:
        return power_categories(self.nominal_power)

    def case(self, row: int) -> CaseResult:
        spec = CaseSpec(int(self.case_index[row]), float(self.mu[row]), float(self.sigma[row]),
                        int(self.n[row]), float(self.mpsd[row]))
        verdicts = {}
        for name in self.methods:
            p = float(self.p_value[name][row])
            verdicts[name] = Verdict(method_kind(name), bool(self.reject[name][row]),
                                     None if math.isnan(p) else p)
        return CaseResult(
            spec=spec,
            null_true=bool(abs(spec.mu - self.mu0) <= spec.mpsd),
            stats=SampleStats(spec.n, float(self.mean[row]), float(self.sd[row])),
            nominal_power=float(self.nominal_power[row]),
            relative_mpsd=spec.mpsd / spec.sigma,
            verdicts=verdicts,
            degenerate=bool(self.sd[row] == 0),
        )

    def __iter__(self) -> Iterator[CaseResult]:
        for row in range(len(self)):
            yield self.case(row)

    def subset(self, mask) -> "StudyResults":
        mask = np.asarray(mask)
        return StudyResults(
            self.mu0, self.methods,
            *(getattr(self, c)[mask] for c in ("case_index", "mu", "sigma", "n", "mpsd", "mean", "sd", "nominal_power")),
            reject={k: v[mask] for k, v in self.reject.items()},
            p_value={k: v[mask] for k, v in self.p_value.items()},
            decision=self.decision,
        )

    @classmethod
    def concat(cls, parts: Sequence["StudyResults"]) -> "StudyResults":
        first = parts[0]
        cat = lambda name: np.concatenate([getattr(p, name) for p in parts])
        return cls(
            first.mu0, first.methods,
            *(cat(c) for c in ("case_index", "mu", "sigma", "n", "mpsd", "mean", "sd", "nominal_power")),
            reject={m: np.concatenate([p.reject[m] for p in parts]) for m in first.methods},
            p_value={m: np.concatenate([p.p_value[m] for p in parts]) for m in first.methods},
            decision=first.decision,
        )


def _default_priors(methods, priors):
    priors = dict(priors or {})
    for name in methods:
        if method_kind(name) is Method.THICK_T and name not in priors and name == Method.THICK_T.value:
            priors[name] = DiscreteUniform()
    return priors


def _run_chunk(args) -> StudyResults:
    cfg, start, stop, methods, priors, decision, quad = args
    cols = _simulate(cfg, start, stop)
    verdicts = decide_batch(cols["n"], cols["mean"], cols["sd"], cfg.mu0, cols["mpsd"],
                            methods, priors, decision, quad)
    power = nominal_power(cols["sigma"], cols["n"], cols["mpsd"], cfg.power_alpha)
    return StudyResults(
        cfg.mu0, tuple(methods),
        *(cols[c] for c in ("case_index", "mu", "sigma", "n", "mpsd", "mean", "sd")),
        nominal_power=np.asarray(power, dtype=float).reshape(-1),
        reject={m: v[0] for m, v in verdicts.items()},
        p_value={m: v[1] for m, v in verdicts.items()},
        decision=decision,
    )


def run_case(
    stream: np.random.Generator,
    spec: CaseSpec,
    cfg: ScenarioConfig,
    methods: Sequence[str] = DEFAULT_METHODS,
    priors: Optional[Mapping[str, Prior]] = None,
    decision: DecisionConfig = DecisionConfig(),
    quad: QuadratureSpec = DEFAULT_QUADRATURE,
) -> CaseResult:
    """Generate the sample for ``spec`` from ``stream`` and apply every rule.

    ``stream`` must be positioned right after :func:`sample_case` drew
    ``spec`` for the result to match :func:`run_study`.
    """
    priors = _default_priors(methods, priors)
    mean, sd = _sample_stats(stream, spec)
    verdicts = decide_batch([spec.n], [mean], [sd], cfg.mu0, [spec.mpsd], methods, priors, decision, quad)
    power = nominal_power(spec.sigma, spec.n, spec.mpsd, cfg.power_alpha)
    out = {}
    for name, (rej, p) in verdicts.items():
        out[name] = Verdict(method_kind(name), bool(rej[0]), None if math.isnan(p[0]) else float(p[0]))
    return CaseResult(
        spec=spec,
        null_true=abs(spec.mu - cfg.mu0) <= spec.mpsd,
        stats=SampleStats(spec.n, mean, sd),
        nominal_power=power,
        relative_mpsd=spec.mpsd / spec.sigma,
        verdicts=out,
        degenerate=sd == 0,
    )


def run_study(
    cfg: ScenarioConfig,
    methods: Sequence[str] = DEFAULT_METHODS,
    priors: Optional[Mapping[str, Prior]] = None,
    decision: DecisionConfig = DecisionConfig(),
    quad: QuadratureSpec = DEFAULT_QUADRATURE,
    *,
    workers: int = 1,
    chunk_size: int = 10_000,
) -> StudyResults:
    """Simulate ``cfg.cases`` cases and evaluate ``methods`` on each.

    A method named exactly ``thick_t`` defaults to the discrete uniform prior
    on the integer grid; other thick t-test labels need an entry in
    ``priors``.  Results do not depend on ``workers`` or ``chunk_size``.
    """
    if not methods:
        raise DomainError("at least one method is required")
    priors = _default_priors(methods, priors)
    for name in methods:
        if method_kind(name) is Method.THICK_T and name not in priors:
            raise DomainError(f"no prior configured for thick t-test {name!r}")
    bounds = list(range(0, cfg.cases, chunk_size)) + [cfg.cases]
    jobs = [(cfg, a, b, tuple(methods), priors, decision, quad) for a, b in zip(bounds[:-1], bounds[1:])]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_run_chunk, jobs))
    else:
        parts = [_run_chunk(job) for job in jobs]
    results = StudyResults.concat(parts)
    flagged = int(results.degenerate.sum())
    if flagged:
        warnings.warn(f"{flagged} case(s) had zero sample sd and were retained by every rule")
    return results

"""Decision criteria for rejecting a thick null hypothesis.

Six rules are implemented, each on the sufficient statistics of a normal
sample (size, mean, standard deviation):

* ``conventional`` / ``small_alpha``: two-sided one-sample t-test of the
  point null ``mu = mu0`` at two different levels;
* ``distance_only``: reject when the observed distance reaches the MPSD;
* ``mesp``: conventional AND distance-only;
* ``interval_based``: reject when the confidence interval for the mean and
  the null interval are disjoint;
* ``thick_t``: reject when the prior predictive p-value, a mixture over a
  prior on the null interval of the tail probability

      g(mu) = P(|Xbar - mu0| > |xbar - mu0|  given the mean is mu),

  falls below alpha.  ``Xbar`` is modelled as ``mu + T * s / sqrt(n)`` with
  ``T`` Student-t on ``n - 1`` degrees of freedom, which makes the p-value
  collapse to the ordinary two-sided t-test p-value when the MPSD is zero.

Scalar functions take :class:`SampleStats`; :func:`decide_batch` evaluates
any set of rules on arrays of statistics and is what the simulation uses.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Mapping, Optional, Sequence

import numpy as np
from scipy import special

from .numerics import (
    DEFAULT_QUADRATURE,
    DomainError,
    QuadratureSpec,
    check_probability,
    student_t_quantile,
)
from .priors import NearestEdge, Prior, ThickNull, prior_mix

__all__ = [
    "Method",
    "SampleStats",
    "DecisionConfig",
    "Verdict",
    "DegenerateSampleError",
    "t_test_p",
    "tail_probability",
    "decide_conventional",
    "decide_small_alpha",
    "decide_distance",
    "decide_mesp",
    "decide_interval",
    "interval_p",
    "thick_p",
    "thick_p_supremum",
    "decide_thick",
    "decide_batch",
    "thick_p_batch",
    "interval_rejects",
    "method_kind",
]


class Method(str, enum.Enum):
    CONVENTIONAL = "conventional"
    SMALL_ALPHA = "small_alpha"
    DISTANCE_ONLY = "distance_only"
    MESP = "mesp"
    INTERVAL_BASED = "interval_based"
    THICK_T = "thick_t"


class DegenerateSampleError(ValueError):
    """The sample standard deviation is zero, so no t statistic exists."""


@dataclass(frozen=True)
class SampleStats:
    """Sample size, mean and standard deviation (divisor ``n - 1``)."""

    n: int
    mean: float
    sd: float

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 2:
            raise DomainError("n must be an integer >= 2")
        if not (math.isfinite(self.mean) and math.isfinite(self.sd)):
            raise DomainError("mean and sd must be finite")
        if self.sd < 0:
            raise DomainError("sd must be nonnegative")

    @classmethod
    def from_sample(cls, x) -> "SampleStats":
        x = np.asarray(x, dtype=float)
        return cls(int(x.size), float(x.mean()), float(x.std(ddof=1)))

    @property
    def df(self) -> int:
        return int(self.n) - 1

    @property
    def se(self) -> float:
        return self.sd / math.sqrt(self.n)


@dataclass(frozen=True)
class DecisionConfig:
    alpha_conventional: float = 0.05
    alpha_small: float = 0.005
    alpha_thick: float = 0.05
    ci_level: float = 0.95

    def __post_init__(self):
        for name in ("alpha_conventional", "alpha_small", "alpha_thick", "ci_level"):
            check_probability(getattr(self, name), name, open_interval=True)


@dataclass(frozen=True)
class Verdict:
    method: Method
    reject: bool
    p_value: Optional[float] = None


def method_kind(name: str) -> Method:
    """Map a method label to its rule; any label starting with ``thick_t`` is a thick t-test."""
    if name.startswith(Method.THICK_T.value):
        return Method.THICK_T
    try:
        return Method(name)
    except ValueError:
        raise DomainError(f"unknown decision method {name!r}") from None


def _require_spread(stats: SampleStats):
    if stats.sd == 0:
        raise DegenerateSampleError("sample standard deviation is zero")


# Array cores.  ``dist`` is |xbar - mu0|, ``offset`` is (candidate mean - mu0).

def _two_sided_p(dist, se, df):
    return np.minimum(2.0 * special.stdtr(df, -dist / se), 1.0)


def _tail(offset, dist, se, df):
    # both terms are tail probabilities, never 1 - cdf
    return special.stdtr(df, (offset - dist) / se) + special.stdtr(df, (-dist - offset) / se)


def _ci_quantile(ci_level, df):
    if ci_level >= 1.0:
        return np.full(np.shape(df), np.inf)
    if ci_level <= 0.0:
        return np.zeros(np.shape(df))
    uniq, inverse = np.unique(df, return_inverse=True)
    q = np.asarray(student_t_quantile(0.5 * (1.0 + ci_level), uniq), dtype=float)
    return q[inverse].reshape(np.shape(df))


def interval_rejects(mean, mu0, mpsd, se, df, ci_level):
    """True where ``mean -/+ t * se`` and ``[mu0 - mpsd, mu0 + mpsd]`` are disjoint.

    A shared endpoint counts as intersecting.  ``ci_level`` of 0 or 1 is
    allowed here (the alpha sweep needs both ends).
    """
    q = _ci_quantile(ci_level, np.asarray(df, dtype=float))
    with np.errstate(invalid="ignore"):
        half = q * se
        lo = mean - half
        hi = mean + half
        out = (lo > mu0 + mpsd) | (hi < mu0 - mpsd)
    return np.asarray(out, dtype=bool)


def _interval_p(dist, mpsd, se, df):
    gap = np.maximum(dist - mpsd, 0.0)
    return np.minimum(2.0 * special.stdtr(df, -gap / se), 1.0)


# Scalar API

def t_test_p(stats: SampleStats, mu0: float) -> float:
    """Two-sided one-sample t-test p-value for ``mu = mu0``."""
    _require_spread(stats)
    return float(_two_sided_p(abs(stats.mean - mu0), stats.se, stats.df))


def tail_probability(candidate, stats: SampleStats, mu0: float):
    """``P(|Xbar - mu0| > |xbar - mu0|)`` when the true mean is ``candidate``."""
    _require_spread(stats)
    offset = np.asarray(candidate, dtype=float) - mu0
    out = _tail(offset, abs(stats.mean - mu0), stats.se, stats.df)
    return float(out) if out.ndim == 0 else out


def decide_conventional(stats: SampleStats, null: ThickNull, cfg: DecisionConfig = DecisionConfig()) -> Verdict:
    p = t_test_p(stats, null.mu0)
    return Verdict(Method.CONVENTIONAL, p < cfg.alpha_conventional, p)


def decide_small_alpha(stats: SampleStats, null: ThickNull, cfg: DecisionConfig = DecisionConfig()) -> Verdict:
    p = t_test_p(stats, null.mu0)
    return Verdict(Method.SMALL_ALPHA, p < cfg.alpha_small, p)


def decide_distance(stats: SampleStats, null: ThickNull) -> Verdict:
    return Verdict(Method.DISTANCE_ONLY, abs(stats.mean - null.mu0) >= null.mpsd)


def decide_mesp(stats: SampleStats, null: ThickNull, cfg: DecisionConfig = DecisionConfig()) -> Verdict:
    conv = decide_conventional(stats, null, cfg)
    dist = decide_distance(stats, null)
    return Verdict(Method.MESP, conv.reject and dist.reject, conv.p_value)


def interval_p(stats: SampleStats, null: ThickNull) -> float:
    """Smallest ``1 - ci_level`` at which the interval rule rejects."""
    _require_spread(stats)
    return float(_interval_p(abs(stats.mean - null.mu0), null.mpsd, stats.se, stats.df))


def decide_interval(stats: SampleStats, null: ThickNull, cfg: DecisionConfig = DecisionConfig()) -> Verdict:
    _require_spread(stats)
    reject = bool(interval_rejects(stats.mean, null.mu0, null.mpsd, stats.se, stats.df, cfg.ci_level))
    return Verdict(Method.INTERVAL_BASED, reject, interval_p(stats, null))


def thick_p(
    stats: SampleStats,
    null: ThickNull,
    prior: Prior,
    quad: QuadratureSpec = DEFAULT_QUADRATURE,
) -> float:
    """Prior predictive p-value of the thick null."""
    _require_spread(stats)
    if isinstance(prior, NearestEdge):
        loc = prior.resolve(null, stats.mean)
        p = prior_mix(prior, lambda mu: tail_probability(mu, stats, null.mu0), null, quad, location=loc)
    else:
        p = prior_mix(prior, lambda mu: tail_probability(mu, stats, null.mu0), null, quad)
    return min(max(p, 0.0), 1.0)


def thick_p_supremum(stats: SampleStats, null: ThickNull) -> float:
    """Largest tail probability over all means in the null interval.

    The tail probability grows with the distance between the candidate mean
    and ``mu0``, so the supremum sits on the interval edge.  When the
    observed mean lies outside the interval this is also the tail
    probability at the null value nearest to it.
    """
    _require_spread(stats)
    return min(float(_tail(null.mpsd, abs(stats.mean - null.mu0), stats.se, stats.df)), 1.0)


def decide_thick(
    stats: SampleStats,
    null: ThickNull,
    prior: Prior,
    cfg: DecisionConfig = DecisionConfig(),
    quad: QuadratureSpec = DEFAULT_QUADRATURE,
) -> Verdict:
    p = thick_p(stats, null, prior, quad)
    return Verdict(Method.THICK_T, p < cfg.alpha_thick, p)


# Batch API

def thick_p_batch(n, mean, sd, mu0, mpsd, prior: Prior, quad: QuadratureSpec = DEFAULT_QUADRATURE) -> np.ndarray:
    """Vectorized :func:`thick_p`; cases sharing a null share the prior support.

    Entries with ``sd == 0`` come back as NaN.
    """
    n, mean, sd, mu0, mpsd = np.broadcast_arrays(
        *(np.asarray(v, dtype=float) for v in (n, mean, sd, mu0, mpsd))
    )
    out = np.full(n.shape, np.nan)
    ok = sd > 0
    se = np.where(ok, sd, 1.0) / np.sqrt(n)
    df = n - 1
    dist = np.abs(mean - mu0)

    if isinstance(prior, NearestEdge):
        nearest = np.clip(mean, mu0 - mpsd, mu0 + mpsd)
        p = _tail(nearest - mu0, dist, se, df)
        out[ok] = np.minimum(p[ok], 1.0)
        return out

    keys = np.stack([mu0[ok], mpsd[ok]], axis=1)
    idx_ok = np.flatnonzero(ok)
    if idx_ok.size == 0:
        return out
    uniq, inverse = np.unique(keys, axis=0, return_inverse=True)
    inverse = inverse.reshape(-1)
    for j, (m0, m) in enumerate(uniq):
        rows = idx_ok[inverse == j]
        x, w = prior.support(ThickNull(float(m0), float(m)), quad)
        g = _tail((x - m0)[None, :], dist[rows, None], se[rows, None], df[rows, None])
        out[rows] = np.clip((g * w).sum(axis=1), 0.0, 1.0)
    return out


def decide_batch(
    n,
    mean,
    sd,
    mu0,
    mpsd,
    methods: Sequence[str],
    priors: Mapping[str, Prior] | None = None,
    cfg: DecisionConfig = DecisionConfig(),
    quad: QuadratureSpec = DEFAULT_QUADRATURE,
) -> dict[str, tuple[np.ndarray, np.ndarray]]:
    """Evaluate ``methods`` on arrays of statistics.

    Returns ``{method: (reject, p_value)}``; p-values are NaN where the rule
    has none.  Cases with zero standard deviation retain under every rule
    and carry NaN p-values.  Thick t-test labels look up their prior in
    ``priors``.
    """
    priors = dict(priors or {})
    n, mean, sd, mu0, mpsd = np.broadcast_arrays(
        *(np.asarray(v, dtype=float) for v in (n, mean, sd, mu0, mpsd))
    )
    ok = sd > 0
    se = np.where(ok, sd, 1.0) / np.sqrt(n)
    df = n - 1
    dist = np.abs(mean - mu0)
    nan = np.full(n.shape, np.nan)

    p_point = np.where(ok, _two_sided_p(dist, se, df), np.nan)
    distance = dist >= mpsd
    results = {}
    for name in methods:
        kind = method_kind(name)
        if kind is Method.CONVENTIONAL:
            results[name] = (ok & (p_point < cfg.alpha_conventional), p_point)
        elif kind is Method.SMALL_ALPHA:
            results[name] = (ok & (p_point < cfg.alpha_small), p_point)
        elif kind is Method.DISTANCE_ONLY:
            results[name] = (distance & ok, nan)
        elif kind is Method.MESP:
            results[name] = (ok & (p_point < cfg.alpha_conventional) & distance, p_point)
        elif kind is Method.INTERVAL_BASED:
            rej = interval_rejects(mean, mu0, mpsd, se, df, cfg.ci_level) & ok
            results[name] = (rej, np.where(ok, _interval_p(dist, mpsd, se, df), np.nan))
        else:
            if name not in priors:
                raise DomainError(f"no prior configured for thick t-test {name!r}")
            p = thick_p_batch(n, mean, sd, mu0, mpsd, priors[name], quad)
            results[name] = (ok & (p < cfg.alpha_thick), p)
    return results

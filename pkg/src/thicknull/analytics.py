"""Error-rate tables from simulated studies.

Positive means "reject the thick null".  Count-based rates (false discovery
and false omission) depend on how often the null is true in the study;
the normalized versions in :func:`normalized_rates_by_power` are built from
the rates instead and do not.  Ratios with a zero denominator are reported
as ``None``, never as 0.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

import numpy as np

from .decisions import Method, interval_rejects, method_kind
from .numerics import DomainError
from .simulation import POWER_CATEGORIES, StudyResults

__all__ = [
    "ConfusionCounts",
    "RateRow",
    "StratifiedTable",
    "DecileBinning",
    "NormalizedRow",
    "AlphaSweep",
    "confusion",
    "error_rates",
    "error_table",
    "success_by_power",
    "decile_bins",
    "success_by_decile",
    "normalized_rates_by_power",
    "alpha_sweep",
    "default_alpha_grid",
    "JITTER_SD",
]

# N(0, 1e-10) read as a variance
JITTER_SD = 1e-5


def _ratio(num, den) -> Optional[float]:
    return num / den if den else None


@dataclass(frozen=True)
class ConfusionCounts:
    tp: int = 0
    fp: int = 0
    tn: int = 0
    fn: int = 0

    def __add__(self, other: "ConfusionCounts") -> "ConfusionCounts":
        return ConfusionCounts(self.tp + other.tp, self.fp + other.fp, self.tn + other.tn, self.fn + other.fn)

    @classmethod
    def from_arrays(cls, reject, null_true) -> "ConfusionCounts":
        reject = np.asarray(reject, dtype=bool)
        null_true = np.asarray(null_true, dtype=bool)
        return cls(
            tp=int(np.sum(reject & ~null_true)),
            fp=int(np.sum(reject & null_true)),
            tn=int(np.sum(~reject & null_true)),
            fn=int(np.sum(~reject & ~null_true)),
        )

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.tn + self.fn

    @property
    def fpr(self):
        return _ratio(self.fp, self.fp + self.tn)

    @property
    def fnr(self):
        return _ratio(self.fn, self.fn + self.tp)

    @property
    def tpr(self):
        return _ratio(self.tp, self.tp + self.fn)

    @property
    def tnr(self):
        return _ratio(self.tn, self.tn + self.fp)

    @property
    def fdr(self):
        return _ratio(self.fp, self.fp + self.tp)

    @property
    def for_(self):
        return _ratio(self.fn, self.fn + self.tn)

    @property
    def success(self):
        return _ratio(self.tp + self.tn, self.total)


@dataclass(frozen=True)
class RateRow:
    method: str
    counts: ConfusionCounts
    stratum: Optional[str] = None

    @property
    def fpr(self):
        return self.counts.fpr

    @property
    def fnr(self):
        return self.counts.fnr

    @property
    def fdr(self):
        return self.counts.fdr

    @property
    def for_(self):
        return self.counts.for_

    @property
    def success(self):
        return self.counts.success


@dataclass
class StratifiedTable:
    """Success rates per (null truth, stratum, method)."""

    key: str
    strata: tuple
    methods: tuple
    cases: dict = field(default_factory=dict)
    success: dict = field(default_factory=dict)

    def rate(self, null_true: bool, stratum, method: str):
        return self.success[(null_true, stratum, method)]

    def count(self, null_true: bool, stratum) -> int:
        return self.cases[(null_true, stratum)]


def confusion(results: StudyResults, method: str, mask=None) -> ConfusionCounts:
    reject = results.reject[method]
    null_true = results.null_true
    if mask is not None:
        reject, null_true = reject[mask], null_true[mask]
    return ConfusionCounts.from_arrays(reject, null_true)


def error_rates(results: StudyResults, method: str, mask=None) -> RateRow:
    """Count-based error rates of ``method`` over the study (or ``mask``)."""
    return RateRow(method, confusion(results, method, mask))


def error_table(results: StudyResults, methods: Optional[Sequence[str]] = None) -> list[RateRow]:
    return [error_rates(results, m) for m in (methods or results.methods)]


def _stratified(results, strata_values, strata, key, methods):
    methods = tuple(methods or results.methods)
    table = StratifiedTable(key, tuple(strata), methods)
    null_true = results.null_true
    for truth in (True, False):
        for s in strata:
            mask = (null_true == truth) & (strata_values == s)
            table.cases[(truth, s)] = int(mask.sum())
            for m in methods:
                correct = results.reject[m][mask] != truth
                table.success[(truth, s, m)] = _ratio(int(correct.sum()), int(mask.sum()))
    return table


def success_by_power(results: StudyResults, methods: Optional[Sequence[str]] = None) -> StratifiedTable:
    """Inference success by null truth and nominal-power category."""
    return _stratified(results, results.power_category, POWER_CATEGORIES, "power", methods)


@dataclass
class DecileBinning:
    jitter_seed: int
    jittered: np.ndarray
    decile: np.ndarray  # 1..10 per case
    bounds: list  # (min, max) of the unjittered values per decile

    def sizes(self) -> np.ndarray:
        return np.bincount(self.decile, minlength=11)[1:]


def decile_bins(results: StudyResults, jitter_seed: int = 0) -> DecileBinning:
    """Split cases into ten equal-count bins of relative MPSD.

    Ties are spread across bin edges by a tiny normal jitter; remaining
    ties fall back to case order.
    """
    values = results.relative_mpsd
    total = values.size
    if total < 10:
        raise DomainError(f"need at least 10 cases for decile binning, got {total}")
    rng = np.random.Generator(np.random.Philox(key=int(jitter_seed)))
    jittered = values + rng.normal(0.0, JITTER_SD, total)
    order = np.lexsort((results.case_index, jittered))
    decile = np.empty(total, dtype=np.int64)
    decile[order] = np.arange(total) * 10 // total + 1
    bounds = []
    for d in range(1, 11):
        members = values[decile == d]
        bounds.append((float(members.min()), float(members.max())))
    return DecileBinning(int(jitter_seed), jittered, decile, bounds)


def success_by_decile(results: StudyResults, bins: DecileBinning, methods: Optional[Sequence[str]] = None) -> StratifiedTable:
    """Inference success by null truth and relative-MPSD decile."""
    return _stratified(results, bins.decile, tuple(range(1, 11)), "decile", methods)


@dataclass(frozen=True)
class NormalizedRow:
    stratum: str
    method: str
    cases: int
    fpr: Optional[float]
    tpr: Optional[float]
    fnr: Optional[float]
    tnr: Optional[float]

    @property
    def nfdr(self):
        if self.fpr is None or self.tpr is None:
            return None
        return _ratio(self.fpr, self.fpr + self.tpr)

    @property
    def nfor(self):
        if self.fnr is None or self.tnr is None:
            return None
        return _ratio(self.fnr, self.fnr + self.tnr)


def normalized_rates_by_power(results: StudyResults, methods: Optional[Sequence[str]] = None) -> list[NormalizedRow]:
    """Rate-normalized false discovery / omission rates per power category."""
    categories = results.power_category
    rows = []
    for cat in POWER_CATEGORIES:
        mask = categories == cat
        for m in methods or results.methods:
            c = confusion(results, m, mask)
            rows.append(NormalizedRow(cat, m, int(mask.sum()), c.fpr, c.tpr, c.fnr, c.tnr))
    return rows


def default_alpha_grid(step: float = 0.01) -> np.ndarray:
    count = int(round(1.0 / step))
    return np.round(np.arange(count + 1) * step, 12)


@dataclass
class AlphaSweep:
    alphas: np.ndarray
    fpr: dict
    tpr: dict

    def rows(self) -> Iterable[tuple]:
        for i, a in enumerate(self.alphas):
            for m in self.fpr:
                yield float(a), m, self.fpr[m][i], self.tpr[m][i]


def _sweep_rejections(results: StudyResults, method: str, alpha: float) -> np.ndarray:
    kind = method_kind(method)
    ok = ~results.degenerate
    distance = np.abs(results.mean - results.mu0) >= results.mpsd
    if kind is Method.DISTANCE_ONLY:
        return distance & ok
    if kind is Method.INTERVAL_BASED:
        se = np.where(ok, results.sd, 1.0) / np.sqrt(results.n)
        return interval_rejects(results.mean, results.mu0, results.mpsd, se, results.n - 1, 1.0 - alpha) & ok
    with np.errstate(invalid="ignore"):
        below = results.p_value[method] < alpha
    if kind is Method.MESP:
        return below & distance & ok
    return below & ok


def alpha_sweep(results: StudyResults, alpha_grid=None, methods: Optional[Sequence[str]] = None) -> AlphaSweep:
    """False and true positive rates of each rule as alpha varies.

    Stored p-values are re-thresholded; the interval rule is re-evaluated
    with confidence level ``1 - alpha``; the distance rule has no alpha and
    gives a flat curve.  Nothing is re-simulated.
    """
    alphas = default_alpha_grid() if alpha_grid is None else np.asarray(alpha_grid, dtype=float)
    if alphas.size == 0 or np.any(~np.isfinite(alphas)) or np.any((alphas < 0) | (alphas > 1)):
        raise DomainError("alpha grid must be nonempty and lie in [0, 1]")
    methods = tuple(methods or results.methods)
    null_true = results.null_true
    fpr = {m: np.empty(alphas.size) for m in methods}
    tpr = {m: np.empty(alphas.size) for m in methods}
    for i, a in enumerate(alphas):
        for m in methods:
            c = ConfusionCounts.from_arrays(_sweep_rejections(results, m, float(a)), null_true)
            fpr[m][i] = np.nan if c.fpr is None else c.fpr
            tpr[m][i] = np.nan if c.tpr is None else c.tpr
    return AlphaSweep(alphas, fpr, tpr)

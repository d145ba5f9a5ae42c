"""Thick null hypotheses and the priors on the mean that a thick t-test mixes over.

A prior here is a description that is independent of any particular null:
it is resolved against a :class:`ThickNull` when evaluated, and all of its
mass is then restricted to the null interval.  Every prior can be reduced to
a finite set of locations and weights (:meth:`Prior.support`), which is what
the vectorized simulation path uses; :func:`prior_mix` is the scalar entry
point.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from .numerics import (
    DEFAULT_QUADRATURE,
    DomainError,
    QuadratureSpec,
    gauss_legendre,
    integrate,
    normal_cdf,
    normal_sf,
)

__all__ = [
    "DegeneratePriorError",
    "InsufficientDataError",
    "DegenerateDataError",
    "ThickNull",
    "Prior",
    "PointMass",
    "DiscreteUniform",
    "ContinuousUniform",
    "TruncatedNormal",
    "EmpiricalKDE",
    "NearestEdge",
    "prior_mix",
    "fit_truncated_normal",
    "fit_kde",
    "silverman_bandwidth",
    "prior_from_dict",
]

# slack for deciding whether a grid point sits on an interval endpoint
_GRID_SLACK = 1e-9


class DegeneratePriorError(ValueError):
    """The prior puts no mass on the null interval."""


class InsufficientDataError(ValueError):
    """Too few effect sizes to fit a prior."""


class DegenerateDataError(ValueError):
    """Effect sizes without spread cannot define a prior."""


@dataclass(frozen=True)
class ThickNull:
    """The interval hypothesis ``|mu - mu0| <= mpsd``."""

    mu0: float
    mpsd: float

    def __post_init__(self):
        if not (math.isfinite(self.mu0) and math.isfinite(self.mpsd)):
            raise DomainError("mu0 and mpsd must be finite")
        if self.mpsd < 0:
            raise DomainError("mpsd must be nonnegative")

    @classmethod
    def from_bounds(cls, lo: float, hi: float) -> "ThickNull":
        if hi < lo:
            raise DomainError("upper bound below lower bound")
        return cls(0.5 * (lo + hi), 0.5 * (hi - lo))

    @property
    def lower(self) -> float:
        return self.mu0 - self.mpsd

    @property
    def upper(self) -> float:
        return self.mu0 + self.mpsd

    @property
    def interval(self) -> tuple[float, float]:
        return self.lower, self.upper

    @property
    def is_point(self) -> bool:
        return self.mpsd == 0

    def contains(self, mu):
        return np.abs(np.asarray(mu, dtype=float) - self.mu0) <= self.mpsd

    def nearest(self, x):
        """Point of the interval closest to ``x``."""
        out = np.clip(x, self.lower, self.upper)
        return float(out) if np.ndim(out) == 0 else out


class Prior:
    """Distribution of the mean under the thick null."""

    kind = "prior"
    continuous = False

    def support(self, null: ThickNull, quad: QuadratureSpec = DEFAULT_QUADRATURE):
        """Locations inside the null interval and weights summing to one."""
        raise NotImplementedError

    def to_dict(self) -> dict:
        return {"kind": self.kind}


@dataclass(frozen=True)
class PointMass(Prior):
    """All mass on one location; ``None`` means the centre of the null."""

    location: Optional[float] = None
    kind = "point-mass"

    def resolve(self, null: ThickNull) -> float:
        loc = null.mu0 if self.location is None else float(self.location)
        if abs(loc - null.mu0) > null.mpsd + _GRID_SLACK:
            raise DegeneratePriorError(f"point mass at {loc} lies outside {null.interval}")
        return loc

    def support(self, null, quad=DEFAULT_QUADRATURE):
        return np.array([self.resolve(null)]), np.ones(1)

    def to_dict(self):
        return {"kind": self.kind, "location": self.location}


@dataclass(frozen=True)
class DiscreteUniform(Prior):
    """Equal weight on every grid point ``origin + k * step`` inside the null."""

    step: float = 1.0
    origin: float = 0.0
    kind = "discrete-uniform"

    def __post_init__(self):
        if not self.step > 0:
            raise DomainError("grid step must be positive")

    def support(self, null, quad=DEFAULT_QUADRATURE):
        k_lo = math.ceil((null.lower - self.origin) / self.step - _GRID_SLACK)
        k_hi = math.floor((null.upper - self.origin) / self.step + _GRID_SLACK)
        if k_hi < k_lo:
            raise DegeneratePriorError(f"no grid points inside {null.interval}")
        points = self.origin + self.step * np.arange(k_lo, k_hi + 1, dtype=float)
        return points, np.full(points.size, 1.0 / points.size)

    def to_dict(self):
        return {"kind": self.kind, "step": self.step, "origin": self.origin}


class _ContinuousPrior(Prior):
    continuous = True

    def unnormalized(self, x, null):
        raise NotImplementedError

    def mass(self, null) -> float:
        raise NotImplementedError

    def density(self, x, null):
        """Density normalized over the null interval (zero outside it)."""
        m = self.mass(null)
        if not m > 0:
            raise DegeneratePriorError(f"prior has no mass on {null.interval}")
        x = np.asarray(x, dtype=float)
        inside = null.contains(x)
        return np.where(inside, self.unnormalized(x, null) / m, 0.0)

    def support(self, null, quad=DEFAULT_QUADRATURE):
        if null.is_point:
            return np.array([null.mu0]), np.ones(1)
        # weights on the reference interval: the half-width factor cancels in
        # the normalization and would underflow for very narrow nulls
        ref, w = gauss_legendre(quad.nodes)
        x = null.mu0 + null.mpsd * ref
        w = w * self.unnormalized(x, null)
        total = w.sum()
        if not total > 0:
            raise DegeneratePriorError(f"prior has no mass on {null.interval}")
        return x, w / total


@dataclass(frozen=True)
class ContinuousUniform(_ContinuousPrior):
    """Flat density over the null interval."""

    kind = "continuous-uniform"

    def unnormalized(self, x, null):
        return np.ones_like(np.asarray(x, dtype=float))

    def mass(self, null):
        return 2.0 * null.mpsd


@dataclass(frozen=True)
class TruncatedNormal(_ContinuousPrior):
    """Normal density with the given location and scale, truncated to the null."""

    location: float
    scale: float
    kind = "truncated-normal"

    def __post_init__(self):
        if not (math.isfinite(self.location) and math.isfinite(self.scale)):
            raise DomainError("location and scale must be finite")
        if not self.scale > 0:
            raise DomainError("scale must be positive")

    def unnormalized(self, x, null):
        z = (np.asarray(x, dtype=float) - self.location) / self.scale
        return np.exp(-0.5 * z * z) / (self.scale * math.sqrt(2.0 * math.pi))

    def mass(self, null):
        a = (null.lower - self.location) / self.scale
        b = (null.upper - self.location) / self.scale
        if a > 0:
            return normal_sf(a) - normal_sf(b)
        return normal_cdf(b) - normal_cdf(a)

    def to_dict(self):
        return {"kind": self.kind, "location": self.location, "scale": self.scale}


@dataclass(frozen=True)
class EmpiricalKDE(_ContinuousPrior):
    """Gaussian kernel density of a sample, renormalized over the null.

    Optional per-point ``weights`` need not sum to one.
    """

    sample: tuple
    bandwidth: float
    weights: Optional[tuple] = None
    kind = "empirical-kde"

    def __post_init__(self):
        object.__setattr__(self, "sample", tuple(float(v) for v in self.sample))
        if not self.sample:
            raise InsufficientDataError("kernel density needs at least one point")
        if not (math.isfinite(self.bandwidth) and self.bandwidth > 0):
            raise DomainError("bandwidth must be positive")
        if self.weights is not None:
            object.__setattr__(self, "weights", tuple(float(v) for v in self.weights))
            w = np.asarray(self.weights)
            if w.size != len(self.sample) or np.any(w < 0) or not w.sum() > 0:
                raise DomainError("weights must be nonnegative, one per point, not all zero")

    def _w(self):
        if self.weights is None:
            return np.full(len(self.sample), 1.0 / len(self.sample))
        w = np.asarray(self.weights)
        return w / w.sum()

    def unnormalized(self, x, null):
        x = np.asarray(x, dtype=float)
        pts = np.asarray(self.sample)
        z = (x[..., None] - pts) / self.bandwidth
        k = np.exp(-0.5 * z * z) / (self.bandwidth * math.sqrt(2.0 * math.pi))
        return k @ self._w()

    def mass(self, null):
        pts = np.asarray(self.sample)
        hi = normal_cdf((null.upper - pts) / self.bandwidth)
        lo = normal_cdf((null.lower - pts) / self.bandwidth)
        return float(np.dot(hi - lo, self._w()))

    def to_dict(self):
        out = {"kind": self.kind, "bandwidth": self.bandwidth, "sample": list(self.sample)}
        if self.weights is not None:
            out["weights"] = list(self.weights)
        return out


@dataclass(frozen=True)
class NearestEdge(Prior):
    """Point mass at the null value closest to the observed mean.

    The location depends on the data, so it has to be resolved per
    observation with :meth:`resolve` before mixing.
    """

    kind = "nearest-edge"

    def resolve(self, null: ThickNull, observed_mean: float) -> float:
        return null.nearest(observed_mean)

    def support(self, null, quad=DEFAULT_QUADRATURE):
        raise DegeneratePriorError("nearest-edge prior must be resolved against an observed mean")


def prior_mix(
    prior: Prior,
    f: Callable,
    null: ThickNull,
    quad: QuadratureSpec = DEFAULT_QUADRATURE,
    *,
    location: Optional[float] = None,
):
    """Average ``f`` over the prior restricted to the null interval.

    ``f`` should accept a numpy array of locations.  For a
    :class:`NearestEdge` prior the resolved ``location`` must be given.
    Continuous priors use fixed-node Gauss-Legendre unless ``quad`` asks for
    adaptive Simpson, in which case numerator and normalizer are integrated
    separately.
    """
    if isinstance(prior, NearestEdge):
        if location is None:
            raise DegeneratePriorError("nearest-edge prior needs a resolved location")
        if not null.contains(location) and abs(null.nearest(location) - location) > _GRID_SLACK:
            raise DomainError("resolved location lies outside the null interval")
        return float(np.asarray(f(np.array([location])), dtype=float).reshape(-1)[0])

    if prior.continuous and quad.rule == "adaptive-simpson" and not null.is_point:
        num = integrate(lambda x: f(x) * prior.unnormalized(x, null), null.lower, null.upper, quad)
        den = integrate(lambda x: prior.unnormalized(x, null), null.lower, null.upper, quad)
        if not den > 0:
            raise DegeneratePriorError(f"prior has no mass on {null.interval}")
        return num / den

    x, w = prior.support(null, quad)
    vals = np.asarray(f(x), dtype=float)
    if vals.shape != x.shape:
        vals = np.array([float(f(v)) for v in x])
    return float((w * vals).sum())


def _check_effects(effects) -> np.ndarray:
    arr = np.asarray(effects, dtype=float).ravel()
    if not np.all(np.isfinite(arr)):
        raise DomainError("effect sizes must be finite")
    if arr.size < 3:
        raise InsufficientDataError(f"need at least 3 effect sizes, got {arr.size}")
    if np.ptp(arr) == 0:
        raise DegenerateDataError("effect sizes have zero variance")
    return arr


def fit_truncated_normal(effects: Sequence[float], bounds: tuple[float, float]) -> TruncatedNormal:
    """Truncated normal with the sample mean and standard deviation of ``effects``.

    The returned prior is truncated to whatever null it is evaluated on;
    use ``ThickNull.from_bounds(*bounds)`` to evaluate it on ``bounds``.
    """
    arr = _check_effects(effects)
    lo, hi = bounds
    if np.any((arr < lo) | (arr > hi)):
        raise DomainError(f"effect sizes must lie within [{lo}, {hi}]")
    return TruncatedNormal(float(arr.mean()), float(arr.std(ddof=1)))


def silverman_bandwidth(effects: Sequence[float]) -> float:
    """Silverman's rule of thumb, ``0.9 * min(sd, IQR / 1.34) * m ** (-1/5)``.

    Falls back to the standard deviation when the interquartile range is zero.
    """
    arr = _check_effects(effects)
    sd = arr.std(ddof=1)
    q75, q25 = np.percentile(arr, [75, 25])
    spread = min(sd, (q75 - q25) / 1.34) if q75 > q25 else sd
    return float(0.9 * spread * arr.size ** (-0.2))


def fit_kde(effects: Sequence[float], bounds: tuple[float, float]) -> EmpiricalKDE:
    """Gaussian KDE of ``effects`` with Silverman's bandwidth."""
    arr = _check_effects(effects)
    lo, hi = bounds
    if hi <= lo:
        raise DomainError("bounds must have positive width")
    return EmpiricalKDE(tuple(arr), silverman_bandwidth(arr))


_KINDS = {
    "point-mass": lambda d: PointMass(d.get("location")),
    "discrete-uniform": lambda d: DiscreteUniform(float(d.get("step", 1.0)), float(d.get("origin", 0.0))),
    "continuous-uniform": lambda d: ContinuousUniform(),
    "truncated-normal": lambda d: TruncatedNormal(float(d["location"]), float(d["scale"])),
    "empirical-kde": lambda d: EmpiricalKDE(tuple(d["sample"]), float(d["bandwidth"]), d.get("weights")),
    "nearest-edge": lambda d: NearestEdge(),
}


def prior_from_dict(d: dict) -> Prior:
    """Inverse of :meth:`Prior.to_dict`."""
    try:
        build = _KINDS[d["kind"]]
    except KeyError:
        raise DomainError(f"unknown prior kind {d.get('kind')!r}") from None
    try:
        return build(d)
    except KeyError as exc:
        raise DomainError(f"prior of kind {d['kind']!r} is missing {exc.args[0]!r}") from None

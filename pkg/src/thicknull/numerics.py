"""Special functions and quadrature used by every decision rule.

The normal and Student-t distribution functions are thin, validated wrappers
around the Cephes routines in :mod:`scipy.special`; they accept scalars or
arrays and return the same kind.  Upper tails have their own entry points
(:func:`normal_sf`, :func:`student_t_sf`) so callers never form ``1 - cdf``
in the far tail.

Quadrature offers a fixed-node Gauss-Legendre rule (the default, exact for
polynomials of degree ``2 * nodes - 1``) refined by panel bisection until the
requested absolute tolerance is met, and a classic adaptive Simpson rule.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable

import numpy as np
from scipy import special

__all__ = [
    "DomainError",
    "ConvergenceError",
    "QuadratureSpec",
    "DEFAULT_QUADRATURE",
    "check_probability",
    "normal_pdf",
    "normal_cdf",
    "normal_sf",
    "normal_quantile",
    "reg_inc_beta",
    "student_t_cdf",
    "student_t_sf",
    "student_t_quantile",
    "gauss_legendre",
    "integrate",
]

_MAX_LEVELS = 30
_ROUNDING_FLOOR = 64 * np.finfo(float).eps


class DomainError(ValueError):
    """An argument lies outside the domain of a numerical routine."""


class ConvergenceError(ArithmeticError):
    """An iterative routine hit its iteration cap before meeting its tolerance."""


def _wrap(value, scalar):
    return float(value) if scalar else value


def _finite(x, name):
    arr = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise DomainError(f"{name} must be finite")
    return arr, arr.ndim == 0


def check_probability(p, name="p", *, open_interval=False):
    """Validate a probability (scalar or array) and return it as float(s).

    NaN is always rejected.  With ``open_interval`` the endpoints 0 and 1 are
    rejected as well.
    """
    arr = np.asarray(p, dtype=float)
    if np.any(np.isnan(arr)):
        raise DomainError(f"{name} must not be NaN")
    if open_interval:
        bad = np.any((arr <= 0.0) | (arr >= 1.0))
    else:
        bad = np.any((arr < 0.0) | (arr > 1.0))
    if bad:
        interval = "(0, 1)" if open_interval else "[0, 1]"
        raise DomainError(f"{name} must lie in {interval}")
    return _wrap(arr, arr.ndim == 0)


@dataclass(frozen=True)
class QuadratureSpec:
    """How to integrate against a continuous prior.

    ``nodes`` is the Gauss-Legendre order, or the number of initial panels
    for adaptive Simpson.
    """

    rule: str = "gauss-legendre"
    nodes: int = 64
    abs_tol: float = 1e-10

    def __post_init__(self):
        if self.rule not in ("gauss-legendre", "adaptive-simpson"):
            raise DomainError(f"unknown quadrature rule {self.rule!r}")
        if int(self.nodes) != self.nodes or self.nodes < 2:
            raise DomainError("nodes must be an integer >= 2")
        if not (0.0 < self.abs_tol <= 1e-6):
            raise DomainError("abs_tol must lie in (0, 1e-6]")


DEFAULT_QUADRATURE = QuadratureSpec()


def normal_pdf(x):
    arr, scalar = _finite(x, "x")
    return _wrap(np.exp(-0.5 * arr * arr) / math.sqrt(2.0 * math.pi), scalar)


def normal_cdf(x):
    """Standard normal distribution function."""
    arr, scalar = _finite(x, "x")
    return _wrap(special.ndtr(arr), scalar)


def normal_sf(x):
    """Standard normal upper tail ``1 - normal_cdf(x)``, without cancellation."""
    arr, scalar = _finite(x, "x")
    return _wrap(special.ndtr(-arr), scalar)


def normal_quantile(p):
    """Inverse of :func:`normal_cdf` on the open unit interval."""
    arr = np.asarray(check_probability(p, open_interval=True), dtype=float)
    return _wrap(special.ndtri(arr), arr.ndim == 0)


def reg_inc_beta(a, b, x):
    """Regularized incomplete beta function ``I_x(a, b)``."""
    a_arr, _ = _finite(a, "a")
    b_arr, _ = _finite(b, "b")
    x_arr, scalar = _finite(x, "x")
    if np.any(a_arr <= 0) or np.any(b_arr <= 0):
        raise DomainError("a and b must be positive")
    if np.any((x_arr < 0) | (x_arr > 1)):
        raise DomainError("x must lie in [0, 1]")
    out = special.betainc(a_arr, b_arr, x_arr)
    return _wrap(out, scalar and a_arr.ndim == 0 and b_arr.ndim == 0)


def _check_df(df):
    arr = np.asarray(df, dtype=float)
    if np.any(np.isnan(arr)) or np.any(arr <= 0):
        raise DomainError("degrees of freedom must be positive")
    return arr


def student_t_cdf(x, df):
    """Student-t distribution function with ``df`` degrees of freedom."""
    arr, scalar = _finite(x, "x")
    df_arr = _check_df(df)
    return _wrap(special.stdtr(df_arr, arr), scalar and df_arr.ndim == 0)


def student_t_sf(x, df):
    """Student-t upper tail ``P(T > x)``."""
    arr, scalar = _finite(x, "x")
    df_arr = _check_df(df)
    return _wrap(special.stdtr(df_arr, -arr), scalar and df_arr.ndim == 0)


def student_t_quantile(p, df):
    """Inverse Student-t distribution function, polished by Newton steps.

    ``p`` must lie in the open unit interval.
    """
    p_arr = np.asarray(check_probability(p, open_interval=True), dtype=float)
    df_arr = _check_df(df)
    q = special.stdtrit(df_arr, p_arr)
    # two Newton steps against the upper/lower tail that is small
    for _ in range(2):
        upper = q > 0
        resid = np.where(
            upper,
            special.stdtr(df_arr, -q) - (1.0 - p_arr),
            special.stdtr(df_arr, q) - p_arr,
        )
        dens = _t_pdf(q, df_arr)
        step = np.where(dens > 0, resid / np.where(dens > 0, dens, 1.0), 0.0)
        q = np.where(upper, q + step, q - step)
    return _wrap(q, p_arr.ndim == 0 and df_arr.ndim == 0)


def _t_pdf(x, df):
    logc = special.gammaln((df + 1) / 2) - special.gammaln(df / 2) - 0.5 * np.log(df * np.pi)
    return np.exp(logc - (df + 1) / 2 * np.log1p(x * x / df))


@lru_cache(maxsize=64)
def _legendre(nodes):
    x, w = np.polynomial.legendre.leggauss(nodes)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def gauss_legendre(nodes, lo=-1.0, hi=1.0):
    """Gauss-Legendre abscissas and weights mapped onto ``[lo, hi]``."""
    if int(nodes) != nodes or nodes < 2:
        raise DomainError("nodes must be an integer >= 2")
    x, w = _legendre(int(nodes))
    half = 0.5 * (hi - lo)
    return lo + half * (x + 1.0), half * w


def _evaluate(f, x):
    try:
        y = np.asarray(f(x), dtype=float)
    except TypeError:
        y = None
    if y is None or y.shape != x.shape:
        y = np.array([float(f(xi)) for xi in x])
    if not np.all(np.isfinite(y)):
        raise DomainError("integrand is not finite on the integration interval")
    return y


def _gl_panel(f, lo, hi, nodes):
    x, w = gauss_legendre(nodes, lo, hi)
    return float(np.dot(w, _evaluate(f, x)))


def _gl_adaptive(f, lo, hi, nodes, tol, whole, level):
    mid = 0.5 * (lo + hi)
    left = _gl_panel(f, lo, mid, nodes)
    right = _gl_panel(f, mid, hi, nodes)
    refined = left + right
    if abs(refined - whole) <= max(tol, _ROUNDING_FLOOR * abs(refined)):
        return refined
    if level >= _MAX_LEVELS:
        raise ConvergenceError("Gauss-Legendre refinement did not reach tolerance")
    return _gl_adaptive(f, lo, mid, nodes, tol / 2, left, level + 1) + _gl_adaptive(
        f, mid, hi, nodes, tol / 2, right, level + 1
    )


def _simpson(f, a, fa, b, fb):
    m = 0.5 * (a + b)
    fm = float(f(m))
    return m, fm, (b - a) / 6.0 * (fa + 4.0 * fm + fb)


def _simpson_adaptive(f, a, fa, b, fb, m, fm, whole, tol, level):
    lm, flm, left = _simpson(f, a, fa, m, fm)
    rm, frm, right = _simpson(f, m, fm, b, fb)
    delta = left + right - whole
    if abs(delta) <= max(15.0 * tol, _ROUNDING_FLOOR * abs(whole)):
        return left + right + delta / 15.0
    if level >= _MAX_LEVELS:
        raise ConvergenceError("adaptive Simpson did not reach tolerance")
    return _simpson_adaptive(f, a, fa, m, fm, lm, flm, left, tol / 2, level + 1) + _simpson_adaptive(
        f, m, fm, b, fb, rm, frm, right, tol / 2, level + 1
    )


def integrate(f: Callable, lo: float, hi: float, spec: QuadratureSpec = DEFAULT_QUADRATURE) -> float:
    """Integrate ``f`` over ``[lo, hi]`` to within ``spec.abs_tol``.

    Gauss-Legendre starts from one panel of ``spec.nodes`` points and bisects
    panels until two successive estimates agree.  ``f`` should accept a numpy
    array for that rule; scalar-only callables are evaluated point by point.

    Raises
    ------
    DomainError
        If ``lo > hi`` or a bound is not finite.
    ConvergenceError
        If the tolerance is not met within the refinement cap.
    """
    if not (math.isfinite(lo) and math.isfinite(hi)):
        raise DomainError("integration bounds must be finite")
    if lo > hi:
        raise DomainError("lower bound exceeds upper bound")
    if lo == hi:
        return 0.0
    if spec.rule == "gauss-legendre":
        whole = _gl_panel(f, lo, hi, spec.nodes)
        return _gl_adaptive(f, lo, hi, spec.nodes, spec.abs_tol, whole, 0)

    edges = np.linspace(lo, hi, spec.nodes + 1)
    total = 0.0
    tol = spec.abs_tol / spec.nodes
    for a, b in zip(edges[:-1], edges[1:]):
        fa, fb = float(f(a)), float(f(b))
        m, fm, whole = _simpson(f, a, fa, b, fb)
        total += _simpson_adaptive(f, a, fa, b, fb, m, fm, whole, tol, 0)
    if not math.isfinite(total):
        raise DomainError("integrand is not finite on the integration interval")
    return total

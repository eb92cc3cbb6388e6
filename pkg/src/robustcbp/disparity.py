"""Disparities between a data pmf and a parametric offspring family.

A disparity is D(q, theta) = sum_k G(delta_k) p_k(theta) with Pearson residual
delta_k = q_k / p_k(theta) - 1 (taken as 0 where p_k(theta) = 0).  Outside the
support of q the residual is -1, so those terms collapse to G(-1) times the
remaining tail mass of p(theta), which is added in closed form.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.special import xlogy

from .errors import (DegenerateObjectiveError, DegradedAccuracyWarning,
                     DomainError)
from .families import as_pmf
from .numerics import golden_section, pattern_search

H_FIRST = 1e-5
H_SECOND = 1e-4
MDE_GRID = 1001
SIMPLEX_STEP = 1e-3


def _kl_term(q, p):
    with np.errstate(divide="ignore", invalid="ignore"):
        logratio = np.where(q > 0, np.log(q) - np.log(p), 0.0)
    return np.where(q > 0, q * logratio, 0.0) - q + p


def _hd_term(q, p):
    return np.where(p > 0, 2.0 * (np.sqrt(q) - np.sqrt(p)) ** 2, 0.0)


def _ned_term(q, p):
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        delta = np.where(p > 0, q / p - 1.0, 0.0)
        return np.where(p > 0, p * np.expm1(-delta) + (q - p), 0.0)


@dataclass(frozen=True)
class DisparityKind:
    tag: str
    g: Callable[[np.ndarray], np.ndarray]
    g_prime: Callable[[np.ndarray], np.ndarray]
    g_at_minus_one: float
    bounded_form_available: bool
    _term: Callable = None

    def term(self, q, p):
        """G(delta) * p evaluated stably from (q, p)."""
        return self._term(q, p)

    def __repr__(self):
        return f"DisparityKind({self.tag})"


KL = DisparityKind(
    "KL",
    g=lambda d: xlogy(np.asarray(d) + 1.0, np.asarray(d) + 1.0) - np.asarray(d),
    g_prime=lambda d: np.log(np.asarray(d) + 1.0),
    g_at_minus_one=1.0,
    bounded_form_available=False,
    _term=_kl_term,
)
HD = DisparityKind(
    "HD",
    g=lambda d: 2.0 * (np.sqrt(np.asarray(d) + 1.0) - 1.0) ** 2,
    g_prime=lambda d: 2.0 - 2.0 / np.sqrt(np.asarray(d) + 1.0),
    g_at_minus_one=2.0,
    bounded_form_available=False,
    _term=_hd_term,
)
NED = DisparityKind(
    "NED",
    g=lambda d: np.expm1(-np.asarray(d, dtype=float)) + np.asarray(d),
    g_prime=lambda d: -np.expm1(-np.asarray(d, dtype=float)),
    g_at_minus_one=math.e - 2.0,
    bounded_form_available=True,
    _term=_ned_term,
)
KINDS = {"KL": KL, "HD": HD, "NED": NED}


def get_kind(name) -> DisparityKind:
    if isinstance(name, DisparityKind):
        return name
    try:
        return KINDS[str(name).upper()]
    except KeyError:
        raise DomainError(f"unknown disparity kind {name!r}") from None


@dataclass(frozen=True)
class PearsonResidualField:
    ks: np.ndarray
    residuals: np.ndarray

    def as_dict(self) -> dict[int, float]:
        return dict(zip(self.ks.tolist(), self.residuals.tolist()))


def pearson_residuals(q, family, theta) -> PearsonResidualField:
    q = as_pmf(q)
    hint = family.support_hint(theta)
    ks = np.union1d(np.flatnonzero(q > 0), np.arange(hint + 1))
    qk = np.where(ks < q.size, q[np.minimum(ks, q.size - 1)], 0.0)
    p = family.probs(theta, ks)
    with np.errstate(divide="ignore", invalid="ignore"):
        delta = np.where(p > 0, qk / p - 1.0, 0.0)
    return PearsonResidualField(ks, delta)


def _support(q: np.ndarray, support_max: int | None):
    if support_max is None:
        ks = np.flatnonzero(q > 0)
        return ks, q[ks]
    if support_max < 0:
        raise DomainError("support_max must be nonnegative")
    if np.any(q[support_max + 1:] > 0):
        raise DomainError("q has mass beyond support_max")
    ks = np.arange(support_max + 1)
    qk = np.zeros(support_max + 1)
    n = min(q.size, support_max + 1)
    qk[:n] = q[:n]
    return ks, qk


def disparity(kind, q, family, theta, support_max: int | None = None):
    """D(q, theta); ``theta`` may be an array of parameters.

    By default the sum runs over the whole support with the tail beyond
    supp(q) added in closed form.  ``support_max=K`` instead sums k = 0..K
    only and drops the tail.  KL returns +inf wherever q puts mass on a
    point that p(theta) excludes.
    """
    kind = get_kind(kind)
    q = as_pmf(q)
    ks, qk = _support(q, support_max)
    p = family.probs(theta, ks)
    total = kind.term(qk, p).sum(axis=-1)
    if kind is KL:
        total = np.where(np.any((qk > 0) & (p <= 0), axis=-1), np.inf, total)
    if support_max is None:
        tail = np.clip(1.0 - p.sum(axis=-1), 0.0, None)
        total = total + kind.g_at_minus_one * tail
    total = np.where(np.isinf(total), total, np.maximum(total, 0.0))
    return float(total) if np.ndim(total) == 0 else total


def hellinger_closed_form(q, family, theta):
    """2 sum q + 2 - 4 sum sqrt(q p); equals 4 - 4 sum sqrt(q p) for a pmf."""
    q = as_pmf(q)
    ks = np.flatnonzero(q > 0)
    p = family.probs(theta, ks)
    return 2.0 * q.sum() + 2.0 - 4.0 * np.sqrt(q[ks] * p).sum(axis=-1)


def ned_bounded(q, family, theta):
    """NED through the bounded function exp(-delta) - 1.

    Differs from the NED disparity by sum(q) - 1, i.e. not at all for a pmf.
    """
    q = as_pmf(q)
    ks = np.flatnonzero(q > 0)
    p = family.probs(theta, ks)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        delta = np.where(p > 0, q[ks] / p - 1.0, 0.0)
    body = np.where(p > 0, p * np.expm1(-delta), 0.0).sum(axis=-1)
    tail = np.clip(1.0 - p.sum(axis=-1), 0.0, None)
    return body + (math.e - 1.0) * tail


def _geometric_kl_moments(q):
    k = np.arange(q.size)
    return q.sum(), float(k @ q)


def _stencil(family, theta, h):
    """Offsets for a three-point stencil, one-sided near the boundary."""
    lo, hi = family.lower, family.upper
    if theta - h >= lo and theta + h <= hi:
        return "central"
    warnings.warn(f"theta={theta} within {h} of the boundary; one-sided differences",
                  DegradedAccuracyWarning, stacklevel=3)
    return "forward" if theta - h < lo else "backward"


def disparity_dtheta(kind, q, family, theta, support_max: int | None = None,
                     h: float = H_FIRST):
    """First derivative in theta (gradient for the simplex family)."""
    kind = get_kind(kind)
    q = as_pmf(q)
    if family.dim == 2:
        return _gradient(lambda t: disparity(kind, q, family, t, support_max), theta, h)
    theta = float(theta)
    if kind is KL and family.name == "geometric" and support_max is None:
        s0, s1 = _geometric_kl_moments(q)
        return -s0 / theta + s1 / (1.0 - theta)
    f = lambda t: disparity(kind, q, family, t, support_max)
    mode = _stencil(family, theta, h)
    if mode == "central":
        return (f(theta + h) - f(theta - h)) / (2 * h)
    s = 1.0 if mode == "forward" else -1.0
    return s * (-3 * f(theta) + 4 * f(theta + s * h) - f(theta + 2 * s * h)) / (2 * h)


def disparity_d2theta(kind, q, family, theta, support_max: int | None = None,
                      h: float = H_SECOND):
    """Second derivative in theta (Hessian for the simplex family)."""
    kind = get_kind(kind)
    q = as_pmf(q)
    if family.dim == 2:
        return _hessian(lambda t: disparity(kind, q, family, t, support_max), theta, h)
    theta = float(theta)
    if kind is KL and family.name == "geometric" and support_max is None:
        s0, s1 = _geometric_kl_moments(q)
        return s0 / theta**2 + s1 / (1.0 - theta) ** 2
    f = lambda t: disparity(kind, q, family, t, support_max)
    mode = _stencil(family, theta, h)
    if mode == "central":
        return (f(theta + h) - 2 * f(theta) + f(theta - h)) / h**2
    s = 1.0 if mode == "forward" else -1.0
    return (f(theta) - 2 * f(theta + s * h) + f(theta + 2 * s * h)) / h**2


def _gradient(f, x, h):
    x = np.asarray(x, dtype=float)
    g = np.zeros(2)
    for i in range(2):
        e = np.zeros(2)
        e[i] = h
        g[i] = (f(x + e) - f(x - e)) / (2 * h)
    return g


def _hessian(f, x, h):
    x = np.asarray(x, dtype=float)
    H = np.zeros((2, 2))
    f0 = f(x)
    for i in range(2):
        for j in range(i, 2):
            ei = np.zeros(2)
            ej = np.zeros(2)
            ei[i] = h
            ej[j] = h
            if i == j:
                H[i, i] = (f(x + ei) - 2 * f0 + f(x - ei)) / h**2
            else:
                H[i, j] = H[j, i] = (f(x + ei + ej) - f(x + ei - ej)
                                     - f(x - ei + ej) + f(x - ei - ej)) / (4 * h * h)
    return H


def simplex_grid(step: float = SIMPLEX_STEP, eps: float = 1e-6) -> np.ndarray:
    """All (q0, q1) on the step lattice strictly inside the inset simplex,
    in lexicographic order."""
    n = int(round(1.0 / step))
    i, j = np.meshgrid(np.arange(1, n), np.arange(1, n), indexing="ij")
    keep = (i + j) < n
    pts = np.column_stack([i[keep], j[keep]]) * step
    return pts[pts.sum(axis=1) <= 1.0 - eps]


def _check_flat(values: np.ndarray):
    finite = values[np.isfinite(values)]
    if finite.size == 0:
        raise DegenerateObjectiveError("disparity is infinite on the whole parameter grid")
    if finite.max() - finite.min() <= 1e-14 and finite.size == values.size:
        raise DegenerateObjectiveError("disparity is flat over the parameter grid")


def mde(kind, q, family, support_max: int | None = None):
    """Minimum disparity estimate and the curvature of D at it.

    Returns ``(theta_hat, curvature)``; for the simplex family the curvature
    is the 2x2 Hessian.
    """
    kind = get_kind(kind)
    q = as_pmf(q)
    obj = lambda t: disparity(kind, q, family, t, support_max)
    if family.dim == 2:
        pts = simplex_grid()
        vals = obj(pts)
        _check_flat(vals)
        start = pts[int(np.argmin(vals))]
        eps = family.eps
        feasible = lambda t: t[0] >= eps and t[1] >= eps and t[0] + t[1] <= 1 - eps
        theta = pattern_search(obj, start, SIMPLEX_STEP / 2, feasible)
        return theta, disparity_d2theta(kind, q, family, theta, support_max)

    grid = family.grid(MDE_GRID)
    vals = obj(grid)
    _check_flat(vals)
    i = int(np.argmin(vals))
    a, b = grid[max(i - 1, 0)], grid[min(i + 1, grid.size - 1)]
    t = golden_section(obj, a, b, tol=1e-9)
    theta = t if obj(t) <= vals[i] else float(grid[i])
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", DegradedAccuracyWarning)
        curv = disparity_d2theta(kind, q, family, theta, support_max)
    return float(theta), float(curv)

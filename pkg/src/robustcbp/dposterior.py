"""One-dimensional D-posteriors on a uniform grid.

The unnormalized log density is -delta * D(q, theta) + log prior(theta).
All normalization happens in the log domain; integrals use composite
Simpson on the grid.
"""

from __future__ import annotations

import csv
import io
import warnings
from dataclasses import dataclass, field
from typing import Callable, NamedTuple

import numpy as np
from scipy.integrate import cumulative_simpson
from scipy.special import betainc, betaln

from .disparity import DegradedAccuracyWarning, disparity, get_kind, mde
from .errors import (ConfigError, DegenerateCurvatureError, DomainError,
                     EstimationError, PosteriorUndefinedError)
from .families import EPS
from .numerics import golden_section, log_simpson, simpson_weights

DEFAULT_GRID = 4001


@dataclass(frozen=True)
class Prior1D:
    """Prior on the clipped interval [lower, upper].

    ``beta`` and ``uniform`` priors are renormalized to the interval, so they
    integrate to one there exactly.  ``table`` priors interpolate linearly
    between the given nodes and are normalized by the trapezoid rule.
    """

    kind: str
    params: tuple = ()
    lower: float = EPS
    upper: float = 1.0 - EPS
    _log_mass: float = field(default=0.0, init=False, repr=False, compare=False)

    def __post_init__(self):
        if not self.lower < self.upper:
            raise DomainError("prior interval is empty")
        if self.kind == "beta":
            a, b = self.params
            if not (a > 0 and b > 0):
                raise DomainError("beta prior parameters must be positive")
            mass = betainc(a, b, self.upper) - betainc(a, b, self.lower)
            object.__setattr__(self, "_log_mass", float(np.log(mass)))
        elif self.kind == "uniform":
            object.__setattr__(self, "params", ())
        elif self.kind == "table":
            xs, dens = (np.asarray(v, dtype=float) for v in self.params)
            if xs.ndim != 1 or xs.shape != dens.shape or xs.size < 2 or np.any(np.diff(xs) <= 0):
                raise DomainError("table prior needs increasing nodes and matching densities")
            if np.any(dens < 0):
                raise DomainError("table prior density must be nonnegative")
            total = np.trapezoid(dens, xs)
            if not total > 0:
                raise DomainError("table prior has zero mass")
            object.__setattr__(self, "params", (tuple(xs), tuple(dens / total)))
        else:
            raise DomainError(f"unknown prior kind {self.kind!r}")

    @classmethod
    def beta(cls, rho: float, beta: float, **kw) -> "Prior1D":
        return cls("beta", (float(rho), float(beta)), **kw)

    @classmethod
    def uniform(cls, **kw) -> "Prior1D":
        return cls("uniform", (), **kw)

    @classmethod
    def table(cls, nodes, density, **kw) -> "Prior1D":
        return cls("table", (tuple(nodes), tuple(density)), **kw)

    def logpdf(self, theta):
        t = np.asarray(theta, dtype=float)
        inside = (t >= self.lower) & (t <= self.upper)
        tc = np.clip(t, self.lower, self.upper)
        if self.kind == "beta":
            a, b = self.params
            val = (a - 1) * np.log(tc) + (b - 1) * np.log1p(-tc) - betaln(a, b) - self._log_mass
        elif self.kind == "uniform":
            val = np.full_like(tc, -np.log(self.upper - self.lower))
        else:
            xs, dens = (np.asarray(v) for v in self.params)
            with np.errstate(divide="ignore"):
                val = np.log(np.interp(tc, xs, dens, left=0.0, right=0.0))
        return np.where(inside, val, -np.inf)

    def pdf(self, theta):
        return np.exp(self.logpdf(theta))

    def moments(self) -> tuple[float, float]:
        """Mean and variance of the untruncated prior (beta and uniform)."""
        if self.kind == "beta":
            a, b = self.params
            s = a + b
            return a / s, a * b / (s * s * (s + 1))
        if self.kind == "uniform":
            return 0.5, 1.0 / 12.0
        xs, dens = (np.asarray(v) for v in self.params)
        m = np.trapezoid(xs * dens, xs)
        return float(m), float(np.trapezoid((xs - m) ** 2 * dens, xs))


def prior_from_spec(spec) -> Prior1D:
    """Parse ``"beta:a,b"``, ``"uniform"`` or a ``{"kind": ..., ...}`` mapping."""
    if isinstance(spec, Prior1D):
        return spec
    if isinstance(spec, dict):
        kind = spec.get("kind")
        if kind == "beta":
            return Prior1D.beta(*spec["params"])
        if kind == "uniform":
            return Prior1D.uniform()
        if kind == "table":
            return Prior1D.table(spec["nodes"], spec["density"])
        raise ConfigError(f"unknown prior kind {kind!r}")
    text = str(spec).strip().lower()
    if text == "uniform":
        return Prior1D.uniform()
    if text.startswith("beta:"):
        try:
            a, b = (float(v) for v in text[5:].split(","))
        except ValueError:
            raise ConfigError(f"bad beta prior {spec!r}; expected beta:a,b") from None
        return Prior1D.beta(a, b)
    raise ConfigError(f"cannot parse prior {spec!r}")


@dataclass(frozen=True, eq=False)
class DPosterior1D:
    grid: np.ndarray
    log_unnorm: np.ndarray
    log_norm_const: float
    density: np.ndarray
    delta_used: float
    log_target: Callable | None = field(default=None, repr=False)

    @property
    def step(self) -> float:
        return float(self.grid[1] - self.grid[0])

    @classmethod
    def from_log_unnorm(cls, grid, log_unnorm, delta: float = 0.0,
                        log_target: Callable | None = None) -> "DPosterior1D":
        grid = np.asarray(grid, dtype=float)
        lu = np.asarray(log_unnorm, dtype=float)
        if grid.size < 3 or grid.size % 2 == 0:
            raise ConfigError("grid size must be odd and at least 3")
        if not np.any(np.isfinite(lu)):
            raise PosteriorUndefinedError(
                "D-posterior undefined: exp(-delta*D) vanishes wherever the prior "
                "has mass, so the data pmf lies outside the admissible set")
        h = (grid[-1] - grid[0]) / (grid.size - 1)
        log_z = log_simpson(lu, h)
        dens = np.exp(lu - log_z)
        for a in (grid, lu, dens):
            a.flags.writeable = False
        return cls(grid, lu, log_z, dens, float(delta), log_target)

    def weights(self) -> np.ndarray:
        return simpson_weights(self.grid.size, self.step)

    def integrate(self, values) -> float:
        return float(self.weights() @ (np.asarray(values) * self.density))

    def cdf_nodes(self) -> np.ndarray:
        c = cumulative_simpson(self.density, x=self.grid, initial=0.0)
        return c / c[-1]

    @property
    def cdf_scale(self) -> float:
        return float(cumulative_simpson(self.density, x=self.grid)[-1])

    def cdf(self, theta):
        return np.interp(theta, self.grid, self.cdf_nodes())

    def to_csv(self, digits: int = 6) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["theta", "density", "log_unnorm"])
        for row in zip(self.grid, self.density, self.log_unnorm):
            w.writerow([f"{v:.{digits}g}" for v in row])
        return buf.getvalue()


def build_dposterior(kind, q, family, delta: float, prior: Prior1D,
                     grid_size: int = DEFAULT_GRID,
                     support_max: int | None = None) -> DPosterior1D:
    """Grid D-posterior for a one-parameter family."""
    kind = get_kind(kind)
    if not isinstance(grid_size, (int, np.integer)) or grid_size < 3 or grid_size % 2 == 0:
        raise ConfigError("grid_size must be an odd integer >= 3")
    if delta < 0:
        raise DomainError("delta must be nonnegative")
    lo = max(family.lower, prior.lower)
    hi = min(family.upper, prior.upper)
    grid = np.linspace(lo, hi, grid_size)

    def log_target(theta):
        lp = prior.logpdf(theta)
        if delta == 0:
            return lp
        d = disparity(kind, q, family, theta, support_max)
        return np.where(np.isfinite(d), -delta * d, -np.inf) + lp

    return DPosterior1D.from_log_unnorm(grid, log_target(grid), delta, log_target)


def edap(post: DPosterior1D) -> float:
    """Posterior mean."""
    return post.integrate(post.grid)


class ModeResult(NamedTuple):
    theta: float
    multimodal: bool
    boundary: bool


def mdap(post: DPosterior1D) -> ModeResult:
    """Posterior mode: grid argmax refined inside the neighbouring cells."""
    lu = post.log_unnorm
    i = int(np.argmax(lu))
    top = lu[i]
    ties = int(np.sum(lu >= top - 1e-12 * max(1.0, abs(top))))
    n = lu.size
    boundary = i == 0 or i == n - 1
    a, b = post.grid[max(i - 1, 0)], post.grid[min(i + 1, n - 1)]
    theta = float(post.grid[i])
    if post.log_target is not None:
        f = lambda t: -float(post.log_target(t))
        t = golden_section(f, a, b, tol=1e-9)
        if f(t) <= -top:
            theta = t
    elif 0 < i < n - 1:
        y0, y1, y2 = lu[i - 1], lu[i], lu[i + 1]
        den = y0 - 2 * y1 + y2
        if den < 0:
            theta = float(post.grid[i] + 0.5 * post.step * (y0 - y2) / den)
    return ModeResult(float(theta), ties >= 3, boundary)


@dataclass(frozen=True)
class HPDSet:
    intervals: list
    mass: float
    threshold: float

    def contains(self, theta) -> bool:
        return any(a <= theta <= b for a, b in self.intervals)


def hpd_interval(post: DPosterior1D, level: float = 0.95) -> HPDSet:
    """Highest-density set by water-filling; may be a union of intervals."""
    if not 0 < level < 1:
        raise DomainError("level must lie in (0, 1)")
    mass = post.weights() * post.density
    order = np.argsort(-post.density, kind="stable")
    cum = np.cumsum(mass[order])
    cut = int(np.searchsorted(cum, level * cum[-1]))
    cut = min(cut, order.size - 1)
    keep = np.zeros(order.size, dtype=bool)
    keep[order[: cut + 1]] = True
    edges = np.flatnonzero(np.diff(np.concatenate([[0], keep.view(np.int8), [0]])))
    intervals = [(float(post.grid[s]), float(post.grid[e - 1]))
                 for s, e in zip(edges[::2], edges[1::2])]
    return HPDSet(intervals, float(cum[cut]), float(post.density[order[cut]]))


def _eval_predicate(predicate, grid):
    try:
        out = np.asarray(predicate(grid), dtype=bool)
        if out.shape == grid.shape:
            return out
    except Exception:
        pass
    return np.array([bool(predicate(float(t))) for t in grid])


def _locate(predicate, a, b, value_at_a):
    for _ in range(60):
        m = 0.5 * (a + b)
        if bool(predicate(m)) == value_at_a:
            a = m
        else:
            b = m
        if b - a < 1e-14:
            break
    return 0.5 * (a + b)


_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(8)


def _cdf_at(post: DPosterior1D, cdf_nodes: np.ndarray, t: float) -> float:
    """CDF at an arbitrary point: node value plus the partial cell by Gauss-Legendre."""
    g = post.grid
    i = int(np.clip(np.searchsorted(g, t, side="right") - 1, 0, g.size - 1))
    if post.log_target is None or t <= g[i] or i == g.size - 1:
        return float(np.interp(t, g, cdf_nodes))
    half = 0.5 * (t - g[i])
    x = g[i] + half * (_GL_NODES + 1.0)
    dens = np.exp(np.asarray(post.log_target(x), dtype=float) - post.log_norm_const)
    return float(cdf_nodes[i] + half * (_GL_WEIGHTS @ dens) / post.cdf_scale)


def posterior_prob(post: DPosterior1D, predicate: Callable) -> float:
    """Posterior mass of {theta : predicate(theta)}.

    The set's endpoints are located by bisection between grid nodes, and the
    mass is read off the Simpson cumulative distribution.
    """
    g = post.grid
    inside = _eval_predicate(predicate, g)
    if not inside.any():
        return 0.0
    cdf = post.cdf_nodes()
    F = lambda t: _cdf_at(post, cdf, t)
    total = 0.0
    start = g[0] if inside[0] else None
    for i in range(g.size - 1):
        if inside[i] != inside[i + 1]:
            x = _locate(predicate, g[i], g[i + 1], inside[i])
            if inside[i]:
                total += F(x) - F(start)
                start = None
            else:
                start = x
    if start is not None:
        total += 1.0 - F(start)
    return float(min(max(total, 0.0), 1.0))


class AsymptoticSummary(NamedTuple):
    mde: float
    curvature: float
    std_error: float


def asymptotic_summary(kind, q, family, delta: float,
                       support_max: int | None = None) -> AsymptoticSummary:
    """MDE, curvature at it, and the normal-approximation standard error."""
    if delta <= 0:
        raise EstimationError("delta must be positive for a standard error")
    theta, curv = mde(kind, q, family, support_max)
    if not curv > 0:
        raise DegenerateCurvatureError(f"nonpositive curvature {curv} at the MDE")
    return AsymptoticSummary(theta, curv, float((delta * curv) ** -0.5))


def l1_distance(a: DPosterior1D, b: DPosterior1D) -> float:
    if a.grid.shape != b.grid.shape or not np.allclose(a.grid, b.grid, rtol=0, atol=1e-15):
        raise DomainError("posteriors live on different grids")
    return float(a.weights() @ np.abs(a.density - b.density))

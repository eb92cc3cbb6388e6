"""Two-type controlled branching process with binomial control.

Type-1 cells are selected as progenitors with probability gamma.  A
progenitor dies (q0), divides into two type-1 cells (q1) or differentiates
into one type-2 cell (q2 = 1 - q0 - q1).  Only (q0, q1) carries a
D-posterior; gamma is estimated by maximum likelihood.
"""

from __future__ import annotations

import csv
import io
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from typing import NamedTuple

import numpy as np
from scipy.special import gammaln

from .disparity import disparity, get_kind, simplex_grid
from .errors import ConvergenceWarning, DataError, DomainError, EstimationError
from .families import trinomial_family
from .rng import stream

DEFAULT_DRAWS = 200_000
MIN_DRAWS = 10_000
ESS_FLOOR = 500.0
CHUNK = 1 << 18
PRUNE_NATS = 60.0  # exp(-60) is below double resolution relative to the top weight
GRID_STEP = 1e-3


@dataclass(frozen=True)
class TwoTypeStats:
    y1_0: int
    y1_2: int
    psi: int
    delta: int
    y1_total: int
    n: int
    z0: int

    def __post_init__(self):
        vals = (self.y1_0, self.y1_2, self.psi, self.delta, self.y1_total, self.n, self.z0)
        if any(not isinstance(v, (int, np.integer)) or v < 0 for v in vals):
            raise DataError("two-type statistics must be nonnegative integers")
        if self.delta != self.y1_0 + self.y1_2 + self.psi:
            raise DataError(f"delta={self.delta} differs from y1_0 + y1_2 + psi = "
                            f"{self.y1_0 + self.y1_2 + self.psi}")
        if self.delta > self.y1_total:
            raise DataError("more progenitors than type-1 individuals")

    def empirical(self) -> np.ndarray:
        if self.delta == 0:
            raise EstimationError("no progenitors observed")
        return np.array([self.y1_0, self.y1_2, self.psi], dtype=float) / self.delta


@dataclass(frozen=True)
class TwoTypeGeneration:
    z1: int
    z2: int
    phi: int
    died: int
    divided: int
    differentiated: int


@dataclass(frozen=True)
class TwoTypeRecord:
    z0: int
    generations: tuple = ()

    def stats(self) -> TwoTypeStats:
        g = self.generations
        return TwoTypeStats(
            y1_0=sum(r.died for r in g),
            y1_2=sum(r.divided for r in g),
            psi=sum(r.differentiated for r in g),
            delta=sum(r.phi for r in g),
            y1_total=sum(r.z1 for r in g),
            n=len(g),
            z0=self.z0,
        )

    def to_dict(self) -> dict:
        return {"z0": self.z0,
                "generations": [r.__dict__.copy() for r in self.generations]}


def _check_simplex(q0, q1):
    if not (0 <= q0 <= 1 and 0 <= q1 <= 1 and q0 + q1 <= 1 + 1e-12):
        raise DomainError(f"({q0}, {q1}) is not a point of the simplex")


def simulate_twotype(q0: float, q1: float, gamma: float, z0: int, n: int,
                     seed: int) -> TwoTypeRecord:
    _check_simplex(q0, q1)
    if not 0 <= gamma <= 1:
        raise DomainError("gamma must be a probability")
    if z0 < 1 or n < 0:
        raise DomainError("need z0 >= 1 and n >= 0")
    rng = stream(seed, "twotype")
    probs = np.array([q0, q1, max(1.0 - q0 - q1, 0.0)])
    probs /= probs.sum()
    z1, z2 = int(z0), 0
    gens = []
    for _ in range(n):
        phi = int(rng.binomial(z1, gamma)) if z1 else 0
        died, divided, diff = (int(v) for v in rng.multinomial(phi, probs))
        gens.append(TwoTypeGeneration(z1, z2, phi, died, divided, diff))
        z1, z2 = 2 * divided, diff
        if z1 == 0:
            break
    return TwoTypeRecord(int(z0), tuple(gens))


def mle_twotype(stats: TwoTypeStats) -> tuple[float, float, float, float]:
    """(p0, p1, p2, gamma) maximum likelihood estimates."""
    if stats.delta == 0 or stats.y1_total == 0:
        raise EstimationError("zero progenitors or type-1 individuals")
    d = stats.delta
    return (stats.y1_0 / d, stats.y1_2 / d, stats.psi / d, d / stats.y1_total)


def mle_twotype_exact(stats: TwoTypeStats) -> tuple[Fraction, ...]:
    if stats.delta == 0 or stats.y1_total == 0:
        raise EstimationError("zero progenitors or type-1 individuals")
    d = stats.delta
    return (Fraction(stats.y1_0, d), Fraction(stats.y1_2, d), Fraction(stats.psi, d),
            Fraction(d, stats.y1_total))


@dataclass(frozen=True)
class Dirichlet:
    alphas: tuple = (0.5, 0.5, 0.5)

    def __post_init__(self):
        a = tuple(float(v) for v in self.alphas)
        if len(a) != 3 or min(a) <= 0:
            raise DomainError("Dirichlet prior needs three positive parameters")
        object.__setattr__(self, "alphas", a)

    def logpdf(self, theta) -> np.ndarray:
        t = np.asarray(theta, dtype=float)
        x = np.stack([t[..., 0], t[..., 1], 1.0 - t[..., 0] - t[..., 1]], axis=-1)
        a = np.asarray(self.alphas)
        with np.errstate(divide="ignore", invalid="ignore"):
            val = ((a - 1) * np.log(x)).sum(axis=-1)
        norm = gammaln(a.sum()) - gammaln(a).sum()
        return np.where(np.all(x > 0, axis=-1), val + norm, -np.inf)

    def mean(self) -> np.ndarray:
        a = np.asarray(self.alphas)
        return a / a.sum()


@dataclass(frozen=True, eq=False)
class SimplexPosterior:
    """Prior draws with importance log-weights -delta * D(p_hat, theta)."""

    draws: np.ndarray
    log_weights: np.ndarray
    seed: int = 0
    n_draws: int = 0
    kind: str = ""
    ess_floor: float = ESS_FLOOR
    weights: np.ndarray = field(init=False, repr=False)
    effective_sample_size: float = field(init=False)

    def __post_init__(self):
        lw = np.asarray(self.log_weights, dtype=float)
        if lw.size == 0 or not np.any(np.isfinite(lw)):
            raise DomainError("no draw carries positive weight")
        w = np.exp(lw - lw.max())
        w /= w.sum()
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "effective_sample_size", float(1.0 / np.sum(w * w)))
        if self.n_draws == 0:
            object.__setattr__(self, "n_draws", int(lw.size))

    @property
    def converged(self) -> bool:
        return self.effective_sample_size >= self.ess_floor


def build_simplex_dposterior(kind, stats: TwoTypeStats, prior: Dirichlet = Dirichlet(),
                             n_draws: int = DEFAULT_DRAWS, seed: int = 0,
                             ess_floor: float = ESS_FLOOR) -> SimplexPosterior:
    """Self-normalized importance sampling from the Dirichlet prior.

    Draws come in fixed-size chunks, each from its own derived stream, so a
    run with more draws extends a run with fewer.  Draws whose log-weight
    falls more than ``PRUNE_NATS`` below the running maximum are counted but
    not stored.
    """
    kind = get_kind(kind)
    if n_draws < MIN_DRAWS:
        raise DomainError(f"n_draws must be at least {MIN_DRAWS}")
    family = trinomial_family()
    delta = stats.delta
    q = stats.empirical() if delta else np.zeros(3)
    kept_x, kept_lw = [], []
    top = -np.inf
    done = 0
    chunk_id = 0
    while done < n_draws:
        size = min(CHUNK, n_draws - done)
        x = stream(seed, "simplex", chunk_id).dirichlet(prior.alphas, size)[:, :2]
        if delta:
            d = disparity(kind, q, family, x)
            lw = np.where(np.isfinite(d), -delta * d, -np.inf)
        else:
            lw = np.zeros(size)
        top = max(top, float(lw.max()))
        keep = lw >= top - PRUNE_NATS
        kept_x.append(x[keep])
        kept_lw.append(lw[keep])
        done += size
        chunk_id += 1
    x = np.concatenate(kept_x)
    lw = np.concatenate(kept_lw)
    keep = lw >= top - PRUNE_NATS
    post = SimplexPosterior(x[keep], lw[keep], seed, n_draws, kind.tag, ess_floor)
    if not post.converged:
        warnings.warn(f"effective sample size {post.effective_sample_size:.0f} below "
                      f"floor {ess_floor:.0f}", ConvergenceWarning, stacklevel=2)
    return post


def edap_simplex(post: SimplexPosterior) -> tuple[float, float, float]:
    m = post.weights @ post.draws
    return float(m[0]), float(m[1]), float(1.0 - m[0] - m[1])


def edap_standard_error(post: SimplexPosterior) -> np.ndarray:
    """Delta-method Monte Carlo standard error of each EDAP coordinate."""
    w = post.weights
    x = np.column_stack([post.draws, 1.0 - post.draws.sum(axis=1)])
    mu = w @ x
    return np.sqrt((w * w) @ ((x - mu) ** 2))


def criticality_prob(post: SimplexPosterior) -> float:
    """Posterior probability that the type-1 offspring mean 2 q1 exceeds 1."""
    return float(post.weights @ (2.0 * post.draws[:, 1] > 1.0))


def criticality_standard_error(post: SimplexPosterior) -> float:
    w = post.weights
    ind = (2.0 * post.draws[:, 1] > 1.0).astype(float)
    p = w @ ind
    return float(np.sqrt((w * w) @ ((ind - p) ** 2)))


class SimplexMode(NamedTuple):
    p: tuple
    multimodal: bool
    boundary: bool


def mdap_simplex(kind, stats: TwoTypeStats, prior: Dirichlet = Dirichlet(),
                 step: float = GRID_STEP) -> SimplexMode:
    """Posterior mode over the step lattice; first maximum in lexicographic order."""
    kind = get_kind(kind)
    pts = simplex_grid(step)
    obj = prior.logpdf(pts)
    if stats.delta:
        d = disparity(kind, stats.empirical(), trinomial_family(), pts)
        obj = np.where(np.isfinite(d), obj - stats.delta * d, -np.inf)
    i = int(np.argmax(obj))
    top = obj[i]
    ties = int(np.sum(obj >= top - 1e-12 * max(1.0, abs(top))))
    q0, q1 = (float(np.round(v / step) * step) for v in pts[i])
    q2 = 1.0 - q0 - q1
    boundary = min(q0, q1, q2) < step * 1.5
    return SimplexMode((q0, q1, q2), ties >= 3, boundary)


@dataclass(frozen=True, eq=False)
class SimplexRegion:
    cell: float
    cells: np.ndarray  # (m, 2) integer cell indices of all occupied cells
    mass: np.ndarray  # posterior mass per occupied cell
    in_region: np.ndarray
    threshold: float  # density (mass / cell area) of the last retained cell
    region_mass: float

    def density(self) -> np.ndarray:
        return self.mass / self.cell**2

    def to_csv(self, digits: int = 6) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["q0", "q1", "density", "in_region"])
        centers = (self.cells + 0.5) * self.cell
        for (a, b), d, r in zip(centers, self.density(), self.in_region):
            w.writerow([f"{a:.{digits}g}", f"{b:.{digits}g}", f"{d:.{digits}g}", int(r)])
        return buf.getvalue()


def hpd_region(post: SimplexPosterior, level: float = 0.95,
               cell: float = GRID_STEP) -> SimplexRegion:
    """Highest-density cells of the weighted histogram on a square lattice."""
    if not 0 < level < 1:
        raise DomainError("level must lie in (0, 1)")
    if not post.converged:
        warnings.warn("HPD region from an undersampled posterior", ConvergenceWarning,
                      stacklevel=2)
    n = int(round(1.0 / cell))
    idx = np.clip(np.floor(post.draws / cell).astype(np.int64), 0, n - 1)
    flat = idx[:, 0] * n + idx[:, 1]
    uniq, inv = np.unique(flat, return_inverse=True)
    mass = np.bincount(inv, weights=post.weights)
    order = np.argsort(-mass, kind="stable")
    cum = np.cumsum(mass[order])
    cut = min(int(np.searchsorted(cum, level * cum[-1])), order.size - 1)
    keep = np.zeros(uniq.size, dtype=bool)
    keep[order[: cut + 1]] = True
    cells = np.column_stack([uniq // n, uniq % n])
    return SimplexRegion(cell, cells, mass, keep, float(mass[order[cut]] / cell**2),
                         float(cum[cut]))

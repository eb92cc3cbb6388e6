"""Gross-error contamination and robustness diagnostics.

All scans are deterministic: every point is an independent evaluation of
an estimator on the exact mixture pmf (1 - alpha) p(theta0) + alpha * eta.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .disparity import get_kind, mde
from .dposterior import Prior1D, build_dposterior, edap, l1_distance, mdap
from .errors import CBPError, DomainError
from .families import as_pmf

ESTIMATORS = ("EDAP", "MDAP", "MDE")
IF_ALPHAS = (1e-2, 1e-3, 1e-4)
DEFAULT_PRIOR = Prior1D.beta(0.5, 0.5)


def model_pmf(family, theta0) -> np.ndarray:
    """p(theta0) over 0..support_hint, renormalized to sum to one."""
    p = family.pmf_vector(theta0)
    return p / p.sum()


def _mix(p: np.ndarray, alpha: float, eta: np.ndarray) -> np.ndarray:
    n = max(p.size, eta.size)
    out = np.zeros(n)
    out[: p.size] += (1.0 - alpha) * p
    out[: eta.size] += alpha * eta
    return out


def point_mass(L: int) -> np.ndarray:
    if L < 0:
        raise DomainError("contamination point must be nonnegative")
    e = np.zeros(L + 1)
    e[L] = 1.0
    return e


def contaminate(family, theta0, alpha: float, L) -> np.ndarray:
    """(1 - alpha) p(theta0) + alpha eta, with eta a point mass at ``L`` or a pmf."""
    if not 0.0 <= alpha < 1.0:
        raise DomainError("alpha must lie in [0, 1)")
    p = model_pmf(family, theta0)
    if alpha == 0.0:
        return p
    eta = point_mass(int(L)) if np.ndim(L) == 0 else as_pmf(L) / np.sum(L)
    return _mix(p, alpha, eta)


@dataclass(frozen=True)
class ContaminationModel:
    base_theta: float
    alpha: float
    point: int

    def pmf(self, family) -> np.ndarray:
        return contaminate(family, self.base_theta, self.alpha, self.point)


def estimate(estimator_tag: str, kind, q, family, delta: float = 0.0,
             prior: Prior1D = DEFAULT_PRIOR, grid_size: int = 4001,
             support_max: int | None = None) -> float:
    """Dispatch to EDAP, MDAP or MDE on the data pmf ``q``."""
    tag = estimator_tag.upper()
    if tag == "MDE":
        return mde(kind, q, family, support_max)[0]
    if tag not in ESTIMATORS:
        raise DomainError(f"unknown estimator {estimator_tag!r}")
    if delta <= 0:
        raise DomainError(f"{tag} needs delta > 0")
    post = build_dposterior(kind, q, family, delta, prior, grid_size, support_max)
    return edap(post) if tag == "EDAP" else mdap(post).theta


@dataclass(frozen=True)
class InfluenceCurve:
    alpha: float
    L: np.ndarray
    values: np.ndarray
    estimates: np.ndarray
    clean_estimate: float
    estimator_tag: str
    kind: str
    delta_used: float | None
    errors: dict = field(default_factory=dict)

    def argmax_abs(self) -> int:
        """L at which |IF| is largest (first one on ties)."""
        return int(self.L[int(np.nanargmax(np.abs(self.values)))])

    def to_csv(self, digits: int = 6) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["L", "if_alpha", "estimator"])
        for L, v in zip(self.L, self.values):
            w.writerow([int(L), f"{v:.{digits}g}", f"{self.estimator_tag}_{self.kind}"])
        return buf.getvalue()


def alpha_influence(kind, estimator_tag: str, family, theta0: float, alpha: float,
                    L_list: Sequence[int], delta: float | None = None,
                    prior: Prior1D = DEFAULT_PRIOR, grid_size: int = 4001) -> InfluenceCurve:
    """alpha^{-1} [T(contaminated) - T(clean)] over the given contamination points."""
    kind = get_kind(kind)
    if not 0 < alpha < 1:
        raise DomainError("alpha must lie in (0, 1)")
    args = dict(delta=delta or 0.0, prior=prior, grid_size=grid_size)
    clean = estimate(estimator_tag, kind, model_pmf(family, theta0), family, **args)
    Ls = np.asarray(list(L_list), dtype=int)
    est = np.full(Ls.size, np.nan)
    errors = {}
    for i, L in enumerate(Ls):
        try:
            est[i] = estimate(estimator_tag, kind, contaminate(family, theta0, alpha, L),
                              family, **args)
        except CBPError as exc:
            errors[int(L)] = str(exc)
    return InfluenceCurve(alpha, Ls, (est - clean) / alpha, est, clean,
                          estimator_tag.upper(), kind.tag, delta, errors)


@dataclass(frozen=True)
class IFDiagnostics:
    alphas: tuple
    quotients: tuple
    spread: float
    converged: bool


def influence_function(kind, family, theta0: float, L, delta: float | None = None,
                       prior: Prior1D = DEFAULT_PRIOR, estimator_tag: str = "EDAP",
                       alphas: Sequence[float] = IF_ALPHAS, grid_size: int = 4001):
    """One-sided alpha -> 0 limit of the alpha-influence.

    Returns ``(value, diagnostics)``; the value is the Richardson combination
    of the two smallest-alpha quotients, which cancels the O(alpha) term.
    """
    kind = get_kind(kind)
    args = dict(delta=delta or 0.0, prior=prior, grid_size=grid_size)
    clean = estimate(estimator_tag, kind, model_pmf(family, theta0), family, **args)
    quot = []
    for a in alphas:
        t = estimate(estimator_tag, kind, contaminate(family, theta0, a, L), family, **args)
        quot.append((t - clean) / a)
    a2, a3 = alphas[-2], alphas[-1]
    q2, q3 = quot[-2], quot[-1]
    value = (a2 * q3 - a3 * q2) / (a2 - a3)
    spread = abs(q3 - q2)
    converged = spread <= 0.1 * max(abs(q3), 1e-12)
    return float(value), IFDiagnostics(tuple(alphas), tuple(quot), float(spread), converged)


@dataclass(frozen=True)
class BreakdownScan:
    kind: str
    estimator_tag: str
    clean_estimate: float
    b_hat: dict  # alpha -> max displacement
    argmax_L: dict  # alpha -> maximizing L
    rows: list  # (alpha, L, estimate, displacement)

    def to_csv(self, digits: int = 6) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["alpha", "L", "estimate", "displacement"])
        for a, L, e, d in self.rows:
            w.writerow([f"{a:.{digits}g}", int(L), f"{e:.{digits}g}", f"{d:.{digits}g}"])
        return buf.getvalue()


def breakdown_scan(kind, estimator_tag: str, family, theta0: float,
                   alpha_list: Sequence[float], L_max: int, delta: float | None = None,
                   prior: Prior1D = DEFAULT_PRIOR, grid_size: int = 4001) -> BreakdownScan:
    """Finite-L proxy of the worst-case displacement for each alpha."""
    kind = get_kind(kind)
    args = dict(delta=delta or 0.0, prior=prior, grid_size=grid_size)
    clean = estimate(estimator_tag, kind, model_pmf(family, theta0), family, **args)
    b_hat, arg, rows = {}, {}, []
    for a in alpha_list:
        if not 0 < a < 1:
            raise DomainError("alpha values must lie in (0, 1)")
        best, best_L = -1.0, 0
        for L in range(int(L_max) + 1):
            t = estimate(estimator_tag, kind, contaminate(family, theta0, a, L), family, **args)
            d = abs(t - clean)
            rows.append((a, L, t, d))
            if d > best:
                best, best_L = d, L
        b_hat[a], arg[a] = best, best_L
    return BreakdownScan(kind.tag, estimator_tag.upper(), clean, b_hat, arg, rows)


def contaminated_posterior_stability(kind, family, theta0: float, alpha: float,
                                     L_list: Sequence[int], delta: float,
                                     prior: Prior1D = DEFAULT_PRIOR,
                                     grid_size: int = 4001) -> dict:
    """L1 distance between the D-posteriors at (1-alpha)p + alpha eta_L and (1-alpha)p."""
    kind = get_kind(kind)
    if not 0 <= alpha < 1:
        raise DomainError("alpha must lie in [0, 1)")
    p = model_pmf(family, theta0)
    ref = build_dposterior(kind, (1.0 - alpha) * p, family, delta, prior, grid_size)
    out = {}
    for L in L_list:
        q = _mix(p, alpha, point_mass(int(L)))
        out[int(L)] = l1_distance(build_dposterior(kind, q, family, delta, prior, grid_size), ref)
    return out

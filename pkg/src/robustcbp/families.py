"""Parametric offspring families.

Every family exposes the same small surface:

``probs(theta, ks)``
    probabilities p_k(theta) for the integer array ``ks``; ``theta`` may be
    an array of parameters, in which case the result gains leading axes.
``pmf(theta, k)``, ``pmf_dtheta(theta, k)``
    scalar conveniences.
``support_hint(theta)``
    last k carrying non-negligible mass.
``mean(theta)``, ``variance(theta)``
    offspring moment maps.

A pmf over the nonnegative integers is a 1-D float array indexed by k.
"""

from __future__ import annotations

from typing import Mapping, Sequence

import numpy as np

from .errors import DomainError

EPS = 1e-6
TAIL_TOL = 1e-14


def as_pmf(q) -> np.ndarray:
    """Coerce a sequence or ``{k: prob}`` mapping to a pmf array."""
    if isinstance(q, Mapping):
        if not q:
            return np.zeros(1)
        ks = [int(k) for k in q]
        if min(ks) < 0:
            raise DomainError("pmf support must be nonnegative")
        out = np.zeros(max(ks) + 1)
        for k, v in q.items():
            out[int(k)] += float(v)
    else:
        out = np.asarray(q, dtype=float).copy()
        if out.ndim != 1:
            raise DomainError("pmf must be one-dimensional")
    if not np.all(np.isfinite(out)) or np.any(out < 0):
        raise DomainError("pmf entries must be finite and nonnegative")
    return out


class GeometricFamily:
    """p_k(theta) = theta (1 - theta)^k on k = 0, 1, 2, ..."""

    name = "geometric"
    dim = 1
    finite_support = False

    def __init__(self, eps: float = EPS):
        self.lower = eps
        self.upper = 1.0 - eps

    def in_space(self, theta) -> bool:
        t = np.asarray(theta, dtype=float)
        return bool(np.all((t >= self.lower) & (t <= self.upper)))

    def check(self, theta) -> float:
        if np.ndim(theta) != 0 or not self.in_space(theta):
            raise DomainError(f"geometric parameter {theta!r} outside "
                              f"[{self.lower}, {self.upper}]")
        return float(theta)

    def probs(self, theta, ks) -> np.ndarray:
        t = np.asarray(theta, dtype=float)[..., None]
        k = np.asarray(ks, dtype=float)
        with np.errstate(divide="ignore"):
            return np.exp(np.log(t) + k * np.log1p(-t))

    def pmf(self, theta, k: int) -> float:
        return float(self.probs(theta, [k])[..., 0])

    def pmf_dtheta(self, theta, k: int) -> float:
        t = float(theta)
        if k == 0:
            return 1.0
        return (1 - t) ** (k - 1) * (1 - t - k * t)

    def support_hint(self, theta) -> int:
        t = self.check(theta)
        return max(int(np.ceil(np.log(TAIL_TOL) / np.log1p(-t))) - 1, 0)

    def pmf_vector(self, theta) -> np.ndarray:
        return self.probs(theta, np.arange(self.support_hint(theta) + 1))

    def mean(self, theta):
        return (1 - np.asarray(theta, dtype=float)) / theta

    def variance(self, theta):
        return (1 - np.asarray(theta, dtype=float)) / np.asarray(theta) ** 2

    def fisher_information(self, theta):
        t = np.asarray(theta, dtype=float)
        return 1.0 / (t * t * (1 - t))

    def grid(self, size: int) -> np.ndarray:
        return np.linspace(self.lower, self.upper, size)

    def __repr__(self):
        return "geometric_family()"


class TrinomialFamily:
    """Three outcomes with probabilities (q0, q1, 1 - q0 - q1).

    In the two-type model category 0 is death, 1 is division into two
    type-1 cells and 2 is differentiation into one type-2 cell.
    """

    name = "trinomial"
    dim = 2
    finite_support = True

    def __init__(self, eps: float = EPS):
        self.eps = eps

    def in_space(self, theta) -> bool:
        t = np.asarray(theta, dtype=float)
        if t.shape[-1:] != (2,):
            return False
        q0, q1 = t[..., 0], t[..., 1]
        tol = 1e-12
        return bool(np.all((q0 >= -tol) & (q1 >= -tol) & (q0 + q1 <= 1 + tol)))

    def check(self, theta) -> np.ndarray:
        t = np.asarray(theta, dtype=float)
        if t.shape != (2,) or not self.in_space(t):
            raise DomainError(f"trinomial parameter {theta!r} outside the simplex")
        return t

    def probs(self, theta, ks) -> np.ndarray:
        t = np.asarray(theta, dtype=float)
        full = np.stack([t[..., 0], t[..., 1],
                         np.maximum(1.0 - t[..., 0] - t[..., 1], 0.0),
                         np.zeros(t.shape[:-1])], axis=-1)
        ks = np.asarray(ks, dtype=int)
        return full[..., np.where((ks >= 0) & (ks <= 2), ks, 3)]

    def pmf(self, theta, k: int) -> float:
        if k not in (0, 1, 2):
            return 0.0
        return float(self.probs(self.check(theta), [k])[0])

    def pmf_dtheta(self, theta, k: int) -> np.ndarray:
        return np.array({0: (1.0, 0.0), 1: (0.0, 1.0), 2: (-1.0, -1.0)}.get(k, (0.0, 0.0)))

    def support_hint(self, theta=None) -> int:
        return 2

    def pmf_vector(self, theta) -> np.ndarray:
        return self.probs(self.check(theta), [0, 1, 2])

    def mean(self, theta):
        return offspring_mean_twotype(np.asarray(theta, dtype=float)[..., 1])

    def variance(self, theta):
        q1 = np.asarray(theta, dtype=float)[..., 1]
        return 4 * q1 * (1 - q1)

    def __repr__(self):
        return "trinomial_family()"


class TableFamily:
    """A fixed finite pmf with no free parameter (``theta`` is ignored)."""

    name = "table"
    dim = 0
    finite_support = True

    def __init__(self, table: Sequence[float]):
        p = as_pmf(table)
        s = p.sum()
        if abs(s - 1.0) > 1e-12:
            raise DomainError(f"table pmf sums to {s}, not 1")
        self.table = p
        self.table.flags.writeable = False

    def in_space(self, theta) -> bool:
        return True

    def check(self, theta):
        return None

    def probs(self, theta, ks) -> np.ndarray:
        k = np.asarray(ks, dtype=int)
        inside = (k >= 0) & (k < self.table.size)
        vals = np.where(inside, self.table[np.clip(k, 0, self.table.size - 1)], 0.0)
        shape = np.shape(theta) if theta is not None else ()
        return np.broadcast_to(vals, shape + vals.shape).copy()

    def pmf(self, theta, k: int) -> float:
        return float(self.table[k]) if 0 <= k < self.table.size else 0.0

    def pmf_dtheta(self, theta, k: int) -> float:
        return 0.0

    def support_hint(self, theta=None) -> int:
        return self.table.size - 1

    def pmf_vector(self, theta=None) -> np.ndarray:
        return self.table.copy()

    def mean(self, theta=None) -> float:
        return float(np.arange(self.table.size) @ self.table)

    def variance(self, theta=None) -> float:
        k = np.arange(self.table.size)
        m = k @ self.table
        return float(((k - m) ** 2) @ self.table)

    def __repr__(self):
        return f"TableFamily({self.table.tolist()!r})"


def geometric_family() -> GeometricFamily:
    return GeometricFamily()


def trinomial_family() -> TrinomialFamily:
    return TrinomialFamily()


def family_by_name(name: str):
    try:
        return {"geometric": geometric_family, "trinomial": trinomial_family}[name]()
    except KeyError:
        raise DomainError(f"unknown family {name!r}") from None


def mean_of(family, theta) -> float:
    if not family.in_space(theta):
        raise DomainError(f"{theta!r} outside the parameter space of {family!r}")
    return float(family.mean(theta))


def offspring_mean_twotype(q1):
    """Mean number of type-1 offspring when division yields two cells."""
    return 2 * q1

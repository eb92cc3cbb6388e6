"""Controlled branching processes: simulation and sufficient statistics."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from .errors import DataError, DomainError, EstimationError, PopulationOverflowError
from .rng import stream

INT64_MAX = 2**63 - 1
_MULTINOMIAL_CAP = 256  # offspring values beyond this are drawn one by one


@dataclass(frozen=True)
class ControlLaw:
    """Distribution of the number of progenitors phi(z) given size z.

    ``kind`` is ``"poisson"`` (mean ``param * z``), ``"binomial"``
    (``z`` trials with success probability ``param``) or ``"identity"``.
    """

    kind: str = "identity"
    param: float = 1.0

    def __post_init__(self):
        if self.kind not in ("poisson", "binomial", "identity"):
            raise DomainError(f"unknown control kind {self.kind!r}")
        if not np.isfinite(self.param) or self.param < 0:
            raise DomainError("control parameter must be a nonnegative real")
        if self.kind == "binomial" and self.param > 1:
            raise DomainError("binomial control probability must be <= 1")

    @classmethod
    def poisson(cls, rate: float) -> "ControlLaw":
        return cls("poisson", float(rate))

    @classmethod
    def binomial(cls, prob: float) -> "ControlLaw":
        return cls("binomial", float(prob))

    @classmethod
    def identity(cls) -> "ControlLaw":
        return cls("identity", 1.0)

    @property
    def tau(self) -> float:
        """Asymptotic mean number of progenitors per individual."""
        return 1.0 if self.kind == "identity" else self.param

    def criticality_index(self, offspring_mean: float) -> float:
        return self.tau * offspring_mean

    def sample(self, z: int, rng: np.random.Generator) -> int:
        if z == 0:
            return 0
        if self.kind == "identity":
            return int(z)
        if self.kind == "poisson":
            return int(rng.poisson(self.param * z))
        return int(rng.binomial(z, self.param))


@dataclass(frozen=True)
class Generation:
    z: int
    phi: int
    counts: Mapping[int, int] = field(default_factory=dict)

    @property
    def children(self) -> int:
        return sum(k * c for k, c in self.counts.items())


@dataclass(frozen=True)
class FamilyTree:
    """Observed tree: initial size and one record per transition."""

    z0: int
    generations: tuple = ()

    @property
    def n_generations(self) -> int:
        return len(self.generations)

    @property
    def sizes(self) -> list[int]:
        """z_0, ..., z_n (the last one implied by the final counts)."""
        out = [self.z0]
        for g in self.generations:
            out.append(g.children)
        return out

    @property
    def final_size(self) -> int:
        return self.sizes[-1]

    @property
    def extinct(self) -> bool:
        return self.final_size == 0

    def truncate(self, n: int) -> "FamilyTree":
        if n < 0 or n > self.n_generations:
            raise DomainError(f"cannot truncate {self.n_generations} generations to {n}")
        return FamilyTree(self.z0, self.generations[:n])

    def validate(self) -> None:
        if not isinstance(self.z0, (int, np.integer)) or self.z0 < 0:
            raise DataError("z0 must be a nonnegative integer")
        prev = self.z0
        for l, g in enumerate(self.generations):
            for name in ("z", "phi"):
                v = getattr(g, name)
                if not isinstance(v, (int, np.integer)) or v < 0:
                    raise DataError(f"generation {l}: {name} must be a nonnegative integer")
            for k, c in g.counts.items():
                if not isinstance(k, (int, np.integer)) or k < 0 or \
                        not isinstance(c, (int, np.integer)) or c < 0:
                    raise DataError(f"generation {l}: counts must map nonnegative "
                                    f"integers to nonnegative integers")
            if g.z != prev:
                raise DataError(f"generation {l}: z={g.z} but the previous generation "
                                f"produced {prev} individuals")
            if sum(g.counts.values()) != g.phi:
                raise DataError(f"generation {l}: counts sum to "
                                f"{sum(g.counts.values())}, phi={g.phi}")
            if g.z == 0 and g.phi != 0:
                raise DataError(f"generation {l}: progenitors in an empty generation")
            prev = g.children

    def to_dict(self) -> dict:
        return {
            "z0": int(self.z0),
            "generations": [
                {"z": int(g.z), "phi": int(g.phi),
                 "counts": {str(k): int(c) for k, c in sorted(g.counts.items())}}
                for g in self.generations
            ],
        }

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)

    @classmethod
    def from_dict(cls, data: Mapping) -> "FamilyTree":
        try:
            z0 = data["z0"]
            gens = []
            for l, rec in enumerate(data.get("generations", [])):
                counts = {}
                for k, c in rec.get("counts", {}).items():
                    counts[int(k)] = c
                gens.append(Generation(rec["z"], rec["phi"], counts))
        except (KeyError, TypeError, ValueError, AttributeError) as exc:
            raise DataError(f"malformed family tree: {exc}") from None
        return cls(z0, tuple(gens))

    @classmethod
    def from_json(cls, text: str) -> "FamilyTree":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise DataError(f"family tree is not valid JSON: {exc}") from None
        return cls.from_dict(data)


@dataclass(frozen=True)
class SufficientStats:
    y_of_k: np.ndarray  # y_of_k[k] = progenitors with exactly k offspring
    delta: int
    y_total: int
    z0: int
    generations: int

    def __post_init__(self):
        self.y_of_k.flags.writeable = False


def _draw_offspring(family, theta, n: int, rng) -> dict[int, int]:
    """Offspring-count histogram for ``n`` independent progenitors."""
    if n == 0:
        return {}
    hint = family.support_hint(theta)
    cap = hint if family.finite_support else min(hint, _MULTINOMIAL_CAP)
    p = family.probs(theta, np.arange(cap + 1))
    p = np.clip(p, 0.0, None)
    tail = 0.0 if family.finite_support else max(1.0 - p.sum(), 0.0)
    probs = np.append(p, tail)
    probs /= probs.sum()
    drawn = rng.multinomial(n, probs)
    out = {k: int(c) for k, c in enumerate(drawn[:-1]) if c}
    n_tail = int(drawn[-1])
    if n_tail:
        if family.name != "geometric":
            raise DomainError("tail sampling is only available for the geometric family")
        # memoryless: X | X > cap  ~  cap + 1 + Geometric
        extra = cap + rng.geometric(float(theta), size=n_tail)
        for k in extra.tolist():
            out[k] = out.get(k, 0) + 1
    return out


def simulate_cbp(family, theta, control: ControlLaw, z0: int, n_generations: int,
                 seed: int, contamination: tuple[float, int] | None = None) -> FamilyTree:
    """Simulate ``n_generations`` transitions of a controlled branching process.

    With ``contamination=(alpha, L)`` each progenitor independently has
    exactly ``L`` offspring with probability ``alpha``.
    """
    if not isinstance(z0, (int, np.integer)) or z0 < 1:
        raise DomainError("z0 must be a positive integer")
    if not isinstance(n_generations, (int, np.integer)) or n_generations < 0:
        raise DomainError("n_generations must be a nonnegative integer")
    if family.dim:
        family.check(theta)
    alpha, point = contamination if contamination is not None else (0.0, 0)
    if not 0.0 <= alpha < 1.0:
        raise DomainError("contamination weight must lie in [0, 1)")
    if not isinstance(point, (int, np.integer)) or point < 0:
        raise DomainError("contamination point must be a nonnegative integer")

    rng = stream(seed, "cbp")
    gens = []
    z = int(z0)
    for _ in range(n_generations):
        if z == 0:
            break
        phi = control.sample(z, rng)
        n_bad = int(rng.binomial(phi, alpha)) if alpha > 0 and phi else 0
        counts = _draw_offspring(family, theta, phi - n_bad, rng)
        if n_bad:
            counts[int(point)] = counts.get(int(point), 0) + n_bad
        counts = dict(sorted(counts.items()))
        z_next = sum(k * c for k, c in counts.items())
        if z_next > INT64_MAX:
            raise PopulationOverflowError(
                f"population exceeds 64-bit range at generation {len(gens) + 1}")
        gens.append(Generation(z, phi, counts))
        z = z_next
    return FamilyTree(int(z0), tuple(gens))


def accumulate_stats(tree: FamilyTree) -> SufficientStats:
    tree.validate()
    kmax = max((max(g.counts) for g in tree.generations if g.counts), default=0)
    y = np.zeros(kmax + 1, dtype=np.int64)
    delta = 0
    for g in tree.generations:
        for k, c in g.counts.items():
            y[k] += c
        delta += g.phi
    y_total = int(sum(tree.sizes))
    return SufficientStats(y, int(delta), y_total, int(tree.z0), tree.n_generations)


def empirical_offspring(stats: SufficientStats) -> np.ndarray:
    """Nonparametric MLE of the offspring pmf, ``Y(k) / Delta``."""
    if stats.delta <= 0:
        raise EstimationError("no progenitors observed")
    return stats.y_of_k / float(stats.delta)

"""Replication harness: many simulated trajectories, estimators at checkpoints."""

from __future__ import annotations

import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .branching import ControlLaw, accumulate_stats, empirical_offspring, simulate_cbp
from .disparity import get_kind, mde
from .dposterior import Prior1D, build_dposterior, edap, mdap
from .errors import DataError, SubcriticalWarning
from .families import geometric_family
from .rng import splitmix64


@dataclass(frozen=True)
class ReplicationSetup:
    theta0: float = 0.3
    rate: float = 0.3
    z0: int = 1
    alpha: float = 0.15
    point: int = 11
    checkpoints: tuple = (15, 30, 45)
    kinds: tuple = ("HD",)
    prior: Prior1D = Prior1D.beta(0.5, 0.5)
    grid_size: int = 4001

    def generating_pmf(self, kmax: int) -> np.ndarray:
        fam = geometric_family()
        p = (1 - self.alpha) * fam.probs(self.theta0, np.arange(kmax + 1))
        if self.alpha and self.point <= kmax:
            p[self.point] += self.alpha
        return p

    def criticality_index(self) -> float:
        m = (1 - self.alpha) * geometric_family().mean(self.theta0) + self.alpha * self.point
        return ControlLaw.poisson(self.rate).criticality_index(float(m))


def _replicate_seed(seed: int, index: int) -> int:
    return splitmix64((seed * 0x9E3779B97F4A7C15 + index) & ((1 << 64) - 1))


def _one(args):
    setup, seed, index = args
    fam = geometric_family()
    n_max = max(setup.checkpoints)
    tree = simulate_cbp(fam, setup.theta0, ControlLaw.poisson(setup.rate), setup.z0, n_max,
                        _replicate_seed(seed, index),
                        (setup.alpha, setup.point) if setup.alpha else None)
    if tree.n_generations < n_max or tree.extinct:
        return None
    rows = []
    for n in setup.checkpoints:
        stats = accumulate_stats(tree.truncate(n))
        if stats.delta == 0:
            return None
        q = empirical_offspring(stats)
        p_true = setup.generating_pmf(max(q.size - 1, 200))
        l1 = float(np.abs(np.pad(q, (0, p_true.size - q.size)) - p_true).sum()
                   + max(1.0 - p_true.sum(), 0.0))
        for kind in setup.kinds:
            kind = get_kind(kind)
            post = build_dposterior(kind, q, fam, stats.delta, setup.prior, setup.grid_size)
            e = edap(post)
            m = mdap(post).theta
            t_mde = mde(kind, q, fam)[0]
            rows.append(dict(replicate=index, n=n, kind=kind.tag, delta=stats.delta,
                             edap=e, mdap=m, mde=t_mde, abs_err_edap=abs(e - setup.theta0),
                             scaled_gap=abs(e - t_mde) * np.sqrt(stats.delta), l1_phat=l1))
    return rows


@dataclass(frozen=True)
class ReplicationResult:
    setup: ReplicationSetup
    rows: list
    attempted: int
    survivors: int

    @property
    def discard_rate(self) -> float:
        return 1.0 - self.survivors / self.attempted if self.attempted else 0.0

    def aggregate(self) -> list[dict]:
        out = []
        for kind in self.setup.kinds:
            tag = get_kind(kind).tag
            for n in self.setup.checkpoints:
                sel = [r for r in self.rows if r["n"] == n and r["kind"] == tag]
                if not sel:
                    continue
                out.append(dict(
                    n=n, kind=tag, replicates=len(sel),
                    median_abs_err_edap=float(np.median([r["abs_err_edap"] for r in sel])),
                    median_scaled_gap=float(np.median([r["scaled_gap"] for r in sel])),
                    median_l1_phat=float(np.median([r["l1_phat"] for r in sel])),
                ))
        return out


def run_replicates(setup: ReplicationSetup, seed: int, replicates: int = 200,
                   target_survivors: int | None = None, max_attempts: int = 1_000_000,
                   workers: int = 1, batch: int = 64) -> ReplicationResult:
    """Simulate trajectories from derived seeds, dropping the extinct ones.

    With ``target_survivors`` the harness keeps drawing replicate indices
    until that many trajectories survive to the last checkpoint; otherwise
    exactly ``replicates`` trajectories are attempted.
    """
    tau_m = setup.criticality_index()
    if tau_m <= 1:
        warnings.warn(f"criticality index tau*m = {tau_m:.4g} <= 1; survival is rare",
                      SubcriticalWarning, stacklevel=2)
    rows, survivors, attempted = [], 0, 0
    limit = max_attempts if target_survivors else replicates
    pool = ProcessPoolExecutor(workers) if workers > 1 else None
    try:
        while attempted < limit and (target_survivors is None or survivors < target_survivors):
            size = min(batch, limit - attempted)
            jobs = [(setup, seed, attempted + i) for i in range(size)]
            results = list(pool.map(_one, jobs)) if pool else [_one(j) for j in jobs]
            for res in results:
                attempted += 1
                if res is None:
                    continue
                if target_survivors is not None and survivors >= target_survivors:
                    break
                survivors += 1
                rows.extend(res)
            if target_survivors is not None and survivors >= target_survivors:
                break
    finally:
        if pool:
            pool.shutdown()
    if survivors == 0:
        raise DataError(f"all {attempted} trajectories went extinct; increase the control "
                        f"rate or the offspring mean (tau*m = {tau_m:.4g})")
    return ReplicationResult(setup, rows, attempted, survivors)

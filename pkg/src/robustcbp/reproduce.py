"""Side-by-side reproduction of the reference tables."""

from __future__ import annotations

from dataclasses import dataclass

from . import fixtures as fx
from .branching import accumulate_stats, empirical_offspring
from .dposterior import Prior1D, build_dposterior, edap, mdap
from .errors import ConfigError
from .families import geometric_family
from .multitype import (Dirichlet, build_simplex_dposterior, criticality_prob, edap_simplex,
                        mdap_simplex, mle_twotype)

TABLE_IDS = ("table2", "table3", "table4", "table5", "table6", "sim45")
TABLE5_DRAWS = 10_000_000


@dataclass(frozen=True)
class Cell:
    name: str
    computed: float
    reference: float
    tol: float
    mode: str = "abs"  # "abs": |c - r| <= tol; "round": round(c, digits) == r

    @property
    def passed(self) -> bool:
        if self.mode == "round":
            return round(self.computed, int(self.tol)) == round(self.reference, int(self.tol))
        return abs(self.computed - self.reference) <= self.tol + 1e-12


def sim45_posterior(kind: str, prior: Prior1D, grid_size: int = 4001, n: int | None = None):
    tree = fx.sim45_tree()
    if n is not None:
        tree = tree.truncate(n)
    stats = accumulate_stats(tree)
    support_max = fx.SIM45_NED_SUPPORT_MAX if kind.upper() == "NED" else None
    return build_dposterior(kind, empirical_offspring(stats), geometric_family(), stats.delta,
                            prior, grid_size, support_max)


def _table2():
    cells = []
    for fid, ref in fx.TABLE2.items():
        got = mle_twotype(fx.load_fixture(fid))
        for name, c, r in zip(("p0", "p1", "p2", "gamma"), got, ref):
            cells.append(Cell(f"{fid} {name}", c, r, 4, "round"))
    return cells


def _table34(fid, table, draws, seed):
    stats = fx.load_fixture(fid)
    cells = []
    for kind, (e_ref, m_ref) in table.items():
        e = edap_simplex(build_simplex_dposterior(kind, stats, Dirichlet(), draws, seed))
        m = mdap_simplex(kind, stats, Dirichlet()).p
        for j in range(3):
            cells.append(Cell(f"{fid} {kind} EDAP p{j}", e[j], e_ref[j], 0.003))
        for j in range(3):
            cells.append(Cell(f"{fid} {kind} MDAP p{j}", m[j], m_ref[j], 1e-9))
    return cells


def _table5(draws, seed):
    cells = []
    for fid, refs in fx.TABLE5.items():
        stats = fx.load_fixture(fid)
        for kind, ref in refs.items():
            post = build_simplex_dposterior(kind, stats, Dirichlet(), draws, seed)
            cells.append(Cell(f"{fid} {kind} P(m>1)", criticality_prob(post), ref, 0.01))
    return cells


def _table6(grid_size):
    cells = []
    for rho, beta, mean, var, eh, en, mh, mn in fx.TABLE6:
        prior = Prior1D.beta(rho, beta)
        pm, pv = prior.moments()
        tag = f"({rho:g},{beta:g})"
        cells.append(Cell(f"{tag} prior mean", pm, mean, 3, "round"))
        cells.append(Cell(f"{tag} prior var", pv, var, 3, "round"))
        for kind, e_ref, m_ref in (("HD", eh, mh), ("NED", en, mn)):
            post = sim45_posterior(kind, prior, grid_size)
            cells.append(Cell(f"{tag} EDAP {kind}", edap(post), e_ref, 0.001))
            cells.append(Cell(f"{tag} MDAP {kind}", mdap(post).theta, m_ref, 0.001))
    return cells


def _sim45(grid_size):
    prior = Prior1D.beta(0.5, 0.5)
    cells = []
    for kind in ("HD", "NED"):
        post = sim45_posterior(kind, prior, grid_size)
        cells.append(Cell(f"EDAP {kind}", edap(post), fx.SIM45[f"EDAP_{kind}"], 0.0005))
        cells.append(Cell(f"MDAP {kind}", mdap(post).theta, fx.SIM45[f"MDAP_{kind}"], 0.0005))
    return cells


def reproduce(table_id: str, seed: int = 0, draws: int | None = None,
              grid_size: int = 4001) -> list[Cell]:
    if table_id == "table2":
        return _table2()
    if table_id == "table3":
        return _table34("oligo-exp1", fx.TABLE3, draws or 200_000, seed)
    if table_id == "table4":
        return _table34("oligo-exp2", fx.TABLE4, draws or 200_000, seed)
    if table_id == "table5":
        return _table5(draws or TABLE5_DRAWS, seed)
    if table_id == "table6":
        return _table6(grid_size)
    if table_id == "sim45":
        return _sim45(grid_size)
    raise ConfigError(f"unknown table id {table_id!r}; choose from {', '.join(TABLE_IDS)}")

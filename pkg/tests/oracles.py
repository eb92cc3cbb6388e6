"""Closed-form references written independently of the package."""

import numpy as np
from scipy import optimize, stats
from scipy.special import gammaln


def kl_geometric_beta(rho, beta, delta, children):
    """KL D-posterior for geometric offspring is Beta(rho + delta, beta + children)."""
    return stats.beta(rho + delta, beta + children)


def beta_mode(a, b):
    return (a - 1.0) / (a + b - 2.0)


def beta_hpd(dist, level):
    """Equal-density interval of a unimodal Beta by nested root finding."""
    a, b = dist.args
    mode = beta_mode(a, b)
    fmax = dist.pdf(mode)

    def ends(c):
        lo = optimize.brentq(lambda x: dist.pdf(x) - c, 1e-15, mode) if dist.pdf(1e-15) < c else 0.0
        hi = optimize.brentq(lambda x: dist.pdf(x) - c, mode, 1 - 1e-15) if dist.pdf(1 - 1e-15) < c else 1.0
        return lo, hi

    def excess(c):
        lo, hi = ends(c)
        return dist.cdf(hi) - dist.cdf(lo) - level

    c = optimize.brentq(excess, fmax * 1e-12, fmax * (1 - 1e-12), xtol=1e-14 * fmax)
    return ends(c)


def geometric_fisher_bruteforce(theta, kmax=5000):
    k = np.arange(kmax)
    p = theta * (1 - theta) ** k
    score = 1 / theta - k / (1 - theta)
    return float(np.sum(p * score**2))


def dirichlet_logpdf(x0, x1, alphas):
    a = np.asarray(alphas, dtype=float)
    x2 = 1 - x0 - x1
    return (gammaln(a.sum()) - gammaln(a).sum() + (a[0] - 1) * np.log(x0)
            + (a[1] - 1) * np.log(x1) + (a[2] - 1) * np.log(x2))


def dirichlet_hpd_cells(alphas, cell, level, sub=8):
    """Cells of the level-HPD region of a Dirichlet, by midpoint sub-sampling."""
    n = int(round(1 / cell))
    offs = (np.arange(sub) + 0.5) / sub
    i, j = np.meshgrid(np.arange(n), np.arange(n), indexing="ij")
    mass = np.zeros((n, n))
    for u in offs:
        for v in offs:
            x0 = (i + u) * cell
            x1 = (j + v) * cell
            ok = x0 + x1 < 1
            lp = np.where(ok, dirichlet_logpdf(np.where(ok, x0, 0.1), np.where(ok, x1, 0.1), alphas), -np.inf)
            mass += np.exp(lp)
    mass *= cell * cell / sub**2
    flat = mass.ravel()
    order = np.argsort(-flat, kind="stable")
    cum = np.cumsum(flat[order])
    cut = int(np.searchsorted(cum, level * cum[-1]))
    keep = np.zeros(flat.size, dtype=bool)
    keep[order[: cut + 1]] = True
    return keep.reshape(n, n)

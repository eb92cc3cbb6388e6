"""Small numerical kernels: Simpson weights, golden section, log-domain sums."""

from __future__ import annotations

import math
from typing import Callable

import numpy as np
from scipy.special import logsumexp

INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


def simpson_weights(n: int, h: float) -> np.ndarray:
    """Composite Simpson weights for ``n`` (odd) equally spaced nodes."""
    if n < 3 or n % 2 == 0:
        raise ValueError("Simpson's rule needs an odd number of nodes >= 3")
    w = np.ones(n)
    w[1:-1:2] = 4.0
    w[2:-1:2] = 2.0
    return w * (h / 3.0)


def log_simpson(log_f: np.ndarray, h: float) -> float:
    """log of the Simpson integral of exp(log_f), computed without underflow."""
    w = simpson_weights(log_f.size, h)
    return float(logsumexp(log_f, b=w))


def golden_section(f: Callable[[float], float], a: float, b: float,
                   tol: float = 1e-9, max_iter: int = 200) -> float:
    """Minimize a unimodal ``f`` on [a, b] until the bracket is below ``tol``."""
    c = b - INV_PHI * (b - a)
    d = a + INV_PHI * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(max_iter):
        if b - a < tol:
            break
        if fc <= fd:  # keep the left part on ties
            b, d, fd = d, c, fc
            c = b - INV_PHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + INV_PHI * (b - a)
            fd = f(d)
    return c if fc <= fd else d


def pattern_search(f: Callable[[np.ndarray], float], x0: np.ndarray, step: float,
                   feasible: Callable[[np.ndarray], bool], tol: float = 1e-10,
                   max_iter: int = 10_000) -> np.ndarray:
    """Compass search from ``x0``; halves the step when no direction improves."""
    x = np.asarray(x0, dtype=float).copy()
    fx = f(x)
    dim = x.size
    dirs = np.vstack([np.eye(dim), -np.eye(dim)])
    it = 0
    while step > tol and it < max_iter:
        it += 1
        moved = False
        for d in dirs:
            y = x + step * d
            if not feasible(y):
                continue
            fy = f(y)
            if fy < fx:
                x, fx, moved = y, fy, True
                break
        if not moved:
            step *= 0.5
    return x

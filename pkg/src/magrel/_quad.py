"""Composite Gauss-Legendre quadrature shared by the kernel modules."""

from functools import lru_cache

import numpy as np

LOW_ORDER = 24
HIGH_ORDER = 32


@lru_cache(maxsize=None)
def _legendre(order):
    x, w = np.polynomial.legendre.leggauss(order)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def panel_nodes(edges, order):
    """Nodes and weights of composite GL on consecutive panels."""
    edges = np.asarray(edges, dtype=float)
    x, w = _legendre(order)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[1:] + edges[:-1])
    nodes = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    weights = (half[:, None] * w[None, :]).ravel()
    return nodes, weights


def integrate(f, edges, order=HIGH_ORDER):
    nodes, weights = panel_nodes(edges, order)
    return np.dot(f(nodes), weights)


def integrate_err(f, edges):
    """Integral of a vectorized f over the panels with a two-order error estimate."""
    hi = integrate(f, edges, HIGH_ORDER)
    lo = integrate(f, edges, LOW_ORDER)
    return float(hi), float(abs(hi - lo))


def merge_edges(*groups, lo, hi):
    """Sorted unique panel edges within [lo, hi] from several breakpoint sets."""
    pts = np.concatenate([np.ravel(g) for g in groups] + [[lo, hi]])
    pts = np.unique(pts[(pts >= lo) & (pts <= hi)])
    keep = np.concatenate([[True], np.diff(pts) > 1e-14 * max(abs(hi), 1.0)])
    return pts[keep]


def graded_edges(lo, hi, width, ratio=2.0, floor=1e-14):
    """Geometric grading from ``floor*hi`` up, then uniform panels of ``width``."""
    geo = hi * ratio ** -np.arange(0, int(np.log(1.0 / floor) / np.log(ratio)) + 1)
    uni = np.arange(lo, hi, width) if width > 0 else []
    return merge_edges(geo[geo > lo], uni, lo=lo, hi=hi)

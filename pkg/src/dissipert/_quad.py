"""Composite Gauss-Legendre rules shared by the spectral routines."""
from functools import lru_cache

import numpy as np
from numpy.polynomial.legendre import leggauss


@lru_cache(maxsize=None)
def _reference(order):
    x, w = leggauss(order)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def gl_on_edges(edges, order=16):
    """Nodes and weights of a composite rule with panels between ``edges``."""
    edges = np.asarray(edges, dtype=float)
    if edges.size < 2:
        return np.empty(0), np.empty(0)
    x, w = _reference(order)
    lo = edges[:-1, None]
    hi = edges[1:, None]
    half = (hi - lo) / 2
    nodes = (half * x + (hi + lo) / 2).ravel()
    weights = (half * w).ravel()
    return nodes, weights


def panel_edges(lo, hi, panels, breakpoints=()):
    """Uniform panel edges on ``[lo, hi]`` refined at interior ``breakpoints``."""
    if hi <= lo:
        return np.array([lo])
    edges = np.linspace(lo, hi, int(panels) + 1)
    extra = [b for b in breakpoints if lo < b < hi]
    if extra:
        edges = np.unique(np.concatenate([edges, extra]))
    return edges


def gl_panels(lo, hi, panels, order=16, breakpoints=()):
    return gl_on_edges(panel_edges(lo, hi, panels, breakpoints), order)


def graded_edges(top, levels, bottom_ratio=None):
    """Geometric panels ``top*2**-k`` accumulating at zero.

    The innermost sliver ``[0, top*2**-levels]`` is left out; callers bound it.
    """
    k = np.arange(levels, -1, -1)
    return top * 2.0 ** (-k.astype(float))


def gl_graded(top, levels=60, order=16):
    return gl_on_edges(graded_edges(top, levels), order)

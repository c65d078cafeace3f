"""Composite Gauss-Legendre quadrature and the half-sphere surface reduction.

Every integral over the upper half-sphere of a function of the colatitude
theta alone reduces to a weighted 1D integral:

    int_{S^{N-1}_+} f(theta) dsigma
        = |S^{N-2}| * int_0^{pi/2} f(theta) sin(theta)^{N-2} dtheta,

where |S^{N-2}| = 2 pi^((N-1)/2) / Gamma((N-1)/2) is the measure of the
equatorial sphere (|S^0| = 2 covers N = 2: two symmetric meridians).  The
integrands encountered here are smooth on (0, pi/2), so composite
Gauss-Legendre panels converge spectrally per panel.
"""

from __future__ import annotations

import math
from functools import lru_cache

import numpy as np

__all__ = ["gauss_panels", "sphere_area", "integrate_function"]

DEFAULT_PANELS = 16
DEFAULT_NODES = 64


@lru_cache(maxsize=64)
def _leggauss(n_nodes: int) -> tuple[np.ndarray, np.ndarray]:
    return np.polynomial.legendre.leggauss(n_nodes)


def gauss_panels(a: float, b: float, n_panels: int = DEFAULT_PANELS,
                 n_nodes: int = DEFAULT_NODES) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and weights of composite Gauss-Legendre quadrature on [a, b]."""
    if not b > a:
        raise ValueError(f"need a < b, got [{a}, {b}]")
    if n_panels < 1 or n_nodes < 1:
        raise ValueError("panel and node counts must be >= 1")
    x0, w0 = _leggauss(n_nodes)
    edges = np.linspace(a, b, n_panels + 1)
    half = np.diff(edges) / 2.0
    mid = (edges[:-1] + edges[1:]) / 2.0
    x = (mid[:, None] + half[:, None] * x0[None, :]).ravel()
    w = (half[:, None] * w0[None, :]).ravel()
    return x, w


def sphere_area(dim: int) -> float:
    """Measure |S^{dim-1}| of the unit sphere in R^dim (|S^0| = 2)."""
    if dim < 1:
        raise ValueError(f"need dim >= 1, got {dim}")
    return 2.0 * math.pi ** (dim / 2.0) / math.gamma(dim / 2.0)


def integrate_function(f, a: float, b: float, n_panels: int = DEFAULT_PANELS,
                       n_nodes: int = DEFAULT_NODES) -> float:
    """Integral of a vectorized callable over [a, b] on composite Gauss panels."""
    x, w = gauss_panels(a, b, n_panels, n_nodes)
    return float(np.dot(w, f(x)))

"""Deterministic quadrature rules for fundamental cells, radial half-lines and boxes.

Domain rules are tensor Gauss-Legendre grids on [0, 1]^{2n} pushed through the
period matrix (constant Jacobian = cell volume).  Radial rules are generalized
Gauss-Laguerre for weight x^alpha e^{-x}, built by Golub-Welsch from the Jacobi
matrix of the recurrence.  All reductions run in a fixed order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import eigh_tridiagonal

from .errors import NumericError, ResourceError
from .lattice import Lattice

MAX_NODES = 1_000_000


def _gauss_legendre_01(order: int):
    """Nodes/weights on [0, 1]."""
    if order < 1:
        raise ValueError("quadrature order must be >= 1")
    x, w = np.polynomial.legendre.leggauss(order)
    return (x + 1.0) / 2.0, w / 2.0


@dataclass(frozen=True)
class DomainRule:
    """Tensor rule over the fundamental cell; weights sum to the cell volume."""

    lattice: Lattice
    order: int
    nodes: np.ndarray   # (k,) complex for n = 1, else (k, n)
    weights: np.ndarray  # (k,) float


@dataclass(frozen=True)
class RadialRule:
    """Gauss-Laguerre rule for integral_0^inf f(x) x^alpha e^{-x} dx."""

    order: int
    alpha: float
    nodes: np.ndarray
    weights: np.ndarray


@dataclass(frozen=True)
class BoxRule:
    """Tensor rule over the centered box [-radius, radius]^{2n} in real coordinates."""

    radius: float
    order: int
    nodes: np.ndarray   # (k,) complex for n = 1, else (k, n)
    weights: np.ndarray


def fundamental_domain_rule(lat: Lattice, order: int) -> DomainRule:
    if lat.n > 2:
        raise NumericError(f"domain quadrature supports n <= 2, got n = {lat.n}")
    dim = 2 * lat.n
    if order**dim > MAX_NODES:
        raise ResourceError(f"order {order} needs {order**dim} nodes (cap {MAX_NODES})")
    t1, w1 = _gauss_legendre_01(order)
    grids = np.meshgrid(*([t1] * dim), indexing="ij")
    tt = np.stack([g.ravel() for g in grids], axis=1)          # (k, 2n) in [0,1]
    wgrids = np.meshgrid(*([w1] * dim), indexing="ij")
    wts = np.prod(np.stack([g.ravel() for g in wgrids], axis=1), axis=1) * lat.cell_volume
    xy = tt @ lat.period_matrix.T                               # real coords
    nodes = xy[:, 0::2] + 1j * xy[:, 1::2]
    if lat.n == 1:
        nodes = nodes[:, 0]
    return DomainRule(lattice=lat, order=order, nodes=nodes, weights=wts)


def integrate_domain(f, rule: DomainRule) -> complex:
    """Fixed-order weighted sum of f over the rule nodes; f maps a point to a scalar."""
    vals = np.array([f(z) for z in rule.nodes], dtype=complex)
    return complex(np.dot(rule.weights, vals))


def gauss_laguerre_rule(order: int, alpha: float) -> RadialRule:
    """Golub-Welsch nodes/weights for weight x^alpha e^{-x} on (0, inf)."""
    if order < 1:
        raise ValueError("radial order must be >= 1")
    if alpha <= -1:
        raise ValueError("alpha must exceed -1")
    k = np.arange(order)
    diag = 2 * k + alpha + 1
    off = np.sqrt((k[1:]) * (k[1:] + alpha))
    try:
        vals, vecs = eigh_tridiagonal(diag, off)
    except np.linalg.LinAlgError as exc:  # pragma: no cover
        raise NumericError(f"Jacobi matrix eigendecomposition failed: {exc}") from exc
    weights = math.gamma(alpha + 1) * vecs[0, :] ** 2
    return RadialRule(order=order, alpha=alpha, nodes=vals, weights=weights)


def box_rule(radius: float, order: int, n: int = 1) -> BoxRule:
    """Tensor Gauss-Legendre over [-radius, radius]^{2n} for full-plane integrals."""
    dim = 2 * n
    if order**dim > MAX_NODES:
        raise ResourceError(f"order {order} needs {order**dim} nodes (cap {MAX_NODES})")
    x1, w1 = np.polynomial.legendre.leggauss(order)
    x1 = x1 * radius
    w1 = w1 * radius
    grids = np.meshgrid(*([x1] * dim), indexing="ij")
    xy = np.stack([g.ravel() for g in grids], axis=1)
    wgrids = np.meshgrid(*([w1] * dim), indexing="ij")
    wts = np.prod(np.stack([g.ravel() for g in wgrids], axis=1), axis=1)
    nodes = xy[:, 0::2] + 1j * xy[:, 1::2]
    if n == 1:
        nodes = nodes[:, 0]
    return BoxRule(radius=radius, order=order, nodes=nodes, weights=wts)


def integrate_box(f, rule: BoxRule) -> complex:
    vals = np.array([f(z) for z in rule.nodes], dtype=complex)
    return complex(np.dot(rule.weights, vals))

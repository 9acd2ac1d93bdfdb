"""Lattices in C^n and the elementary Hermitian/symplectic geometry they live in.

Points of C^n are numpy arrays of shape (n,) with complex dtype.  The real
coordinates of a point interleave real and imaginary parts per complex
coordinate, (Re z_1, Im z_1, ..., Re z_n, Im z_n), and a full-rank lattice is
given by 2n generators whose real coordinate vectors form the columns of the
period matrix.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import LatticeRankError

# Rank acceptance threshold: |det P| must exceed RANK_TOL * (max |u_j|)^{2n}.
RANK_TOL = 1e-10


def as_point(z, n: int | None = None) -> np.ndarray:
    """Coerce a scalar or sequence to a complex point of shape (n,)."""
    arr = np.atleast_1d(np.asarray(z, dtype=complex))
    if arr.ndim != 1:
        raise ValueError(f"point must be one-dimensional, got shape {arr.shape}")
    if n is not None and arr.shape[0] != n:
        raise ValueError(f"point has {arr.shape[0]} coordinates, expected {n}")
    return arr


def hermitian_inner(z, w) -> complex:
    """<z, w> = sum_j z_j * conj(w_j)."""
    zp, wp = np.atleast_1d(np.asarray(z, dtype=complex)), np.atleast_1d(np.asarray(w, dtype=complex))
    if zp.shape != wp.shape:
        raise ValueError(f"dimension mismatch: {zp.shape} vs {wp.shape}")
    return complex(np.sum(zp * np.conj(wp)))


def symplectic_form(z, w) -> float:
    """omega(z, w) = Im <z, w>; antisymmetric, omega(z, z) = 0."""
    return hermitian_inner(z, w).imag


def real_coords(z) -> np.ndarray:
    """Interleaved real coordinates (Re z_1, Im z_1, ...) of shape (2n,)."""
    zp = np.atleast_1d(np.asarray(z, dtype=complex))
    out = np.empty(2 * zp.shape[0])
    out[0::2] = zp.real
    out[1::2] = zp.imag
    return out


def from_real_coords(x) -> np.ndarray:
    xp = np.asarray(x, dtype=float)
    return xp[0::2] + 1j * xp[1::2]


@dataclass(frozen=True)
class LatticePoint:
    """A lattice element gamma = sum_j m_j u_j with its integer coefficients."""

    coeffs: tuple[int, ...]
    value: np.ndarray

    def __repr__(self) -> str:
        return f"LatticePoint(coeffs={self.coeffs}, value={self.value})"


@dataclass(frozen=True)
class Lattice:
    """Full-rank lattice Gamma = Z u_1 + ... + Z u_{2n} in C^n.

    generators has shape (2n, n): row j is u_j.  The period matrix (2n x 2n,
    column j = real coordinates of u_j) must be invertible; cell_volume is the
    absolute determinant, i.e. the Lebesgue volume of the fundamental cell
    Lambda = {sum_j t_j u_j : t_j in [0, 1)}.
    """

    generators: np.ndarray
    period_matrix: np.ndarray = field(init=False, repr=False)
    cell_volume: float = field(init=False)

    def __post_init__(self):
        gens = np.atleast_2d(np.asarray(self.generators, dtype=complex))
        if gens.ndim != 2 or gens.shape[0] != 2 * gens.shape[1]:
            raise ValueError(f"expected (2n, n) generator array, got shape {gens.shape}")
        gens = gens.copy()
        gens.setflags(write=False)
        period = np.column_stack([real_coords(u) for u in gens])
        det = np.linalg.det(period)
        scale = max(np.max(np.abs(np.linalg.norm(gens, axis=1))), 1e-300)
        if abs(det) <= RANK_TOL * scale ** (2 * gens.shape[1]):
            raise LatticeRankError(
                f"generators are degenerate: |det P| = {abs(det):.3e} "
                f"<= {RANK_TOL:.0e} * (max |u_j|)^(2n)"
            )
        period.setflags(write=False)
        object.__setattr__(self, "generators", gens)
        object.__setattr__(self, "period_matrix", period)
        object.__setattr__(self, "cell_volume", abs(det))
        object.__setattr__(self, "_inv_period", np.linalg.inv(period))
        object.__setattr__(self, "_enum_cache", {})

    @property
    def n(self) -> int:
        return self.generators.shape[1]

    def point(self, coeffs) -> np.ndarray:
        """Value of sum_j m_j u_j."""
        m = np.asarray(coeffs, dtype=float)
        return m @ self.generators

    def to_cell_coords(self, z) -> np.ndarray:
        """Coordinates t with z = sum_j t_j u_j."""
        return self._inv_period @ real_coords(as_point(z, self.n))

    def from_cell_coords(self, t) -> np.ndarray:
        return from_real_coords(self.period_matrix @ np.asarray(t, dtype=float))

    def point_arrays(self, radius: float):
        """Cached (coeff array (k, 2n), value array (k, n)) for |gamma| <= radius.

        Rows are ordered lexicographically by coefficient vector.  Arrays are
        shared between callers; do not mutate.
        """
        key = round(float(radius), 9)
        hit = self._enum_cache.get(key)
        if hit is not None:
            return hit
        bounds = self.coeff_bounds(radius)
        axes = [np.arange(-b, b + 1) for b in bounds]
        grids = np.meshgrid(*axes, indexing="ij")
        coeffs = np.stack([g.ravel() for g in grids], axis=1)
        values = coeffs.astype(float) @ self.generators
        norms = np.linalg.norm(values, axis=1)
        keep = norms <= radius * (1 + 1e-12) + 1e-12
        out = (coeffs[keep], values[keep])
        out[0].setflags(write=False)
        out[1].setflags(write=False)
        self._enum_cache[key] = out
        return out

    def coeff_bounds(self, radius: float) -> list[int]:
        """Per-axis integer bounds of the coefficient bounding box for |gamma| <= radius."""
        row_norms = np.linalg.norm(self._inv_period, axis=1)
        return [int(math.floor(rn * radius + 1e-9)) for rn in row_norms]

    def to_json(self) -> str:
        gens = []
        for u in self.generators:
            pairs = [[float(c.real), float(c.imag)] for c in u]
            gens.append(pairs[0] if self.n == 1 else pairs)
        return json.dumps({"n": self.n, "generators": gens})

    @classmethod
    def from_json(cls, text: str) -> "Lattice":
        return cls.from_config(json.loads(text))

    @classmethod
    def from_config(cls, cfg: dict) -> "Lattice":
        if not isinstance(cfg, dict) or "n" not in cfg or "generators" not in cfg:
            raise ValueError("lattice config must be an object with 'n' and 'generators'")
        n = int(cfg["n"])
        raw = cfg["generators"]
        if len(raw) != 2 * n:
            raise ValueError(f"expected {2 * n} generators for n={n}, got {len(raw)}")
        gens = np.empty((2 * n, n), dtype=complex)
        for j, entry in enumerate(raw):
            pairs = [entry] if n == 1 and np.isscalar(entry[0]) else entry
            if len(pairs) != n:
                raise ValueError(f"generator {j} must have {n} [re, im] pairs")
            gens[j] = [p[0] + 1j * p[1] for p in pairs]
        return cls(gens)


def square_lattice() -> Lattice:
    """Z + iZ in C."""
    return Lattice(np.array([[1.0 + 0j], [1j]]))


def hexagonal_lattice() -> Lattice:
    """Z + e^{i pi/3} Z in C (cell area sin(pi/3))."""
    return Lattice(np.array([[1.0 + 0j], [np.exp(1j * np.pi / 3)]]))


def enumerate_lattice(lat: Lattice, radius: float) -> list[LatticePoint]:
    """All gamma with |gamma| <= radius (gamma = 0 included), lexicographic in coefficients."""
    if radius < 0:
        raise ValueError("radius must be nonnegative")
    coeffs, values = lat.point_arrays(radius)
    return [
        LatticePoint(tuple(int(c) for c in m), v) for m, v in zip(coeffs, values)
    ]


def reduce_to_fundamental(lat: Lattice, z) -> tuple[np.ndarray, LatticePoint]:
    """Split z = z0 + gamma with z0 in the half-open fundamental cell."""
    zp = as_point(z, lat.n)
    t = lat.to_cell_coords(zp)
    m = np.floor(t).astype(int)
    gamma_val = m.astype(float) @ lat.generators
    z0 = zp - gamma_val
    # Guard against t_j landing an ulp below an integer: renormalize once.
    t0 = lat.to_cell_coords(z0)
    adjust = np.floor(t0 + 1e-12).astype(int)
    if np.any(adjust):
        m = m + adjust
        gamma_val = m.astype(float) @ lat.generators
        z0 = zp - gamma_val
    return z0, LatticePoint(tuple(int(c) for c in m), gamma_val)


def is_lattice_point(lat: Lattice, z, tol: float = 1e-9) -> bool:
    """True if z is within tol of a lattice element."""
    t = lat.to_cell_coords(z)
    return bool(np.all(np.abs(t - np.round(t)) * np.linalg.norm(lat.period_matrix, axis=0) <= tol))

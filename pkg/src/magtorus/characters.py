"""Semicharacters on a lattice and the pseudo-character compatibility condition.

A character chi is stored through its values on the 2n generators (arbitrary
unit-modulus complex numbers) and extended to all of Gamma by

    chi(sum_j m_j u_j) = prod_j chi(u_j)^{m_j}
                         * exp(i nu sum_{j<k} m_j m_k omega(u_j, u_k)).

The extension is well defined, and satisfies

    chi(g1 + g2) = chi(g1) chi(g2) exp(i nu omega(g1, g2)),

exactly when nu * omega(u_j, u_k) is an integer multiple of pi for every
generator pair; check_rdq measures the per-pair defect.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import RdqError
from .lattice import Lattice, LatticePoint

# A pair passes when nu*omega(u_j, u_k) is within PI_TOL of pi*Z.
PI_TOL = 1e-10


@dataclass(frozen=True)
class Character:
    """Unit-modulus values on the 2n lattice generators."""

    generator_values: np.ndarray
    kind: str = "explicit"

    def __post_init__(self):
        vals = np.atleast_1d(np.asarray(self.generator_values, dtype=complex))
        if np.any(np.abs(np.abs(vals) - 1.0) > 1e-12):
            raise ValueError("character generator values must have modulus 1")
        vals = vals.copy()
        vals.setflags(write=False)
        object.__setattr__(self, "generator_values", vals)


def trivial_character(lat: Lattice) -> Character:
    return Character(np.ones(2 * lat.n, dtype=complex), kind="trivial")


def weierstrass_character(lat: Lattice) -> Character:
    """chi(u_1) = chi(u_2) = -1; the parity pseudo-character's generator data (n=1)."""
    if lat.n != 1:
        raise ValueError("weierstrass_character is defined for n=1 lattices only")
    return Character(np.array([-1.0, -1.0], dtype=complex), kind="weierstrass")


def nu_gamma(lat: Lattice) -> float:
    """Smallest compatible field strength pi / cell_area for an n=1 lattice."""
    if lat.n != 1:
        raise ValueError("nu_gamma is defined for n=1 lattices only")
    return np.pi / lat.cell_volume


def character_from_config(kind: str, lat: Lattice, values=None) -> Character:
    if kind == "trivial":
        return trivial_character(lat)
    if kind == "weierstrass":
        return weierstrass_character(lat)
    if kind == "explicit":
        if values is None:
            raise ValueError("explicit character requires generator values")
        vals = np.asarray([v[0] + 1j * v[1] if np.ndim(v) else v for v in values], dtype=complex)
        return Character(vals, kind="explicit")
    raise ValueError(f"unknown character kind {kind!r}; expected weierstrass, trivial or explicit")


@dataclass(frozen=True)
class RdqViolation:
    j: int
    k: int
    residual: float  # distance of nu*omega(u_j, u_k) to the nearest multiple of pi


@dataclass(frozen=True)
class RdqReport:
    valid: bool
    max_residual: float
    violations: tuple[RdqViolation, ...]


def generator_symplectic_matrix(lat: Lattice) -> np.ndarray:
    """Antisymmetric matrix W with W[j, k] = omega(u_j, u_k)."""
    gens = lat.generators
    # omega(u_j, u_k) = Im sum_a u_j[a] conj(u_k[a])
    return np.imag(gens @ gens.conj().T)


def check_rdq(nu: float, lat: Lattice, chi: Character) -> RdqReport:
    """Distance of every nu*omega(u_j, u_k) to pi*Z; valid iff all within PI_TOL.

    An invalid triplet is a result, not an error: callers that require validity
    raise RdqError themselves.
    """
    if nu <= 0:
        raise ValueError("nu must be positive")
    if chi.generator_values.shape[0] != 2 * lat.n:
        raise ValueError("character has wrong number of generator values for this lattice")
    w = generator_symplectic_matrix(lat)
    violations = []
    max_res = 0.0
    for j in range(2 * lat.n):
        for k in range(j + 1, 2 * lat.n):
            x = nu * w[j, k] / np.pi
            res = abs(x - round(x)) * np.pi
            max_res = max(max_res, res)
            if res > PI_TOL:
                violations.append(RdqViolation(j, k, res))
    return RdqReport(valid=not violations, max_residual=max_res, violations=tuple(violations))


@dataclass(frozen=True)
class AutomorphicData:
    """A triplet (nu, Gamma, chi) with its RDQ report attached."""

    nu: float
    lattice: Lattice
    character: Character
    rdq: RdqReport = field(init=False)

    def __post_init__(self):
        if self.nu <= 0:
            raise ValueError("nu must be positive")
        object.__setattr__(self, "rdq", check_rdq(self.nu, self.lattice, self.character))
        w = generator_symplectic_matrix(self.lattice)
        object.__setattr__(self, "_omega_upper", np.triu(w, k=1))
        theta = np.angle(self.character.generator_values)
        object.__setattr__(self, "_gen_angles", theta)

    @property
    def rdq_valid(self) -> bool:
        return self.rdq.valid

    def require_valid(self, what: str = "operation"):
        if not self.rdq.valid:
            pairs = ", ".join(f"(u_{v.j + 1}, u_{v.k + 1}): {v.residual:.3e}" for v in self.rdq.violations)
            raise RdqError(f"{what} requires RDQ validity; violating pairs {pairs}")

    def chi_values(self, coeffs) -> np.ndarray:
        """Extended character on rows of an integer coefficient array (k, 2n)."""
        self.require_valid("character extension")
        m = np.atleast_2d(np.asarray(coeffs, dtype=float))
        phase = m @ self._gen_angles + self.nu * np.einsum("ij,jk,ik->i", m, self._omega_upper, m)
        return np.exp(1j * phase)


def extend_character(nu: float, lat: Lattice, chi: Character, gamma) -> complex:
    """chi extended to a single lattice element given by LatticePoint or coefficients."""
    data = AutomorphicData(nu, lat, chi)
    coeffs = gamma.coeffs if isinstance(gamma, LatticePoint) else tuple(gamma)
    return complex(data.chi_values(np.asarray([coeffs]))[0])

"""Reproducing kernels: free eigenprojector, lattice theta kernel, automorphized kernel.

Every lattice sum is truncated at a certified radius: the Gaussian envelope of
the summand is bounded shell by shell, with shell populations over-counted by a
covering argument (each lattice point owns one fundamental cell, and a cell of
diameter D fits inside an annulus widened by D).  The reported tolerance is an
absolute bound on the neglected tail of the returned kernel value.

Accumulation runs over terms sorted by descending |gamma|, so the dominant
small-|gamma| terms enter last.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .characters import AutomorphicData
from .errors import ResourceError, TruncationError
from .lattice import Lattice, as_point, hermitian_inner, symplectic_form
from .specfun import kummer_abs_terminating, q_profile

_MAX_SHELLS = 4000
_RADIUS_CAP = 500.0


def _ball_volume(radius: float, n: int) -> float:
    """Volume of the radius-s ball in R^{2n} = C^n."""
    return math.pi**n * radius ** (2 * n) / math.factorial(n)


def truncation_radius(
    tolerance: float,
    nu: float,
    lat: Lattice,
    max_abs_z: float = 0.0,
    max_abs_w: float = 0.0,
    level: int | None = None,
) -> float:
    """Smallest radius on a 0.5-step grid whose certified tail bound is < tolerance.

    level=None bounds the theta-kernel summand (growth e^{nu(|z|+|w|)|gamma|}
    absorbed into a shifted Gaussian, prefactor included); an integer level
    bounds the level-l automorphized summand through the positive-coefficient
    majorant of the Kummer polynomial.
    """
    if tolerance <= 0:
        raise ValueError("tolerance must be positive")
    n = lat.n
    vol = lat.cell_volume
    diam = float(np.sum(np.linalg.norm(lat.generators, axis=1)))
    b = max_abs_z + max_abs_w
    if level is None:
        amp = (nu / math.pi) ** n * math.exp(nu * max_abs_z * max_abs_w + nu * b * b / 2)
        poly = None
    else:
        amp = math.comb(n + level - 1, level) * (nu / math.pi) ** n
        poly = int(level)

    def shell_bound(r0: float) -> float:
        r1 = r0 + 0.5
        count = (_ball_volume(r1 + diam, n) - _ball_volume(max(r0 - diam, 0.0), n)) / vol
        env = amp * math.exp(-nu * (r0 - b) ** 2 / 2)
        if poly:
            env *= kummer_abs_terminating(poly, n, nu * (r1 + b) ** 2)
        return count * env

    def tail(r: float) -> float:
        total = 0.0
        for k in range(_MAX_SHELLS):
            s = shell_bound(r + 0.5 * k)
            total += s
            if k > 4 and s < tolerance * 1e-3:
                return total
        return math.inf

    # The envelope is monotone decreasing beyond sqrt(b^2 + 2 l / nu); start there.
    peak = math.sqrt(b * b + 2 * (poly or 0) / nu)
    radius = 0.5 * math.ceil(2 * (peak + 0.5))
    while tail(radius) >= tolerance:
        radius += 0.5
        if radius > _RADIUS_CAP:
            raise TruncationError(
                f"tolerance {tolerance:g} unreachable within radius cap {_RADIUS_CAP}"
            )
    return radius


def _resolve_radius(policy, nu, lat, abs_z, abs_w, level):
    if policy.radius is not None:
        return policy.radius
    # Round the evaluation-point bounds up to a coarse grid so the per-lattice
    # cache is effective (the bound only grows, so certification is kept).
    mz = 0.25 * math.ceil(4 * abs_z)
    mw = 0.25 * math.ceil(4 * abs_w)
    key = ("trunc-radius", policy.tolerance, nu, mz, mw, level)
    cache = lat._enum_cache
    if key not in cache:
        cache[key] = truncation_radius(policy.tolerance, nu, lat, mz, mw, level)
    return cache[key]


@dataclass(frozen=True)
class TruncationPolicy:
    """Controls lattice-sum truncation.

    radius=None derives the certified radius per evaluation point from
    `tolerance`; an explicit radius overrides (used with custom profiles).
    max_terms caps the enumerated lattice points.
    """

    tolerance: float = 1e-10
    max_terms: int = 200_000
    radius: float | None = None


def _sorted_lattice(data: AutomorphicData, radius: float, max_terms: int):
    coeffs, values = data.lattice.point_arrays(radius)
    if coeffs.shape[0] > max_terms:
        raise ResourceError(
            f"lattice sum needs {coeffs.shape[0]} terms, over the {max_terms} budget"
        )
    norms = np.linalg.norm(values, axis=1)
    order = np.argsort(-norms, kind="stable")
    return coeffs[order], values[order]


# -- free eigenprojector kernel ------------------------------------------------


def free_kernel(nu: float, l: int, z, w) -> complex:
    """K^nu_l(z, w) = e^{i nu omega(z, w)} Q^nu_l(|z - w|) on all of C^n."""
    zp = as_point(z)
    wp = as_point(w, zp.shape[0])
    phase = np.exp(1j * nu * symplectic_form(zp, wp))
    return complex(phase * q_profile(nu, l, zp.shape[0], np.linalg.norm(zp - wp)))


# -- lattice theta kernel ------------------------------------------------------


def theta_kernel(data: AutomorphicData, z, w, policy: TruncationPolicy | None = None) -> complex:
    """Gaussian-core reproducing kernel of the ground automorphic space.

    (nu/pi)^n e^{nu <z,w>} sum_gamma chi(gamma)
        e^{-nu |gamma|^2 / 2 + nu(<z, gamma> - conj(<w, gamma>))}
    """
    data.require_valid("theta kernel")
    policy = policy or TruncationPolicy()
    zp = as_point(z, data.lattice.n)
    wp = as_point(w, data.lattice.n)
    nu = data.nu
    radius = _resolve_radius(policy, nu, data.lattice,
                             float(np.linalg.norm(zp)), float(np.linalg.norm(wp)), None)
    coeffs, gam = _sorted_lattice(data, radius, policy.max_terms)
    chi = data.chi_values(coeffs)
    inner_z = gam.conj() @ zp          # <z, gamma> entries
    inner_w_conj = gam @ wp.conj()     # conj(<w, gamma>) entries
    norms2 = np.sum(np.abs(gam) ** 2, axis=1)
    terms = chi * np.exp(-nu * norms2 / 2 + nu * (inner_z - inner_w_conj))
    total = np.add.reduce(terms)
    pref = (nu / math.pi) ** data.lattice.n * np.exp(nu * hermitian_inner(zp, wp))
    return complex(pref * total)


# -- automorphized level kernel ------------------------------------------------


def automorphic_kernel(
    data: AutomorphicData,
    l: int | None,
    z,
    w,
    policy: TruncationPolicy | None = None,
    profile=None,
) -> complex:
    """Periodization of the free level kernel against (chi, nu)-phases.

    e^{i nu omega(z, w)} sum_gamma chi(gamma) e^{i nu omega(z + w, gamma)}
        P(|z - w - gamma|)

    with P the level-l radial profile by default.  A custom Gaussian-dominated
    radial profile may be passed instead; certified radius derivation only
    covers the level profiles, so a custom profile requires policy.radius.
    """
    data.require_valid("automorphic kernel")
    policy = policy or TruncationPolicy()
    zp = as_point(z, data.lattice.n)
    wp = as_point(w, data.lattice.n)
    nu = data.nu
    n = data.lattice.n
    if profile is None:
        if l is None or l < 0 or int(l) != l:
            raise ValueError("level l must be a nonnegative integer")
        radial = lambda r: q_profile(nu, int(l), n, r)
        radius = _resolve_radius(policy, nu, data.lattice,
                                 float(np.linalg.norm(zp)), float(np.linalg.norm(wp)), int(l))
    else:
        if policy.radius is None:
            raise ValueError("custom profiles need an explicit policy.radius")
        radial = profile
        radius = policy.radius
    coeffs, gam = _sorted_lattice(data, radius, policy.max_terms)
    chi = data.chi_values(coeffs)
    s = zp + wp
    omega_s = np.imag(gam.conj() @ s)          # omega(z + w, gamma)
    dist = np.linalg.norm((zp - wp)[None, :] - gam, axis=1)
    terms = chi * np.exp(1j * nu * omega_s) * radial(dist)
    total = np.add.reduce(terms)
    return complex(np.exp(1j * nu * symplectic_form(zp, wp)) * total)


# -- kernel sections -----------------------------------------------------------


@dataclass(frozen=True)
class KernelSection:
    """The function z -> K(z, w0) for a fixed second argument."""

    kind: str                      # "free" | "theta" | "automorphic"
    w0: np.ndarray
    nu: float
    level: int | None = None
    data: AutomorphicData | None = None
    policy: TruncationPolicy | None = None

    def __call__(self, z) -> complex:
        if self.kind == "free":
            return free_kernel(self.nu, self.level, z, self.w0)
        if self.kind == "theta":
            return theta_kernel(self.data, z, self.w0, self.policy)
        if self.kind == "automorphic":
            return automorphic_kernel(self.data, self.level, z, self.w0, self.policy)
        raise ValueError(f"unknown section kind {self.kind!r}")


def free_section(nu: float, l: int, w0) -> KernelSection:
    w = as_point(w0)
    return KernelSection(kind="free", w0=w, nu=nu, level=l)


def theta_section(data: AutomorphicData, w0, policy: TruncationPolicy | None = None) -> KernelSection:
    return KernelSection(kind="theta", w0=as_point(w0, data.lattice.n), nu=data.nu,
                         data=data, policy=policy)


def automorphic_section(data: AutomorphicData, l: int, w0,
                        policy: TruncationPolicy | None = None) -> KernelSection:
    return KernelSection(kind="automorphic", w0=as_point(w0, data.lattice.n), nu=data.nu,
                         level=int(l), data=data, policy=policy)

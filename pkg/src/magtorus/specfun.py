"""Confluent hypergeometric evaluations and the radial eigenprofiles built on them.

Three evaluation routes, chosen by the caller's regime:

  * kummer_terminating(l, c, x): 1F1(-l; c; x) for integer l >= 0, the exact
    finite sum of l+1 terms with compensated accumulation.  This is a degree-l
    polynomial; no cancellation surprises for the argument ranges used here.
  * laguerre(l, alpha, x): generalized Laguerre polynomial by the standard
    three-term recurrence, stable upward in l.
  * kummer_series(a, c, x): the defining power series for non-terminating
    parameters.  Terms grow like e^x before decaying, so the guard refuses
    x > 700 where double precision would overflow; accuracy degrades well
    before that through cancellation (documented, tested against mpmath).

radial_solution evaluates e^{-nu r^2/2} 1F1(-lam; n; nu r^2).  For integer lam
it terminates (bounded, Schwartz-class profile); otherwise the Gaussian prefix
is folded into the leading series term so the product stays inside double range
up to nu r^2 ~ 1400, which makes the unbounded growth of non-integer profiles
observable rather than an overflow.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

_SERIES_EPS = 1e-16
_SERIES_MAX_TERMS = 100_000
_X_OVERFLOW = 700.0
_X_OVERFLOW_SCALED = 1400.0


def _compensated_sum(terms) -> float | np.ndarray:
    """Kahan accumulation over the leading axis of a term list."""
    total = np.zeros_like(terms[0])
    carry = np.zeros_like(terms[0])
    for t in terms:
        y = t - carry
        s = total + y
        carry = (s - total) - y
        total = s
    return total


def kummer_terminating(l: int, c: float, x):
    """1F1(-l; c; x) as the exact finite sum; scalar or array x."""
    if l != int(l) or l < 0:
        raise ValueError(f"terminating Kummer needs integer l >= 0, got {l}")
    l = int(l)
    if c <= 0 and c == int(c):
        raise ValueError(f"denominator parameter c = {c} hits a pole")
    xa = np.asarray(x, dtype=float)
    terms = []
    coeff = 1.0
    term = np.ones_like(xa)
    terms.append(term)
    for k in range(l):
        coeff *= (k - l) / ((c + k) * (k + 1))
        term = coeff * xa ** (k + 1)
        terms.append(term)
    out = _compensated_sum(terms)
    return float(out) if np.isscalar(x) or np.ndim(x) == 0 else out


def kummer_abs_terminating(l: int, c: float, x):
    """sum_k |(-l)_k| / ((c)_k k!) x^k, a monotone majorant of |1F1(-l; c; x)| for x >= 0."""
    l = int(l)
    xa = np.asarray(x, dtype=float)
    out = np.ones_like(xa)
    coeff = 1.0
    for k in range(l):
        coeff *= (l - k) / ((c + k) * (k + 1))
        out = out + coeff * xa ** (k + 1)
    return float(out) if np.ndim(x) == 0 else out


def laguerre(l: int, alpha: float, x):
    """Generalized Laguerre L^alpha_l(x) via the three-term recurrence."""
    if l != int(l) or l < 0:
        raise ValueError(f"Laguerre degree must be a nonnegative integer, got {l}")
    l = int(l)
    xa = np.asarray(x, dtype=float)
    prev = np.ones_like(xa)
    if l == 0:
        return float(prev) if np.ndim(x) == 0 else prev
    cur = 1.0 + alpha - xa
    for k in range(1, l):
        prev, cur = cur, ((2 * k + 1 + alpha - xa) * cur - (k + alpha) * prev) / (k + 1)
    return float(cur) if np.ndim(x) == 0 else cur


def kummer_series(a: float, c: float, x: float) -> float:
    """1F1(a; c; x) by direct series; refuses x > 700 (term overflow guard)."""
    if c <= 0 and c == int(c):
        raise ValueError(f"denominator parameter c = {c} hits a pole")
    if x > _X_OVERFLOW:
        raise OverflowError(
            f"kummer_series argument x = {x:g} exceeds {_X_OVERFLOW:g}; terms overflow double precision"
        )
    return _kummer_series_scaled(a, c, float(x), prefactor=1.0)


def _kummer_series_scaled(a: float, c: float, x: float, prefactor: float) -> float:
    """prefactor * 1F1(a; c; x), with prefactor folded into the first term."""
    term = prefactor
    total = term
    carry = 0.0
    for k in range(_SERIES_MAX_TERMS):
        term *= (a + k) / (c + k) * x / (k + 1)
        y = term - carry
        s = total + y
        carry = (s - total) - y
        total = s
        if abs(term) <= _SERIES_EPS * abs(total) and k > abs(x):
            return total
    raise OverflowError(f"Kummer series did not converge within {_SERIES_MAX_TERMS} terms")


@dataclass(frozen=True)
class RadialProfile:
    """Parameters of the radial eigenprofile phi(r) = e^{-nu r^2/2} 1F1(-lam; n; nu r^2)."""

    nu: float
    lam: float
    n: int = 1

    def __post_init__(self):
        if self.nu <= 0:
            raise ValueError("nu must be positive")
        if self.lam < 0:
            raise ValueError("lam must be nonnegative")
        if self.n < 1 or self.n != int(self.n):
            raise ValueError("n must be a positive integer")

    @property
    def terminates(self) -> bool:
        return self.lam == round(self.lam)


def radial_solution(profile: RadialProfile, r):
    """e^{-nu r^2/2} 1F1(-lam; n; nu r^2); bounded iff lam is a nonnegative integer."""
    ra = np.asarray(r, dtype=float)
    x = profile.nu * ra**2
    if profile.terminates:
        out = np.exp(-x / 2) * kummer_terminating(int(round(profile.lam)), profile.n, x)
        return float(out) if np.ndim(r) == 0 else out
    xs = np.atleast_1d(x)
    if np.any(xs > _X_OVERFLOW_SCALED):
        raise OverflowError(
            f"radial argument nu*r^2 = {xs.max():g} exceeds {_X_OVERFLOW_SCALED:g}"
        )
    vals = np.array(
        [_kummer_series_scaled(-profile.lam, profile.n, xi, math.exp(-xi / 2)) for xi in xs]
    )
    return float(vals[0]) if np.ndim(r) == 0 else vals.reshape(np.shape(r))


def q_profile(nu: float, l: int, n: int, r):
    """Free eigenprojector radial profile.

    Q^nu_l(r) = C(n+l-1, l) (nu/pi)^n e^{-nu r^2/2} 1F1(-l; n; nu r^2),
    with the binomial prefactor taken exactly (no gamma-function evaluation).
    """
    if l < 0 or l != int(l):
        raise ValueError("level l must be a nonnegative integer")
    if n < 1 or n != int(n):
        raise ValueError("n must be a positive integer")
    pref = math.comb(n + l - 1, l) * (nu / math.pi) ** n
    ra = np.asarray(r, dtype=float)
    x = nu * ra**2
    out = pref * np.exp(-x / 2) * kummer_terminating(int(l), n, x)
    return float(out) if np.ndim(r) == 0 else out

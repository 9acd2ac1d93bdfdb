"""Magnetic motions of C^n, periodization, and grid-discretized Hamiltonians.

The discrete Hamiltonian is assembled from unitary covariant steps along the
two lattice directions: each step carries the parallel-transport phase
e^{-i nu omega(z, h)} of the magnetic connection, and steps that cross the
cell boundary additionally carry the automorphy factor of the stored field.
Second differences of unitary steps are Hermitian, and products of the two
centered differences are symmetrized, so the assembled matrix is Hermitian to
roundoff by construction; the assembly still measures the defect and refuses
to hand out a matrix that violates the 1e-10 gate.

The grid lives in cell coordinates: index (i, j) holds the value at
z = (i u_1 + j u_2)/N, and the flat ordering is row-major in (i, j).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import ArpackNoConvergence, eigsh

from .characters import AutomorphicData
from .errors import AssemblyError, NumericError, SupportError
from .lattice import Lattice, as_point, symplectic_form

_HERMITICITY_TOL = 1e-10


def _abs2(z) -> float:
    zp = np.atleast_1d(np.asarray(z, dtype=complex))
    return float(np.sum(zp.real**2 + zp.imag**2))


# -- the motion group U(n) x C^n ----------------------------------------------


@dataclass(frozen=True)
class GroupElement:
    """Holomorphic motion z -> a z + b with unitary a."""

    a: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        a = np.atleast_2d(np.asarray(self.a, dtype=complex))
        b = as_point(self.b, a.shape[0])
        if a.shape[0] != a.shape[1]:
            raise ValueError(f"rotation part must be square, got shape {a.shape}")
        defect = np.max(np.abs(a.conj().T @ a - np.eye(a.shape[0])))
        if defect > 1e-12:
            raise ValueError(f"rotation part is not unitary (defect {defect:.2e})")
        a = a.copy()
        b = b.copy()
        a.setflags(write=False)
        b.setflags(write=False)
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)

    @property
    def n(self) -> int:
        return self.a.shape[0]

    def act(self, z):
        """a z + b; scalar in, scalar out for n = 1."""
        out = self.a @ as_point(z, self.n) + self.b
        return complex(out[0]) if self.n == 1 and np.ndim(z) == 0 else out

    def compose(self, other: "GroupElement") -> "GroupElement":
        """(a1, b1)(a2, b2) = (a1 a2, a1 b2 + b1), i.e. g1.(g2.z)."""
        return GroupElement(self.a @ other.a, self.a @ other.b + self.b)

    def inverse(self) -> "GroupElement":
        ah = self.a.conj().T
        return GroupElement(ah, -(ah @ self.b))


def identity_element(n: int = 1) -> GroupElement:
    return GroupElement(np.eye(n, dtype=complex), np.zeros(n, dtype=complex))


def translation(b) -> GroupElement:
    bp = as_point(b)
    return GroupElement(np.eye(bp.shape[0], dtype=complex), bp)


def rotation(theta: float, n: int = 1) -> GroupElement:
    """The scalar rotation e^{i theta} id."""
    return GroupElement(np.exp(1j * theta) * np.eye(n, dtype=complex), np.zeros(n, dtype=complex))


def j_factor(nu: float, g: GroupElement, z) -> complex:
    """Unit phase e^{i nu omega(z, g^{-1}.0)} of the twisted action."""
    origin_pull = g.inverse().b          # g^{-1}.0 = -a* b
    return complex(np.exp(1j * nu * symplectic_form(as_point(z, g.n), origin_pull)))


def cocycle_phase(nu: float, g1: GroupElement, g2: GroupElement) -> float:
    """Phase angle nu*omega(g1^{-1}.0, g2.0) of the projective composition law."""
    return nu * symplectic_form(g1.inverse().b, g2.b)


def magnetic_translate(nu: float, g: GroupElement, f):
    """The twisted action [T f](z) = j(g, z) f(g.z); unitary on L^2."""

    def translated(z):
        return j_factor(nu, g, z) * f(g.act(z))

    return translated


# -- periodization -------------------------------------------------------------


@dataclass(frozen=True)
class Bump:
    """Smooth compactly supported profile, peak 1 at the center, zero outside radius."""

    center: complex
    radius: float

    def __call__(self, z):
        s2 = _abs2(np.atleast_1d(np.asarray(z, dtype=complex)) - as_point(self.center)) / self.radius**2
        if s2 >= 1.0:
            return 0.0
        return float(math.exp(1.0 - 1.0 / (1.0 - s2)))


@dataclass(frozen=True)
class PeriodizedFunction:
    """Automorphized field with the support metadata of its base function."""

    data: AutomorphicData
    base: object
    center: complex | np.ndarray
    support_radius: float

    def __call__(self, z):
        from .lattice import reduce_to_fundamental

        lat = self.data.lattice
        z0, gam = reduce_to_fundamental(lat, z)
        chi = complex(self.data.chi_values(np.asarray([gam.coeffs]))[0])
        phase = np.exp(1j * self.data.nu * symplectic_form(as_point(z, lat.n), gam.value))
        return chi * complex(phase) * self.base(complex(z0[0]) if lat.n == 1 else z0)


def poincare_periodize(data: AutomorphicData, psi, center=None, support_radius=None):
    """Automorphize a function supported strictly inside the fundamental cell.

    Returns z -> sum_gamma chi(gamma) e^{i nu omega(z, gamma)} psi(z - gamma).
    With the support inside one cell the sum has a single term, evaluated
    through cell reduction, so the functional equation holds to roundoff.
    """
    data.require_valid("periodization")
    if center is None and isinstance(psi, Bump):
        center = psi.center
    if support_radius is None and isinstance(psi, Bump):
        support_radius = psi.radius
    if center is None or support_radius is None:
        raise SupportError("periodization needs the support center and radius of psi")
    lat = data.lattice
    tc = lat.to_cell_coords(as_point(center, lat.n))
    row_norms = np.linalg.norm(lat._inv_period, axis=1)
    for j, (t, rn) in enumerate(zip(tc, row_norms)):
        margin = support_radius * rn
        if not (margin < t and margin < 1.0 - t):
            raise SupportError(
                f"support ball (radius {support_radius:g}) leaves the open cell along axis {j}"
            )
    center = complex(as_point(center, lat.n)[0]) if lat.n == 1 else as_point(center, lat.n)
    return PeriodizedFunction(data=data, base=psi, center=center,
                              support_radius=float(support_radius))


def ground_transform(nu: float, f, direction: str = "forward"):
    """Multiply by e^{+nu|z|^2/2} (forward) or e^{-nu|z|^2/2} (inverse)."""
    if direction not in ("forward", "inverse"):
        raise ValueError(f"direction must be 'forward' or 'inverse', got {direction!r}")
    sign = 1.0 if direction == "forward" else -1.0

    def transformed(z):
        return math.exp(sign * nu * _abs2(z) / 2) * f(z)

    return transformed


# -- grid fields and discrete Hamiltonians ------------------------------------


@dataclass(frozen=True)
class GridField:
    """Samples on the N x N cell grid; [i, j] holds the value at (i u1 + j u2)/N."""

    data: AutomorphicData
    size: int
    values: np.ndarray

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=complex)
        if vals.shape != (self.size, self.size):
            raise ValueError(f"values must have shape ({self.size}, {self.size}), got {vals.shape}")
        object.__setattr__(self, "values", vals)


def grid_points(lat: Lattice, size: int) -> np.ndarray:
    """Complex grid (N, N) of cell points (i u1 + j u2)/N for n = 1."""
    if lat.n != 1:
        raise NumericError("grid discretization supports n = 1 only")
    u1, u2 = complex(lat.generators[0, 0]), complex(lat.generators[1, 0])
    i, j = np.meshgrid(np.arange(size), np.arange(size), indexing="ij")
    return (i * u1 + j * u2) / size


def sample_grid(data: AutomorphicData, size: int, f) -> GridField:
    pts = grid_points(data.lattice, size)
    vals = np.array([[f(pts[i, j]) for j in range(size)] for i in range(size)], dtype=complex)
    return GridField(data=data, size=size, values=vals)


def _generator_chis(data: AutomorphicData) -> np.ndarray:
    eye = np.eye(2 * data.lattice.n, dtype=int)
    return data.chi_values(eye)


def _covariant_shifts(data: AutomorphicData, size: int):
    """Unitary step matrices S_1, S_2 on the flattened grid.

    (S_a psi)_p = e^{i nu omega(z_p, u_a/N)} psi(z_p + u_a/N): the value one
    step ahead, transported back along the straight segment by the magnetic
    connection in the gauge whose translation twist is e^{i nu omega(z, gamma)}.
    Values beyond the cell edge are recovered through the automorphy rule of
    the stored field.
    """
    lat = data.lattice
    nu = data.nu
    n2 = size * size
    u = [complex(lat.generators[0, 0]), complex(lat.generators[1, 0])]
    chis = _generator_chis(data)
    idx = np.arange(n2)
    i, j = np.divmod(idx, size)
    z = (i * u[0] + j * u[1]) / size
    mats = []
    for axis in (0, 1):
        ua = u[axis]
        ha = ua / size
        i2 = i + (1 - axis)
        j2 = j + axis
        crossed = (i2 == size) if axis == 0 else (j2 == size)
        i2 = np.where(i2 == size, 0, i2)
        j2 = np.where(j2 == size, 0, j2)
        q = i2 * size + j2
        zq = (i2 * u[0] + j2 * u[1]) / size
        link = np.exp(1j * nu * (z * np.conj(ha)).imag)
        wrap = np.where(crossed, chis[axis] * np.exp(1j * nu * (zq * np.conj(ua)).imag), 1.0)
        mats.append(sp.csr_matrix((link * wrap, (idx, q)), shape=(n2, n2)))
    return mats


def landau_matrix(data: AutomorphicData, size: int) -> sp.csr_matrix:
    """Hermitian discretization of the magnetic Hamiltonian on the cell grid."""
    if size < 16:
        raise ValueError("grid size must be at least 16")
    data.require_valid("Hamiltonian assembly")
    s1, s2 = _covariant_shifts(data, size)
    n2 = size * size
    eye = sp.identity(n2, dtype=complex, format="csr")
    d2 = [size**2 * (s + s.getH() - 2 * eye) for s in (s1, s2)]
    dc = [(size / 2.0) * (s - s.getH()) for s in (s1, s2)]
    minv = data.lattice._inv_period
    c = minv @ minv.T
    h = -0.5 * (c[0, 0] * d2[0] + c[1, 1] * d2[1] + c[0, 1] * (dc[0] @ dc[1] + dc[1] @ dc[0]))
    h = h.tocsr()
    defect = (h - h.getH()).tocoo()
    err = np.max(np.abs(defect.data)) if defect.nnz else 0.0
    scale = np.max(np.abs(h.data))
    if err > _HERMITICITY_TOL * max(1.0, scale):
        raise AssemblyError(f"assembled Hamiltonian is not Hermitian: defect {err:.3e}")
    return h


def apply_landau_fd(data: AutomorphicData, field: GridField) -> GridField:
    """Apply the discrete Hamiltonian to a sampled automorphic field."""
    h = landau_matrix(data, field.size)
    out = h @ field.values.ravel()
    return GridField(data=data, size=field.size, values=out.reshape(field.size, field.size))


def delta_matrix(data: AutomorphicData, size: int) -> sp.csr_matrix:
    """Discretization of sum_j (-d^2/dz_j dzbar_j + nu zbar_j d/dzbar_j).

    Plain centered differences; boundary arms use the holomorphic-picture
    automorphy rule, whose factor has non-unit modulus, so this matrix is not
    Hermitian in the flat inner product (the underlying space is Gaussian
    weighted) and no Hermiticity gate applies.
    """
    if size < 16:
        raise ValueError("grid size must be at least 16")
    data.require_valid("operator assembly")
    lat = data.lattice
    if lat.n != 1:
        raise NumericError("grid discretization supports n = 1 only")
    nu = data.nu
    n2 = size * size
    u = [complex(lat.generators[0, 0]), complex(lat.generators[1, 0])]
    chis = _generator_chis(data)
    idx = np.arange(n2)
    i, j = np.divmod(idx, size)
    z = (i * u[0] + j * u[1]) / size
    plus = []
    minus = []
    for axis in (0, 1):
        ua = u[axis]
        amp = nu * abs(ua) ** 2 / 2
        for sign in (1, -1):
            i2 = i + sign * (1 - axis)
            j2 = j + sign * axis
            stepped = i2 if axis == 0 else j2
            crossed = (stepped == size) | (stepped == -1)
            i2 = np.mod(i2, size)
            j2 = np.mod(j2, size)
            q = i2 * size + j2
            zq = (i2 * u[0] + j2 * u[1]) / size
            if sign == 1:
                factor = chis[axis] * np.exp(amp + nu * zq * np.conj(ua))
            else:
                factor = np.conj(chis[axis]) * np.exp(amp - nu * zq * np.conj(ua))
            vals = np.where(crossed, factor, 1.0)
            mat = sp.csr_matrix((vals, (idx, q)), shape=(n2, n2))
            (plus if sign == 1 else minus).append(mat)
    eye = sp.identity(n2, dtype=complex, format="csr")
    dt = [(size / 2.0) * (plus[a] - minus[a]) for a in (0, 1)]
    d2t = [size**2 * (plus[a] + minus[a] - 2 * eye) for a in (0, 1)]
    minv = lat._inv_period
    c = minv @ minv.T
    lap = c[0, 0] * d2t[0] + c[1, 1] * d2t[1] + c[0, 1] * (dt[0] @ dt[1] + dt[1] @ dt[0])
    dbar = 0.5 * ((minv[0, 0] + 1j * minv[0, 1]) * dt[0] + (minv[1, 0] + 1j * minv[1, 1]) * dt[1])
    zbar_diag = sp.diags(np.conj(z))
    return (-0.25 * lap + nu * (zbar_diag @ dbar)).tocsr()


def apply_delta_fd(data: AutomorphicData, field: GridField) -> GridField:
    """Apply the holomorphic-picture level operator to a sampled field."""
    d = delta_matrix(data, field.size)
    out = d @ field.values.ravel()
    return GridField(data=data, size=field.size, values=out.reshape(field.size, field.size))


# -- discrete spectrum ---------------------------------------------------------


@dataclass(frozen=True)
class SpectralReport:
    """Lowest eigenvalues of the grid Hamiltonian with multiplicity clustering."""

    nu: float
    size: int
    coarse_size: int
    eigenvalues: tuple[float, ...]
    coarse_eigenvalues: tuple[float, ...]
    error_estimate: float
    gap_threshold: float
    cluster_means: tuple[float, ...]
    cluster_sizes: tuple[int, ...]
    targets: tuple[float, ...]          # nu(2l + n) for l = 0, 1, ...
    predicted_multiplicity: int         # closed dimension formula per level (n = 1)

    def to_dict(self) -> dict:
        return {
            "nu": self.nu,
            "size": self.size,
            "coarse_size": self.coarse_size,
            "eigenvalues": list(self.eigenvalues),
            "coarse_eigenvalues": list(self.coarse_eigenvalues),
            "error_estimate": self.error_estimate,
            "gap_threshold": self.gap_threshold,
            "clusters": [
                {"mean": m, "size": s, "target": t}
                for m, s, t in zip(self.cluster_means, self.cluster_sizes, self.targets)
            ],
            "predicted_multiplicity": self.predicted_multiplicity,
        }


def _lowest_eigenvalues(h: sp.csr_matrix, count: int) -> np.ndarray:
    dim = h.shape[0]
    v0 = np.full(dim, 1.0 / math.sqrt(dim))
    try:
        vals = eigsh(
            h.tocsc(), k=count, sigma=0.0, which="LM", v0=v0,
            return_eigenvectors=False,
        )
    except ArpackNoConvergence as exc:
        got = len(exc.eigenvalues)
        raise NumericError(
            f"eigensolver converged only {got}/{count} eigenvalues at dim {dim}"
        ) from exc
    return np.sort(vals.real)


def _cluster(values: np.ndarray, threshold: float):
    means, sizes = [], []
    start = 0
    for k in range(1, len(values) + 1):
        if k == len(values) or values[k] - values[k - 1] > threshold:
            means.append(float(np.mean(values[start:k])))
            sizes.append(k - start)
            start = k
    return means, sizes


def spectrum_fd(data: AutomorphicData, size: int, count: int = 6) -> SpectralReport:
    """Lowest eigenvalues on an N grid, error-estimated against the N/2 grid.

    Eigenvalues within 5x the observed N-vs-N/2 shift are merged into one
    cluster; cluster means are compared against the Landau levels nu(2l + n)
    and cluster sizes against the closed dimension count.
    """
    if count < 1 or count > 20:
        raise ValueError("count must be between 1 and 20")
    if size < 32 or size % 2:
        raise ValueError("size must be an even integer >= 32 (the N/2 grid needs >= 16)")
    data.require_valid("FD spectrum")
    fine = _lowest_eigenvalues(landau_matrix(data, size), count)
    coarse = _lowest_eigenvalues(landau_matrix(data, size // 2), count)
    err = float(np.max(np.abs(fine - coarse)))
    threshold = max(5.0 * err, 1e-8 * data.nu)
    means, sizes = _cluster(fine, threshold)
    n = data.lattice.n
    targets = tuple(data.nu * (2 * l + n) for l in range(len(means)))
    dim0 = (data.nu / math.pi) ** n * data.lattice.cell_volume
    return SpectralReport(
        nu=data.nu,
        size=size,
        coarse_size=size // 2,
        eigenvalues=tuple(float(v) for v in fine),
        coarse_eigenvalues=tuple(float(v) for v in coarse),
        error_estimate=err,
        gap_threshold=threshold,
        cluster_means=tuple(means),
        cluster_sizes=tuple(sizes),
        targets=targets,
        predicted_multiplicity=int(round(dim0)),
    )


# -- circle averaging (n = 1) --------------------------------------------------


def circle_average(nu: float, g0: GroupElement, psi, samples: int = 256):
    """Average of the twisted translates T_{g0 k} psi over the rotation circle.

    Trapezoidal rule in the angle (spectrally accurate for the smooth periodic
    integrand); the result is a radial function of z.
    """
    if g0.n != 1:
        raise NumericError("circle averaging is defined for n = 1")
    if samples < 8:
        raise ValueError("need at least 8 angular samples")
    elements = [g0.compose(rotation(2 * math.pi * m / samples)) for m in range(samples)]

    def averaged(z):
        total = 0.0 + 0.0j
        for g in elements:
            total += j_factor(nu, g, z) * psi(g.act(z))
        return total / samples

    return averaged

"""Spectral data of the magnetic Laplacian on complex tori.

Lattice characters with their compatibility condition, theta and automorphized
reproducing kernels with certified truncation, eigenspace dimension checks,
Laguerre-orthogonality transforms, and an independent finite-difference
spectral cross-check, behind one CLI.
"""

from .characters import (
    AutomorphicData,
    Character,
    RdqReport,
    check_rdq,
    extend_character,
    nu_gamma,
    trivial_character,
    weierstrass_character,
)
from .kernels import (
    TruncationPolicy,
    automorphic_kernel,
    automorphic_section,
    free_kernel,
    free_section,
    theta_kernel,
    theta_section,
    truncation_radius,
)
from .lattice import (
    Lattice,
    LatticePoint,
    enumerate_lattice,
    hermitian_inner,
    hexagonal_lattice,
    reduce_to_fundamental,
    square_lattice,
    symplectic_form,
)
from .specfun import (
    RadialProfile,
    kummer_series,
    kummer_terminating,
    laguerre,
    q_profile,
    radial_solution,
)

__version__ = "0.1.0"

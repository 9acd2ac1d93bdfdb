from __future__ import annotations

import numpy as np
import pytest

from magtorus.characters import (
    AutomorphicData,
    nu_gamma,
    trivial_character,
    weierstrass_character,
)
from magtorus.lattice import hexagonal_lattice, square_lattice


@pytest.fixture(scope="session")
def square():
    return square_lattice()


@pytest.fixture(scope="session")
def hexagonal():
    return hexagonal_lattice()


@pytest.fixture(scope="session")
def weier_square(square):
    """The compatible triplet (pi, Z+iZ, Weierstrass chi)."""
    return AutomorphicData(np.pi, square, weierstrass_character(square))


@pytest.fixture(scope="session")
def weier_hex(hexagonal):
    """Hexagonal lattice at its own minimal field strength."""
    return AutomorphicData(nu_gamma(hexagonal), hexagonal, weierstrass_character(hexagonal))


@pytest.fixture(scope="session")
def trivial_2pi(square):
    return AutomorphicData(2 * np.pi, square, trivial_character(square))


def weierstrass_parity(m1: int, m2: int) -> int:
    """Independent oracle for the parity pseudo-character: +1 iff gamma/2 stays in the lattice."""
    return 1 if (m1 % 2 == 0 and m2 % 2 == 0) else -1


# Acceptance reporting: each criterion test carries an `acceptance` marker and
# the terminal summary prints exactly one PASS/FAIL line per criterion, even
# when the test dies during setup.

_acceptance_results: dict[int, tuple[bool, str]] = {}


def pytest_configure(config):
    config.addinivalue_line(
        "markers", "acceptance(num, description): numbered acceptance criterion"
    )


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("acceptance")
    if marker is None:
        return
    num = marker.kwargs["num"]
    description = marker.kwargs["description"]
    if report.when == "call":
        _acceptance_results[num] = (report.passed, description)
    elif report.failed or report.skipped:
        _acceptance_results.setdefault(num, (False, description))


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _acceptance_results:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(_acceptance_results):
        passed, description = _acceptance_results[num]
        status = "PASS" if passed else "FAIL"
        terminalreporter.write_line(f"ACCEPTANCE {num:2d}: {status} - {description}")

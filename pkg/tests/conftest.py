import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from adatom_noise import units
from adatom_noise.boundstates import solve_bound_states
from adatom_noise.phonons import DebyePDOS, HostMaterial
from adatom_noise.potentials import morse_from_observables

M100 = units.to_au(100.0, "amu")


@pytest.fixture(scope="session")
def gold():
    return HostMaterial.gold()


@pytest.fixture(scope="session")
def debye(gold):
    return DebyePDOS(gold)


@pytest.fixture(scope="session")
def bare_morse():
    return morse_from_observables(0.068, units.to_au(1.59, "angstrom"), units.to_au(4.5, "2pi*THz"), M100)


@pytest.fixture(scope="session")
def bare_states(bare_morse):
    return solve_bound_states(bare_morse, M100, n_max=8)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines):
            terminalreporter.write_line(line)

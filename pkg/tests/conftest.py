import numpy as np
import pytest

from mrioembed.core import MrioTable, derive_national_accounts

# Four-sector example economy. Constraints it has to meet:
#   200 inter-sectoral domestic flows and 200 cross-border flows
#   domestic inflow shares: C1 0, C2 1/2, C3 1/8, C4 3/8
#   export shares:          C1 3/10, C2 1/2, C3 1/5, C4 0
#   C1 receives 1/4 of imports; C3 imports twice its domestic inputs
TOY_DOMESTIC = np.array([
    # to: C1  C2  C3  C4
    [0, 40, 0, 25],   # from C1
    [0, 0, 25, 50],   # from C2
    [0, 30, 0, 0],    # from C3
    [0, 30, 0, 0],    # from C4
], dtype=float)
TOY_EXPORTS = np.array([30, 50, 20, 0], dtype=float)
TOY_IMPORTS = np.array([25, 15, 50, 10], dtype=float)


def four_sector_table(intra=0.0):
    """Home economy plus a one-sector-per-code rest of world.

    Exports go to rest-of-world sector c1, imports come from it. ``intra``
    puts a constant on the home diagonal, which every index must ignore.
    """
    sectors = ("c1", "c2", "c3", "c4")
    Z = np.zeros((8, 8))
    Z[:4, :4] = TOY_DOMESTIC + intra * np.eye(4)
    Z[:4, 4] = TOY_EXPORTS
    Z[4, :4] = TOY_IMPORTS
    F = np.zeros((8, 2))
    return MrioTable(2000, ("HOM", "RoW"), sectors, Z, F, 1)


@pytest.fixture
def toy_table():
    return four_sector_table()


@pytest.fixture
def toy_accounts(toy_table):
    return derive_national_accounts(toy_table, "HOM")


# one line per acceptance criterion, filled in by test_acceptance.py
ACCEPTANCE_LINES: dict[int, str] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[k])

"""Session-wide solved fixtures.

Solving a fixed point dominates the suite's runtime, so every topology
that more than one test file needs is solved once here and shared.
"""

from typing import NamedTuple

import pytest

from wlancell import fixtures, multicell
from wlancell.multicell import FixedPointSolution, MultiCellProblem
from wlancell.topology import ParsedTopology


class Solved(NamedTuple):
    parsed: ParsedTopology
    problem: MultiCellProblem
    solution: FixedPointSolution


def solve_fixture(name: str, traffic_mode: str = "saturated") -> Solved:
    parsed = fixtures.load(name)
    problem = MultiCellProblem(graph=parsed.graph, cells=parsed.cells,
                               traffic_mode=traffic_mode)
    return Solved(parsed, problem, multicell.solve_fixed_point(problem))


@pytest.fixture(scope="session")
def path4_sat() -> Solved:
    return solve_fixture("path4")


@pytest.fixture(scope="session")
def path5_sat() -> Solved:
    return solve_fixture("path5")


@pytest.fixture(scope="session")
def hex7_sat() -> Solved:
    return solve_fixture("hex7")


@pytest.fixture(scope="session")
def arb7_sat() -> Solved:
    return solve_fixture("arbitrary7")


@pytest.fixture(scope="session")
def grid12_sat() -> Solved:
    return solve_fixture("grid12")


@pytest.fixture(scope="session")
def path4_tcp() -> Solved:
    return solve_fixture("path4", "tcp_download")


@pytest.fixture(scope="session")
def path5_tcp() -> Solved:
    return solve_fixture("path5", "tcp_download")


@pytest.fixture(scope="session")
def arb7_tcp() -> Solved:
    return solve_fixture("arbitrary7", "tcp_download")


@pytest.fixture(scope="session")
def all_sat(path4_sat, path5_sat, hex7_sat, arb7_sat, grid12_sat):
    """Every built-in fixture solved under saturated traffic, by name."""
    return {
        "path4": path4_sat,
        "path5": path5_sat,
        "hex7": hex7_sat,
        "arbitrary7": arb7_sat,
        "grid12": grid12_sat,
    }

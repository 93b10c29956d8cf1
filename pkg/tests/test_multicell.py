"""Coupled multi-cell fixed point and the product-form stationary law."""

import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from wlancell import dcf, multicell
from wlancell.errors import ConfigError, ConvergenceError
from wlancell.multicell import MultiCellProblem
from wlancell.topology import CellSpec, ContentionGraph, enumerate_state_space

from conftest import solve_fixture

MAC = dcf.MacParams()

# Frozen operating point of the path4 fixture (4 cells in a row, 5
# stations each, default MAC).  The solution is symmetric under the
# 1<->4, 2<->3 reflection.
PATH4_BETA = (0.04313993751929157, 0.03548020581242396)
PATH4_GAMMA = (0.23980021597501647, 0.3145378684071154)
PATH4_X = (0.6962357123890862, 0.3336696812361859)
PATH4_THETA_NODE = (97.20920320824573, 46.58733137433847)
PATH4_THETA_BAR = 2.0598107872505445
PATH4_PI_EMPTY = 0.0022787202110012227


@st.composite
def graphs_with_rho(draw, max_cells: int = 8):
    n = draw(st.integers(min_value=1, max_value=max_cells))
    pairs = [(i, j) for i in range(1, n + 1) for j in range(i + 1, n + 1)]
    edges = draw(st.sets(st.sampled_from(pairs))) if pairs else set()
    rho = draw(st.lists(
        st.floats(min_value=1e-2, max_value=1e3), min_size=n, max_size=n))
    return ContentionGraph(n_cells=n, edges=frozenset(edges)), tuple(rho)


def path_cells(n: int, n_nodes: int = 5) -> tuple[CellSpec, ...]:
    return tuple(CellSpec(id=i, n_nodes=n_nodes) for i in range(1, n + 1))


def test_problem_validation():
    graph = ContentionGraph(n_cells=2, edges=frozenset({(1, 2)}))
    with pytest.raises(ConfigError):
        MultiCellProblem(graph=graph, cells=(CellSpec(id=2),))
    with pytest.raises(ConfigError):
        MultiCellProblem(graph=graph, cells=path_cells(3))
    with pytest.raises(ConfigError):
        MultiCellProblem(graph=graph, cells=path_cells(2),
                         traffic_mode="bursty")


def test_effective_configuration():
    graph = ContentionGraph(n_cells=2, edges=frozenset({(1, 2)}))
    sat = MultiCellProblem(graph=graph, cells=path_cells(2))
    assert multicell.effective_configuration(sat) == (sat.cells, sat.mac)
    tcp = MultiCellProblem(graph=graph, cells=path_cells(2),
                           traffic_mode="tcp_download")
    cells, mac = multicell.effective_configuration(tcp)
    assert all(c.n_nodes == 2 for c in cells)
    assert [c.id for c in cells] == [1, 2]
    assert mac.payload_bits == 4320


def test_activation_rate():
    assert multicell.activation_rate(0.05, 5, 20e-6) == pytest.approx(
        11310.953125, rel=1e-12)
    assert multicell.activation_rate(0.0, 5, 20e-6) == 0.0
    with pytest.raises(ConfigError):
        multicell.activation_rate(0.05, 0, 20e-6)


def test_mean_active_duration_conventions():
    t_s, t_c = dcf.frame_durations(MAC)
    # no attempts: occupations are vanishingly rare but always successful
    assert multicell.mean_active_duration(0.0, 5, t_s, t_c) == t_s
    # every station attempts: lone station succeeds, two stations collide
    assert multicell.mean_active_duration(1.0, 1, t_s, t_c) == t_s
    assert multicell.mean_active_duration(1.0, 2, t_s, t_c) == t_c
    with pytest.raises(ConfigError):
        multicell.mean_active_duration(0.5, 0, t_s, t_c)


def test_stationary_distribution_uniform_rho():
    family = enumerate_state_space(
        ContentionGraph(n_cells=4, edges=frozenset({(1, 2), (2, 3), (3, 4)})))
    pi = multicell.stationary_distribution(family, (1.0,) * 4)
    assert len(pi) == 8
    for p in pi.values():
        assert p == pytest.approx(1 / 8, rel=1e-14)


def test_stationary_distribution_validation():
    family = enumerate_state_space(
        ContentionGraph(n_cells=2, edges=frozenset({(1, 2)})))
    with pytest.raises(ConfigError):
        multicell.stationary_distribution(family, (1.0,))
    with pytest.raises(ConfigError):
        multicell.stationary_distribution(family, (1.0, -0.5))


@given(case=graphs_with_rho())
def test_detailed_balance(case):
    graph, rho = case
    family = enumerate_state_space(graph)
    pi = multicell.stationary_distribution(family, rho)
    rho_by_id = dict(zip(graph.vertices, rho))
    for state in family.states:
        for v in family.in_backoff[state]:
            up = pi[frozenset(state | {v})]
            assert math.isclose(pi[state] * rho_by_id[v], up, rel_tol=1e-12)


@pytest.mark.parametrize("rho", [0.1, 1.0, 13.7])
def test_two_cell_closed_form(rho):
    graph = ContentionGraph(n_cells=2, edges=frozenset({(1, 2)}))
    family = enumerate_state_space(graph)
    pi = multicell.stationary_distribution(family, (rho, rho))
    x = multicell.unblocked_fractions_direct(family, pi)
    expected = (1 + rho) / (1 + 2 * rho)
    assert x[0] == pytest.approx(expected, rel=1e-12)
    assert x[1] == pytest.approx(expected, rel=1e-12)


@settings(deadline=None)
@given(case=graphs_with_rho())
def test_unblocked_fraction_routes_agree(case):
    graph, rho = case
    family = enumerate_state_space(graph)
    pi = multicell.stationary_distribution(family, rho)
    direct = multicell.unblocked_fractions_direct(family, pi)
    closed = multicell.unblocked_fractions_theorem1(graph, rho)
    assert max(abs(a - b) for a, b in zip(direct, closed)) < 1e-10


def test_unblocked_routes_agree_on_solved_fixtures(all_sat):
    for solved in all_sat.values():
        direct = solved.solution.x
        closed = multicell.unblocked_fractions_theorem1(
            solved.parsed.graph, solved.solution.rho)
        assert max(abs(a - b) for a, b in zip(direct, closed)) < 1e-12


def test_collision_probability_of_isolated_cell_is_local():
    family = enumerate_state_space(ContentionGraph(n_cells=1, edges=frozenset()))
    pi = multicell.stationary_distribution(family, (3.0,))
    gammas, starved = multicell.collision_probabilities(
        family, pi, (0.05,), (CellSpec(id=1, n_nodes=5),))
    assert gammas[0] == pytest.approx(1 - 0.95 ** 4, rel=1e-12)
    assert starved == (False,)


def test_starved_cell_is_flagged_and_pinned():
    # a middle cell squeezed by two always-on neighbours: its backoff
    # states carry essentially no stationary mass
    graph = ContentionGraph(n_cells=3, edges=frozenset({(1, 2), (2, 3)}))
    family = enumerate_state_space(graph)
    pi = multicell.stationary_distribution(family, (1e154,) * 3)
    gammas, starved = multicell.collision_probabilities(
        family, pi, (0.05,) * 3, path_cells(3))
    assert starved == (False, True, False)
    assert gammas[1] == 1.0
    assert gammas[0] == pytest.approx(1 - 0.95 ** 4, rel=1e-9)


def test_solved_path4_frozen(path4_sat):
    s = path4_sat.solution
    # reflection symmetry holds exactly: the iteration is symmetric
    assert s.beta[0] == s.beta[3] and s.beta[1] == s.beta[2]
    assert s.gamma[0] == s.gamma[3] and s.gamma[1] == s.gamma[2]
    assert s.beta[:2] == pytest.approx(PATH4_BETA, rel=1e-9)
    assert s.gamma[:2] == pytest.approx(PATH4_GAMMA, rel=1e-9)
    assert s.x[:2] == pytest.approx(PATH4_X, rel=1e-9)
    assert s.theta_node[:2] == pytest.approx(PATH4_THETA_NODE, rel=1e-9)
    assert s.theta_bar == pytest.approx(PATH4_THETA_BAR, rel=1e-9)
    assert s.pi[frozenset()] == pytest.approx(PATH4_PI_EMPTY, rel=1e-9)
    assert s.iterations == 17
    assert s.residual < 1e-10
    assert not any(s.starved)


def test_network_collisions_never_below_isolated(path4_sat, hex7_sat, arb7_sat):
    for solved in (path4_sat, hex7_sat, arb7_sat):
        for cell, gamma in zip(solved.parsed.cells, solved.solution.gamma):
            alone = dcf.single_cell_fixed_point(cell.n_nodes, MAC).gamma
            assert gamma >= alone - 1e-12


def test_extra_contention_edge_reduces_capacity(path4_sat):
    ring = ContentionGraph(
        n_cells=4, edges=frozenset({(1, 2), (2, 3), (3, 4), (1, 4)}))
    problem = MultiCellProblem(graph=ring, cells=path4_sat.problem.cells)
    ring_solution = multicell.solve_fixed_point(problem)
    assert ring_solution.theta_bar < path4_sat.solution.theta_bar


def test_scaled_rho_approaches_maximum_set_shares(path4_sat):
    family = path4_sat.solution.family
    x_inf, alpha = multicell.large_rho_limits(family)
    # a common scale factor on uniform ratios lands on the per-cell shares
    pi = multicell.stationary_distribution(family, (1e6,) * 4)
    x = multicell.unblocked_fractions_direct(family, pi)
    assert x == pytest.approx(x_inf, abs=1e-6)
    # heterogeneous ratios still sum to the independence number
    pi = multicell.stationary_distribution(
        family, tuple(r * 1e6 for r in (1.0, 2.0, 3.0, 4.0)))
    x = multicell.unblocked_fractions_direct(family, pi)
    assert math.fsum(x) == pytest.approx(alpha, abs=1e-6)


def test_large_rho_limits():
    path4 = enumerate_state_space(
        ContentionGraph(n_cells=4, edges=frozenset({(1, 2), (2, 3), (3, 4)})))
    assert multicell.large_rho_limits(path4) == (
        pytest.approx((2 / 3, 1 / 3, 1 / 3, 2 / 3)), 2.0)
    arb7 = enumerate_state_space(ContentionGraph(
        n_cells=7,
        edges=frozenset({(1, 3), (2, 3), (3, 4), (4, 5), (4, 6), (6, 7)})))
    x_inf, alpha = multicell.large_rho_limits(arb7)
    assert x_inf == pytest.approx((1.0, 1.0, 0.0, 1 / 3, 2 / 3, 1 / 3, 2 / 3))
    assert alpha == 4.0


def test_cell_throughputs_scale_standalone_rates():
    cells = (CellSpec(id=1, n_nodes=5), CellSpec(id=2, n_nodes=1))
    theta_cell, theta_node = multicell.cell_throughputs((0.5, 0.25), cells, MAC)
    assert theta_cell[0] == pytest.approx(
        0.5 * dcf.single_cell_throughput(5, MAC), rel=1e-12)
    assert theta_node[0] == pytest.approx(theta_cell[0] / 5, rel=1e-12)
    assert theta_cell[1] == pytest.approx(
        0.25 * dcf.single_cell_throughput(1, MAC), rel=1e-12)


def test_jain_fairness():
    assert multicell.jain_fairness((1.0, 1.0, 1.0)) == pytest.approx(1.0)
    assert multicell.jain_fairness((1.0, 0.0)) == pytest.approx(0.5)
    assert multicell.jain_fairness((0.0, 0.0)) == 1.0
    with pytest.raises(ConfigError):
        multicell.jain_fairness(())


def test_solver_validates_damping(path4_sat):
    for damping in (0.0, 1.5):
        with pytest.raises(ConfigError):
            multicell.solve_fixed_point(path4_sat.problem, damping=damping)


def test_solver_reports_non_convergence(path4_sat):
    with pytest.raises(ConvergenceError) as excinfo:
        multicell.solve_fixed_point(path4_sat.problem, max_iter=2)
    assert excinfo.value.iterations == 2
    assert excinfo.value.residual > 0
    assert len(excinfo.value.history) == 2


def test_solution_rows_and_summary(path4_sat):
    rows = multicell.solution_rows(path4_sat.problem, path4_sat.solution)
    assert len(rows) == 4
    assert all(tuple(r) == multicell.CSV_COLUMNS for r in rows)
    assert [r["id"] for r in rows] == [1, 2, 3, 4]
    theta_1 = dcf.single_cell_throughput(5, MAC) / 5
    assert rows[0]["x_inf"] == pytest.approx(2 / 3)
    assert rows[0]["theta_node_inf"] == pytest.approx(2 / 3 * theta_1, rel=1e-12)
    summary = multicell.solution_summary(path4_sat.solution)
    assert summary["alpha"] == 2
    assert summary["eta"] == 3
    assert summary["n_starved"] == 0
    assert summary["theta_bar"] == pytest.approx(PATH4_THETA_BAR, rel=1e-9)


def test_tcp_mode_reports_access_point_rates(path4_tcp):
    s = path4_tcp.solution
    rows = multicell.solution_rows(path4_tcp.problem, s)
    assert all(r["n_nodes"] == 2 for r in rows)
    for theta_c, theta_n in zip(s.theta_cell, s.theta_node):
        assert theta_n == pytest.approx(theta_c / 2, rel=1e-12)
    # heavy-load AP rate: share of maximum sets times the standalone rate
    _, mac_eff = multicell.effective_configuration(path4_tcp.problem)
    ap_alone = dcf.single_cell_throughput(2, mac_eff) / 2
    assert rows[0]["theta_node_inf"] == pytest.approx(2 / 3 * ap_alone,
                                                      rel=1e-12)


def test_relabeling_cells_relabels_the_solution(arb7_sat):
    # solve the same topology under a vertex permutation and map back
    perm = {1: 3, 2: 1, 3: 2, 4: 7, 5: 4, 6: 6, 7: 5}
    inverse = {new: old for old, new in perm.items()}
    old_graph = arb7_sat.parsed.graph
    new_graph = ContentionGraph(
        n_cells=7,
        edges=frozenset((min(perm[i], perm[j]), max(perm[i], perm[j]))
                        for i, j in old_graph.edges))
    n_of_old = {c.id: c.n_nodes for c in arb7_sat.parsed.cells}
    new_cells = tuple(CellSpec(id=i, n_nodes=n_of_old[inverse[i]])
                      for i in range(1, 8))
    permuted = multicell.solve_fixed_point(
        MultiCellProblem(graph=new_graph, cells=new_cells))
    base = arb7_sat.solution
    for old in range(1, 8):
        new = perm[old]
        assert permuted.gamma[new - 1] == pytest.approx(base.gamma[old - 1],
                                                        abs=1e-8)
        assert permuted.x[new - 1] == pytest.approx(base.x[old - 1], abs=1e-8)


def test_solve_fixture_helper_matches_direct_call(path4_sat):
    again = solve_fixture("path4")
    assert again.solution.beta == path4_sat.solution.beta

import numpy as np
import pytest
from hypothesis import given, seed, settings
from hypothesis import strategies as st

from apmas.core.analysis import (CertificateReport, ErrorCoordinates, certify, closed_loop_matrix,
                                 closed_loop_spectrum, dissipation_defects, error_consistency_check, error_rhs,
                                 integral_shift, lyapunov, lyapunov_derivative, settling_time,
                                 state_consistency_defect, tail_decay_slope, to_error_coordinates)
from apmas.core.errors import DimensionMismatch
from apmas.core.graph_core import Graph, laplacian, laplacian_pseudoinverse, path_graph, symmetric_eigendecomposition
from apmas.core.input_layout import InputLayout, average_of_inputs_expanded, build_derived
from apmas.core.protocol_dynamics import NetworkState, ProtocolParams, equilibrium_state, integrate
from apmas.core.scenario import random_scenario

from conftest import connected_graphs, layouts, state_vectors


def context(g, layout):
    L = laplacian(g)
    derived = build_derived(layout)
    return L, derived, L + derived.K1, laplacian_pseudoinverse(L)


def test_error_coordinates_at_equilibrium(p3_middle):
    g, layout = p3_middle
    _, derived, _, Ldag = context(g, layout)
    ec = to_error_coordinates(equilibrium_state(g, layout), derived, Ldag)
    assert np.allclose(ec.delta, 0.0, atol=1e-15)
    assert np.allclose(ec.e, 0.0, atol=1e-15)


def test_error_coordinates_p2():
    g, layout = path_graph(2), InputLayout(2, [(5.0, (1,))])
    _, derived, _, Ldag = context(g, layout)
    ec = to_error_coordinates(NetworkState(0.0, np.array([5.0, 5.0]), np.zeros(2)), derived, Ldag)
    assert np.array_equal(ec.delta, [0.0, 0.0])
    # Lc = [[0, 1], [0, -1]] and K2 c = [5, 0], so the shift vanishes
    assert np.allclose(ec.e, 0.0, atol=1e-15)
    assert np.allclose(integral_shift(derived, Ldag), Ldag @ derived.Lc @ derived.forcing)


def test_error_coordinates_uniform_offset(p3_middle):
    g, layout = p3_middle
    _, derived, _, Ldag = context(g, layout)
    ec = to_error_coordinates(NetworkState(0.0, np.full(3, derived.epsilon + 1.0), np.zeros(3)), derived, Ldag)
    assert np.allclose(ec.delta, 1.0)


def test_error_coordinates_dimension_mismatch(p3_middle):
    g, layout = p3_middle
    _, derived, _, Ldag = context(g, layout)
    with pytest.raises(DimensionMismatch):
        to_error_coordinates(NetworkState(0.0, np.zeros(2), np.zeros(2)), derived, Ldag)
    with pytest.raises(DimensionMismatch):
        ErrorCoordinates(np.zeros(2), np.zeros(3))


@pytest.mark.parametrize("delta, e, expected", [
    ([0.0, 0.0], [0.0, 0.0], 0.0),
    ([1.0, 0.0], [0.0, 1.0], 1.0),
    ([3.0], [4.0], 12.5),
])
def test_lyapunov_examples(delta, e, expected):
    assert lyapunov(ErrorCoordinates(np.array(delta), np.array(e))) == expected


def test_weighted_lyapunov():
    assert lyapunov(ErrorCoordinates(np.array([3.0]), np.array([4.0])), gamma=2.0) == 4.5 + 4.0


def test_error_rhs_examples(p2, rng):
    g, layout = p2
    L, _, F, _ = context(g, layout)
    zero = ErrorCoordinates(np.zeros(2), np.zeros(2))
    assert all(not v.any() for v in error_rhs(zero, L, F))
    ddelta, de = error_rhs(ErrorCoordinates(np.zeros(2), np.full(2, 3.0)), L, F)
    assert not ddelta.any() and not de.any()

    delta, e = rng.normal(size=2), rng.normal(size=2)
    ddelta, de = error_rhs(ErrorCoordinates(delta, e), L, F)
    F_hand = np.array([[2.0, -1.0], [-1.0, 1.0]])
    assert np.allclose(ddelta, -F_hand @ delta + L @ e)
    assert np.allclose(de, -L @ delta)
    with pytest.raises(DimensionMismatch):
        error_rhs(ErrorCoordinates(delta, e), laplacian(path_graph(3)), F)


@seed(17)
@settings(max_examples=100, deadline=None)
@given(connected_graphs(min_nodes=2, max_nodes=10).flatmap(lambda g: st.tuples(st.just(g), layouts(g.n))),
       st.floats(0.2, 5.0), st.floats(0.2, 5.0), st.data())
def test_state_consistency_and_dissipation(graph_and_layout, alpha, gamma, data):
    g, layout = graph_and_layout
    L, derived, F, Ldag = context(g, layout)
    params = ProtocolParams(alpha=alpha, gamma=gamma)
    s = NetworkState(0.0, data.draw(state_vectors(g.n)), data.draw(state_vectors(g.n)))
    assert state_consistency_defect(s, L, derived, Ldag, params) <= 1e-10 * (1 + alpha) * 10
    ec = to_error_coordinates(s, derived, Ldag, alpha)
    analytic, dissipation = lyapunov_derivative(ec, L, F, alpha, gamma)
    assert dissipation <= 0.0
    assert abs(analytic - dissipation) <= 1e-10 * (1 + lyapunov(ec, gamma))


def test_consistency_on_examples(p2, p3_middle):
    g, layout = p2
    traj = integrate(g, layout, ProtocolParams(dt=0.01, t_final=5.0), [3.0, -7.0], [0.0, 0.0])
    assert error_consistency_check(traj, g, layout) <= 1e-10

    g = path_graph(3)
    layout = InputLayout(3, [(2.0, (1, 3))])
    traj = integrate(g, layout, ProtocolParams(dt=0.01, t_final=5.0), [1.0, 0.0, -1.0], [0.5, 0.5, 0.5])
    assert error_consistency_check(traj, g, layout) <= 1e-10

    g, layout = p3_middle
    rest = equilibrium_state(g, layout)
    traj = integrate(g, layout, ProtocolParams(dt=0.01, t_final=1.0), rest.x, rest.xi)
    assert error_consistency_check(traj, g, layout) <= 1e-12


def test_certificate_on_seeded_sweep():
    """100 seeded scenarios with n <= 10: settling, V, derivation defect and the xi sum."""
    rng = np.random.default_rng(0)
    for k in range(100):
        scenario = random_scenario(rng, 10, name=f"sweep-{k:03d}")
        g, layout = scenario.graph, scenario.inputs
        traj = integrate(g, layout, scenario.params, scenario.initial_x(), scenario.initial_xi())
        report = certify(g, layout, traj)
        assert report.connected and report.positive_definite, scenario.name

        gap = np.max(np.abs(traj.final.x - average_of_inputs_expanded(layout)))
        assert gap < 1e-6, (scenario.name, gap)
        assert report.settled, scenario.name

        assert report.V_monotone, (scenario.name, report.max_V_increase)
        assert np.all(report.V_samples >= 0)
        assert np.max(dissipation_defects(traj, g, layout)) <= 1e-10, scenario.name

        assert error_consistency_check(traj, g, layout) <= 1e-10, scenario.name

        sums = traj.xi.sum(axis=1)
        assert np.max(np.abs(sums - sums[0])) <= 1e-8 * (1 + abs(sums[0])), scenario.name


def test_certify_p2(p2):
    g, layout = p2
    traj = integrate(g, layout, ProtocolParams(dt=0.01, t_final=40.0))
    report = certify(g, layout, traj, tol_settle=1e-4)
    assert report.lambda_min_F > 0
    assert report.V_monotone
    assert report.settled and 0 < report.settling_time < 40.0
    assert report.epsilon == 4.0
    assert report.zero_eigenvalue_count == 1
    assert report.tail_decay_slope <= -0.4 * report.lambda_min_F
    assert report.notes == []


def test_certify_disconnected_graph():
    g = Graph(4, {(1, 2), (3, 4)})
    report = certify(g, InputLayout(4, [(1.0, (1,))]), None)
    assert not report.connected
    assert report.lambda2 <= 1e-8
    assert report.zero_eigenvalue_count > 1
    assert any("disconnected" in note for note in report.notes)
    assert report.settled is False and report.V_samples.size == 0


def test_certify_spectral_only_uses_gains(p2):
    g, layout = p2
    report = certify(g, layout, None, params=ProtocolParams(alpha=2.0, gamma=3.0))
    L, _, F, _ = context(g, layout)
    assert report.alpha == 2.0 and report.gamma == 3.0
    assert np.allclose(np.sort_complex(report.closed_loop_spectrum),
                       np.sort_complex(np.linalg.eigvals(closed_loop_matrix(L, F, 2.0, 3.0))))


def test_closed_loop_spectrum_single_agent():
    spectrum = closed_loop_spectrum(np.zeros((1, 1)), np.array([[2.0]]))
    assert np.allclose(spectrum, [-2.0, 0.0])


@pytest.mark.parametrize("g, layout", [
    (path_graph(2), InputLayout(2, [(1.0, (1,))])),
    (path_graph(3), InputLayout(3, [(1.0, (2,))])),
])
def test_closed_loop_spectrum_structure(g, layout):
    L, _, F, _ = context(g, layout)
    spectrum = closed_loop_spectrum(L, F)
    zero = np.abs(spectrum) < 1e-8
    assert np.count_nonzero(zero) == 1
    assert np.all(spectrum[~zero].real < 0)
    assert len(spectrum) == 2 * g.n


def test_closed_loop_spectrum_sorted(p3_middle):
    L, _, F, _ = context(*p3_middle)
    spectrum = closed_loop_spectrum(L, F)
    assert np.all(np.diff(spectrum.real) >= 0)


@seed(19)
@settings(max_examples=100, deadline=None)
@given(connected_graphs(min_nodes=2, max_nodes=12).flatmap(lambda g: st.tuples(st.just(g), layouts(g.n))))
def test_F_positive_definite(graph_and_layout):
    g, layout = graph_and_layout
    _, _, F, _ = context(g, layout)
    assert symmetric_eigendecomposition(F)[0][0] > 0


def test_settling_time():
    times = np.arange(6.0)
    assert settling_time(times, np.array([5.0, 1.0, 0.5, 2.0, 0.1, 0.01]), 1.0) == 4.0
    assert settling_time(times, np.full(6, 0.1), 1.0) == 0.0
    assert settling_time(times, np.array([0.1, 0.1, 0.1, 0.1, 0.1, 2.0]), 1.0) is None


def test_tail_decay_slope_floor(p3_middle):
    g, layout = p3_middle
    rest = equilibrium_state(g, layout)
    traj = integrate(g, layout, ProtocolParams(dt=0.1, t_final=5.0), rest.x, rest.xi)
    assert tail_decay_slope(traj, build_derived(layout)) is None


def test_report_to_dict(p2):
    g, layout = p2
    traj = integrate(g, layout, ProtocolParams(dt=0.01, t_final=10.0))
    data = certify(g, layout, traj).to_dict()
    assert data["epsilon"] == 4.0
    assert all(len(pair) == 2 for pair in data["closed_loop_spectrum"])
    assert data["V_initial"] >= data["V_final"]
    assert isinstance(data["settled"], bool)


def test_report_without_samples():
    report = CertificateReport(1.0, 1.0, np.array([0.0 + 0.0j]), np.empty(0), False, None)
    assert not report.V_monotone
    assert report.to_dict()["V_initial"] is None

import numpy as np
import pytest

from episis.chain import full_state_solver
from episis.errors import NumericError
from episis.graph import complete_graph, er_graph, star_graph
from episis.nimfa import (corrected_prevalence, nimfa_steady_state,
                          nimfa_to_csv, solve_nimfa)
from episis.params import EpidemicParams


def tau_params(tau):
    return EpidemicParams.from_tau(tau)


class TestSolve:
    def test_disease_free_equilibrium(self):
        g = er_graph(20, 0.4, 1)
        sol = solve_nimfa(g, tau_params(0.8), np.zeros(20),
                          np.linspace(0, 10, 11))
        assert np.all(sol.v == 0.0)

    def test_k50_converges_to_symmetric_fixed_point(self):
        # K_50, tau=0.06: x = 2.94, v_inf = 1 - 1/x
        g = complete_graph(50)
        sol = solve_nimfa(g, tau_params(0.06), np.full(50, 1 / 50),
                          np.array([0.0, 20.0, 40.0]))
        assert sol.prevalence[-1] == pytest.approx(1 - 1 / 2.94, abs=1e-6)

    def test_subthreshold_decay(self):
        # K_10 at x = 0.5: prevalence decays exponentially to 0
        g = complete_graph(10)
        tau = 0.5 / 9
        t_end = 20.0 / (1.0 * (1 - 0.5))
        sol = solve_nimfa(g, tau_params(tau), np.full(10, 0.3),
                          np.array([0.0, t_end]))
        assert np.max(np.abs(sol.v[-1])) < 1e-6

    def test_interval_preservation(self):
        g = er_graph(30, 0.3, 6)
        sol = solve_nimfa(g, tau_params(0.5), np.full(30, 0.9),
                          np.linspace(0, 15, 31))
        assert np.all(sol.v >= 0.0) and np.all(sol.v <= 1.0)

    def test_rejects_bad_v0(self):
        g = complete_graph(5)
        with pytest.raises(ValueError):
            solve_nimfa(g, tau_params(0.1), np.full(5, 1.5), np.array([0.0, 1.0]))

    def test_unstable_step_rejected(self):
        g = complete_graph(100)
        with pytest.raises(NumericError, match="smaller step"):
            solve_nimfa(g, tau_params(0.5), np.full(100, 0.5),
                        np.array([0.0, 5.0]), h=0.2)


class TestSteadyState:
    def test_below_threshold_zero(self):
        g = complete_graph(20)
        v = nimfa_steady_state(g, tau_params(0.02))
        assert np.all(v == 0.0)

    def test_complete_graph_closed_form(self):
        for N, tau in [(50, 0.06), (126, 0.016 * 1.5), (20, 0.2)]:
            x = tau * (N - 1)
            v = nimfa_steady_state(complete_graph(N), tau_params(tau),
                                   tol=1e-12)
            assert np.allclose(v, 1 - 1 / x, atol=1e-10)

    def test_star_residual_below_tol(self):
        g = star_graph(16)  # lambda1 = 4
        tau = 2.0 / 4.0
        v = nimfa_steady_state(g, tau_params(tau), tol=1e-10)
        A = g.adjacency()
        resid = -v + tau * (1 - v) * (A @ v)
        assert np.max(np.abs(resid)) <= 1e-10

    def test_independent_of_initialization(self):
        g = er_graph(40, 0.3, 9)
        p = tau_params(0.2)
        v_star = nimfa_steady_state(g, p, tol=1e-12)
        grid = np.array([0.0, 200.0])
        for v0 in (np.full(40, 0.01), np.full(40, 0.99)):
            sol = solve_nimfa(g, p, v0, grid)
            assert np.max(np.abs(sol.v[-1] - v_star)) < 1e-6


class TestUpperBound:
    @pytest.mark.parametrize("mult", [0.5, 2.0])
    def test_bounds_exact_prevalence_on_tiny_complete_graphs(self, mult):
        for N in (4, 8, 10):
            tau = mult / (N - 1)
            g = complete_graph(N)
            times = np.linspace(0, 20, 21)
            _, y_exact = full_state_solver(g, tau_params(tau), [0], times)
            sol = solve_nimfa(g, tau_params(tau),
                              np.where(np.arange(N) == 0, 1.0, 0.0), times)
            assert np.all(sol.prevalence >= y_exact - 1e-8)


class TestCorrection:
    def test_t0_equals_raw_prevalence(self):
        g = complete_graph(50)
        sol = solve_nimfa(g, tau_params(0.06), np.full(50, 1 / 50),
                          np.linspace(0, 3, 61))
        yc = corrected_prevalence(sol, 2.94, 1, 49.0)
        assert yc[0] == pytest.approx(1 / 50)

    def test_long_time_product_of_limits(self):
        g = complete_graph(50)
        sol = solve_nimfa(g, tau_params(0.06), np.full(50, 1 / 50),
                          np.array([0.0, 60.0]))
        yc = corrected_prevalence(sol, 2.94, 1, 49.0)
        assert yc[-1] == pytest.approx((1 - 1 / 2.94) ** 2, abs=1e-5)

    def test_threshold_boundary_kills_prevalence(self):
        # x = 1: f(t) = exp(-lambda1 t), correction suppresses everything
        g = complete_graph(50)
        sol = solve_nimfa(g, tau_params(1 / 49), np.full(50, 0.1),
                          np.array([0.0, 1.0]))
        yc = corrected_prevalence(sol, 1.0, 1, 49.0)
        assert yc[-1] < 1e-10

    def test_rejects_subthreshold(self):
        g = complete_graph(10)
        sol = solve_nimfa(g, tau_params(0.05), np.full(10, 0.1),
                          np.array([0.0, 1.0]))
        with pytest.raises(ValueError):
            corrected_prevalence(sol, 0.8, 1, 9.0)


def test_csv_export(tmp_path):
    g = complete_graph(10)
    sol = solve_nimfa(g, tau_params(0.3), np.full(10, 0.1),
                      np.linspace(0, 2, 5))
    path = tmp_path / "nimfa.csv"
    nimfa_to_csv(sol, 2.7, 1, 9.0, path)
    lines = path.read_text().strip().splitlines()
    assert lines[0] == "t,y1,f,y_corrected"
    data = np.loadtxt(path, delimiter=",", skiprows=1)
    assert np.allclose(data[:, 3], data[:, 1] * data[:, 2])
    path2 = tmp_path / "nimfa_nodes.csv"
    nimfa_to_csv(sol, 2.7, 1, 9.0, path2, per_node=True)
    assert path2.read_text().splitlines()[0].endswith("v_9")

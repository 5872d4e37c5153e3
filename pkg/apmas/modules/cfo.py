"""
Closed-Form Oracle test – the integrator against solutions known in closed form.

- one agent with input c = 5: x(t) = 5 (1 - e^-t), checked at t = 0.5, 1, 2, 5
- path of two agents with c = 4 on agent 1: x(20) close to 4, and the whole run
  agrees with the matrix exponential of the augmented linear system

Contains:
- CFO class for performing the check.
- create() function as the entry point used by `apmas verify`.
"""

import numpy as np
import scipy.linalg

from apmas.core.graph_core import Graph, laplacian, path_graph
from apmas.core.input_layout import InputLayout, build_derived
from apmas.core.protocol_dynamics import ProtocolParams, Trajectory, integrate
from apmas.helpers.property_check import PropertyCheck

__TESTLABEL__ = "Testing the integrator against closed-form solutions:"

SINGLE_AGENT_TIMES = (0.5, 1.0, 2.0, 5.0)


def sample_at(traj: Trajectory, t: float) -> int:
    return int(np.argmin(np.abs(traj.times - t)))


def exact_solution(g: Graph, layout: InputLayout, params: ProtocolParams, x0: np.ndarray, xi0: np.ndarray,
                   t: float) -> np.ndarray:
    """
    (x(t), xi(t)) stacked, from expm of the system augmented with a constant state
    carrying the forcing term.
    """
    n = g.n
    L = laplacian(g)
    derived = build_derived(layout)
    a, c = params.alpha, params.gamma
    system = np.zeros((2 * n + 1, 2 * n + 1))
    system[:n, :n] = -a * (L + derived.K1)
    system[:n, n:2 * n] = L
    system[:n, 2 * n] = a * derived.forcing
    system[n:2 * n, :n] = -c * L
    z0 = np.concatenate([x0, xi0, [1.0]])
    return (scipy.linalg.expm(system * t) @ z0)[:2 * n]


class CFO(PropertyCheck):
    CODE = "CFO"
    LABEL = __TESTLABEL__

    def standalone(self) -> None:
        self._single_agent()
        self._two_agents()

    def _single_agent(self) -> None:
        g, layout = Graph(1), InputLayout(1, [(5.0, (1,))])
        traj = integrate(g, layout, ProtocolParams(dt=0.01, t_final=5.0))
        for t in SINGLE_AGENT_TIMES:
            k = sample_at(traj, t)
            expected = 5.0 * (1.0 - np.exp(-traj.times[k]))
            self.expect("single", abs(float(traj.x[k, 0]) - expected), 1e-6, f"|x({t:g}) - 5(1 - e^-t)|")

    def _two_agents(self) -> None:
        g, layout = path_graph(2), InputLayout(2, [(4.0, (1,))])
        params = ProtocolParams(dt=0.01, t_final=20.0)
        x0 = xi0 = np.zeros(2)
        traj = integrate(g, layout, params, x0, xi0)
        self.expect("p2", float(np.max(np.abs(traj.final.x - 4.0))), 1e-4, "|x(20) - 4|")
        for t in (1.0, 5.0, 20.0):
            k = sample_at(traj, t)
            exact = exact_solution(g, layout, params, x0, xi0, float(traj.times[k]))
            numeric = np.concatenate([traj.x[k], traj.xi[k]])
            self.expect("p2", float(np.max(np.abs(numeric - exact))), 1e-7, f"|RK4 - expm| at t={t:g}")


def create(args, ptjsonlib, helpers):
    """Entry point for the CFO check (Closed-Form Oracle test)."""
    return CFO(args, ptjsonlib, helpers)

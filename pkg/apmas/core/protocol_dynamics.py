"""
Protocol Dynamics – right-hand sides of the integral-action consensus protocol
and a fixed-step RK4 integrator.

Agent i with state x_i and integral action xi_i evolves as

    dx_i  = -alpha * sum_{j~i}(x_i - x_j) + sum_{j~i}(xi_i - xi_j) - alpha * sum_{h~i}(x_i - c_h)
    dxi_i = -gamma * sum_{j~i}(x_i - x_j)

alpha = gamma = 1 is the base protocol. The compact form of the same law is

    dx  = -alpha L x + L xi - alpha K1 x + alpha K2 c
    dxi = -gamma L x
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Callable, Iterator

import numpy as np

from apmas.core.errors import DimensionMismatch, GraphNotConnected, InvalidParams, NumericalBlowup
from apmas.core.graph_core import Graph, is_connected, laplacian, laplacian_pseudoinverse
from apmas.core.input_layout import DerivedLayout, InputLayout, build_derived

BLOWUP_MAGNITUDE = 1e12
MAX_DEFAULT_STEP = 0.01
PROPAGATOR_BLOCK = 256


class Form(enum.Enum):
    AGENT_LEVEL = "agent_level"
    COMPACT = "compact"
    BASE = "base"


@dataclass(frozen=True)
class ProtocolParams:
    alpha: float = 1.0
    gamma: float = 1.0
    dt: float = MAX_DEFAULT_STEP
    t_final: float = 1.0

    def __post_init__(self) -> None:
        for name in ("alpha", "gamma", "dt", "t_final"):
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, (int, float, np.integer, np.floating)):
                raise InvalidParams(name, f"must be a real number, got {value!r}")
            if not math.isfinite(value) or value <= 0:
                raise InvalidParams(name, f"must be a positive finite number, got {value!r}")
            object.__setattr__(self, name, float(value))
        if self.dt > self.t_final:
            raise InvalidParams("dt", f"step {self.dt} exceeds the horizon t_final={self.t_final}")


@dataclass(frozen=True)
class NetworkState:
    t: float
    x: np.ndarray
    xi: np.ndarray

    def __post_init__(self) -> None:
        x = np.asarray(self.x, dtype=float)
        xi = np.asarray(self.xi, dtype=float)
        if x.ndim != 1 or x.shape != xi.shape:
            raise DimensionMismatch(f"x and xi must be vectors of equal length, got {x.shape} and {xi.shape}")
        if not (np.all(np.isfinite(x)) and np.all(np.isfinite(xi))):
            raise NumericalBlowup(self.t, math.inf)
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "xi", xi)

    @property
    def n(self) -> int:
        return self.x.shape[0]


@dataclass(frozen=True)
class Trajectory:
    """
    Samples at t = 0, dt, 2 dt, ..., t_final stored as stacked arrays.

    ``x[k]`` and ``xi[k]`` are the states at ``times[k]``.
    """
    params: ProtocolParams
    times: np.ndarray
    x: np.ndarray
    xi: np.ndarray
    form: Form = field(default=Form.COMPACT)

    def __len__(self) -> int:
        return self.times.shape[0]

    def __iter__(self) -> Iterator[NetworkState]:
        return (self.state(k) for k in range(len(self)))

    @property
    def n(self) -> int:
        return self.x.shape[1]

    def state(self, k: int) -> NetworkState:
        return NetworkState(float(self.times[k]), self.x[k], self.xi[k])

    @property
    def final(self) -> NetworkState:
        return self.state(len(self) - 1)


@dataclass(frozen=True)
class AgentView:
    """What agent ``i`` is allowed to read: its neighbors and its own inputs."""
    i: int
    neighbors: tuple[int, ...]
    inputs: tuple[float, ...]


def agent_views(g: Graph, layout: InputLayout) -> list[AgentView]:
    if layout.n != g.n:
        raise DimensionMismatch(f"layout has {layout.n} agents, graph has {g.n} nodes")
    neighbor_lists = g.neighbor_lists()
    return [
        AgentView(i, neighbor_lists[i], tuple(layout.inputs[h].value for h in layout.inputs_of(i)))
        for i in range(1, g.n + 1)
    ]


def _local_sums(view: AgentView, x: np.ndarray, xi: np.ndarray) -> tuple[float, float, float]:
    own_x = x[view.i - 1]
    own_xi = xi[view.i - 1]
    coupling = 0.0
    integral = 0.0
    for j in view.neighbors:
        coupling += own_x - x[j - 1]
        integral += own_xi - xi[j - 1]
    forcing = 0.0
    for c in view.inputs:
        forcing += own_x - c
    return coupling, integral, forcing


def _agent_level(views: list[AgentView], alpha: float, gamma: float, x: np.ndarray,
                 xi: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    dx = np.empty(len(views))
    dxi = np.empty(len(views))
    for view in views:
        coupling, integral, forcing = _local_sums(view, x, xi)
        dx[view.i - 1] = -alpha * coupling + integral - alpha * forcing
        dxi[view.i - 1] = -gamma * coupling
    return dx, dxi


def _base(views: list[AgentView], x: np.ndarray, xi: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    dx = np.empty(len(views))
    dxi = np.empty(len(views))
    for view in views:
        coupling, integral, forcing = _local_sums(view, x, xi)
        dx[view.i - 1] = -coupling + integral - forcing
        dxi[view.i - 1] = -coupling
    return dx, dxi


def _compact(L: np.ndarray, derived: DerivedLayout, alpha: float, gamma: float, x: np.ndarray,
             xi: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    Lx = L @ x
    dx = -alpha * Lx + L @ xi - alpha * (derived.K1 @ x) + alpha * derived.forcing
    dxi = -gamma * Lx
    return dx, dxi


def _require_connected(g: Graph) -> None:
    if not is_connected(g):
        raise GraphNotConnected()


def _check_state(n: int, s: NetworkState) -> None:
    if s.n != n:
        raise DimensionMismatch(f"state has length {s.n}, expected {n}")


def rhs_agent_level(g: Graph, layout: InputLayout, params: ProtocolParams,
                    s: NetworkState) -> tuple[np.ndarray, np.ndarray]:
    """Generalized protocol evaluated agent by agent from local views."""
    _require_connected(g)
    _check_state(g.n, s)
    return _agent_level(agent_views(g, layout), params.alpha, params.gamma, s.x, s.xi)


def rhs_base(g: Graph, layout: InputLayout, s: NetworkState) -> tuple[np.ndarray, np.ndarray]:
    """Base protocol (no gains) evaluated agent by agent."""
    _require_connected(g)
    _check_state(g.n, s)
    return _base(agent_views(g, layout), s.x, s.xi)


def rhs_compact(L: np.ndarray, derived: DerivedLayout, params: ProtocolParams,
                s: NetworkState) -> tuple[np.ndarray, np.ndarray]:
    L = np.asarray(L, dtype=float)
    if L.shape != (derived.n, derived.n) or s.n != derived.n:
        raise DimensionMismatch(
            f"Laplacian {L.shape}, layout of {derived.n} agents and state of length {s.n} do not agree")
    return _compact(L, derived, params.alpha, params.gamma, s.x, s.xi)


def agent_compact_equivalence(g: Graph, layout: InputLayout, params: ProtocolParams, s: NetworkState) -> float:
    """Max entrywise |agent-level - compact| on the same state."""
    dx_a, dxi_a = rhs_agent_level(g, layout, params, s)
    dx_c, dxi_c = rhs_compact(laplacian(g), build_derived(layout), params, s)
    return float(max(np.max(np.abs(dx_a - dx_c)), np.max(np.abs(dxi_a - dxi_c))))


def spectral_radius_bound(g: Graph, layout: InputLayout, alpha: float = 1.0, gamma: float = 1.0) -> float:
    d_max = g.max_degree()
    k1_max = max(len(layout.inputs_of(i)) for i in range(1, g.n + 1))
    return alpha * (2 * d_max + k1_max) + max(1.0, gamma) * 2 * d_max


def default_step(g: Graph, layout: InputLayout, alpha: float = 1.0, gamma: float = 1.0) -> float:
    """dt = min(0.01, 0.1 / rho) with rho the Gershgorin-style bound on the closed-loop spectrum."""
    return min(MAX_DEFAULT_STEP, 0.1 / spectral_radius_bound(g, layout, alpha, gamma))


def equilibrium_state(g: Graph, layout: InputLayout, params: ProtocolParams | None = None) -> NetworkState:
    """x = eps 1 and xi = alpha * pinv(L) Lc K2 c."""
    alpha = params.alpha if params is not None else 1.0
    derived = build_derived(layout)
    Ldag = laplacian_pseudoinverse(laplacian(g))
    return NetworkState(0.0, np.full(g.n, derived.epsilon), alpha * (Ldag @ (derived.Lc @ derived.forcing)))


def time_grid(params: ProtocolParams) -> np.ndarray:
    """0, dt, 2dt, ... plus t_final when the horizon is not a multiple of dt."""
    steps = int(math.floor(params.t_final / params.dt))
    times = params.dt * np.arange(steps + 1)
    residual = params.t_final - times[-1]
    if residual > 1e-9 * params.dt:
        times = np.append(times, params.t_final)
    else:
        times[-1] = params.t_final
    return times


Rhs = Callable[[np.ndarray, np.ndarray], tuple[np.ndarray, np.ndarray]]


def _rk4_step(rhs: Rhs, x: np.ndarray, xi: np.ndarray, h: float) -> tuple[np.ndarray, np.ndarray]:
    k1x, k1xi = rhs(x, xi)
    k2x, k2xi = rhs(x + h / 2 * k1x, xi + h / 2 * k1xi)
    k3x, k3xi = rhs(x + h / 2 * k2x, xi + h / 2 * k2xi)
    k4x, k4xi = rhs(x + h * k3x, xi + h * k3xi)
    return (x + h / 6 * (k1x + 2 * k2x + 2 * k3x + k4x),
            xi + h / 6 * (k1xi + 2 * k2xi + 2 * k3xi + k4xi))


def _bind_rhs(g: Graph, layout: InputLayout, params: ProtocolParams, form: Form) -> Rhs:
    views = agent_views(g, layout)
    if form is Form.AGENT_LEVEL:
        def rhs(x: np.ndarray, xi: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
            return _agent_level(views, params.alpha, params.gamma, x, xi)
        return rhs

    def rhs(x: np.ndarray, xi: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        return _base(views, x, xi)
    return rhs


def compact_system(L: np.ndarray, derived: DerivedLayout, alpha: float = 1.0,
                   gamma: float = 1.0) -> tuple[np.ndarray, np.ndarray]:
    """(A, f) with the compact law written as dz = A z + f over z = [x; xi]."""
    n = derived.n
    A = np.zeros((2 * n, 2 * n))
    A[:n, :n] = -alpha * (L + derived.K1)
    A[:n, n:] = L
    A[n:, :n] = -gamma * L
    f = np.zeros(2 * n)
    f[:n] = alpha * derived.forcing
    return A, f


def rk4_propagator(A: np.ndarray, f: np.ndarray, h: float) -> np.ndarray:
    """
    One classical RK4 step of dz = A z + f as a map on [z; 1].

    For a linear right-hand side the four stages collapse to
    z' = P(hA) z + h Q(hA) f with Q(X) = I + X/2 + X^2/6 + X^3/24 and P = I + X Q.
    """
    size = A.shape[0]
    X = h * A
    identity = np.eye(size)
    Q = identity + X @ (identity / 2 + X @ (identity / 6 + X / 24))
    M = np.eye(size + 1)
    M[:size, :size] = identity + X @ Q
    M[:size, size] = h * (Q @ f)
    return M


def _first_blowup(times: np.ndarray, z: np.ndarray, start: int) -> None:
    with np.errstate(invalid="ignore"):
        magnitude = np.max(np.abs(z), axis=1)
    bad = np.flatnonzero(~(magnitude <= BLOWUP_MAGNITUDE))
    if bad.size:
        worst = float(magnitude[bad[0]])
        raise NumericalBlowup(float(times[start + bad[0]]), worst if math.isfinite(worst) else math.inf)


def _propagate(M: np.ndarray, count: int, out: np.ndarray, times: np.ndarray) -> None:
    """Fill out[1..count] with M^k out[0], one stacked product per block of PROPAGATOR_BLOCK steps."""
    block = max(1, min(PROPAGATOR_BLOCK, count))
    powers = np.empty((block,) + M.shape)
    powers[0] = M
    with np.errstate(over="ignore", invalid="ignore"):
        for j in range(1, block):
            powers[j] = M @ powers[j - 1]
        size = M.shape[0]
        stacked = powers.reshape(block * size, size)
        k = 0
        while k < count:
            width = min(block, count - k)
            out[k + 1:k + 1 + width] = (stacked[:width * size] @ out[k]).reshape(width, size)
            _first_blowup(times, out[k + 1:k + 1 + width, :-1], k + 1)
            k += width


def _integrate_compact(g: Graph, layout: InputLayout, params: ProtocolParams, x: np.ndarray, xi: np.ndarray,
                       times: np.ndarray, steps: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    n = g.n
    A, f = compact_system(laplacian(g), build_derived(layout), params.alpha, params.gamma)
    out = np.empty((times.shape[0], 2 * n + 1))
    out[0] = np.concatenate([x, xi, [1.0]])
    uniform = steps.shape[0] - (0 if steps[-1] == params.dt else 1)
    _propagate(rk4_propagator(A, f, params.dt), uniform, out, times)
    if uniform < steps.shape[0]:
        with np.errstate(over="ignore", invalid="ignore"):
            out[-1] = rk4_propagator(A, f, float(steps[-1])) @ out[-2]
        _first_blowup(times, out[-1:, :-1], times.shape[0] - 1)
    return out[:, :n], out[:, n:2 * n]


def integrate(g: Graph, layout: InputLayout, params: ProtocolParams, x0=None, xi0=None,
              form: Form = Form.COMPACT) -> Trajectory:
    """
    Classical fixed-step RK4 from t = 0 to t_final.

    Missing initial conditions default to zero. ``form`` picks the right-hand side:
    agent-level, compact matrix form, or the base protocol without gains. The
    compact form steps with the precomputed one-step propagator of rk4_propagator;
    the agent-level forms call their right-hand side four times per step.

    Raises:
        GraphNotConnected: if the graph is disconnected.
        DimensionMismatch: if x0 or xi0 does not have length n.
        NumericalBlowup: if any state magnitude exceeds 1e12.
    """
    _require_connected(g)
    form = Form(form)
    n = g.n
    x = np.zeros(n) if x0 is None else np.array(x0, dtype=float)
    xi = np.zeros(n) if xi0 is None else np.array(xi0, dtype=float)
    if x.shape != (n,) or xi.shape != (n,):
        raise DimensionMismatch(f"initial conditions must have length {n}, got {x.shape} and {xi.shape}")

    times = time_grid(params)
    steps = np.diff(times)
    steps[np.isclose(steps, params.dt, rtol=1e-9, atol=0.0)] = params.dt
    if form is Form.COMPACT:
        xs, xis = _integrate_compact(g, layout, params, x, xi, times, steps)
        return Trajectory(params=params, times=times, x=xs, xi=xis, form=form)

    rhs = _bind_rhs(g, layout, params, form)
    xs = np.empty((times.shape[0], n))
    xis = np.empty((times.shape[0], n))
    xs[0], xis[0] = x, xi
    for k in range(1, times.shape[0]):
        x, xi = _rk4_step(rhs, x, xi, steps[k - 1])
        magnitude = max(np.max(np.abs(x)), np.max(np.abs(xi)))
        if not magnitude <= BLOWUP_MAGNITUDE:
            raise NumericalBlowup(float(times[k]), float(magnitude))
        xs[k], xis[k] = x, xi
    return Trajectory(params=params, times=times, x=xs, xi=xis, form=form)

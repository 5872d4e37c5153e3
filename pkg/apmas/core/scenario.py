"""
Scenario files – JSON description of one simulation run.

    {
      "name": "p2",
      "n": 2,
      "edges": [[1, 2]],
      "inputs": [{"value": 4.0, "targets": [1]}],
      "alpha": 1.0, "gamma": 1.0,          optional, default 1.0
      "dt": 0.01, "t_final": 20.0,         optional, see below
      "x0": [0.0, 0.0], "xi0": [0.0, 0.0], optional, default zero
      "seed": 7                            optional
    }

Missing dt follows the step-size rule of protocol_dynamics.default_step, capped at
t_final; missing t_final comes from horizon(). Every violation is reported as a
ValidationError naming the offending field.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from apmas.core.analysis import ZERO_EIGENVALUE_TOL, closed_loop_spectrum
from apmas.core.errors import GraphNotConnected, InvalidParams, ParseError, ValidationError
from apmas.core.graph_core import Graph, is_connected, laplacian, random_connected_graph, symmetric_eigendecomposition
from apmas.core.input_layout import ExogenousInput, InputLayout, build_derived, random_layout
from apmas.core.outputs import atomic_write_text
from apmas.core.protocol_dynamics import ProtocolParams, default_step

HORIZON_FACTOR = 50.0
SLOW_MODE_FACTOR = 30.0
FIELDS = ("name", "n", "edges", "inputs", "alpha", "gamma", "dt", "t_final", "x0", "xi0", "seed")


@dataclass(frozen=True)
class Scenario:
    name: str
    graph: Graph
    inputs: InputLayout
    params: ProtocolParams
    x0: tuple[float, ...] | None = None
    xi0: tuple[float, ...] | None = None
    seed: int | None = None

    def __post_init__(self) -> None:
        if self.inputs.n != self.graph.n:
            raise ValidationError("n", f"input layout has {self.inputs.n} agents, graph has {self.graph.n}")
        if not is_connected(self.graph):
            raise GraphNotConnected()
        for name in ("x0", "xi0"):
            vector = getattr(self, name)
            if vector is not None:
                object.__setattr__(self, name, _vector(name, vector, self.graph.n))

    @property
    def n(self) -> int:
        return self.graph.n

    def initial_x(self) -> np.ndarray:
        return np.zeros(self.n) if self.x0 is None else np.array(self.x0)

    def initial_xi(self) -> np.ndarray:
        return np.zeros(self.n) if self.xi0 is None else np.array(self.xi0)

    def to_dict(self) -> dict:
        data = {
            "name": self.name,
            "n": self.n,
            "edges": [list(edge) for edge in self.graph.sorted_edges()],
            "inputs": [{"value": item.value, "targets": list(item.targets)} for item in self.inputs.inputs],
            "alpha": self.params.alpha,
            "gamma": self.params.gamma,
            "dt": self.params.dt,
            "t_final": self.params.t_final,
        }
        if self.x0 is not None:
            data["x0"] = list(self.x0)
        if self.xi0 is not None:
            data["xi0"] = list(self.xi0)
        if self.seed is not None:
            data["seed"] = self.seed
        return data


def _real(field: str, value) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ValidationError(field, f"expected a number, got {value!r}")
    if not math.isfinite(value):
        raise ValidationError(field, f"expected a finite number, got {value!r}")
    return float(value)


def _vector(field: str, values, n: int) -> tuple[float, ...]:
    if not isinstance(values, (list, tuple, np.ndarray)):
        raise ValidationError(field, f"expected a list of {n} numbers")
    if len(values) != n:
        raise ValidationError(field, f"expected {n} entries, got {len(values)}")
    return tuple(_real(f"{field}[{k}]", float(v) if isinstance(v, np.floating) else v) for k, v in enumerate(values))


def horizon(graph: Graph, inputs: InputLayout, alpha: float = 1.0, gamma: float = 1.0) -> float:
    """
    max(50 / lambda_min(L + K1), 30 / |sigma|).

    sigma is the largest real part among the nonzero eigenvalues of the closed-loop
    matrix [[-alpha F, L], [-gamma L, 0]]; that mode can decay much more slowly than
    lambda_min(F). The zero eigenvalue belongs to the conserved sum of xi.
    """
    L = laplacian(graph)
    F = L + build_derived(inputs).K1
    t_final = HORIZON_FACTOR / float(symmetric_eigendecomposition(F)[0][0])
    spectrum = closed_loop_spectrum(L, F, alpha, gamma)
    moving = spectrum[np.abs(spectrum) >= ZERO_EIGENVALUE_TOL]
    if moving.size:
        sigma = float(np.max(moving.real))
        if sigma < 0:
            t_final = max(t_final, SLOW_MODE_FACTOR / -sigma)
    return t_final


def scenario_from_dict(data, overrides: dict | None = None) -> Scenario:
    """
    Validate a decoded scenario document.

    ``overrides`` (alpha, gamma, dt, t_final) replace file values before defaults are
    resolved; None entries are ignored.
    """
    if not isinstance(data, dict):
        raise ValidationError("<root>", "scenario must be a JSON object")
    unknown = sorted(set(data) - set(FIELDS))
    if unknown:
        raise ValidationError(unknown[0], "unknown field")
    data = dict(data)
    for key, value in (overrides or {}).items():
        if value is not None:
            data[key] = value

    name = data.get("name", "scenario")
    if not isinstance(name, str) or not name or os.sep in name or name in (".", ".."):
        raise ValidationError("name", f"expected a non-empty file-name-safe string, got {name!r}")
    if "n" not in data:
        raise ValidationError("n", "missing")
    n = data["n"]
    if isinstance(n, bool) or not isinstance(n, int) or n < 1:
        raise ValidationError("n", f"expected a positive integer, got {n!r}")

    edges = data.get("edges", [])
    if not isinstance(edges, list):
        raise ValidationError("edges", "expected a list of [i, j] pairs")
    for index, edge in enumerate(edges):
        if not isinstance(edge, list) or len(edge) != 2:
            raise ValidationError(f"edges[{index}]", f"expected a pair [i, j], got {edge!r}")
    graph = Graph(n, [tuple(edge) for edge in edges])

    raw_inputs = data.get("inputs")
    if not isinstance(raw_inputs, list):
        raise ValidationError("inputs", "expected a list of {value, targets} objects")
    inputs = []
    for index, item in enumerate(raw_inputs):
        field = f"inputs[{index}]"
        if not isinstance(item, dict) or set(item) != {"value", "targets"}:
            raise ValidationError(field, "expected an object with exactly the keys 'value' and 'targets'")
        if not isinstance(item["targets"], list):
            raise ValidationError(f"{field}.targets", "expected a list of agent ids")
        inputs.append(ExogenousInput(_real(f"{field}.value", item["value"]), tuple(item["targets"])))
    layout = InputLayout(n, tuple(inputs))
    build_derived(layout)

    alpha = _real("alpha", data.get("alpha", 1.0))
    gamma = _real("gamma", data.get("gamma", 1.0))
    if alpha <= 0 or gamma <= 0:
        raise InvalidParams("alpha" if alpha <= 0 else "gamma", "gains must be positive")
    if not is_connected(graph):
        raise GraphNotConnected()
    t_final = (_real("t_final", data["t_final"]) if data.get("t_final") is not None
               else horizon(graph, layout, alpha, gamma))
    if data.get("dt") is not None:
        dt = _real("dt", data["dt"])
    else:
        dt = default_step(graph, layout, alpha, gamma)
        if 0 < t_final < dt:
            dt = t_final
    params = ProtocolParams(alpha=alpha, gamma=gamma, dt=dt, t_final=t_final)

    seed = data.get("seed")
    if seed is not None and (isinstance(seed, bool) or not isinstance(seed, int)):
        raise ValidationError("seed", f"expected an integer, got {seed!r}")
    return Scenario(
        name=name,
        graph=graph,
        inputs=layout,
        params=params,
        x0=_vector("x0", data["x0"], n) if data.get("x0") is not None else None,
        xi0=_vector("xi0", data["xi0"], n) if data.get("xi0") is not None else None,
        seed=seed,
    )


def load_scenario(path, **overrides) -> Scenario:
    """
    Read and validate a scenario file.

    Raises:
        ParseError: malformed JSON.
        ValidationError: any invariant violation, naming the field.
        OSError: the file cannot be read.
    """
    path = Path(path)
    text = path.read_text(encoding="utf-8")
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise ParseError(path, f"invalid JSON ({e.msg} at line {e.lineno}, column {e.colno})") from None
    return scenario_from_dict(data, overrides)


def dumps_scenario(scenario: Scenario) -> str:
    return json.dumps(scenario.to_dict(), indent=2) + "\n"


def save_scenario(scenario: Scenario, path) -> None:
    atomic_write_text(Path(path), dumps_scenario(scenario))


def random_scenario(rng: np.random.Generator, n_max: int, name: str, n_min: int = 2,
                    state_range: float = 10.0) -> Scenario:
    """
    Connected G(n, p) with p in [0.3, 0.9], a random layout with m in [1, n] and
    values in [-100, 100], random initial states, unit gains, default dt and horizon.
    """
    n = int(rng.integers(n_min, n_max + 1))
    graph = random_connected_graph(n, float(rng.uniform(0.3, 0.9)), rng)
    layout = random_layout(n, rng)
    x0 = tuple(float(v) for v in rng.uniform(-state_range, state_range, n))
    xi0 = tuple(float(v) for v in rng.uniform(-state_range, state_range, n))
    params = ProtocolParams(alpha=1.0, gamma=1.0, dt=default_step(graph, layout), t_final=horizon(graph, layout))
    return Scenario(name=name, graph=graph, inputs=layout, params=params, x0=x0, xi0=xi0)

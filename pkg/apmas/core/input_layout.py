"""
Input Layout – exogenous inputs and their attachment to agents.

An agent attached to at least one input is active, every other agent is passive.
An input attached to exactly one agent is isolated, otherwise non-isolated.
Activity is structural: an input of value 0 still activates its targets.

build_derived() produces the matrix view used by the compact protocol form:
K1 (inputs per agent), K2 (agent/input incidence padded to n x n), the padded
input vector, the input average epsilon and Lc = K1 1 1^T / (1^T K2 1) - I.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from apmas.core.errors import InvalidLayout, InvariantViolation, TooManyInputs

MASS_RATIO_TOL = 1e-14
LC_COLUMN_SUM_TOL = 1e-12


@dataclass(frozen=True)
class ExogenousInput:
    value: float
    targets: tuple[int, ...]


@dataclass(frozen=True)
class InputLayout:
    """
    ``n`` agents and an ordered tuple of constant inputs.

    ``inputs`` accepts any sequence of ExogenousInput or ``(value, targets)`` pairs;
    targets are stored sorted.
    """
    n: int
    inputs: tuple[ExogenousInput, ...]

    def __post_init__(self) -> None:
        if isinstance(self.n, bool) or not isinstance(self.n, (int, np.integer)) or self.n < 1:
            raise InvalidLayout("n", f"agent count must be a positive integer, got {self.n!r}")
        object.__setattr__(self, "n", int(self.n))
        inputs = tuple(_coerce_input(self.n, index, item) for index, item in enumerate(self.inputs))
        if not inputs:
            raise InvalidLayout("inputs", "at least one exogenous input is required")
        object.__setattr__(self, "inputs", inputs)

    @property
    def m(self) -> int:
        return len(self.inputs)

    @property
    def values(self) -> np.ndarray:
        return np.array([item.value for item in self.inputs], dtype=float)

    def inputs_of(self, agent: int) -> tuple[int, ...]:
        """0-based indices of the inputs attached to ``agent``."""
        return tuple(h for h, item in enumerate(self.inputs) if agent in item.targets)


def _coerce_input(n: int, index: int, item) -> ExogenousInput:
    field = f"inputs[{index}]"
    if isinstance(item, ExogenousInput):
        value, targets = item.value, item.targets
    else:
        try:
            value, targets = item
        except (TypeError, ValueError):
            raise InvalidLayout(field, f"expected (value, targets), got {item!r}") from None
    if isinstance(value, bool) or not isinstance(value, (int, float, np.integer, np.floating)):
        raise InvalidLayout(f"{field}.value", f"input value must be a real number, got {value!r}")
    if not math.isfinite(value):
        raise InvalidLayout(f"{field}.value", f"input value must be finite, got {value!r}")
    try:
        targets = list(targets)
    except TypeError:
        raise InvalidLayout(f"{field}.targets", f"expected a list of agent ids, got {targets!r}") from None
    if not targets:
        raise InvalidLayout(f"{field}.targets", "an input must target at least one agent")
    for agent in targets:
        if isinstance(agent, bool) or not isinstance(agent, (int, np.integer)):
            raise InvalidLayout(f"{field}.targets", f"agent id must be an integer, got {agent!r}")
        if not 1 <= agent <= n:
            raise InvalidLayout(f"{field}.targets", f"agent id {agent} outside [1, {n}]")
    if len(set(targets)) != len(targets):
        raise InvalidLayout(f"{field}.targets", "duplicate agent in target list")
    return ExogenousInput(float(value), tuple(sorted(int(agent) for agent in targets)))


@dataclass(frozen=True)
class DerivedLayout:
    K1: np.ndarray
    K2: np.ndarray
    c_padded: np.ndarray
    epsilon: float
    Lc: np.ndarray

    @property
    def n(self) -> int:
        return self.K1.shape[0]

    @property
    def forcing(self) -> np.ndarray:
        """K2 c (the padded input vector routed to its agents)."""
        return self.K2 @ self.c_padded


def classify_agents(layout: InputLayout) -> tuple[frozenset[int], frozenset[int]]:
    """(active, passive) agent ids."""
    active = frozenset(agent for item in layout.inputs for agent in item.targets)
    passive = frozenset(range(1, layout.n + 1)) - active
    return active, passive


def classify_inputs(layout: InputLayout) -> tuple[frozenset[int], frozenset[int]]:
    """(isolated, non_isolated) input indices, 1-based."""
    isolated = frozenset(h for h, item in enumerate(layout.inputs, start=1) if len(item.targets) == 1)
    non_isolated = frozenset(range(1, layout.m + 1)) - isolated
    return isolated, non_isolated


def build_derived(layout: InputLayout) -> DerivedLayout:
    """
    Matrix form of ``layout``.

    Raises:
        TooManyInputs: if m > n.
        InvariantViolation: if one of the structural identities does not hold.
    """
    n, m = layout.n, layout.m
    if m > n:
        raise TooManyInputs("inputs", f"{m} inputs for {n} agents; the padded input vector needs m <= n")

    K2_int = np.zeros((n, n), dtype=np.int64)
    for h, item in enumerate(layout.inputs):
        for agent in item.targets:
            K2_int[agent - 1, h] = 1
    k1 = K2_int.sum(axis=1)
    mass = int(K2_int.sum())

    c_padded = np.zeros(n)
    c_padded[:m] = layout.values
    K1 = np.diag(k1).astype(float)
    K2 = K2_int.astype(float)
    ones = np.ones(n)
    # correctly rounded, so independent of agent and input order
    epsilon = math.fsum((K2 * c_padded).ravel()) / float(mass)
    Lc = np.outer(k1, ones) / mass - np.eye(n)

    derived = DerivedLayout(K1=K1, K2=K2, c_padded=c_padded, epsilon=epsilon, Lc=Lc)
    _assert_derived(derived)
    return derived


def _assert_derived(derived: DerivedLayout) -> None:
    K1, K2, Lc = derived.K1, derived.K2, derived.Lc
    if not np.array_equal(np.diag(K1), K2.sum(axis=1)):
        raise InvariantViolation("K1 diagonal differs from the row sums of K2")
    if not np.all((K2 == 0) | (K2 == 1)):
        raise InvariantViolation("K2 has entries outside {0, 1}")
    ratio = K1.sum() / K2.sum()
    if abs(ratio - 1.0) > MASS_RATIO_TOL:
        raise InvariantViolation(f"1^T K1 1 / 1^T K2 1 = {ratio!r}, expected 1")
    column_sums = Lc.sum(axis=0)
    if np.max(np.abs(column_sums)) > LC_COLUMN_SUM_TOL:
        raise InvariantViolation(f"1^T Lc is not zero (max |.| = {np.max(np.abs(column_sums)):.3e})")


def average_of_inputs_expanded(layout: InputLayout) -> float:
    """Input average by explicit double summation over agent/input attachments."""
    numerator = []
    count = 0
    for agent in range(1, layout.n + 1):
        for item in layout.inputs:
            if agent in item.targets:
                numerator.append(item.value)
                count += 1
    return math.fsum(numerator) / count


def reorder_inputs(layout: InputLayout, order: Sequence[int]) -> InputLayout:
    """New layout whose h-th input is the ``order[h]``-th (0-based) input of ``layout``."""
    if sorted(order) != list(range(layout.m)):
        raise InvalidLayout("order", f"not a permutation of 0..{layout.m - 1}")
    return InputLayout(layout.n, tuple(layout.inputs[h] for h in order))


def relabel_layout(layout: InputLayout, perm: Sequence[int]) -> InputLayout:
    """Rename agent ``i`` to ``perm[i - 1]`` in every target list."""
    if sorted(perm) != list(range(1, layout.n + 1)):
        raise InvalidLayout("perm", f"not a permutation of 1..{layout.n}")
    return InputLayout(layout.n, tuple(
        ExogenousInput(item.value, tuple(perm[agent - 1] for agent in item.targets)) for item in layout.inputs
    ))


def random_layout(n: int, rng: np.random.Generator, m: int | None = None,
                  value_range: tuple[float, float] = (-100.0, 100.0)) -> InputLayout:
    """
    Random layout with ``m`` inputs (uniform in [1, n] when omitted).

    About half of the inputs are isolated; the others target 2..n agents.
    """
    if m is None:
        m = int(rng.integers(1, n + 1))
    inputs = []
    for _ in range(m):
        size = 1 if n == 1 or rng.random() < 0.5 else int(rng.integers(2, n + 1))
        targets = rng.choice(np.arange(1, n + 1), size=size, replace=False)
        value = float(rng.uniform(*value_range))
        inputs.append(ExogenousInput(value, tuple(int(t) for t in targets)))
    return InputLayout(n, tuple(inputs))

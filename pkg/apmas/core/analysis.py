"""
Analysis – error coordinates, Lyapunov function and numerical convergence certificate.

With gains (alpha, gamma) the shifted coordinates

    delta = x - eps 1
    e     = xi - alpha * pinv(L) Lc K2 c

obey  d delta = -alpha F delta + L e,  d e = -gamma L delta  with F = L + K1,
and V = 1/2 delta^T delta + 1/(2 gamma) e^T e  decreases at rate alpha delta^T F delta.
alpha = gamma = 1 gives the unweighted function V = 1/2 |delta|^2 + 1/2 |e|^2.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from apmas.core.errors import DimensionMismatch, NoConvergence
from apmas.core.graph_core import (SPECTRAL_CONNECTIVITY_TOL, Graph, laplacian, laplacian_pseudoinverse,
                                   symmetric_eigendecomposition)
from apmas.core.input_layout import DerivedLayout, InputLayout, build_derived
from apmas.core.protocol_dynamics import NetworkState, ProtocolParams, Trajectory, rhs_compact

DEFAULT_TOL_SETTLE = 1e-6
ZERO_EIGENVALUE_TOL = 1e-8
DECAY_FLOOR = 1e-10


@dataclass(frozen=True)
class ErrorCoordinates:
    delta: np.ndarray
    e: np.ndarray

    def __post_init__(self) -> None:
        delta = np.asarray(self.delta, dtype=float)
        e = np.asarray(self.e, dtype=float)
        if delta.ndim != 1 or delta.shape != e.shape:
            raise DimensionMismatch(f"delta and e must be vectors of equal length, got {delta.shape} and {e.shape}")
        object.__setattr__(self, "delta", delta)
        object.__setattr__(self, "e", e)


@dataclass
class CertificateReport:
    lambda2: float
    lambda_min_F: float
    closed_loop_spectrum: np.ndarray
    V_samples: np.ndarray
    settled: bool
    settling_time: float | None
    epsilon: float = 0.0
    alpha: float = 1.0
    gamma: float = 1.0
    final_delta_inf: float | None = None
    final_e_norm: float | None = None
    max_V_increase: float | None = None
    tail_decay_slope: float | None = None
    tol_settle: float = DEFAULT_TOL_SETTLE
    notes: list[str] = field(default_factory=list)

    @property
    def connected(self) -> bool:
        return self.lambda2 > SPECTRAL_CONNECTIVITY_TOL

    @property
    def positive_definite(self) -> bool:
        return self.lambda_min_F > 0

    @property
    def zero_eigenvalue_count(self) -> int:
        return int(np.sum(np.abs(self.closed_loop_spectrum) < ZERO_EIGENVALUE_TOL))

    @property
    def V_monotone(self) -> bool:
        return self.max_V_increase is not None and self.max_V_increase <= 1e-9 * (1 + float(self.V_samples[0]))

    def to_dict(self) -> dict:
        """JSON-ready view; complex eigenvalues become [re, im] pairs."""
        return {
            "epsilon": self.epsilon,
            "alpha": self.alpha,
            "gamma": self.gamma,
            "lambda2": self.lambda2,
            "lambda_min_F": self.lambda_min_F,
            "connected": self.connected,
            "positive_definite": self.positive_definite,
            "closed_loop_spectrum": [[float(z.real), float(z.imag)] for z in self.closed_loop_spectrum],
            "zero_eigenvalue_count": self.zero_eigenvalue_count,
            "tol_settle": self.tol_settle,
            "settled": self.settled,
            "settling_time": self.settling_time,
            "final_delta_inf": self.final_delta_inf,
            "final_e_norm": self.final_e_norm,
            "V_initial": float(self.V_samples[0]) if self.V_samples.size else None,
            "V_final": float(self.V_samples[-1]) if self.V_samples.size else None,
            "max_V_increase": self.max_V_increase,
            "V_monotone": self.V_monotone,
            "tail_decay_slope": self.tail_decay_slope,
            "notes": list(self.notes),
        }


def integral_shift(derived: DerivedLayout, Ldag: np.ndarray, alpha: float = 1.0) -> np.ndarray:
    """alpha * pinv(L) Lc K2 c, the equilibrium value of xi."""
    return alpha * (Ldag @ (derived.Lc @ derived.forcing))


def to_error_coordinates(s: NetworkState, derived: DerivedLayout, Ldag: np.ndarray,
                         alpha: float = 1.0) -> ErrorCoordinates:
    Ldag = np.asarray(Ldag, dtype=float)
    if s.n != derived.n or Ldag.shape != (derived.n, derived.n):
        raise DimensionMismatch(
            f"state of length {s.n}, layout of {derived.n} agents and pseudoinverse {Ldag.shape} do not agree")
    return ErrorCoordinates(s.x - derived.epsilon, s.xi - integral_shift(derived, Ldag, alpha))


def lyapunov(ec: ErrorCoordinates, gamma: float = 1.0) -> float:
    return 0.5 * float(ec.delta @ ec.delta) + 0.5 / gamma * float(ec.e @ ec.e)


def _check_error_operands(ec: ErrorCoordinates, L: np.ndarray, F: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    L = np.asarray(L, dtype=float)
    F = np.asarray(F, dtype=float)
    n = ec.delta.shape[0]
    if L.shape != (n, n) or F.shape != (n, n):
        raise DimensionMismatch(f"L {L.shape} and F {F.shape} must both be {n}x{n}")
    return L, F


def error_rhs(ec: ErrorCoordinates, L: np.ndarray, F: np.ndarray, alpha: float = 1.0,
              gamma: float = 1.0) -> tuple[np.ndarray, np.ndarray]:
    L, F = _check_error_operands(ec, L, F)
    return -alpha * (F @ ec.delta) + L @ ec.e, -gamma * (L @ ec.delta)


def lyapunov_derivative(ec: ErrorCoordinates, L: np.ndarray, F: np.ndarray, alpha: float = 1.0,
                        gamma: float = 1.0) -> tuple[float, float]:
    """
    (V' evaluated through the error dynamics, -alpha delta^T F delta).

    The two agree because the cross terms delta^T L e and e^T L delta cancel for symmetric L.
    """
    L, F = _check_error_operands(ec, L, F)
    ddelta, de = error_rhs(ec, L, F, alpha, gamma)
    analytic = float(ec.delta @ ddelta) + float(ec.e @ de) / gamma
    dissipation = -alpha * float(ec.delta @ (F @ ec.delta))
    return analytic, dissipation


def error_consistency_check(traj: Trajectory, g: Graph, layout: InputLayout) -> float:
    """
    Max entrywise defect between the protocol right-hand side, read in error
    coordinates, and the closed-form error dynamics, over every sample.

    The protocol side is the compact law applied to the stored (x, xi); the error
    side is error_rhs applied to (delta, e). Both are evaluated row-wise on the
    stacked samples.
    """
    L = laplacian(g)
    derived = build_derived(layout)
    Ldag = laplacian_pseudoinverse(L)
    F = L + derived.K1
    alpha, gamma = traj.params.alpha, traj.params.gamma
    X, Xi = traj.x, traj.xi

    dx = -alpha * (X @ L.T) + Xi @ L.T - alpha * (X @ derived.K1.T) + alpha * derived.forcing
    dxi = -gamma * (X @ L.T)
    delta = X - derived.epsilon
    e = Xi - integral_shift(derived, Ldag, alpha)
    ddelta = -alpha * (delta @ F.T) + e @ L.T
    de = -gamma * (delta @ L.T)
    return float(max(np.max(np.abs(dx - ddelta)), np.max(np.abs(dxi - de))))


def state_consistency_defect(s: NetworkState, L: np.ndarray, derived: DerivedLayout, Ldag: np.ndarray,
                             params: ProtocolParams) -> float:
    """Single-state version of error_consistency_check built from rhs_compact and error_rhs."""
    dx, dxi = rhs_compact(L, derived, params, s)
    ddelta, de = error_rhs(to_error_coordinates(s, derived, Ldag, params.alpha), L, L + derived.K1,
                           params.alpha, params.gamma)
    return float(max(np.max(np.abs(dx - ddelta)), np.max(np.abs(dxi - de))))


def dissipation_defects(traj: Trajectory, g: Graph, layout: InputLayout) -> np.ndarray:
    """
    Per-sample |V' - (-alpha delta^T F delta)| with V' evaluated through the error dynamics.

    The cross terms delta^T L e and e^T L delta are of size |delta| |L| |e| and cancel,
    so the whole evaluation runs in np.longdouble.
    """
    L = laplacian(g)
    derived = build_derived(layout)
    Ldag = laplacian_pseudoinverse(L)
    shift = integral_shift(derived, Ldag, traj.params.alpha)
    wide = np.longdouble
    alpha, gamma = wide(traj.params.alpha), wide(traj.params.gamma)
    F = (L + derived.K1).astype(wide)
    L = L.astype(wide)
    delta = traj.x.astype(wide) - wide(derived.epsilon)
    e = traj.xi.astype(wide) - shift.astype(wide)
    ddelta = -alpha * (delta @ F.T) + e @ L.T
    de = -gamma * (delta @ L.T)
    analytic = np.sum(delta * ddelta, axis=1) + np.sum(e * de, axis=1) / gamma
    dissipation = -alpha * np.sum(delta * (delta @ F.T), axis=1)
    return np.abs(analytic - dissipation).astype(float)


def closed_loop_matrix(L: np.ndarray, F: np.ndarray, alpha: float = 1.0, gamma: float = 1.0) -> np.ndarray:
    L = np.asarray(L, dtype=float)
    F = np.asarray(F, dtype=float)
    if L.shape != F.shape or L.ndim != 2 or L.shape[0] != L.shape[1]:
        raise DimensionMismatch(f"L {L.shape} and F {F.shape} must be square of the same order")
    return np.block([[-alpha * F, L], [-gamma * L, np.zeros_like(L)]])


def closed_loop_spectrum(L: np.ndarray, F: np.ndarray, alpha: float = 1.0, gamma: float = 1.0) -> np.ndarray:
    """
    Eigenvalues of [[-alpha F, L], [-gamma L, 0]] sorted by real part, then imaginary part.

    Raises:
        NoConvergence: if the dense QR eigensolver fails.
    """
    matrix = closed_loop_matrix(L, F, alpha, gamma)
    try:
        eigenvalues = scipy.linalg.eigvals(matrix)
    except (np.linalg.LinAlgError, ValueError) as e:
        raise NoConvergence(f"closed-loop eigensolve failed: {e}") from e
    eigenvalues = np.asarray(eigenvalues, dtype=complex)
    return eigenvalues[np.lexsort((eigenvalues.imag, eigenvalues.real))]


def delta_inf_norms(traj: Trajectory, epsilon: float) -> np.ndarray:
    return np.max(np.abs(traj.x - epsilon), axis=1)


def lyapunov_samples(traj: Trajectory, derived: DerivedLayout, Ldag: np.ndarray) -> np.ndarray:
    alpha, gamma = traj.params.alpha, traj.params.gamma
    delta = traj.x - derived.epsilon
    e = traj.xi - integral_shift(derived, Ldag, alpha)
    return 0.5 * np.sum(delta * delta, axis=1) + 0.5 / gamma * np.sum(e * e, axis=1)


def settling_time(times: np.ndarray, norms: np.ndarray, tol: float) -> float | None:
    """First sample time after which every norm stays below ``tol``."""
    below = norms < tol
    if not below[-1]:
        return None
    above = np.flatnonzero(~below)
    return float(times[0]) if above.size == 0 else float(times[above[-1] + 1])


def tail_decay_slope(traj: Trajectory, derived: DerivedLayout) -> float | None:
    """
    Least-squares slope of log |delta|_2 over the tail half of the run.

    Samples already at the floating-point floor are dropped; fewer than three
    remaining samples give None.
    """
    norms = np.linalg.norm(traj.x - derived.epsilon, axis=1)
    tail = slice(len(traj) // 2, None)
    times, norms = traj.times[tail], norms[tail]
    usable = norms > DECAY_FLOOR * (1.0 + abs(derived.epsilon))
    if np.count_nonzero(usable) < 3:
        return None
    slope, _ = np.polyfit(times[usable], np.log(norms[usable]), 1)
    return float(slope)


def certify(g: Graph, layout: InputLayout, traj: Trajectory | None,
            tol_settle: float = DEFAULT_TOL_SETTLE, params: ProtocolParams | None = None) -> CertificateReport:
    """
    Check the convergence hypotheses and the settling of a run.

    Failures are data: a disconnected graph shows up as lambda2 <= 1e-8, an
    unsettled run as ``settled = False``. ``traj`` may be None for a spectral-only report,
    whose gains then come from ``params`` (unit gains when absent).
    """
    L = laplacian(g)
    derived = build_derived(layout)
    F = L + derived.K1
    laplacian_eigenvalues, _ = symmetric_eigendecomposition(L)
    lambda2 = float(laplacian_eigenvalues[1]) if g.n > 1 else 0.0
    lambda_min_F = float(symmetric_eigendecomposition(F)[0][0])
    params = traj.params if traj is not None else params
    alpha = params.alpha if params is not None else 1.0
    gamma = params.gamma if params is not None else 1.0
    spectrum = closed_loop_spectrum(L, F, alpha, gamma)

    report = CertificateReport(
        lambda2=lambda2,
        lambda_min_F=lambda_min_F,
        closed_loop_spectrum=spectrum,
        V_samples=np.empty(0),
        settled=False,
        settling_time=None,
        epsilon=derived.epsilon,
        alpha=alpha,
        gamma=gamma,
        tol_settle=tol_settle,
    )
    if g.n > 1 and not report.connected:
        report.notes.append("graph is disconnected (lambda2 <= 1e-8)")
    if not report.positive_definite:
        report.notes.append("F = L + K1 is not positive definite")
    if traj is None:
        return report

    Ldag = laplacian_pseudoinverse(L)
    V = lyapunov_samples(traj, derived, Ldag)
    norms = delta_inf_norms(traj, derived.epsilon)
    report.V_samples = V
    report.max_V_increase = float(np.max(np.diff(V))) if V.size > 1 else 0.0
    report.final_delta_inf = float(norms[-1])
    report.final_e_norm = float(np.linalg.norm(traj.xi[-1] - integral_shift(derived, Ldag, alpha)))
    report.settled = bool(norms[-1] < tol_settle)
    report.settling_time = settling_time(traj.times, norms, tol_settle)
    report.tail_decay_slope = tail_decay_slope(traj, derived)
    if not report.settled:
        report.notes.append(f"|delta(t_final)|_inf = {norms[-1]:.3e} is not below {tol_settle:g}")
    return report

"""Combiner weights for selection, equal-gain and maximal-ratio combining.

The closed-form rules work on arrays whose last axis is the antenna axis, so the
Monte Carlo engine can apply them to a whole batch of trials at once. The
public ``weights_*`` functions wrap a single realization into a
:class:`WeightVector`.

:func:`solve_p2` maximizes the net obtained power

    eta * P_t * |sum_k w_k h_k|^2 - beta * sum_k |w_k|^2 - P_d

over the ball ``sum_k |w_k|^2 <= budget`` by projected gradient ascent.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .channel import ChannelRealization, as_coefficients

FEASIBILITY_SLACK = 1e-12


class CombinerKind(str, enum.Enum):
    SC = "SC"
    EGC = "EGC"
    MRC = "MRC"
    NUMERIC_P2 = "NumericP2"

    @classmethod
    def parse(cls, name) -> "CombinerKind":
        if isinstance(name, cls):
            return name
        key = str(name).strip().lower()
        for kind in cls:
            if kind.value.lower() == key or kind.name.lower() == key:
                return kind
        raise ValueError(f"unknown combining technique {name!r}")


CLOSED_FORM_KINDS = (CombinerKind.SC, CombinerKind.EGC, CombinerKind.MRC)


@dataclass(frozen=True)
class WeightVector:
    """Complex combiner weights with their power budget ``xi``."""

    weights: np.ndarray = field(repr=False)
    budget: float = 1.0

    def __post_init__(self):
        w = np.array(self.weights, dtype=complex).reshape(-1)
        if not (np.isfinite(self.budget) and self.budget > 0):
            raise ValueError(f"budget must be positive, got {self.budget}")
        if not np.all(np.isfinite(w)):
            raise ValueError("weights must be finite")
        if np.sum(np.abs(w) ** 2) > self.budget + FEASIBILITY_SLACK:
            raise ValueError(f"weight power {np.sum(np.abs(w) ** 2):.6g} exceeds budget {self.budget:.6g}")
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)

    @property
    def power(self) -> float:
        """Total weight power ``P_w = sum |w_k|^2``."""
        return float(np.sum(np.abs(self.weights) ** 2))

    def __len__(self):
        return self.weights.size

    def __repr__(self):
        return f"WeightVector({np.array2string(self.weights, precision=4)}, budget={self.budget})"


# -- batched closed forms (last axis = antennas) ----------------------------


def sc_weights(h: np.ndarray) -> np.ndarray:
    h = np.asarray(h, dtype=complex)
    # argmax returns the first maximum, which gives the lowest-index tie break
    best = np.argmax(np.abs(h) ** 2, axis=-1)
    w = np.zeros(h.shape, dtype=complex)
    np.put_along_axis(w, best[..., None], 1.0, axis=-1)
    return w


def egc_weights(h: np.ndarray) -> np.ndarray:
    h = np.asarray(h, dtype=complex)
    k = h.shape[-1]
    # np.angle(0) == 0, so a dead branch gets a zero-phase weight
    return np.exp(-1j * np.angle(h)) / math.sqrt(k)


def mrc_weights(h: np.ndarray) -> np.ndarray:
    h = np.asarray(h, dtype=complex)
    # rescale by the largest amplitude so |h|^2 cannot underflow
    peak = np.max(np.abs(h), axis=-1, keepdims=True)
    hs = h / np.where(peak > 0, peak, 1.0)
    norm = np.sqrt(np.sum(np.abs(hs) ** 2, axis=-1, keepdims=True))
    return np.where(peak > 0, np.conj(hs) / np.where(peak > 0, norm, 1.0), 0.0)


def combined_power(h: np.ndarray, w: np.ndarray) -> np.ndarray:
    """Batched ``|sum_k w_k h_k|^2`` along the last axis."""
    return np.abs(np.sum(np.asarray(w) * np.asarray(h), axis=-1)) ** 2


_RULES = {CombinerKind.SC: sc_weights, CombinerKind.EGC: egc_weights, CombinerKind.MRC: mrc_weights}


def batch_weights(kind: CombinerKind, h: np.ndarray) -> np.ndarray:
    try:
        return _RULES[CombinerKind.parse(kind)](h)
    except KeyError:
        raise ValueError(f"{kind} has no closed-form weight rule") from None


# -- single-realization API --------------------------------------------------


def weights_sc(channel) -> WeightVector:
    """Unit weight on the strongest branch; ties go to the lowest index."""
    return WeightVector(sc_weights(as_coefficients(channel)))


def weights_egc(channel) -> WeightVector:
    """Co-phase every branch with magnitude ``1/sqrt(K)``."""
    return WeightVector(egc_weights(as_coefficients(channel)))


def weights_mrc(channel) -> WeightVector:
    """Conjugate-matched weights ``h_k^* / ||h||``.

    The combined signal ``sum w_k h_k = ||h||`` is real and non-negative. A
    zero channel yields the all-zero weight vector.
    """
    return WeightVector(mrc_weights(as_coefficients(channel)))


def weights_for(kind, channel) -> WeightVector:
    kind = CombinerKind.parse(kind)
    if kind is CombinerKind.NUMERIC_P2:
        raise ValueError("numeric weights need a P2Problem; use solve_p2")
    return WeightVector(_RULES[kind](as_coefficients(channel)))


def selected_branch(channel) -> int:
    """Index picked by selection combining."""
    return int(np.argmax(np.abs(as_coefficients(channel)) ** 2))


def combined_signal_power(channel, weights) -> float:
    """Return ``|sum_k w_k h_k|^2`` for one realization."""
    h = as_coefficients(channel)
    w = weights.weights if isinstance(weights, WeightVector) else np.asarray(weights, dtype=complex)
    if h.shape != w.shape:
        raise ValueError(f"channel has {h.size} branches but weights have {w.size}")
    return float(np.abs(np.dot(w, h)) ** 2)


# -- numerical solution of the constrained problem --------------------------


@dataclass(frozen=True)
class P2Problem:
    """Budget-constrained net-power maximization for one channel realization."""

    channel: ChannelRealization
    efficiency: float = 1.0
    transmit_power: float = 1.0
    beta: float = 0.0
    fixed_power: float = 0.0
    budget: float = 1.0

    def __post_init__(self):
        if not isinstance(self.channel, ChannelRealization):
            object.__setattr__(self, "channel", ChannelRealization(self.channel))
        if not 0 < self.efficiency <= 1:
            raise ValueError(f"efficiency must be in (0, 1], got {self.efficiency}")
        for name in ("transmit_power", "beta", "fixed_power"):
            value = getattr(self, name)
            if not (np.isfinite(value) and value >= 0):
                raise ValueError(f"{name} must be >= 0, got {value}")
        if not (np.isfinite(self.budget) and self.budget > 0):
            raise ValueError(f"budget must be positive, got {self.budget}")

    def objective(self, weights) -> float:
        w = weights.weights if isinstance(weights, WeightVector) else np.asarray(weights, dtype=complex)
        gain = self.efficiency * self.transmit_power
        return float(
            gain * combined_signal_power(self.channel, w) - self.beta * np.sum(np.abs(w) ** 2) - self.fixed_power
        )

    def analytic_optimum(self) -> float:
        """Closed-form optimum: budget-saturating scaled MRC, or switching off."""
        gain = self.efficiency * self.transmit_power
        h2 = float(np.sum(self.channel.power_gains))
        return max(gain * self.budget * h2 - self.beta * self.budget, 0.0) - self.fixed_power


class P2ConvergenceError(RuntimeError):
    """The optimizer ran out of iterations. Carries its best iterate."""

    def __init__(self, message, weights, objective, feasibility_gap, gradient_norm):
        super().__init__(message)
        self.weights = weights
        self.objective = objective
        self.feasibility_gap = feasibility_gap
        self.gradient_norm = gradient_norm


@dataclass(frozen=True)
class P2Solution:
    weights: WeightVector
    objective: float
    iterations: int
    gradient_norm: float

    def __iter__(self):
        # unpacks as (weights, objective)
        return iter((self.weights, self.objective))


_SUFFICIENT_INCREASE = 1e-4
_NONMONOTONE_MEMORY = 10
_STEP_BOUNDS = (1e-10, 1e10)


def _project(u):
    n = np.linalg.norm(u)
    return u / n if n > 1.0 else u


def solve_p2(problem: P2Problem, tolerance: float = 1e-10, max_iterations: int = 100_000) -> P2Solution:
    """Maximize the net obtained power over the weight-power ball.

    Projected gradient ascent over the 2K real parameters. Trial steps use the
    Barzilai-Borwein length, accepted by a backtracking nonmonotone line
    search along the projected direction (spectral projected gradient). The
    problem is rescaled so the weights live in the unit ball and the variable
    part of the objective is O(1); ``tolerance`` applies to that rescaled
    problem.

    Returns
    -------
    P2Solution
        Unpacks as ``(weights, objective)``.

    Raises
    ------
    P2ConvergenceError
        If neither stopping rule fires within ``max_iterations``.
    """
    if tolerance <= 0:
        raise ValueError("tolerance must be positive")
    h = problem.channel.coefficients
    xi = problem.budget
    gain = problem.efficiency * problem.transmit_power
    h_norm = float(np.linalg.norm(h))

    if gain * h_norm == 0.0:
        w = WeightVector(np.zeros_like(h), xi)
        return P2Solution(w, problem.objective(w), 0, 0.0)

    # objective = scale * (alpha |hn . u|^2 - b |u|^2) - P_d with w = sqrt(xi) u
    scale = gain * xi * h_norm**2 + problem.beta * xi
    alpha = gain * xi * h_norm**2 / scale
    b = problem.beta * xi / scale
    hn = h / h_norm

    def value(u):
        return alpha * abs(np.dot(hn, u)) ** 2 - b * np.vdot(u, u).real

    def grad(u):
        return 2.0 * (alpha * np.conj(hn) * np.dot(hn, u) - b * u)

    lo, hi = _STEP_BOUNDS
    u = egc_weights(h)
    f = value(u)
    g = grad(u)
    history = [f]
    step = 1.0 / (2.0 * max(alpha, b))
    pg_norm = math.inf

    for it in range(1, max_iterations + 1):
        pg_norm = float(np.linalg.norm(_project(u + g) - u))
        if pg_norm < tolerance:
            break
        d = _project(u + step * g) - u
        slope = np.vdot(g, d).real
        reference = min(history)
        tau = 1.0
        while True:
            u_new = u + tau * d
            f_new = value(u_new)
            if f_new >= reference + _SUFFICIENT_INCREASE * tau * slope or tau < 1e-12:
                break
            tau *= 0.5
        g_new = grad(u_new)
        s_k = u_new - u
        curvature = -np.vdot(s_k, g_new - g).real
        step = min(max(np.vdot(s_k, s_k).real / curvature, lo), hi) if curvature > 0 else hi
        change = f_new - f
        u, f, g = u_new, f_new, g_new
        history = (history + [f])[-_NONMONOTONE_MEMORY:]
        if abs(change) < tolerance * (1.0 + abs(f)) and float(np.linalg.norm(s_k)) < tolerance:
            break
    else:
        w = np.sqrt(xi) * u
        raise P2ConvergenceError(
            f"projected gradient ascent did not converge in {max_iterations} iterations",
            weights=w,
            objective=problem.objective(w),
            feasibility_gap=max(float(np.sum(np.abs(w) ** 2)) - xi, 0.0),
            gradient_norm=pg_norm,
        )

    w = np.sqrt(xi) * u
    # rounding in the projection can leave |w|^2 a few ulps above the budget
    excess = float(np.sum(np.abs(w) ** 2))
    if excess > xi:
        w *= math.sqrt(xi / excess)
    weights = WeightVector(w, xi)
    return P2Solution(weights, problem.objective(weights), it, pg_norm)

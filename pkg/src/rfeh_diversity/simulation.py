"""Monte Carlo estimates of mean harvested and net power versus transmit power.

Harvested and net power are affine in ``P_t`` for a fixed channel, so one pass
over the trials is enough: for every technique we accumulate the joint first
and second moments of the per-trial combined power ``|sum w_k h_k|^2``, weight
power ``P_w`` and fixed draw ``P_d``. Means and confidence intervals at any
``P_t`` (and for paired differences between techniques) follow from those
moments.

Trials are processed in chunks of whole channel blocks whose boundaries do not
depend on the number of workers, and chunk statistics are merged in chunk
order, so threaded and serial runs give bit-identical results.
"""

from __future__ import annotations

import enum
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

import numpy as np
from scipy import stats

from .channel import BLOCK_SIZE, ChannelConfig, Distribution, UnsupportedDistributionError, harmonic_number, sample_channels
from .combining import CLOSED_FORM_KINDS, CombinerKind, batch_weights, combined_power
from .power import ConsumptionProfile, HarvesterConfig, reference_profiles

CHUNK_TRIALS = 16 * BLOCK_SIZE
Z95 = float(stats.norm.ppf(0.975))


class Mode(str, enum.Enum):
    ANALYTIC = "analytic"
    MONTE_CARLO = "mc"

    @classmethod
    def parse(cls, value) -> "Mode":
        if isinstance(value, cls):
            return value
        key = str(value).strip().lower()
        if key in ("mc", "monte_carlo", "monte-carlo"):
            return cls.MONTE_CARLO
        return cls(key)


class NoSignChangeError(ValueError):
    """The bracket does not contain a zero crossing."""

    def __init__(self, message="no zero crossing in bracket"):
        super().__init__(message)


@dataclass(frozen=True)
class ExperimentSpec:
    channel: ChannelConfig
    harvester: HarvesterConfig = field(default_factory=HarvesterConfig)
    profiles: Mapping[CombinerKind, ConsumptionProfile] = field(default_factory=reference_profiles)
    techniques: tuple = CLOSED_FORM_KINDS
    transmit_powers: tuple = (1.0,)
    trials: int = 1_000_000
    seed: int = 0

    def __post_init__(self):
        techniques = tuple(CombinerKind.parse(t) for t in self.techniques)
        if not techniques:
            raise ValueError("at least one technique is required")
        for kind in techniques:
            if kind not in CLOSED_FORM_KINDS:
                raise ValueError(f"{kind.value} cannot be swept; choose from SC, EGC, MRC")
            if kind not in self.profiles:
                raise ValueError(f"no consumption profile for {kind.value}")
        object.__setattr__(self, "techniques", techniques)
        grid = tuple(float(p) for p in self.transmit_powers)
        if not grid:
            raise ValueError("transmit power grid is empty")
        if any(p < 0 for p in grid) or any(b <= a for a, b in zip(grid, grid[1:])):
            raise ValueError("transmit power grid must be non-negative and strictly increasing")
        object.__setattr__(self, "transmit_powers", grid)
        if int(self.trials) < 1:
            raise ValueError("trials must be >= 1")
        object.__setattr__(self, "trials", int(self.trials))
        if not 0 <= int(self.seed) < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")
        object.__setattr__(self, "seed", int(self.seed))


# -- closed-form expectations -------------------------------------------------


def analytic_mean_powers(technique, num_antennas, path_loss, efficiency, transmit_power, profile, distribution=Distribution.RAYLEIGH):
    """Mean harvested and net power over Rayleigh fading.

    MRC collects ``K PL``, EGC ``PL (1 + (K-1) pi/4)`` and SC ``PL H_K`` per
    unit of ``eta P_t``. Every closed-form technique uses unit weight power.
    """
    if Distribution(distribution) is not Distribution.RAYLEIGH:
        raise UnsupportedDistributionError(f"no closed form for {distribution}")
    kind = CombinerKind.parse(technique)
    k, pl = int(num_antennas), float(path_loss)
    if kind is CombinerKind.MRC:
        gain = k * pl
    elif kind is CombinerKind.EGC:
        gain = pl * (1.0 + (k - 1) * math.pi / 4.0)
    elif kind is CombinerKind.SC:
        gain = pl * harmonic_number(k)
    else:
        raise ValueError(f"no closed-form mean for {kind.value}")
    harvested = efficiency * transmit_power * gain
    net = harvested - profile.beta * 1.0 - profile.fixed_power(k)
    return harvested, net


def _analytic(spec: ExperimentSpec, kind: CombinerKind, transmit_power: float):
    return analytic_mean_powers(
        kind, spec.channel.num_antennas, spec.channel.path_loss, spec.harvester.efficiency,
        transmit_power, spec.profiles[kind], spec.channel.distribution,
    )


# -- moment accumulation ------------------------------------------------------


@dataclass
class _Moments:
    count: int
    mean: np.ndarray
    m2: np.ndarray  # sum of outer products of deviations

    @classmethod
    def of(cls, x: np.ndarray) -> "_Moments":
        mean = x.mean(axis=0)
        dev = x - mean
        return cls(x.shape[0], mean, dev.T @ dev)

    def merge(self, other: "_Moments") -> "_Moments":
        n = self.count + other.count
        delta = other.mean - self.mean
        mean = self.mean + delta * (other.count / n)
        m2 = self.m2 + other.m2 + np.outer(delta, delta) * (self.count * other.count / n)
        return _Moments(n, mean, m2)


def _trial_features(spec: ExperimentSpec, h: np.ndarray) -> np.ndarray:
    """Per-trial columns ``(|sum w h|^2, P_w, P_d)`` for every swept technique."""
    k = spec.channel.num_antennas
    cols = []
    for kind in spec.techniques:
        w = batch_weights(kind, h)
        cols.append(combined_power(h, w))
        cols.append(np.sum(np.abs(w) ** 2, axis=-1))
        # SC charges the selected branch; all branches share one P_f
        cols.append(np.full(h.shape[0], spec.profiles[kind].fixed_power(k)))
    return np.column_stack(cols)


def _chunk_moments(spec: ExperimentSpec, start: int, stop: int) -> _Moments:
    h = sample_channels(spec.channel, spec.seed, start, stop)
    return _Moments.of(_trial_features(spec, h))


@dataclass(frozen=True)
class TrialStatistics:
    """Moments of the per-trial features; evaluates MC means at any ``P_t``."""

    spec: ExperimentSpec
    moments: _Moments

    @property
    def trials(self) -> int:
        return self.moments.count

    def _coefficients(self, kind, transmit_power: float, net: bool) -> np.ndarray:
        kind = CombinerKind.parse(kind)
        i = 3 * self.spec.techniques.index(kind)
        a = np.zeros(self.moments.mean.size)
        a[i] = self.spec.harvester.efficiency * transmit_power
        if net:
            a[i + 1] = -self.spec.profiles[kind].beta
            a[i + 2] = -1.0
        return a

    def _estimate(self, a: np.ndarray) -> tuple[float, float]:
        n = self.moments.count
        mean = float(a @ self.moments.mean)
        if n < 2:
            return mean, math.inf
        var = max(float(a @ self.moments.m2 @ a) / (n - 1), 0.0)
        return mean, Z95 * math.sqrt(var / n)

    def harvested(self, kind, transmit_power: float) -> tuple[float, float]:
        """Mean harvested power and its 95% CI half-width."""
        return self._estimate(self._coefficients(kind, transmit_power, net=False))

    def net(self, kind, transmit_power: float) -> tuple[float, float]:
        return self._estimate(self._coefficients(kind, transmit_power, net=True))

    def net_difference(self, kind_a, kind_b, transmit_power: float) -> tuple[float, float]:
        """Paired estimate of ``net(a) - net(b)`` on common channel draws."""
        a = self._coefficients(kind_a, transmit_power, True) - self._coefficients(kind_b, transmit_power, True)
        return self._estimate(a)


def collect_statistics(spec: ExperimentSpec, workers: int = 1) -> TrialStatistics:
    """Run all trials of ``spec`` and return their merged moments."""
    bounds = [(s, min(s + CHUNK_TRIALS, spec.trials)) for s in range(0, spec.trials, CHUNK_TRIALS)]
    if workers > 1 and len(bounds) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(lambda b: _chunk_moments(spec, *b), bounds))
    else:
        parts = [_chunk_moments(spec, *b) for b in bounds]
    total = parts[0]
    for part in parts[1:]:
        total = total.merge(part)
    return TrialStatistics(spec, total)


# -- sweeps -----------------------------------------------------------------------


@dataclass(frozen=True)
class SweepRow:
    technique: CombinerKind
    num_antennas: int
    transmit_power: float
    mean_harvested: float
    mean_net: float
    ci_halfwidth_95: float
    harvested_ci_halfwidth_95: float
    analytic_mean_harvested: float | None
    analytic_mean_net: float | None
    trials_used: int
    seed: int


@dataclass(frozen=True)
class SweepResult:
    spec: ExperimentSpec
    rows: tuple

    def row(self, technique, transmit_power: float) -> SweepRow:
        kind = CombinerKind.parse(technique)
        for r in self.rows:
            if r.technique is kind and r.transmit_power == transmit_power:
                return r
        raise KeyError((kind, transmit_power))

    def curve(self, technique, attr: str = "mean_harvested") -> np.ndarray:
        kind = CombinerKind.parse(technique)
        return np.array([getattr(r, attr) for r in self.rows if r.technique is kind])


def run_sweep(spec: ExperimentSpec, workers: int = 1) -> SweepResult:
    """Monte Carlo means with 95% normal CIs for every technique and grid point.

    All techniques see the same channel draw at a given trial index. The
    ``ci_halfwidth_95`` field refers to the mean net power.
    """
    st = collect_statistics(spec, workers)
    rayleigh = spec.channel.distribution is Distribution.RAYLEIGH
    rows = []
    for kind in spec.techniques:
        for pt in spec.transmit_powers:
            mh, ci_h = st.harvested(kind, pt)
            mn, ci_n = st.net(kind, pt)
            ah, an = _analytic(spec, kind, pt) if rayleigh else (None, None)
            rows.append(SweepRow(kind, spec.channel.num_antennas, pt, mh, mn, ci_n, ci_h, ah, an, st.trials, spec.seed))
    return SweepResult(spec, tuple(rows))


# -- root finding -------------------------------------------------------------


@dataclass(frozen=True)
class RootResult:
    """A transmit power where a mean-power curve crosses zero.

    ``lower`` and ``upper`` bracket the crossing; in Monte Carlo mode the
    curve's sign is statistically resolved at both ends.
    """

    root: float
    residual: float
    lower: float
    upper: float
    mode: Mode


def bisect(f: Callable[[float], float], lo: float, hi: float, xtol: float = 1e-10, max_iter: int = 200):
    """Plain bisection. Returns ``(root, lower, upper)``."""
    f_lo, f_hi = f(lo), f(hi)
    if f_lo == 0 and f_hi != 0:
        return lo, lo, lo
    if f_hi == 0 and f_lo != 0:
        return hi, hi, hi
    if not (np.sign(f_lo) * np.sign(f_hi) < 0):
        raise NoSignChangeError()
    for _ in range(max_iter):
        if hi - lo <= xtol:
            break
        mid = 0.5 * (lo + hi)
        f_mid = f(mid)
        if f_mid == 0:
            return mid, mid, mid
        if np.sign(f_mid) == np.sign(f_lo):
            lo, f_lo = mid, f_mid
        else:
            hi = mid
    return 0.5 * (lo + hi), lo, hi


def _mc_bisect(estimate: Callable[[float], tuple[float, float]], lo: float, hi: float, min_width: float = 1e-3):
    m_lo, m_hi = estimate(lo)[0], estimate(hi)[0]
    if not (np.sign(m_lo) * np.sign(m_hi) < 0):
        raise NoSignChangeError()
    sign_lo = np.sign(m_lo)

    def resolved(pt):
        mean, ci = estimate(pt)
        return abs(mean) > ci

    while hi - lo >= min_width:
        mid = 0.5 * (lo + hi)
        mean, ci = estimate(mid)
        if abs(mean) <= ci:
            # sign at the midpoint is not resolved at 95%; shrink the bracket
            # to the edges of the unresolved band and stop there
            lo = _edge(resolved, lo, mid, min_width)
            hi = _edge(resolved, hi, mid, min_width)
            return mid, lo, hi
        if np.sign(mean) == sign_lo:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi), lo, hi


def _edge(resolved, outer: float, inner: float, width: float) -> float:
    """Move ``outer`` toward ``inner`` while the sign stays resolved."""
    while abs(inner - outer) >= width:
        mid = 0.5 * (outer + inner)
        if resolved(mid):
            outer = mid
        else:
            inner = mid
    return outer


def _bracket(spec: ExperimentSpec, bracket):
    lo, hi = (spec.transmit_powers[0], spec.transmit_powers[-1]) if bracket is None else map(float, bracket)
    if not lo < hi:
        raise ValueError(f"bracket must satisfy low < high, got [{lo}, {hi}]")
    return lo, hi


def _solve(analytic_fn, mc_fn, spec, bracket, mode, xtol, workers):
    mode = Mode.parse(mode)
    lo, hi = _bracket(spec, bracket)
    if mode is Mode.ANALYTIC:
        root, a, b = bisect(analytic_fn, lo, hi, xtol=xtol)
        return RootResult(root, analytic_fn(root), a, b, mode)
    st = collect_statistics(spec, workers)
    estimate = lambda pt: mc_fn(st, pt)  # noqa: E731
    root, a, b = _mc_bisect(estimate, lo, hi)
    return RootResult(root, estimate(root)[0], a, b, mode)


def find_no_harvesting_boundary(technique, spec: ExperimentSpec, mode=Mode.ANALYTIC, bracket=None, xtol=1e-10, workers=1) -> RootResult:
    """Transmit power where the mean net power of ``technique`` turns positive.

    Raises
    ------
    NoSignChangeError
        If the mean net power has the same sign at both bracket ends.
    """
    kind = CombinerKind.parse(technique)
    if kind not in spec.techniques:
        spec = _with_techniques(spec, (kind,))
    return _solve(
        lambda pt: _analytic(spec, kind, pt)[1],
        lambda st, pt: st.net(kind, pt),
        spec, bracket, mode, xtol, workers,
    )


@dataclass(frozen=True)
class CrossoverQuery:
    technique_a: CombinerKind
    technique_b: CombinerKind
    bracket: tuple
    mode: Mode = Mode.ANALYTIC

    def __post_init__(self):
        object.__setattr__(self, "technique_a", CombinerKind.parse(self.technique_a))
        object.__setattr__(self, "technique_b", CombinerKind.parse(self.technique_b))
        object.__setattr__(self, "mode", Mode.parse(self.mode))
        lo, hi = map(float, self.bracket)
        if not lo < hi:
            raise ValueError(f"bracket must satisfy low < high, got [{lo}, {hi}]")
        object.__setattr__(self, "bracket", (lo, hi))


def find_crossover(query: CrossoverQuery, spec: ExperimentSpec, xtol=1e-10, workers=1) -> RootResult:
    """Transmit power where the mean net powers of two techniques are equal."""
    a, b = query.technique_a, query.technique_b
    missing = tuple(k for k in (a, b) if k not in spec.techniques)
    if missing:
        spec = _with_techniques(spec, spec.techniques + tuple(dict.fromkeys(missing)))
    return _solve(
        lambda pt: _analytic(spec, a, pt)[1] - _analytic(spec, b, pt)[1],
        lambda st, pt: st.net_difference(a, b, pt),
        spec, query.bracket, query.mode, xtol, workers,
    )


def _with_techniques(spec: ExperimentSpec, techniques: Sequence[CombinerKind]) -> ExperimentSpec:
    profiles = dict(spec.profiles)
    defaults = reference_profiles()
    for k in techniques:
        profiles.setdefault(k, defaults[k])
    return ExperimentSpec(spec.channel, spec.harvester, profiles, tuple(techniques), spec.transmit_powers, spec.trials, spec.seed)

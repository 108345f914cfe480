"""Flat-fading channel realizations for a single-transmitter, K-antenna receiver.

Trials are generated in fixed-size blocks. The generator for block ``b`` is
seeded from ``SeedSequence(seed, spawn_key=(b,))``, so the coefficients of any
trial depend only on ``(config, seed, trial_index)`` and never on how trials
are split across calls or workers.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

MAX_ANTENNAS = 1024

#: Trials per generator block. Changing it changes every sampled stream.
BLOCK_SIZE = 4096


class Distribution(str, enum.Enum):
    RAYLEIGH = "rayleigh"


class UnsupportedDistributionError(ValueError):
    """Raised when a closed form is requested for a fading family without one."""


@dataclass(frozen=True)
class ChannelConfig:
    """Statistics of the K receive branches.

    Parameters
    ----------
    num_antennas : int
        Number of receive antennas ``K`` (1..1024).
    path_loss : float
        Mean channel power gain ``E[|h_k|^2]``.
    noise_variance : float
        AWGN variance in watts. Carried for completeness; no power formula uses it.
    distribution : Distribution
        Fading family of each coefficient.
    """

    num_antennas: int
    path_loss: float = 1e-3
    noise_variance: float = 0.0
    distribution: Distribution = Distribution.RAYLEIGH

    def __post_init__(self):
        if isinstance(self.num_antennas, bool) or int(self.num_antennas) != self.num_antennas:
            raise ValueError(f"num_antennas must be an integer, got {self.num_antennas!r}")
        object.__setattr__(self, "num_antennas", int(self.num_antennas))
        if not 1 <= self.num_antennas <= MAX_ANTENNAS:
            raise ValueError(f"num_antennas must be in [1, {MAX_ANTENNAS}], got {self.num_antennas}")
        if not (np.isfinite(self.path_loss) and self.path_loss > 0):
            raise ValueError(f"path_loss must be positive and finite, got {self.path_loss}")
        if not (np.isfinite(self.noise_variance) and self.noise_variance >= 0):
            raise ValueError(f"noise_variance must be >= 0, got {self.noise_variance}")
        object.__setattr__(self, "distribution", Distribution(self.distribution))


@dataclass(frozen=True)
class ChannelRealization:
    """One draw of the K complex coefficients ``h_k = |h_k| exp(j theta_k)``."""

    coefficients: np.ndarray = field(repr=False)

    def __post_init__(self):
        h = np.array(self.coefficients, dtype=complex).reshape(-1)
        if h.size == 0:
            raise ValueError("a channel needs at least one coefficient")
        if not np.all(np.isfinite(h)):
            raise ValueError("channel coefficients must be finite")
        h.setflags(write=False)
        object.__setattr__(self, "coefficients", h)

    @property
    def num_antennas(self) -> int:
        return self.coefficients.size

    @property
    def amplitudes(self) -> np.ndarray:
        return np.abs(self.coefficients)

    @property
    def phases(self) -> np.ndarray:
        return np.angle(self.coefficients)

    @property
    def power_gains(self) -> np.ndarray:
        return np.abs(self.coefficients) ** 2

    def __len__(self):
        return self.coefficients.size

    def __repr__(self):
        return f"ChannelRealization({np.array2string(self.coefficients, precision=4)})"


@dataclass(frozen=True)
class SignalModel:
    """Transmit side: average power ``P_t`` and a unit-power symbol."""

    transmit_power: float
    symbol_power: float = 1.0

    def __post_init__(self):
        if not (np.isfinite(self.transmit_power) and self.transmit_power >= 0):
            raise ValueError(f"transmit_power must be >= 0, got {self.transmit_power}")
        if self.symbol_power != 1.0:
            raise ValueError("the transmitted symbol is normalized to unit power")


def as_coefficients(channel) -> np.ndarray:
    """Return the coefficient array of a realization, or coerce an array-like."""
    if isinstance(channel, ChannelRealization):
        return channel.coefficients
    return np.asarray(channel, dtype=complex)


def _block_generator(seed: int, block: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(int(seed), spawn_key=(int(block),))))


def _sample_block(config: ChannelConfig, seed: int, block: int) -> np.ndarray:
    if config.distribution is not Distribution.RAYLEIGH:
        raise UnsupportedDistributionError(config.distribution)
    z = _block_generator(seed, block).standard_normal((BLOCK_SIZE, config.num_antennas, 2))
    # circularly-symmetric: each quadrature carries half of the mean power
    return np.sqrt(config.path_loss / 2.0) * (z[..., 0] + 1j * z[..., 1])


def sample_channels(config: ChannelConfig, seed: int, start: int, stop: int) -> np.ndarray:
    """Coefficients for trials ``start, ..., stop - 1`` as a ``(stop - start, K)`` array.

    Row ``i`` is bit-identical to ``sample_channel(config, seed, start + i)``.
    """
    if not 0 <= start <= stop:
        raise ValueError(f"invalid trial range [{start}, {stop})")
    out = np.empty((stop - start, config.num_antennas), dtype=complex)
    pos = start
    while pos < stop:
        block, offset = divmod(pos, BLOCK_SIZE)
        take = min(BLOCK_SIZE - offset, stop - pos)
        out[pos - start : pos - start + take] = _sample_block(config, seed, block)[offset : offset + take]
        pos += take
    return out


def sample_channel(config: ChannelConfig, seed: int, trial_index: int) -> ChannelRealization:
    """Draw the channel of one trial.

    Each coefficient is zero-mean circularly-symmetric complex Gaussian with
    ``E[|h_k|^2] = path_loss``, so amplitudes are Rayleigh and phases uniform.
    """
    if seed < 0 or trial_index < 0:
        raise ValueError("seed and trial_index must be non-negative")
    return ChannelRealization(sample_channels(config, seed, trial_index, trial_index + 1)[0])


def harmonic_number(k: int) -> float:
    return float(sum(Fraction(1, i) for i in range(1, k + 1)))


def mean_channel_statistics(config: ChannelConfig) -> tuple[float, float, float]:
    """Closed-form ``(E[sum |h_k|^2], E[(sum |h_k|)^2], E[max_k |h_k|^2])``.

    The last term uses that ``|h_k|^2`` is exponential with mean ``path_loss``,
    whose maximum over K i.i.d. copies has mean ``path_loss * H_K``.
    """
    if config.distribution is not Distribution.RAYLEIGH:
        raise UnsupportedDistributionError(f"no closed form for {config.distribution.value}")
    k, pl = config.num_antennas, config.path_loss
    sum_power = k * pl
    sum_amplitude_sq = k * pl + k * (k - 1) * pl * np.pi / 4.0
    max_power = pl * harmonic_number(k)
    return sum_power, sum_amplitude_sq, max_power

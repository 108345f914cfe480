"""Harvested power, circuit consumption and net obtained power.

All quantities are SI (watts, joules, seconds). ``beta`` multiplies the
dimensionless weight power ``P_w = sum |w_k|^2`` and is therefore in watts.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel import as_coefficients
from .combining import CombinerKind, WeightVector, combined_signal_power

MILLIWATT = 1e-3


@dataclass(frozen=True)
class HarvesterConfig:
    """RF-to-DC efficiency ``eta`` and harvesting time ``T``."""

    efficiency: float = 1.0
    harvest_time: float = 1.0

    def __post_init__(self):
        if not 0 < self.efficiency <= 1:
            raise ValueError(f"efficiency must be in (0, 1], got {self.efficiency}")
        if not (np.isfinite(self.harvest_time) and self.harvest_time > 0):
            raise ValueError(f"harvest_time must be positive, got {self.harvest_time}")


@dataclass(frozen=True)
class ConsumptionProfile:
    """Circuit draw of one combining technique.

    Parameters
    ----------
    kind : CombinerKind
    beta : float
        Watts per unit of weight power. Must be 0 for selection combining.
    branch_power : float
        Constant draw ``P_f`` of each antenna branch, watts.
    summation_power : float
        Draw ``P_s`` of the summation unit, watts. Not charged to SC.
    """

    kind: CombinerKind
    beta: float = 0.0
    branch_power: float = 0.0
    summation_power: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "kind", CombinerKind.parse(self.kind))
        for name in ("beta", "branch_power", "summation_power"):
            value = getattr(self, name)
            if not (np.isfinite(value) and value >= 0):
                raise ValueError(f"{name} must be >= 0, got {value}")
        if self.kind is CombinerKind.SC and self.beta != 0:
            raise ValueError("selection combining generates no weight signals; beta must be 0")

    def fixed_power(self, num_antennas: int) -> float:
        """``P_d``: every branch plus the summer, or the one selected branch for SC."""
        if self.kind is CombinerKind.SC:
            return self.branch_power
        return num_antennas * self.branch_power + self.summation_power


def reference_profiles() -> dict[CombinerKind, ConsumptionProfile]:
    """Circuit parameters of the reference experiment, converted to watts."""
    pf, ps = 0.5 * MILLIWATT, 1.0 * MILLIWATT
    return {
        CombinerKind.SC: ConsumptionProfile(CombinerKind.SC, 0.0, pf, ps),
        CombinerKind.EGC: ConsumptionProfile(CombinerKind.EGC, 1.0 * MILLIWATT, pf, ps),
        CombinerKind.MRC: ConsumptionProfile(CombinerKind.MRC, 2.0 * MILLIWATT, pf, ps),
    }


@dataclass(frozen=True)
class PowerReport:
    harvested: float
    consumption_weights: float
    consumption_fixed: float
    net: float
    energy: float

    @property
    def consumption(self) -> float:
        return self.consumption_weights + self.consumption_fixed


def received_power_branch(transmit_power: float, h_k: complex) -> float:
    """``P_t |h_k|^2``."""
    if transmit_power < 0:
        raise ValueError("transmit_power must be >= 0")
    return float(transmit_power * abs(h_k) ** 2)


def harvested_power_branch(efficiency: float, transmit_power: float, w_k: complex, h_k: complex) -> float:
    return float(efficiency * transmit_power * abs(w_k * h_k) ** 2)


def harvested_power_total(efficiency: float, transmit_power: float, channel, weights) -> float:
    """``eta P_t |sum_k w_k h_k|^2``."""
    return float(efficiency * transmit_power * combined_signal_power(channel, weights))


def max_harvestable_power(efficiency: float, transmit_power: float, channel) -> float:
    """Sum of per-branch harvested powers with unit weights, ``eta P_t sum |h_k|^2``."""
    return float(efficiency * transmit_power * np.sum(np.abs(as_coefficients(channel)) ** 2))


def consumption_total(profile: ConsumptionProfile, weights, num_antennas: int, selected_branch: int | None = None):
    """Return ``(beta * P_w, P_d)`` in watts.

    Selection combining only pays for the branch it selected, so
    ``selected_branch`` is required for SC.
    """
    if profile.kind is CombinerKind.SC:
        if selected_branch is None:
            raise ValueError("selection combining needs the selected branch")
        if not 0 <= selected_branch < num_antennas:
            raise ValueError(f"selected branch {selected_branch} out of range for K={num_antennas}")
        return 0.0, profile.fixed_power(num_antennas)
    w = weights.weights if isinstance(weights, WeightVector) else np.asarray(weights, dtype=complex)
    p_w = float(np.sum(np.abs(w) ** 2))
    return profile.beta * p_w, profile.fixed_power(num_antennas)


def net_power(
    efficiency: float,
    transmit_power: float,
    channel,
    weights,
    profile: ConsumptionProfile,
    selected_branch: int | None = None,
    harvest_time: float = 1.0,
) -> PowerReport:
    """Harvested power minus weight-generation and fixed circuit consumption.

    The net value is not clamped; negative values mean the receiver spends
    more than it harvests.
    """
    harvested = harvested_power_total(efficiency, transmit_power, channel, weights)
    k = as_coefficients(channel).size
    weight_cost, fixed = consumption_total(profile, weights, k, selected_branch)
    return PowerReport(
        harvested=harvested,
        consumption_weights=weight_cost,
        consumption_fixed=fixed,
        net=harvested - weight_cost - fixed,
        energy=harvest_time * harvested,
    )


def harvested_energy(report: PowerReport, harvest_time: float) -> float:
    """Energy ``T * P_h`` collected over ``harvest_time`` seconds."""
    if harvest_time <= 0:
        raise ValueError("harvest_time must be positive")
    return harvest_time * report.harvested

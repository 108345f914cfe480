"""Flat ``key = value`` experiment files with one section per technique.

Every power must carry a unit suffix (``W``, ``mW``, ``uW``, ``kW``); values
are normalized to watts when parsed.
"""

from __future__ import annotations

import configparser
import hashlib
import re
from dataclasses import dataclass, field, replace
from importlib import resources

import numpy as np

from .channel import ChannelConfig
from .combining import CLOSED_FORM_KINDS, CombinerKind
from .power import ConsumptionProfile, HarvesterConfig
from .simulation import ExperimentSpec

_UNITS = {"W": 1.0, "mW": 1e-3, "uW": 1e-6, "µW": 1e-6, "kW": 1e3}
_POWER_RE = re.compile(r"^\s*([-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?)\s*([a-zA-Zµ]+)?\s*$")


class ConfigError(ValueError):
    pass


def parse_power(text: str, allow_bare: bool = False) -> float:
    """``"0.5 mW"`` -> ``5e-4``. Bare numbers are watts only if ``allow_bare``."""
    m = _POWER_RE.match(str(text))
    if not m:
        raise ConfigError(f"cannot parse power {text!r}")
    value, unit = float(m.group(1)), m.group(2)
    if unit is None:
        if not allow_bare:
            raise ConfigError(f"power {text!r} needs a unit suffix (W or mW)")
        return value
    if unit not in _UNITS:
        raise ConfigError(f"unknown power unit {unit!r} in {text!r}")
    return value * _UNITS[unit]


def format_power(watts: float) -> str:
    return f"{float(watts)!r} W"


def transmit_power_grid(start: float, stop: float, step: float) -> tuple:
    if step <= 0 or stop < start:
        raise ConfigError("transmit power grid needs p_t_step > 0 and p_t_max >= p_t_min")
    n = int(round((stop - start) / step)) + 1
    # rounding removes accumulation noise such as 0.30000000000000004
    return tuple(float(x) for x in np.round(start + step * np.arange(n), 12))


@dataclass(frozen=True)
class RunConfig:
    path_loss: float = 1e-3
    noise_variance: float = 0.0
    efficiency: float = 1.0
    harvest_time: float = 1.0
    antennas: tuple = (2, 8)
    techniques: tuple = CLOSED_FORM_KINDS
    p_t_min: float = 0.0
    p_t_max: float = 3.0
    p_t_step: float = 0.1
    trials: int = 1_000_000
    seed: int = 0
    output: str | None = None
    format: str = "csv"
    profiles: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.antennas:
            raise ConfigError("antennas list is empty")
        if not self.techniques:
            raise ConfigError("techniques list is empty")
        if self.format not in ("csv", "pretty"):
            raise ConfigError(f"format must be csv or pretty, got {self.format!r}")
        try:
            object.__setattr__(self, "techniques", tuple(CombinerKind.parse(t) for t in self.techniques))
            for k in self.antennas:
                ChannelConfig(k, self.path_loss, self.noise_variance)
            HarvesterConfig(self.efficiency, self.harvest_time)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        for kind in self.techniques:
            if kind not in CLOSED_FORM_KINDS:
                raise ConfigError(f"technique {kind.value} cannot be swept")
            if kind not in self.profiles:
                raise ConfigError(f"missing [{kind.value}] consumption section")
        if self.trials < 1:
            raise ConfigError("trials must be >= 1")
        if not 0 <= self.seed < 2**64:
            raise ConfigError("seed must be a 64-bit unsigned integer")
        self.grid  # validates the grid

    @property
    def grid(self) -> tuple:
        return transmit_power_grid(self.p_t_min, self.p_t_max, self.p_t_step)

    def experiment(self, num_antennas: int) -> ExperimentSpec:
        try:
            return ExperimentSpec(
                channel=ChannelConfig(num_antennas, self.path_loss, self.noise_variance),
                harvester=HarvesterConfig(self.efficiency, self.harvest_time),
                profiles=self.profiles,
                techniques=self.techniques,
                transmit_powers=self.grid,
                trials=self.trials,
                seed=self.seed,
            )
        except ValueError as exc:
            raise ConfigError(str(exc)) from None

    def with_overrides(self, **kwargs) -> "RunConfig":
        return replace(self, **{k: v for k, v in kwargs.items() if v is not None})

    def dump(self) -> str:
        lines = [
            "[experiment]",
            f"path_loss = {self.path_loss!r}",
            f"noise_variance = {format_power(self.noise_variance)}",
            f"efficiency = {self.efficiency!r}",
            f"harvest_time = {self.harvest_time!r}",
            "antennas = " + ", ".join(str(k) for k in self.antennas),
            "techniques = " + ", ".join(k.value for k in self.techniques),
            f"p_t_min = {format_power(self.p_t_min)}",
            f"p_t_max = {format_power(self.p_t_max)}",
            f"p_t_step = {format_power(self.p_t_step)}",
            f"trials = {self.trials}",
            f"seed = {self.seed}",
            f"format = {self.format}",
        ]
        if self.output is not None:
            lines.append(f"output = {self.output}")
        for kind in CLOSED_FORM_KINDS:
            p = self.profiles.get(kind)
            if p is None:
                continue
            lines += [
                "",
                f"[{kind.value}]",
                f"beta = {format_power(p.beta)}",
                f"branch_power = {format_power(p.branch_power)}",
                f"summation_power = {format_power(p.summation_power)}",
            ]
        return "\n".join(lines) + "\n"

    def digest(self) -> str:
        return hashlib.sha256(self.dump().encode("utf-8")).hexdigest()[:16]


def _split(value: str) -> list[str]:
    return [v.strip() for v in value.split(",") if v.strip()]


def loads(text: str) -> RunConfig:
    parser = configparser.ConfigParser(interpolation=None)
    parser.optionxform = str
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"malformed config: {exc}") from None
    if not parser.has_section("experiment"):
        raise ConfigError("missing [experiment] section")
    ex = dict(parser["experiment"])
    known = {"path_loss", "noise_variance", "efficiency", "harvest_time", "antennas", "techniques",
             "p_t_min", "p_t_max", "p_t_step", "trials", "seed", "output", "format"}
    unknown = set(ex) - known
    if unknown:
        raise ConfigError(f"unknown keys in [experiment]: {', '.join(sorted(unknown))}")

    profiles = {}
    for name in parser.sections():
        if name == "experiment":
            continue
        try:
            kind = CombinerKind.parse(name)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        sec = parser[name]
        try:
            profiles[kind] = ConsumptionProfile(
                kind,
                beta=parse_power(sec.get("beta", "0 W")),
                branch_power=parse_power(sec.get("branch_power", "0 W")),
                summation_power=parse_power(sec.get("summation_power", "0 W")),
            )
        except ConfigError:
            raise
        except ValueError as exc:
            raise ConfigError(f"[{name}]: {exc}") from None

    try:
        kwargs = dict(
            path_loss=float(ex.get("path_loss", "1e-3")),
            noise_variance=parse_power(ex.get("noise_variance", "0 W")),
            efficiency=float(ex.get("efficiency", "1.0")),
            harvest_time=float(ex.get("harvest_time", "1.0")),
            antennas=tuple(int(v) for v in _split(ex.get("antennas", "2, 8"))),
            techniques=tuple(_split(ex.get("techniques", "SC, EGC, MRC"))),
            p_t_min=parse_power(ex.get("p_t_min", "0 W")),
            p_t_max=parse_power(ex.get("p_t_max", "3 W")),
            p_t_step=parse_power(ex.get("p_t_step", "0.1 W")),
            trials=int(ex.get("trials", "1000000")),
            seed=int(ex.get("seed", "0")),
            output=ex.get("output"),
            format=ex.get("format", "csv"),
        )
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(f"[experiment]: {exc}") from None
    return RunConfig(profiles=profiles, **kwargs)


def load(path) -> RunConfig:
    with open(path, encoding="utf-8") as fh:
        return loads(fh.read())


def reference_config_text() -> str:
    return resources.files("rfeh_diversity").joinpath("data/reference.cfg").read_text(encoding="utf-8")


def reference_config() -> RunConfig:
    """The bundled reference experiment."""
    return loads(reference_config_text())

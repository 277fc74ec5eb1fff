"""Scenario configuration: sectioned key/value text with JSON-typed values.

A file looks like::

    [radio]
    noise_dbm = -97.5
    error_target = 1e-05

    [sweep]
    n_urllc = [5, 10, 15]

Fields are addressed as ``section.key``. Missing fields take their default,
unknown ones are rejected.
"""

from __future__ import annotations

import configparser
import io
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable

from .contract import PricingConfig, TypeLadder
from .frame import FrameConfig
from .phy import RadioParams, dbm_to_watts


class ConfigError(ValueError):
    def __init__(self, key: str, message: str):
        super().__init__(f"{key}: {message}")
        self.key = key


def _num(lo=None, hi=None, lo_open=False):
    def check(v):
        if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
            return "must be a finite number"
        if lo is not None and (v <= lo if lo_open else v < lo):
            return f"must be {'>' if lo_open else '>='} {lo}"
        if hi is not None and v > hi:
            return f"must be <= {hi}"
        return None

    return check


def _int(lo=0):
    def check(v):
        if isinstance(v, bool) or not isinstance(v, int):
            return "must be an integer"
        if v < lo:
            return f"must be >= {lo}"
        return None

    return check


def _choice(*options):
    return lambda v: None if v in options else f"must be one of {', '.join(map(str, options))}"


def _bool(v):
    return None if isinstance(v, bool) else "must be true or false"


def _law(v):
    if not (isinstance(v, list) and len(v) == 2 and all(_num()(x) is None for x in v)):
        return "must be [intercept_db, slope_db_per_decade]"
    return None


def _list_of(check):
    def run(v):
        if not isinstance(v, list):
            return "must be a list"
        for x in v:
            msg = check(x)
            if msg:
                return f"element {x!r} {msg}"
        return None

    return run


# (default, validator); defaults in the units a radio engineer would write down
FIELDS: dict[str, tuple[Any, Callable[[Any], str | None]]] = {
    "radio.noise_dbm": (-97.5, _num()),
    "radio.bandwidth_mhz": (5.0, _num(0, lo_open=True)),
    "radio.carrier_ghz": (2.0, _num(0, lo_open=True)),
    "radio.embb_power_mw": (0.01, _num(0, lo_open=True)),
    "radio.urllc_max_power_w": (5.0, _num(0, lo_open=True)),
    "radio.error_target": (1e-05, _num(0, 0.5, lo_open=True)),
    "radio.packet_bytes": (100, _int(1)),
    "radio.blocklength": (800, _int(1)),
    "radio.perfect_sic": (False, _bool),
    "radio.embb_pathloss": ([35.3, 37.6], _law),
    "radio.urllc_pathloss": ([16.62, 37.6], _law),
    "frame.embb_tti_ms": (1.0, _num(0, lo_open=True)),
    "frame.minislot_ms": (0.125, _num(0, lo_open=True)),
    "frame.rb_count": (8, _int(1)),
    "topology.radius_m": (1000.0, _num(1, lo_open=True)),
    "topology.n_embb": (20, _int(1)),
    "topology.n_urllc": (30, _int(0)),
    "topology.tiers": (4, _int(1)),
    "traffic.arrival_rate": (0.02, _num(0)),
    "pricing.beta_u": (10.0, _num(0)),
    "pricing.beta_e": (1.0, _num(0)),
    "pricing.share": (0.5, _num(0)),
    "pricing.xi": (1.0, _num(0)),
    "pricing.zeta": (1.0, _num(0)),
    "pricing.cost_per_bps": (1e-08, _num(0)),
    "pricing.margin": (0.01, _num(0, lo_open=True)),
    "pricing.rate_premium": (0.02, _num(0, lo_open=True)),
    "pricing.mode": ("screening", _choice("screening", "flat")),
    "pricing.embb_billing": ("volume", _choice("volume", "flat")),
    "matching.urllc_prefers_low_gain": (True, _bool),
    "scheduler.infeasible_policy": ("drop", _choice("drop", "puncture_max")),
    "scheduler.scheme": ("all", _choice("contract", "puncture", "nourllc", "all")),
    "sim.seeds": (20, _int(1)),
    "sim.master_seed": (0, _int(0)),
    "sim.ttis": (100, _int(1)),
    "sweep.n_urllc": ([], _list_of(_int(0))),
    "sweep.epsilon": ([], _list_of(_num(0, 0.5, lo_open=True))),
}


@dataclass
class ScenarioConfig:
    values: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        merged = {k: _copy(d) for k, (d, _) in FIELDS.items()}
        for key, value in self.values.items():
            if key not in FIELDS:
                raise ConfigError(key, "unknown field")
            merged[key] = value
        for key, value in merged.items():
            if isinstance(FIELDS[key][0], float) and isinstance(value, int) and not isinstance(value, bool):
                value = float(value)
                merged[key] = value
            msg = FIELDS[key][1](value)
            if msg:
                raise ConfigError(key, msg)
        self.values = merged
        try:
            self.frame()
        except ValueError as exc:
            raise ConfigError("frame.minislot_ms", str(exc)) from None

    def __getitem__(self, key: str) -> Any:
        return self.values[key]

    def replace(self, **dotted: Any) -> "ScenarioConfig":
        """Copy with overrides; keyword names use ``__`` for the dot."""
        values = dict(self.values)
        for k, v in dotted.items():
            values[k.replace("__", ".")] = v
        return ScenarioConfig(values)

    def radio(self, error_target: float | None = None) -> RadioParams:
        v = self.values
        return RadioParams(
            noise_power=dbm_to_watts(v["radio.noise_dbm"]),
            rb_bandwidth=v["radio.bandwidth_mhz"] * 1e6,
            carrier=v["radio.carrier_ghz"] * 1e9,
            embb_tx_power=v["radio.embb_power_mw"] * 1e-3,
            urllc_max_power=v["radio.urllc_max_power_w"],
            error_target=v["radio.error_target"] if error_target is None else error_target,
            urllc_packet_bits=8 * v["radio.packet_bytes"],
            blocklength=float(v["radio.blocklength"]),
            embb_pathloss=tuple(v["radio.embb_pathloss"]),
            urllc_pathloss=tuple(v["radio.urllc_pathloss"]),
            perfect_sic=v["radio.perfect_sic"],
        )

    def frame(self) -> FrameConfig:
        v = self.values
        return FrameConfig(v["frame.embb_tti_ms"] * 1e-3, v["frame.minislot_ms"] * 1e-3, v["frame.rb_count"])

    def ladder(self) -> TypeLadder:
        return TypeLadder.equal_width(self.values["topology.tiers"], self.values["topology.radius_m"])

    def pricing(self) -> PricingConfig:
        v = self.values
        return PricingConfig(**{k.split(".", 1)[1]: v[k] for k in v if k.startswith("pricing.")})

    def urllc_sweep(self) -> list[int]:
        return list(self.values["sweep.n_urllc"]) or [self.values["topology.n_urllc"]]

    def epsilon_sweep(self) -> list[float]:
        return list(self.values["sweep.epsilon"]) or [self.values["radio.error_target"]]


def _copy(value):
    return list(value) if isinstance(value, list) else value


def loads(text: str) -> ScenarioConfig:
    parser = configparser.ConfigParser(interpolation=None, default_section="__none__")
    parser.optionxform = str
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigError("<file>", str(exc).splitlines()[0]) from None
    values = {}
    for section in parser.sections():
        for key, raw in parser.items(section):
            dotted = f"{section}.{key}"
            if dotted not in FIELDS:
                raise ConfigError(dotted, "unknown field")
            try:
                values[dotted] = json.loads(raw)
            except json.JSONDecodeError:
                raise ConfigError(dotted, f"cannot parse value {raw!r}") from None
    return ScenarioConfig(values)


def load(path: str | Path) -> ScenarioConfig:
    return loads(Path(path).read_text(encoding="utf-8"))


def dumps(config: ScenarioConfig) -> str:
    out = io.StringIO()
    current = None
    for key in FIELDS:
        section, name = key.split(".", 1)
        if section != current:
            if current is not None:
                out.write("\n")
            out.write(f"[{section}]\n")
            current = section
        out.write(f"{name} = {json.dumps(config.values[key])}\n")
    return out.getvalue()

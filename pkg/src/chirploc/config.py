"""Scenario configuration: JSON in, validated typed objects out.

Every parameter has a default, so an empty config file (or none at all)
reproduces the reference deployment scenario.  User files are deep-merged
over the defaults; unknown keys are rejected with the offending dotted
path.  The resolved configuration (with any referenced data files inlined)
is hashed so result tables can state exactly what produced them.
"""

from __future__ import annotations

import copy
import hashlib
import json
from dataclasses import dataclass
from typing import Any

import numpy as np

from .channel import AcousticChannel
from .energy import (
    ComponentPower,
    HarvesterSpec,
    StartupPlan,
    default_components,
    default_efficiency_curve,
    load_component_table,
    load_efficiency_curve,
)
from .errors import ConfigError, ParameterError
from .ranging import RangingTimeline
from .signals import ChirpSpec, FskConfig
from .wpt import ArraySpec, RfLink

__all__ = ["DEFAULT_CONFIG", "ScenarioConfig", "load_config", "resolve_config"]

DEFAULT_CONFIG: dict[str, Any] = {
    "rng_seed": 0,
    "chirp": {
        "f_start_hz": 20000.0,
        "f_stop_hz": 40000.0,
        "duration_s": 0.050,
        "sample_rate_hz": 192000.0,
        "amplitude": 1.0,
    },
    "channel": {
        "speed_of_sound_mps": 343.0,
        "attenuation_exponent": 1.0,
        "noise_std": 0.0,
        "multipath": [],
        "interpolate_delays": False,
    },
    "timeline": {
        "chirp_start_s": 0.0,
        "wakeup_time_s": 0.020,
        "capture_duration_s": 0.001,
    },
    "fsk": {
        "freq0_hz": 1.0e6,
        "freq1_hz": 1.1e6,
        "sample_rate_hz": 1.0e7,
    },
    "comparator_threshold": 0.0,
    "components_file": None,
    "startup": {
        "mode": "split",
        "operate_time_s": 0.001,
        "overlap": "full_window",
    },
    "harvester": {
        "v_chrdy": 2.30,
        "v_ovdis": 2.20,
        "v_out": 1.8,
        "eta_ldo_worst": 0.77,
        "p_in_min_dbm": -19.5,
        "p_in_max_dbm": 10.0,
        "eta_antenna": 1.0,
        "eta_storage": 1.0,
        "efficiency_curve_file": None,
    },
    "link": {
        "frequency_hz": 869.5e6,
        "p_t_dbm": 27.0,
        "g_t_dbi": 0.0,
        "g_r_dbi": 2.15,
        "duty_cycle": 0.10,
        "eirp_limit_dbm": 27.0,
    },
    "capacitance_f": 6.8e-5,
    # RF charge/update-rate sweeps use this grid; acoustic ranging has its
    # own because distances beyond speed_of_sound * wakeup_delay cannot be
    # captured at all.
    "grid": {"d_min_m": 1.0, "d_max_m": 7.0, "d_step_m": 0.5},
    "range_grid": {"d_min_m": 0.5, "d_max_m": 6.0, "d_step_m": 0.5},
    "scenario": "both",
    "update_rate": {"measurement_overhead_s": 0.0},
    "sweep": {
        "distance_m": 4.5,
        "dwell_s": 1.0,
        "step_deg": 10.0,
        "tag_angles_deg": [-90.0, 0.0, 25.0],
        "n_elements": [1, 4, 8],
        "element_gain_dbi": 0.0,
        "spacing_wavelengths": 0.5,
    },
}


def _merge(base: dict, override: dict, path: str = "") -> dict:
    out = copy.deepcopy(base)
    for key, value in override.items():
        dotted = f"{path}{key}"
        if key not in base:
            raise ConfigError(f"unknown config key '{dotted}'")
        if isinstance(base[key], dict):
            if not isinstance(value, dict):
                raise ConfigError(f"config key '{dotted}' must be an object")
            out[key] = _merge(base[key], value, f"{dotted}.")
        else:
            out[key] = value
    return out


def _apply_set(resolved: dict, assignment: str) -> None:
    if "=" not in assignment:
        raise ConfigError(f"--set expects key=value, got '{assignment}'")
    dotted, _, raw = assignment.partition("=")
    dotted = dotted.strip()
    try:
        value = json.loads(raw)
    except json.JSONDecodeError:
        value = raw
    node = resolved
    parts = dotted.split(".")
    for part in parts[:-1]:
        if not isinstance(node, dict) or part not in node:
            raise ConfigError(f"unknown config key '{dotted}'")
        node = node[part]
    leaf = parts[-1]
    if not isinstance(node, dict) or leaf not in node:
        raise ConfigError(f"unknown config key '{dotted}'")
    if isinstance(node[leaf], dict):
        raise ConfigError(f"config key '{dotted}' is an object; set its fields")
    node[leaf] = value


def resolve_config(path: str | None = None, sets: list[str] | None = None,
                   seed: int | None = None) -> dict:
    """Produce the fully resolved configuration dict."""
    if path is None:
        user: dict = {}
    else:
        try:
            with open(path) as fh:
                user = json.load(fh)
        except OSError as exc:
            raise ConfigError(f"cannot read config file: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config file is not valid JSON: {exc}") from exc
        if not isinstance(user, dict):
            raise ConfigError("config file must contain a JSON object")
    resolved = _merge(DEFAULT_CONFIG, user)
    for assignment in sets or []:
        _apply_set(resolved, assignment)
    if seed is not None:
        resolved["rng_seed"] = int(seed)
    return resolved


def _grid(spec: dict, name: str) -> np.ndarray:
    lo, hi, step = spec["d_min_m"], spec["d_max_m"], spec["d_step_m"]
    if not step > 0:
        raise ConfigError(f"{name}.d_step_m must be positive, got {step}")
    if hi < lo:
        return np.zeros(0)
    # last point is the largest lo + k*step <= hi, eps-tolerant
    n = int(np.floor((hi - lo) / step + 1e-9)) + 1
    return lo + step * np.arange(n)


@dataclass(frozen=True)
class ScenarioConfig:
    """Typed view of a resolved configuration."""

    resolved: dict
    rng_seed: int
    chirp: ChirpSpec
    timeline: RangingTimeline
    fsk: FskConfig
    comparator_threshold: float
    components: tuple[ComponentPower, ...]
    startup: StartupPlan
    harvester: HarvesterSpec
    capacitance: float
    scenario: str
    measurement_overhead: float
    config_hash: str

    @classmethod
    def from_dict(cls, resolved: dict) -> "ScenarioConfig":
        try:
            return cls._build(resolved)
        except ParameterError as exc:
            raise ConfigError(str(exc)) from exc

    @classmethod
    def _build(cls, resolved: dict) -> "ScenarioConfig":
        c = resolved["chirp"]
        chirp = ChirpSpec(
            f_start=float(c["f_start_hz"]),
            f_stop=float(c["f_stop_hz"]),
            duration=float(c["duration_s"]),
            sample_rate=float(c["sample_rate_hz"]),
            amplitude=float(c["amplitude"]),
        )
        t = resolved["timeline"]
        timeline = RangingTimeline(
            chirp_start=float(t["chirp_start_s"]),
            wakeup_time=float(t["wakeup_time_s"]),
            capture_duration=float(t["capture_duration_s"]),
        )
        f = resolved["fsk"]
        fsk = FskConfig(
            freq0=float(f["freq0_hz"]),
            freq1=float(f["freq1_hz"]),
            sample_rate=float(f["sample_rate_hz"]),
        )

        if resolved["components_file"]:
            components = load_component_table(resolved["components_file"])
        else:
            components = default_components()
        s = resolved["startup"]
        startup = StartupPlan(
            mode=s["mode"],
            operate_time=float(s["operate_time_s"]),
            overlap=s["overlap"],
        )

        h = resolved["harvester"]
        if h["efficiency_curve_file"]:
            curve = load_efficiency_curve(h["efficiency_curve_file"])
        else:
            curve = default_efficiency_curve()
        harvester = HarvesterSpec(
            v_chrdy=float(h["v_chrdy"]),
            v_ovdis=float(h["v_ovdis"]),
            v_out=float(h["v_out"]),
            eta_ldo_worst=float(h["eta_ldo_worst"]),
            p_in_min=float(h["p_in_min_dbm"]),
            p_in_max=float(h["p_in_max_dbm"]),
            efficiency_curve=curve,
            eta_antenna=float(h["eta_antenna"]),
            eta_storage=float(h["eta_storage"]),
        )

        capacitance = float(resolved["capacitance_f"])
        if not capacitance > 0:
            raise ConfigError(
                f"capacitance_f must be positive, got {capacitance}"
            )
        scenario = resolved["scenario"]
        if scenario not in ("initial", "update", "both"):
            raise ConfigError(
                f"scenario must be 'initial', 'update' or 'both', got {scenario!r}"
            )
        overhead = float(resolved["update_rate"]["measurement_overhead_s"])
        if overhead < 0:
            raise ConfigError(
                f"update_rate.measurement_overhead_s must be >= 0, got {overhead}"
            )

        # validate the link block once (the EIRP ceiling in particular),
        # independent of any particular grid distance
        cfg = cls(
            resolved=resolved,
            rng_seed=int(resolved["rng_seed"]),
            chirp=chirp,
            timeline=timeline,
            fsk=fsk,
            comparator_threshold=float(resolved["comparator_threshold"]),
            components=components,
            startup=startup,
            harvester=harvester,
            capacitance=capacitance,
            scenario=scenario,
            measurement_overhead=overhead,
            config_hash=_hash_config(resolved, components, harvester),
        )
        cfg.link_at(1.0)
        cfg.sweep_array(1)
        return cfg

    def link_at(self, distance: float) -> RfLink:
        l = self.resolved["link"]
        return RfLink(
            distance=distance,
            frequency=float(l["frequency_hz"]),
            p_t=float(l["p_t_dbm"]),
            g_t=float(l["g_t_dbi"]),
            g_r=float(l["g_r_dbi"]),
            duty_cycle=float(l["duty_cycle"]),
            eirp_limit=float(l["eirp_limit_dbm"]),
        )

    def channel_at(self, distance: float, seed_offset: int = 0) -> AcousticChannel:
        ch = self.resolved["channel"]
        return AcousticChannel(
            distance=distance,
            speed_of_sound=float(ch["speed_of_sound_mps"]),
            attenuation_exponent=float(ch["attenuation_exponent"]),
            noise_std=float(ch["noise_std"]),
            multipath=tuple((float(d), float(g)) for d, g in ch["multipath"]),
            rng_seed=self.rng_seed + seed_offset,
            interpolate_delays=bool(ch["interpolate_delays"]),
        )

    def sweep_array(self, n_elements: int) -> ArraySpec:
        s = self.resolved["sweep"]
        return ArraySpec(
            n_elements=int(n_elements),
            spacing=float(s["spacing_wavelengths"]),
            element_gain=float(s["element_gain_dbi"]),
        )

    def grid(self) -> np.ndarray:
        return _grid(self.resolved["grid"], "grid")

    def range_grid(self) -> np.ndarray:
        return _grid(self.resolved["range_grid"], "range_grid")


def _hash_config(resolved: dict, components: tuple[ComponentPower, ...],
                 harvester: HarvesterSpec) -> str:
    # Inline loaded data files so the hash pins the effective inputs, not
    # just the file names.
    canon = copy.deepcopy(resolved)
    canon["components_file"] = [
        [c.name, c.power, c.turn_on_time, c.count] for c in components
    ]
    canon["harvester"]["efficiency_curve_file"] = [
        list(p) for p in harvester.efficiency_curve
    ]
    blob = json.dumps(canon, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()


def load_config(path: str | None = None, sets: list[str] | None = None,
                seed: int | None = None) -> ScenarioConfig:
    """Resolve and validate a scenario configuration."""
    return ScenarioConfig.from_dict(resolve_config(path, sets, seed))

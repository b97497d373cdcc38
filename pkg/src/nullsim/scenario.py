"""Scenario files: the single input format of the simulator.

A scenario is a JSON object with a strict schema; unknown keys are
rejected so typos fail loudly instead of silently running defaults.
Every rule violation raises :class:`ScenarioError` carrying a short rule
name (for scripting) and a readable message.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field, replace
from typing import Any

import numpy as np

from .beamforming import ArrayGeometry
from .channel import (
    ChannelModel,
    flat_channel,
    orbit_like_channel,
    two_ray_channel,
)
from .coexsim import BackhaulConfig, DutyCycleConfig, SimConfig, configs_per_cycle
from .nullsearch import ROOT_SECTOR, build_tree, default_linear_grid, default_null_schedule
from .phy_grid import LteGrid, WifiGrid

CHANNEL_PRESETS = ("flat", "two-ray", "orbit-like")
SEARCH_MODES = ("tree", "linear", "multiuser")


class ScenarioError(ValueError):
    """A scenario file violated the schema; ``rule`` names the check."""

    def __init__(self, rule: str, message: str):
        self.rule = rule
        super().__init__(f"{rule}: {message}")


@dataclass(frozen=True)
class ChannelSpec:
    preset: str = "flat"
    angle_offset_deg: float = 0.0
    baseline_inr_db: float | None = 30.0
    noise_power: float = 1e-9

    def __post_init__(self) -> None:
        if self.preset not in CHANNEL_PRESETS:
            raise ScenarioError(
                "unknown_channel_preset",
                f"{self.preset!r} is not one of {CHANNEL_PRESETS}",
            )
        if self.baseline_inr_db is not None and self.baseline_inr_db <= 0:
            raise ScenarioError(
                "baseline_inr_not_positive",
                "baseline INR must be positive dB (the no-null signal must "
                "stand above the noise floor)",
            )
        if self.noise_power <= 0:
            raise ScenarioError("noise_power_not_positive", "noise power must be > 0")


@dataclass(frozen=True)
class SearchSpec:
    mode: str = "tree"
    fanout: int = 3
    depth: int = 4
    nulls_per_level: tuple[int, ...] | None = None
    power_correction: bool = True
    linear_grid: tuple[float, ...] | None = None

    def __post_init__(self) -> None:
        if self.mode not in SEARCH_MODES:
            raise ScenarioError(
                "unknown_search_mode", f"{self.mode!r} is not one of {SEARCH_MODES}"
            )
        if self.fanout < 2:
            raise ScenarioError("fanout_too_small", "fanout must be at least 2")
        if self.depth < 1:
            raise ScenarioError("depth_too_small", "depth must be at least 1")


@dataclass(frozen=True)
class Scenario:
    """Everything one run needs, resolvable to bit-identical results."""

    seed: int = 0
    tx_power: float = 1.0
    ue_angle_deg: float = 21.4
    user_angles_deg: tuple[float, ...] = (-20.0,)
    geometry: ArrayGeometry = field(default_factory=ArrayGeometry)
    channel: ChannelSpec = field(default_factory=ChannelSpec)
    duty: DutyCycleConfig = field(default_factory=DutyCycleConfig)
    backhaul: BackhaulConfig = field(default_factory=BackhaulConfig)
    sim: SimConfig = field(default_factory=SimConfig)
    search: SearchSpec = field(default_factory=SearchSpec)
    sweep_backhaul_ms: tuple[float, ...] = ()
    sweep_duty: tuple[float, ...] = ()

    @property
    def lte_grid(self) -> LteGrid:
        return LteGrid()

    @property
    def wifi_grid(self) -> WifiGrid:
        return WifiGrid()

    @property
    def tree_root_sector(self) -> tuple[float, float]:
        return ROOT_SECTOR

    def build_channels(self) -> list[ChannelModel]:
        """Per-user channel draws; deterministic in the scenario seed."""
        models = []
        for u, angle in enumerate(self.user_angles_deg):
            angle = angle + self.channel.angle_offset_deg
            if self.channel.preset == "flat":
                models.append(flat_channel(angle, noise_power=self.channel.noise_power))
            elif self.channel.preset == "two-ray":
                models.append(
                    two_ray_channel(angle, noise_power=self.channel.noise_power)
                )
            else:
                rng = np.random.default_rng([self.seed, 1000 + u])
                models.append(
                    orbit_like_channel(
                        rng,
                        self.geometry.k_antennas,
                        angle,
                        noise_power=self.channel.noise_power,
                    )
                )
        return models


# ---------------------------------------------------------------------------
# dict <-> dataclass plumbing

_GEOMETRY_KEYS = {"k_antennas", "spacing_m", "carrier_freq_hz"}
_CHANNEL_KEYS = {"preset", "angle_offset_deg", "baseline_inr_db", "noise_power"}
_DUTY_KEYS = {"t_csat_ms", "duty", "puncture_ms_per_20ms"}
_BACKHAUL_KEYS = {"delay_ms"}
_SIM_KEYS = {"test_slot_ms", "sample_rate_hz", "sample_count", "noise_jitter"}
_SEARCH_KEYS = {
    "mode",
    "fanout",
    "depth",
    "nulls_per_level",
    "power_correction",
    "linear_grid",
}
_SWEEP_KEYS = {"backhaul_ms", "duty"}
_TOP_KEYS = {
    "seed",
    "tx_power",
    "ue_angle_deg",
    "user_angles_deg",
    "geometry",
    "channel",
    "duty_cycle",
    "backhaul",
    "sim",
    "search",
    "sweep",
}


def _strict(d: dict, allowed: set[str], where: str) -> None:
    unknown = sorted(set(d) - allowed)
    if unknown:
        raise ScenarioError(
            "unknown_key", f"unknown key(s) {unknown} in {where}; allowed: {sorted(allowed)}"
        )


def _wrap(section: str, build):
    try:
        return build()
    except ScenarioError:
        raise
    except (TypeError, ValueError) as exc:
        raise ScenarioError(f"invalid_{section}", str(exc)) from exc


def scenario_from_dict(raw: dict[str, Any]) -> Scenario:
    if not isinstance(raw, dict):
        raise ScenarioError("not_an_object", "scenario file must hold a JSON object")
    _strict(raw, _TOP_KEYS, "scenario")

    geo_d = dict(raw.get("geometry", {}))
    _strict(geo_d, _GEOMETRY_KEYS, "geometry")
    geometry = _wrap("geometry", lambda: ArrayGeometry(**geo_d))

    ch_d = dict(raw.get("channel", {}))
    _strict(ch_d, _CHANNEL_KEYS, "channel")
    chan = _wrap("channel", lambda: ChannelSpec(**ch_d))

    duty_d = dict(raw.get("duty_cycle", {}))
    _strict(duty_d, _DUTY_KEYS, "duty_cycle")
    duty = _wrap("duty_cycle", lambda: DutyCycleConfig(**duty_d))

    bh_d = dict(raw.get("backhaul", {}))
    _strict(bh_d, _BACKHAUL_KEYS, "backhaul")
    backhaul = _wrap("backhaul", lambda: BackhaulConfig(**bh_d))

    sim_d = dict(raw.get("sim", {}))
    _strict(sim_d, _SIM_KEYS, "sim")
    sim = _wrap("sim", lambda: SimConfig(**sim_d))

    se_d = dict(raw.get("search", {}))
    _strict(se_d, _SEARCH_KEYS, "search")
    if se_d.get("nulls_per_level") is not None:
        se_d["nulls_per_level"] = tuple(int(x) for x in se_d["nulls_per_level"])
    if se_d.get("linear_grid") is not None:
        se_d["linear_grid"] = tuple(float(x) for x in se_d["linear_grid"])
    search = _wrap("search", lambda: SearchSpec(**se_d))

    sweep_d = dict(raw.get("sweep", {}))
    _strict(sweep_d, _SWEEP_KEYS, "sweep")

    users = raw.get("user_angles_deg", [-20.0])
    if not isinstance(users, (list, tuple)) or not users:
        raise ScenarioError("users_empty", "user_angles_deg must be a nonempty list")

    scenario = Scenario(
        seed=int(raw.get("seed", 0)),
        tx_power=float(raw.get("tx_power", 1.0)),
        ue_angle_deg=float(raw.get("ue_angle_deg", 21.4)),
        user_angles_deg=tuple(float(a) for a in users),
        geometry=geometry,
        channel=chan,
        duty=duty,
        backhaul=backhaul,
        sim=sim,
        search=search,
        sweep_backhaul_ms=tuple(float(x) for x in sweep_d.get("backhaul_ms", ())),
        sweep_duty=tuple(float(x) for x in sweep_d.get("duty", ())),
    )
    validate_scenario(scenario)
    return scenario


def validate_scenario(s: Scenario) -> None:
    """Cross-field checks; every failure names its rule."""
    if s.tx_power <= 0:
        raise ScenarioError("tx_power_not_positive", "tx_power must be > 0")
    if not -90.0 <= s.ue_angle_deg <= 90.0:
        raise ScenarioError("ue_angle_out_of_range", "ue_angle_deg must be in [-90, 90]")
    for a in s.user_angles_deg:
        if not -90.0 <= a <= 90.0:
            raise ScenarioError(
                "user_angle_out_of_range", f"user angle {a} must be in [-90, 90]"
            )
    if s.search.mode in ("tree", "linear") and len(s.user_angles_deg) != 1:
        raise ScenarioError(
            "mode_requires_single_user",
            f"mode {s.search.mode!r} serves exactly one user; "
            f"got {len(s.user_angles_deg)}",
        )

    # the test slot must fit the usable on-phase
    try:
        configs_per_cycle(s.duty, s.sim)
    except ValueError as exc:
        raise ScenarioError("test_slot_exceeds_on_phase", str(exc)) from exc

    schedule = s.search.nulls_per_level
    if schedule is None and s.search.mode in ("tree", "multiuser"):
        try:
            schedule = default_null_schedule(s.geometry.k_antennas, s.search.depth)
        except ValueError as exc:
            raise ScenarioError("nulls_exceed_dof", str(exc)) from exc
    if schedule is not None:
        if len(schedule) != s.search.depth:
            raise ScenarioError(
                "schedule_depth_mismatch",
                f"nulls_per_level {schedule} does not match depth {s.search.depth}",
            )
        if max(schedule) > s.geometry.k_antennas - 2:
            raise ScenarioError(
                "nulls_exceed_dof",
                f"schedule {schedule} exceeds K-2 = {s.geometry.k_antennas - 2} "
                f"nulls (one degree of freedom stays with the beam)",
            )

    # exact beam/null coincidence is the one degenerate constraint case
    if s.search.mode in ("tree", "multiuser"):
        try:
            build_tree(
                s.geometry,
                s.ue_angle_deg,
                fanout=s.search.fanout,
                depth=s.search.depth,
                nulls_per_level=s.search.nulls_per_level,
            )
        except ValueError as exc:
            raise ScenarioError("beam_on_candidate_null", str(exc)) from exc
    if s.search.mode == "linear":
        grid = s.search.linear_grid or default_linear_grid()
        if any(g == s.ue_angle_deg for g in grid):
            raise ScenarioError(
                "beam_on_candidate_null",
                f"ue_angle_deg {s.ue_angle_deg} sits exactly on a scan angle",
            )
        if any(not -90.0 <= g <= 90.0 for g in grid):
            raise ScenarioError(
                "scan_angle_out_of_range", "linear_grid angles must be in [-90, 90]"
            )

    for d in s.sweep_duty:
        if not 0.0 < d <= 1.0:
            raise ScenarioError("duty_out_of_range", f"sweep duty {d} outside (0, 1]")
    for b in s.sweep_backhaul_ms:
        if b < 0:
            raise ScenarioError("backhaul_negative", f"sweep backhaul {b} ms < 0")


def load_scenario(path: str) -> Scenario:
    """Parse and validate a scenario file."""
    with open(path, "r", encoding="utf-8") as fh:
        try:
            raw = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ScenarioError(
                "parse_error", f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}"
            ) from exc
    return scenario_from_dict(raw)


def scenario_to_dict(s: Scenario) -> dict[str, Any]:
    d: dict[str, Any] = {
        "seed": s.seed,
        "tx_power": s.tx_power,
        "ue_angle_deg": s.ue_angle_deg,
        "user_angles_deg": list(s.user_angles_deg),
        "geometry": {
            "k_antennas": s.geometry.k_antennas,
            "spacing_m": s.geometry.spacing_m,
            "carrier_freq_hz": s.geometry.carrier_freq_hz,
        },
        "channel": {
            "preset": s.channel.preset,
            "angle_offset_deg": s.channel.angle_offset_deg,
            "baseline_inr_db": s.channel.baseline_inr_db,
            "noise_power": s.channel.noise_power,
        },
        "duty_cycle": {
            "t_csat_ms": s.duty.t_csat_ms,
            "duty": s.duty.duty,
            "puncture_ms_per_20ms": s.duty.puncture_ms_per_20ms,
        },
        "backhaul": {"delay_ms": s.backhaul.delay_ms},
        "sim": {
            "test_slot_ms": s.sim.test_slot_ms,
            "sample_rate_hz": s.sim.sample_rate_hz,
            "sample_count": s.sim.sample_count,
            "noise_jitter": s.sim.noise_jitter,
        },
        "search": {
            "mode": s.search.mode,
            "fanout": s.search.fanout,
            "depth": s.search.depth,
            "nulls_per_level": list(s.search.nulls_per_level)
            if s.search.nulls_per_level
            else None,
            "power_correction": s.search.power_correction,
            "linear_grid": list(s.search.linear_grid) if s.search.linear_grid else None,
        },
    }
    if s.sweep_backhaul_ms or s.sweep_duty:
        d["sweep"] = {
            "backhaul_ms": list(s.sweep_backhaul_ms),
            "duty": list(s.sweep_duty),
        }
    return d


def scenario_hash(s: Scenario) -> str:
    """Stable short id of the scenario contents (seed included)."""
    canon = json.dumps(scenario_to_dict(s), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canon.encode()).hexdigest()[:12]


def with_overrides(s: Scenario, **kwargs) -> Scenario:
    """Functional update helper used by sweeps."""
    out = replace(s, **kwargs)
    validate_scenario(out)
    return out

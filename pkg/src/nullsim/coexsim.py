"""Duty-cycled medium access and the reconfiguration-delay model.

The base station transmits for T_on = duty * T_csat out of every CSAT
period and must puncture 2 ms out of every full 20 ms of on-time (the
gap sits at the end of each 20 ms window, and a test slot never spans a
gap).  Candidate configurations are tested in tau_s slots inside the
on-phase; WiFi-side measurements return over a wired backhaul that costs
delta_b per feedback message.

Every timeline built here satisfies, exactly and in integer microseconds,

    total = power_cycles * T_csat + sum_levels(cycles_l * T_csat + delta_b)

where cycles_l = ceil(configs tested at level l / configs per cycle).
Phases start immediately when their feedback arrives; cycle counting is
relative to the phase start, not to a global CSAT alignment.  The
per-antenna power measurement report rides along with the first search
feedback, so it contributes cycles but no extra delta_b.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Sequence

import numpy as np

from .beamforming import build_weight_matrix, lcmv_weights
from .channel import (
    ChannelModel,
    InrReport,
    channel_response,
    power_report,
    rx_power,
    sampled_inr,
    with_noise_power,
)
from .nullsearch import (
    Evaluator,
    MultiUserPlan,
    NullConfig,
    SearchState,
    SearchTree,
    advance,
    build_tree,
    default_linear_grid,
    linear_search,
    min_inr_index,
    multi_user_search,
    record_results,
    start_search,
)
from .phy_grid import LteGrid, WifiGrid, build_rb_sc_map, build_sc_rb_map

if TYPE_CHECKING:
    from .scenario import Scenario

US_PER_MS = 1000
PUNCTURE_WINDOW_US = 20 * US_PER_MS
ALLOWED_T_CSAT_MS = (40.0, 80.0, 160.0)


@dataclass(frozen=True)
class DutyCycleConfig:
    """CSAT period, on-fraction and the regulatory puncturing overhead."""

    t_csat_ms: float = 40.0
    duty: float = 0.2
    puncture_ms_per_20ms: float = 2.0

    def __post_init__(self) -> None:
        if self.t_csat_ms not in ALLOWED_T_CSAT_MS:
            raise ValueError(f"t_csat_ms must be one of {ALLOWED_T_CSAT_MS}")
        if not 0.0 < self.duty <= 1.0:
            raise ValueError("duty must be in (0, 1]")
        if not 2.0 <= self.puncture_ms_per_20ms < 20.0:
            raise ValueError("puncturing must be at least 2 ms per 20 ms window")

    @property
    def t_csat_us(self) -> int:
        return round(self.t_csat_ms * US_PER_MS)

    @property
    def t_on_us(self) -> int:
        return round(self.duty * self.t_csat_ms * US_PER_MS)

    @property
    def puncture_us(self) -> int:
        return round(self.puncture_ms_per_20ms * US_PER_MS)


@dataclass(frozen=True)
class BackhaulConfig:
    """Wired feedback path between the WiFi side and the base station."""

    delay_ms: float = 5.0

    def __post_init__(self) -> None:
        if self.delay_ms < 0:
            raise ValueError("backhaul delay cannot be negative")

    @property
    def delay_us(self) -> int:
        return round(self.delay_ms * US_PER_MS)


@dataclass(frozen=True)
class SimConfig:
    """Measurement-slot geometry and sampling parameters."""

    test_slot_ms: float = 2.0
    sample_rate_hz: float = 50_000.0
    sample_count: int = 100
    noise_jitter: float = 0.0
    seed: int = 0

    def __post_init__(self) -> None:
        if self.test_slot_ms <= 0:
            raise ValueError("test slot must be positive")
        if not 5_000.0 <= self.sample_rate_hz <= 50_000.0:
            raise ValueError("sampling rate must be within 5..50 kHz")
        if self.sample_count < 1:
            raise ValueError("need at least one sample per slot")
        if self.sample_count / self.sample_rate_hz > self.test_slot_ms / 1000 + 1e-12:
            raise ValueError("sample_count does not fit the test slot at this rate")
        if self.noise_jitter < 0:
            raise ValueError("noise jitter cannot be negative")

    @property
    def slot_us(self) -> int:
        return round(self.test_slot_ms * US_PER_MS)


def slot_offsets_in_cycle(dc: DutyCycleConfig, sim: SimConfig) -> list[int]:
    """Start offsets (us, from cycle start) of every usable test slot.

    Slots pack each 20 ms window's usable stretch back to back; the
    puncture gap closes the window and no slot spans it.
    """
    offsets: list[int] = []
    w = 0
    while w * PUNCTURE_WINDOW_US < dc.t_on_us:
        stretch = min(
            dc.t_on_us - w * PUNCTURE_WINDOW_US,
            PUNCTURE_WINDOW_US - dc.puncture_us,
        )
        for j in range(stretch // sim.slot_us):
            offsets.append(w * PUNCTURE_WINDOW_US + j * sim.slot_us)
        w += 1
    return offsets


def configs_per_cycle(
    dc: DutyCycleConfig, sim: SimConfig, fanout: int | None = None
) -> int:
    """How many configs one CSAT cycle can test.

    Capped at the tree fanout when given: descending needs feedback, so
    testing past the current level's candidates buys nothing.
    """
    n = len(slot_offsets_in_cycle(dc, sim))
    if n < 1:
        raise ValueError("test slot does not fit the usable on-phase")
    return min(n, fanout) if fanout is not None else n


@dataclass(frozen=True)
class TimelineEvent:
    t_us: int
    kind: str
    label: str


@dataclass
class SimTimeline:
    """Event log plus the closed-form accounting it must match."""

    events: list[TimelineEvent] = field(default_factory=list)
    total_delay_us: int = 0
    power_cycles: int = 0
    level_cycles: list[int] = field(default_factory=list)
    t_csat_us: int = 0
    delta_b_us: int = 0

    def emit(self, t_us: int, kind: str, label: str) -> None:
        if self.events and t_us < self.events[-1].t_us:
            raise ValueError("timeline events must not go backwards")
        self.events.append(TimelineEvent(int(t_us), kind, label))

    @property
    def total_delay_ms(self) -> float:
        return self.total_delay_us / US_PER_MS

    def count(self, kind: str) -> int:
        return sum(1 for e in self.events if e.kind == kind)

    def identity_total_us(self) -> int:
        """The closed form every timeline must satisfy exactly."""
        search = sum(c * self.t_csat_us + self.delta_b_us for c in self.level_cycles)
        return self.power_cycles * self.t_csat_us + search


def _emit_test_cycles(
    tl: SimTimeline,
    start_us: int,
    labels: Sequence[str],
    dc: DutyCycleConfig,
    sim: SimConfig,
    per_cycle: int,
    kind: str = "test_slot",
) -> int:
    """Lay test slots into consecutive cycles; returns the phase end time."""
    offsets = slot_offsets_in_cycle(dc, sim)
    cycles = math.ceil(len(labels) / per_cycle)
    for i, label in enumerate(labels):
        cycle, slot = divmod(i, per_cycle)
        tl.emit(start_us + cycle * dc.t_csat_us + offsets[slot], kind, label)
    return start_us + cycles * dc.t_csat_us


def simulate_power_measurement(
    k_antennas: int,
    dc: DutyCycleConfig,
    backhaul: BackhaulConfig,
    sim: SimConfig,
    start_us: int = 0,
    piggyback: bool = False,
) -> SimTimeline:
    """Timeline of the per-antenna sounding phase.

    Each antenna transmits alone for one slot; the WiFi node logs the
    received power profile.  Standalone, the report costs one feedback;
    inside the full protocol it piggybacks on the first search feedback
    and the phase contributes cycles only.
    """
    if k_antennas < 1:
        raise ValueError("need at least one antenna to sound")
    tl = SimTimeline(t_csat_us=dc.t_csat_us, delta_b_us=backhaul.delay_us)
    per_cycle = configs_per_cycle(dc, sim)
    tl.emit(start_us, "phase", "power_measurement")
    labels = [f"antenna:{k}" for k in range(k_antennas)]
    end = _emit_test_cycles(tl, start_us, labels, dc, sim, per_cycle)
    tl.power_cycles = math.ceil(k_antennas / per_cycle)
    if piggyback:
        tl.total_delay_us = end
        return tl
    tl.emit(end, "ctc_send", "power report")
    tl.emit(end + backhaul.delay_us, "ctc_recv", "power report")
    tl.level_cycles = []
    tl.total_delay_us = end + backhaul.delay_us
    return tl


def simulate_tree_search(
    tree: SearchTree,
    dc: DutyCycleConfig,
    backhaul: BackhaulConfig,
    sim: SimConfig,
    evaluate: Evaluator,
    power_correction: bool = True,
) -> tuple[SimTimeline, SearchState]:
    """Single-user descent with full timing.

    The power-measurement phase is present exactly when power correction
    is on (the report exists for no other reason); its feedback rides with
    the level-1 feedback.  The evaluator is expected to match: corrected
    weights when ``power_correction`` is set, plain ones otherwise.
    """
    tl = SimTimeline(t_csat_us=dc.t_csat_us, delta_b_us=backhaul.delay_us)
    t = 0
    tl.emit(t, "phase", "protocol_start")
    if power_correction:
        pm = simulate_power_measurement(
            tree.geometry.k_antennas, dc, backhaul, sim, start_us=t, piggyback=True
        )
        tl.events.extend(pm.events)
        tl.power_cycles = pm.power_cycles
        t = pm.total_delay_us
    per_cycle = configs_per_cycle(dc, sim, tree.fanout)
    state = start_search(tree)
    while not state.done:
        level = state.level
        tl.emit(t, "phase", f"tree_level_{level}")
        labels = [f"config:{tree.nodes[n].label}" for n in state.frontier]
        end = _emit_test_cycles(tl, t, labels, dc, sim, per_cycle)
        tl.level_cycles.append(math.ceil(len(labels) / per_cycle))
        reports = [evaluate(tree.nodes[n], tree.weights[n]) for n in state.frontier]
        state = record_results(state, tree, reports)
        state = advance(state, tree, min_inr_index(reports))
        note = f"level {level} feedback"
        if power_correction and level == 1:
            note += " + power report"
        tl.emit(end, "ctc_send", note)
        t = end + backhaul.delay_us
        tl.emit(t, "ctc_recv", note)
    tl.emit(t, "apply", f"apply config:{state.best_config.label}")
    tl.total_delay_us = t
    return tl, state


def simulate_linear_search(
    grid_angles: Sequence[float],
    tree_or_geom,
    dc: DutyCycleConfig,
    backhaul: BackhaulConfig,
    sim: SimConfig,
    evaluate: Evaluator,
    beam_angle_deg: float,
) -> tuple[SimTimeline, NullConfig, list]:
    """Exhaustive-scan baseline: every grid angle tested, one feedback."""
    geom = getattr(tree_or_geom, "geometry", tree_or_geom)
    tl = SimTimeline(t_csat_us=dc.t_csat_us, delta_b_us=backhaul.delay_us)
    tl.emit(0, "phase", "linear_scan")
    per_cycle = configs_per_cycle(dc, sim)
    best, best_rep, tested = linear_search(geom, grid_angles, beam_angle_deg, evaluate)
    labels = [f"angle:{cfg.null_angles_deg[0]:.2f}" for cfg, _ in tested]
    end = _emit_test_cycles(tl, 0, labels, dc, sim, per_cycle)
    tl.level_cycles.append(math.ceil(len(labels) / per_cycle))
    tl.emit(end, "ctc_send", "scan feedback")
    total = end + backhaul.delay_us
    tl.emit(total, "ctc_recv", "scan feedback")
    tl.emit(total, "apply", f"apply angle:{best.null_angles_deg[0]:.2f}")
    tl.total_delay_us = total
    return tl, best, tested


def simulate_multi_user(
    states: list[SearchState],
    tree: SearchTree,
    dc: DutyCycleConfig,
    backhaul: BackhaulConfig,
    sim: SimConfig,
    evaluate,
) -> tuple[SimTimeline, MultiUserPlan]:
    """Parallel multi-user descent with shared test slots.

    All users measure the same transmissions, so a level costs the union
    of the users' frontiers, not their sum, and one aggregated feedback.
    Slots per cycle are not fanout-capped here: a level's nodes all precede
    the same feedback round.  No power correction exists in this mode.
    """
    plan = multi_user_search(states, tree, evaluate)
    tl = SimTimeline(t_csat_us=dc.t_csat_us, delta_b_us=backhaul.delay_us)
    per_cycle = configs_per_cycle(dc, sim)
    t = 0
    tl.emit(t, "phase", "protocol_start")
    for level, visited in enumerate(plan.visited_per_level, start=1):
        tl.emit(t, "phase", f"tree_level_{level}")
        labels = [f"config:{tree.nodes[n].label}" for n in visited]
        end = _emit_test_cycles(tl, t, labels, dc, sim, per_cycle)
        tl.level_cycles.append(math.ceil(len(labels) / per_cycle))
        tl.emit(end, "ctc_send", f"level {level} aggregated feedback")
        t = end + backhaul.delay_us
        tl.emit(t, "ctc_recv", f"level {level} aggregated feedback")
    joint = ";".join(f"{a:.2f}" for a in plan.joint_null_angles)
    tl.emit(t, "apply", f"apply joint nulls:{joint}")
    tl.total_delay_us = t
    return tl, plan


# ---------------------------------------------------------------------------
# full protocol


@dataclass
class UserOutcome:
    user: int
    baseline: InrReport
    final: InrReport
    best_config: NullConfig
    nulls_used: int
    trace: list[tuple[NullConfig, InrReport]]

    @property
    def delta_inr_db(self) -> float:
        return self.baseline.aggregate_db - self.final.aggregate_db


@dataclass
class ProtocolResult:
    mode: str
    timeline: SimTimeline
    users: list[UserOutcome]
    joint_null_angles: tuple[float, ...] | None = None


def _calibrated_channels(scenario: "Scenario", geom, wifi, w0_matrix, sc_rb):
    """Per-user channels with noise set so the no-null INR hits the target."""
    models = scenario.build_channels()
    out = []
    for model in models:
        if scenario.channel.baseline_inr_db is not None:
            target = 10.0 ** (scenario.channel.baseline_inr_db / 10.0)
            h = channel_response(model, geom, wifi)
            base = float(np.mean(rx_power(h, w0_matrix, sc_rb, scenario.tx_power)))
            if base <= 0:
                raise ValueError(
                    "beam-only pattern has no power toward this user; "
                    "cannot calibrate a baseline INR"
                )
            model = with_noise_power(model, base / (target - 1.0))
        out.append(model)
    return out


def _with_baseline_fallback(
    best: tuple[NullConfig, InrReport],
    baseline: InrReport,
    scenario: "Scenario",
) -> tuple[NullConfig, InrReport]:
    """Never deploy a config that measures worse than not nulling at all."""
    cfg, rep = best
    if rep.aggregate >= baseline.aggregate:
        no_null = NullConfig(
            (), scenario.ue_angle_deg, (), scenario.tree_root_sector
        )
        return no_null, baseline
    return cfg, rep


def run_full_protocol(scenario: "Scenario") -> ProtocolResult:
    """Decision through reconfiguration for one scenario.

    Everything is derived from the scenario seed: channel draws and
    measurement noise use independent deterministic streams, so a rerun
    reproduces results bit for bit.
    """
    geom = scenario.geometry
    lte, wifi = scenario.lte_grid, scenario.wifi_grid
    rb_map = build_rb_sc_map(lte, wifi)
    sc_rb = build_sc_rb_map(lte, wifi)
    search = scenario.search

    w0 = lcmv_weights(geom, scenario.ue_angle_deg, [])
    w0_matrix = build_weight_matrix(
        geom, scenario.ue_angle_deg, [], lte.n_rrb, base=w0
    )
    models = _calibrated_channels(scenario, geom, wifi, w0_matrix, sc_rb)
    responses = [channel_response(m, geom, wifi) for m in models]
    meas_rngs = [
        np.random.default_rng([scenario.seed, 2000 + u]) for u in range(len(models))
    ]

    def make_evaluator(u: int, report: np.ndarray | None) -> Evaluator:
        def evaluate(cfg: NullConfig, w: np.ndarray) -> InrReport:
            wm = build_weight_matrix(
                geom,
                cfg.beam_angle_deg,
                cfg.null_angles_deg,
                lte.n_rrb,
                report=report,
                rb_sc_map=rb_map if report is not None else None,
                base=w,
            )
            return sampled_inr(
                responses[u],
                wm,
                sc_rb,
                models[u],
                scenario.tx_power,
                sim.sample_count,
                sim.noise_jitter,
                meas_rngs[u],
                config_id=cfg.label,
            )

        return evaluate

    sim = scenario.sim
    dc, backhaul = scenario.duty, scenario.backhaul

    baselines = []
    for u in range(len(models)):
        base_cfg = NullConfig((), scenario.ue_angle_deg, (), scenario.tree_root_sector)
        baselines.append(make_evaluator(u, None)(base_cfg, w0))

    if search.mode in ("tree", "multiuser"):
        tree = build_tree(
            geom,
            scenario.ue_angle_deg,
            fanout=search.fanout,
            depth=search.depth,
            nulls_per_level=search.nulls_per_level,
            root_sector=scenario.tree_root_sector,
        )

    if search.mode == "tree":
        report = (
            power_report(models[0], geom, wifi) if search.power_correction else None
        )
        timeline, state = simulate_tree_search(
            tree, dc, backhaul, sim, make_evaluator(0, report),
            power_correction=search.power_correction,
        )
        best_cfg, best_rep = _with_baseline_fallback(
            state.best, baselines[0], scenario
        )
        outcome = UserOutcome(
            user=0,
            baseline=baselines[0],
            final=best_rep,
            best_config=best_cfg,
            nulls_used=len(best_cfg.null_angles_deg),
            trace=state.tested,
        )
        return ProtocolResult("tree", timeline, [outcome])

    if search.mode == "linear":
        grid = search.linear_grid or default_linear_grid()
        timeline, best, tested = simulate_linear_search(
            grid, geom, dc, backhaul, sim, make_evaluator(0, None),
            scenario.ue_angle_deg,
        )
        best_rep = next(rep for cfg, rep in tested if cfg is best)
        best, best_rep = _with_baseline_fallback((best, best_rep), baselines[0], scenario)
        outcome = UserOutcome(
            user=0,
            baseline=baselines[0],
            final=best_rep,
            best_config=best,
            nulls_used=len(best.null_angles_deg),
            trace=tested,
        )
        return ProtocolResult("linear", timeline, [outcome])

    if search.mode == "multiuser":
        evaluators = [make_evaluator(u, None) for u in range(len(models))]

        def evaluate_mu(u: int, cfg: NullConfig, w: np.ndarray) -> InrReport:
            return evaluators[u](cfg, w)

        states = [start_search(tree) for _ in models]
        timeline, plan = simulate_multi_user(states, tree, dc, backhaul, sim, evaluate_mu)
        joint_cfg = NullConfig(
            (), scenario.ue_angle_deg, plan.joint_null_angles, scenario.tree_root_sector
        )
        w_joint = lcmv_weights(geom, scenario.ue_angle_deg, plan.joint_null_angles)
        outcomes = []
        for u in range(len(models)):
            final = evaluators[u](joint_cfg, w_joint)
            outcomes.append(
                UserOutcome(
                    user=u,
                    baseline=baselines[u],
                    final=final,
                    best_config=plan.per_user_best[u][0],
                    nulls_used=len(plan.joint_null_angles),
                    trace=plan.states[u].tested,
                )
            )
        return ProtocolResult(
            "multiuser", timeline, outcomes, joint_null_angles=plan.joint_null_angles
        )

    raise ValueError(f"unknown search mode {search.mode!r}")

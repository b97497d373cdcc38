"""Runs, result records and their serialization.

One protocol run yields one record per served user.  Floats are rounded
to six decimals before serialization so CSV and JSON carry the same
values and reruns of the same scenario produce byte-identical files.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Any

from .coexsim import ProtocolResult, run_full_protocol
from .scenario import Scenario, scenario_hash, validate_scenario

FLOAT_DECIMALS = 6

SUMMARY_COLUMNS = [
    "run_id",
    "user",
    "scenario_hash",
    "mode",
    "seed",
    "k_antennas",
    "duty",
    "t_csat_ms",
    "backhaul_ms",
    "baseline_inr_db",
    "final_inr_db",
    "delta_inr_db",
    "nulls_used",
    "configs_tested",
    "power_phase_ms",
    "search_ms",
    "total_delay_ms",
]

TRACE_COLUMNS = ["run_id", "user", "node", "level", "null_angles_deg", "inr_db"]


def _r(x: float) -> float:
    return round(float(x), FLOAT_DECIMALS)


@dataclass
class ResultsRecord:
    run_id: int
    user: int
    scenario_hash: str
    mode: str
    seed: int
    k_antennas: int
    duty: float
    t_csat_ms: float
    backhaul_ms: float
    baseline_inr_db: float
    final_inr_db: float
    delta_inr_db: float
    nulls_used: int
    configs_tested: int
    power_phase_ms: float
    search_ms: float
    total_delay_ms: float
    trace: list[dict[str, Any]] = field(default_factory=list)

    def summary_row(self) -> dict[str, Any]:
        d = asdict(self)
        d.pop("trace")
        return d


def records_from_result(
    result: ProtocolResult, scenario: Scenario, run_id: int = 0
) -> list[ResultsRecord]:
    tl = result.timeline
    power_ms = tl.power_cycles * tl.t_csat_us / 1000.0
    out = []
    for user in result.users:
        trace = [
            {
                "run_id": run_id,
                "user": user.user,
                "node": cfg.label,
                "level": cfg.level,
                "null_angles_deg": ";".join(f"{a:.{FLOAT_DECIMALS}f}" for a in cfg.null_angles_deg),
                "inr_db": _r(rep.aggregate_db),
            }
            for cfg, rep in user.trace
        ]
        out.append(
            ResultsRecord(
                run_id=run_id,
                user=user.user,
                scenario_hash=scenario_hash(scenario),
                mode=result.mode,
                seed=scenario.seed,
                k_antennas=scenario.geometry.k_antennas,
                duty=_r(scenario.duty.duty),
                t_csat_ms=_r(scenario.duty.t_csat_ms),
                backhaul_ms=_r(scenario.backhaul.delay_ms),
                baseline_inr_db=_r(user.baseline.aggregate_db),
                final_inr_db=_r(user.final.aggregate_db),
                delta_inr_db=_r(user.delta_inr_db),
                nulls_used=user.nulls_used,
                configs_tested=sum(
                    1
                    for e in tl.events
                    if e.kind == "test_slot" and not e.label.startswith("antenna:")
                ),
                power_phase_ms=_r(power_ms),
                search_ms=_r(tl.total_delay_ms - power_ms),
                total_delay_ms=_r(tl.total_delay_ms),
                trace=trace,
            )
        )
    return out


def run_campaign(
    scenario: Scenario, mode: str | None = None, repeats: int = 1
) -> list[ResultsRecord]:
    """Execute a scenario, a sweep over its declared grids, or repeats.

    ``mode`` overrides the scenario's search mode; ``"sweep"`` iterates
    the declared backhaul and duty grids with the scenario's own mode.
    Repeats rerun the identical seed and must reproduce identical records.
    """
    if repeats < 1:
        raise ValueError("repeats must be at least 1")
    records: list[ResultsRecord] = []
    if mode == "sweep":
        if not scenario.sweep_backhaul_ms and not scenario.sweep_duty:
            raise ValueError("sweep mode needs sweep grids in the scenario")
        duties = scenario.sweep_duty or (scenario.duty.duty,)
        backhauls = scenario.sweep_backhaul_ms or (scenario.backhaul.delay_ms,)
        run_id = 0
        for duty in duties:
            for bh in backhauls:
                s = replace(
                    scenario,
                    duty=replace(scenario.duty, duty=duty),
                    backhaul=replace(scenario.backhaul, delay_ms=bh),
                    sweep_backhaul_ms=(),
                    sweep_duty=(),
                )
                validate_scenario(s)
                for _ in range(repeats):
                    records.extend(records_from_result(run_full_protocol(s), s, run_id))
                    run_id += 1
        return records
    s = scenario if mode is None else replace(scenario, search=replace(scenario.search, mode=mode))
    if mode is not None:
        validate_scenario(s)
    for run_id in range(repeats):
        records.extend(records_from_result(run_full_protocol(s), s, run_id))
    return records


# ---------------------------------------------------------------------------
# export / import


def export_results(records: list[ResultsRecord], fmt: str, path: str) -> list[str]:
    """Write records; returns the list of files written.

    JSON holds full records with inline traces.  CSV writes the summary
    table at ``path`` and the visited-node trace rows next to it as
    ``<stem>_trace.csv``.
    """
    p = Path(path)
    if fmt == "json":
        payload = [dict(r.summary_row(), trace=r.trace) for r in records]
        with open(p, "w", encoding="utf-8") as fh:
            json.dump(payload, fh, indent=2, sort_keys=True)
            fh.write("\n")
        return [str(p)]
    if fmt == "csv":
        trace_path = p.with_name(p.stem + "_trace.csv")
        with open(p, "w", encoding="utf-8", newline="") as fh:
            w = csv.DictWriter(fh, fieldnames=SUMMARY_COLUMNS)
            w.writeheader()
            for r in records:
                w.writerow(r.summary_row())
        with open(trace_path, "w", encoding="utf-8", newline="") as fh:
            w = csv.DictWriter(fh, fieldnames=TRACE_COLUMNS)
            w.writeheader()
            for r in records:
                for row in r.trace:
                    w.writerow(row)
        return [str(p), str(trace_path)]
    raise ValueError(f"unknown export format {fmt!r}; use csv or json")


def _coerce_row(row: dict[str, str]) -> dict[str, Any]:
    out: dict[str, Any] = {}
    for k, v in row.items():
        if k in ("run_id", "user", "seed", "k_antennas", "nulls_used", "configs_tested", "level"):
            out[k] = int(v)
        elif k in ("scenario_hash", "mode", "node", "null_angles_deg"):
            out[k] = v
        else:
            out[k] = float(v)
    return out


def load_results(path: str) -> list[dict[str, Any]]:
    """Read back an exported summary (either format) as plain dicts."""
    p = Path(path)
    if p.suffix == ".json":
        with open(p, encoding="utf-8") as fh:
            payload = json.load(fh)
        for rec in payload:
            rec.pop("trace", None)
        return payload
    with open(p, encoding="utf-8", newline="") as fh:
        return [_coerce_row(row) for row in csv.DictReader(fh)]

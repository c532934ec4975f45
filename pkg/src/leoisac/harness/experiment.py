"""Frame-by-frame simulation: rain, geometry, sensing, allocation and KPIs."""

from __future__ import annotations

import csv
import json
import logging
import platform
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Optional, Union

import numpy as np

from .. import __version__
from ..alloc import FRAMEWORKS, AllocationInfeasible, RateInput, SubproblemError, check_feasible, per_user_throughput
from ..frame import FrameBudget, ra_deadline_check
from ..link import LinkTable, build_link_table
from ..orbit import max_propagation_time, propagate, visible_satellites
from ..rain import init_field, rain_rate, step
from ..sense import SensingReport, run_sensing_phase, sensing_timing
from .config import Scenario, build_scenario, load_config, set_option
from .kpi import KpiRecord, handover_count, jain_index, nmse, per_user_mean, serving_satellite
from .seeds import stream

__all__ = [
    "KPI_HEADER",
    "FrameEnvironment",
    "RunResult",
    "check_frame_budget",
    "realised_rates",
    "simulate_environment",
    "run_experiment",
    "write_outputs",
]

log = logging.getLogger(__name__)

KPI_HEADER = ["frame", "framework", "csi", "pilot_len", "throughput_bps", "jain", "handovers", "nmse_gamma",
              "nmse_att", "solver_ms", "ts_ms"]

TELEMETRY_HEADER = ["frame", "framework", "satellites", "cells", "n_comm", "ts_ms", "solver_ms", "iterations",
                    "converged", "stopped", "ipm_iterations", "multi_matched_cells", "objective",
                    "relaxed_objective", "failed", "violations", "served_cells", "outage_pairs", "per_user_bps",
                    "ra_deadline_ok", "nmse_gamma_rain", "nmse_gamma_dry", "nmse_att_rain", "nmse_att_dry"]


@dataclass
class FrameEnvironment:
    """Ground truth and sensing outcome of one frame, shared by every framework."""

    frame: int
    links: LinkTable
    report: SensingReport
    budget: FrameBudget
    footprint_cells: int
    cols: np.ndarray  # populated cells, in grid order


@dataclass
class RunResult:
    records: list
    telemetry: list
    manifest: dict
    allocations: dict = field(default_factory=dict)


def check_frame_budget(sc: Scenario) -> FrameBudget:
    """Budget under the largest possible sensing footprint (every grid cell).

    Raises ``ConfigurationError`` before any frame is simulated when sensing
    could leave no OFDMA frame for communication.
    """
    ts = 0.0
    sensing = [s for s in sc.shells if s.sensing_capable]
    if sc.csi == "sensed" and sensing:
        t_prop = max_propagation_time(sensing, sc.min_elevation_deg)
        bw = min(s.bandwidth_hz for s in sensing)
        ts = sensing_timing(len(sc.grid), sc.n_beams, sc.pilot.pilot_len, sc.pilot.feedback_len, bw, t_prop,
                            sc.ofdma_s).total_s
    return FrameBudget(sc.ofdma_s, sc.frame_s, ts, sc.handover_s, sc.n_rtt)


def _sensing_time(sc: Scenario, links: LinkTable, t_prop: float):
    if sc.csi != "sensed":
        return 0.0, 0
    rows = np.flatnonzero(links.sensing_capable)
    if not len(rows):
        return 0.0, 0
    counts = links.footprint_cells()[rows]
    c_s = int(counts.max())
    if c_s == 0:
        return 0.0, 0
    bw = float(links.bandwidth_hz[rows].min())
    timing = sensing_timing(c_s, sc.n_beams, sc.pilot.pilot_len, sc.pilot.feedback_len, bw, t_prop, sc.ofdma_s)
    return timing.total_s, c_s


def simulate_environment(sc: Scenario, frames: Optional[int] = None):
    """Yield the :class:`FrameEnvironment` of frames ``0..K-1`` in order.

    The truth (orbits, rain) and the sensing noise depend only on the seed,
    so runs that differ in framework see identical environments.
    """
    K = sc.frames if frames is None else frames
    grid = sc.grid
    pts = grid.sample_points_ecef()
    cols = grid.populated
    sensing_shells = [s for s in sc.shells if s.sensing_capable] or list(sc.shells)
    t_prop = max_propagation_time(sensing_shells, sc.min_elevation_deg)
    rain_rng = stream(sc.seed, "rain")
    fld = None
    nxt = propagate(sc.shells, 0, sc.frame_s) if K else None
    for k in range(K):
        if sc.rain is not None:
            fld = init_field(grid, sc.rain, sc.frame_s, rain_rng) if fld is None else step(
                fld, sc.rain, sc.frame_s, rain_rng)
        cur, nxt = nxt, propagate(sc.shells, k + 1, sc.frame_s)
        vis = visible_satellites(cur, nxt, pts, sc.min_elevation_deg)
        links = build_link_table(cur, nxt, vis, grid, rain_rate(fld) if fld is not None else None,
                                 sc.min_elevation_deg, sc.noise,
                                 sc.rain.rain_height_km if sc.rain is not None else 6.0)
        ts, c_s = _sensing_time(sc, links, t_prop)
        budget = FrameBudget(sc.ofdma_s, sc.frame_s, ts, sc.handover_s, sc.n_rtt)
        report = run_sensing_phase(links, sc.csi, sc.pilot, stream(sc.seed, "sensing", k))
        yield FrameEnvironment(k, links, report, budget, c_s, cols)


def realised_rates(believed, true, mode: str = "outage") -> np.ndarray:
    """Rate each pair actually delivers when transmitting at the believed rate.

    ``outage``: a rate above what the channel supports delivers nothing.
    ``capped``: the delivered rate is the smaller of the two.
    """
    b = np.asarray(believed, dtype=float)
    t = np.asarray(true, dtype=float)
    if mode == "outage":
        return np.where(b <= t, b, 0.0)
    if mode == "capped":
        return np.minimum(b, t)
    raise ValueError(f"unknown realisation mode {mode!r}")


def _alpha_prev(prev: dict, sat_ids, n_cols) -> np.ndarray:
    a = np.zeros((len(sat_ids), n_cols))
    for i, sid in enumerate(sat_ids):
        row = prev.get(int(sid))
        if row is not None:
            a[i] = row
    return a


def _nmse_pair(links: LinkTable, rep: SensingReport, mask):
    if not mask.any():
        return None, None
    return (nmse(links.snr[mask], rep.snr_hat[mask]),
            nmse(links.attenuation[mask], rep.atten_hat[mask]))


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return repr(float(v))


def _prepare(config, overrides: dict) -> Scenario:
    cfg = load_config(config)
    for key, val in overrides.items():
        if val is not None:
            cfg = set_option(cfg, key, val)
    return build_scenario(cfg)


def run_experiment(
    config: Union[str, Path, dict, Scenario],
    out_dir: Optional[Union[str, Path]] = None,
    *,
    seed: Optional[int] = None,
    frames: Optional[int] = None,
    frameworks=None,
    csi: Optional[str] = None,
    pilot_len: Optional[int] = None,
    keep_allocations: bool = False,
    progress: Optional[Callable[[str], None]] = None,
) -> RunResult:
    """Simulate ``K`` frames for each configured framework and collect KPIs.

    Keyword overrides replace the matching config entries (and so enter the
    config digest). With ``out_dir`` set, ``kpis.csv``, ``telemetry.csv`` and
    ``manifest.json`` are written there.
    """
    if isinstance(config, Scenario):
        sc = config
    else:
        sc = _prepare(config, {
            "run.seed": seed,
            "run.frames": frames,
            "run.frameworks": list(frameworks) if frameworks is not None else None,
            "sensing.csi": csi,
            "sensing.pilot_len": pilot_len,
        })
    check_frame_budget(sc)
    wall0 = time.perf_counter()
    warnings = []
    if sc.handover_s < sc.handover_bound_s:
        msg = (f"configured handover time {sc.handover_s} s is below the round-trip bound "
               f"{sc.handover_bound_s} s")
        log.warning(msg)
        warnings.append(msg)

    M_all = sc.grid.active_users
    records, telemetry = [], []
    allocations = {fw: [] for fw in sc.frameworks}
    prev_assoc = {fw: {} for fw in sc.frameworks}
    prev_serving = {fw: None for fw in sc.frameworks}
    ts_seen, ra_budgets = [], []
    for env in simulate_environment(sc):
        links, rep, cols = env.links, env.report, env.cols
        M = M_all[cols]
        rho_hat = links.rates_from_snr(rep.snr_hat)[:, cols]
        rho_true = links.rate[:, cols]
        rho_real = realised_rates(rho_hat, rho_true, sc.realisation)
        ng, na = _nmse_pair(links, rep, rep.sensed)
        wet = links.atten_db > 0
        split = {}
        for tag, m in (("rain", rep.sensed & wet), ("dry", rep.sensed & ~wet)):
            split[f"nmse_gamma_{tag}"], split[f"nmse_att_{tag}"] = _nmse_pair(links, rep, m)
        ts_seen.append(env.budget.sensing_s)
        ra_budgets.append(env.budget.ra_budget_s)
        for fw in sc.frameworks:
            alpha = _alpha_prev(prev_assoc[fw], links.sat_ids, len(cols))
            H = sc.handover_s * (1.0 - alpha)
            inp = RateInput(rho_hat, M, H, env.budget.n_comm, sc.n_beams, sc.ofdma_s, sc.frame_s,
                            sat_ids=links.sat_ids)
            t0 = time.perf_counter()
            failed = ""
            try:
                res = FRAMEWORKS[fw](inp, sc.solver)
                X = res.X
            except (AllocationInfeasible, SubproblemError) as exc:
                log.warning("frame %d: %s failed: %s", env.frame, fw, exc)
                failed = type(exc).__name__
                res = None
                X = np.zeros(inp.shape, dtype=np.int64)
            solver_s = time.perf_counter() - t0

            R = per_user_throughput(X, rho_real, H, M, sc.ofdma_s, sc.frame_s).sum(axis=0)
            serving = serving_satellite(X, links.sat_ids)
            before = prev_serving[fw] if prev_serving[fw] is not None else np.full(len(cols), -1)
            ho = handover_count(before, serving)
            prev_serving[fw] = serving
            prev_assoc[fw] = {int(sid): (X[i] > 0).astype(float) for i, sid in enumerate(links.sat_ids)
                              if (X[i] > 0).any()}
            problems = check_feasible(X, inp)
            served = X > 0
            rec = KpiRecord(
                frame=env.frame,
                framework=fw,
                csi=sc.csi,
                pilot_len=sc.pilot.pilot_len,
                throughput_bps=float(R.sum()),
                per_user_bps=per_user_mean(R, M),
                jain=jain_index(R, M),
                handovers=ho,
                nmse_gamma=ng,
                nmse_att=na,
                solver_s=solver_s,
                ts_s=env.budget.sensing_s,
            )
            records.append(rec)
            info = res.info if res is not None else {}
            telemetry.append({
                "frame": env.frame,
                "framework": fw,
                "satellites": int(len(links.sat_ids)),
                "cells": int(len(cols)),
                "n_comm": env.budget.n_comm,
                "ts_ms": env.budget.sensing_s * 1e3,
                "solver_ms": solver_s * 1e3,
                "iterations": res.iterations if res is not None else 0,
                "converged": bool(res.converged) if res is not None else False,
                "stopped": info.get("stopped", failed),
                "ipm_iterations": info.get("ipm_iterations", 0),
                "multi_matched_cells": info.get("multi_matched_cells", 0),
                "objective": res.objective if res is not None else 0.0,
                "relaxed_objective": res.relaxed_objective if res is not None else float("nan"),
                "failed": failed,
                "violations": len(problems),
                "served_cells": int(served.any(axis=0).sum()),
                "outage_pairs": int(np.count_nonzero(served & (rho_real < rho_hat))),
                "per_user_bps": rec.per_user_bps,
                "ra_deadline_ok": ra_deadline_check(solver_s, env.budget),
                **split,
            })
            if keep_allocations:
                allocations[fw].append((links.sat_ids.copy(), X.copy(), inp))
        if progress is not None:
            progress(f"frame {env.frame + 1}/{sc.frames} done")

    manifest = _manifest(sc, records, telemetry, ts_seen, ra_budgets, warnings, time.perf_counter() - wall0)
    result = RunResult(records, telemetry, manifest, allocations if keep_allocations else {})
    if out_dir is not None:
        write_outputs(result, out_dir, sc.record_solver_ms)
    return result


def _summary(sc: Scenario, fw: str, recs: list, tel: list) -> dict:
    if not recs:
        return {"frames": 0}
    hos = [r.handovers for r in recs[1:]]
    return {
        "frames": len(recs),
        "mean_throughput_bps": float(np.mean([r.throughput_bps for r in recs])),
        "mean_per_user_bps": float(np.mean([r.per_user_bps for r in recs])),
        "mean_jain": float(np.mean([r.jain for r in recs])),
        "handovers_per_second": float(np.sum(hos) / (len(hos) * sc.frame_s)) if hos else None,
        "failed_frames": sum(1 for t in tel if t["failed"]),
        "converged_fraction": float(np.mean([t["converged"] for t in tel])),
        "violations": int(sum(t["violations"] for t in tel)),
        "max_solver_s": float(max(t["solver_ms"] for t in tel) / 1e3),
        "mean_solver_s": float(np.mean([t["solver_ms"] for t in tel]) / 1e3),
    }


def _manifest(sc, records, telemetry, ts_seen, ra_budgets, warnings, wall_s) -> dict:
    import scipy

    summaries = {}
    for fw in sc.frameworks:
        recs = [r for r in records if r.framework == fw]
        tel = [t for t in telemetry if t["framework"] == fw]
        summaries[fw] = _summary(sc, fw, recs, tel)
    max_solver = max((t["solver_ms"] / 1e3 for t in telemetry), default=0.0)
    budget = min(ra_budgets) if ra_budgets else sc.frame_s - sc.handover_s
    ra = {
        "frame_s": sc.frame_s,
        "max_sensing_s": max(ts_seen, default=0.0),
        "handover_s": sc.handover_s,
        "budget_s": budget,
        "max_solver_s": max_solver,
        "deadline_met": bool(all(t["ra_deadline_ok"] for t in telemetry)),
    }
    if not ra["deadline_met"]:
        warnings.append("solver wall time exceeded the resource-allocation budget in at least one frame")
    return {
        "name": sc.name,
        "config_digest": sc.digest,
        "seed": sc.seed,
        "frames": sc.frames,
        "frameworks": list(sc.frameworks),
        "csi": sc.csi,
        "pilot_len": sc.pilot.pilot_len,
        "realisation": sc.realisation,
        "populated_cells": len(sc.grid.populated),
        "handover": {"configured_s": sc.handover_s, "bound_s": sc.handover_bound_s,
                     "ok": sc.handover_s >= sc.handover_bound_s},
        "ra_deadline": ra,
        "summaries": summaries,
        "warnings": warnings,
        "wall_time_s": wall_s,
        "versions": {"leoisac": __version__, "numpy": np.__version__, "scipy": scipy.__version__,
                     "python": platform.python_version()},
        "config": sc.config,
    }


def write_outputs(result: RunResult, out_dir, record_solver_ms: bool = False) -> Path:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "kpis.csv", "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(KPI_HEADER)
        for r in result.records:
            w.writerow([
                r.frame, r.framework, r.csi, r.pilot_len, _fmt(r.throughput_bps), _fmt(r.jain), r.handovers,
                _fmt(r.nmse_gamma), _fmt(r.nmse_att), _fmt(r.solver_s * 1e3) if record_solver_ms else "",
                _fmt(r.ts_s * 1e3),
            ])
    with open(out / "telemetry.csv", "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(TELEMETRY_HEADER)
        for t in result.telemetry:
            w.writerow([t[k] if isinstance(t[k], str) else _fmt(t[k]) for k in TELEMETRY_HEADER])
    with open(out / "manifest.json", "w", encoding="utf-8") as fh:
        json.dump(result.manifest, fh, indent=2, sort_keys=True, default=str)
        fh.write("\n")
    return out


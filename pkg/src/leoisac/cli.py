"""Command-line entry point: ``python -m leoisac <command>``."""

from __future__ import annotations

import argparse
import logging
import sys

from .frame import ConfigurationError

__all__ = ["main", "build_parser"]


def _frameworks(values):
    if not values:
        return None
    out = []
    for v in values:
        out.extend(x for x in v.split(",") if x)
    return out


def _cmd_run(args):
    from .harness import run_experiment

    res = run_experiment(args.config, args.out, seed=args.seed, frames=args.frames,
                         frameworks=_frameworks(args.framework), csi=args.csi, pilot_len=args.pilot_len,
                         progress=(lambda m: print(m, file=sys.stderr)) if args.verbose else None)
    m = res.manifest
    print(f"config digest {m['config_digest'][:16]}  seed {m['seed']}  frames {m['frames']}  csi {m['csi']}")
    for fw, s in m["summaries"].items():
        if s["frames"]:
            print(f"{fw:6s} throughput {s['mean_throughput_bps']:.4g} bit/s  per-user {s['mean_per_user_bps']:.4g}"
                  f" bit/s  Jain {s['mean_jain']:.3f}  converged {s['converged_fraction']:.0%}")
    ra = m["ra_deadline"]
    print(f"RA budget {ra['budget_s']:.3f} s, slowest solve {ra['max_solver_s']:.3f} s, "
          f"deadline {'met' if ra['deadline_met'] else 'MISSED'}")
    for w in m["warnings"]:
        print(f"warning: {w}")
    if args.out:
        print(f"outputs in {args.out}")
    return 0


def _cmd_sweep(args):
    from .harness.sweep import run_sweep

    over = {}
    if args.frames is not None:
        over["run.frames"] = args.frames
    if args.seed is not None:
        over["run.seed"] = args.seed
    if args.framework:
        over["run.frameworks"] = _frameworks(args.framework)
    if args.csi:
        over["sensing.csi"] = args.csi
    rows = run_sweep(args.config, args.param, args.values, args.out, workers=args.workers, **over)
    for r in rows:
        print(f"{r['param']}={r['value']:<8} {r['framework']:6s} throughput {r['mean_throughput_bps']:.4g} bit/s "
              f"Jain {r['mean_jain']:.3f}")
    return 0


def _cmd_oracle(args):
    from .harness import build_scenario, load_config
    from .harness.toy import compare_with_oracle

    sc = build_scenario(load_config(args.config))
    rows = compare_with_oracle(args.instances, seed=args.seed, params=sc.solver, ofdma_s=sc.ofdma_s)
    ok = 0
    for r in rows:
        d = "infeasible" if r["dmrab"] is None else f"{r['dmrab']:.3f}"
        good = r["ratio"] >= args.threshold
        ok += good
        print(f"instance {r['instance']:3d} cells {r['cells']}  optimum {r['optimum']:.3f}  jmra {r['jmra']:.3f} "
              f"(ratio {r['ratio']:.4f}{'' if good else ' LOW'})  dmrab {d}")
    print(f"jmra within {args.threshold:.0%} of the optimum on {ok}/{len(rows)} instances")
    return 0


def _cmd_validate(args):
    from .harness import build_scenario, check_frame_budget, load_config

    sc = build_scenario(load_config(args.config))
    b = check_frame_budget(sc)
    print(f"scenario {sc.name}: valid (digest {sc.digest[:16]})")
    for s in sc.shells:
        print(f"  shell {s.id}: {s.total} satellites at {s.altitude_m / 1e3:.0f} km, {s.carrier_hz / 1e9:g} GHz, "
              f"sensing {'yes' if s.sensing_capable else 'no'}")
    print(f"  cells {len(sc.grid)} ({len(sc.grid.populated)} populated, "
          f"{int(sc.grid.active_users.sum())} active users)")
    print(f"  OFDMA frames per system frame {b.n_total}; worst-case sensing {b.n_sensing}; "
          f"communication {b.n_comm}")
    print(f"  handover time {sc.handover_s:g} s (round-trip bound {sc.handover_bound_s:g} s)"
          f"{'' if sc.handover_s >= sc.handover_bound_s else '  BELOW BOUND'}")
    print(f"  resource-allocation budget {b.ra_budget_s:g} s")
    return 0


def _cmd_plot(args):
    from .harness.plots import plot_outputs

    paths = plot_outputs(args.kpis or (), args.sweep or (), args.out)
    for p in paths:
        print(p)
    if not paths:
        print("nothing to plot", file=sys.stderr)
        return 1
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="leoisac", description=__doc__)
    ap.add_argument("-v", "--verbose", action="store_true", help="log progress and warnings")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, frames=True):
        p.add_argument("--config", required=True, help="scenario YAML file or preset name (desk_small, table2_full)")
        p.add_argument("--seed", type=int, help="master seed (unsigned 64-bit)")
        if frames:
            p.add_argument("--frames", type=int, help="number of system frames K")

    p = sub.add_parser("run", help="simulate K frames and write kpis.csv, telemetry.csv, manifest.json")
    common(p)
    p.add_argument("--out", help="output directory")
    p.add_argument("--framework", action="append", help="jmra or dmrab (repeat or comma-separate for both)")
    p.add_argument("--csi", choices=["perfect", "sensed", "none"])
    p.add_argument("--pilot-len", type=int, help="pilot length, a power of two")
    p.set_defaults(func=_cmd_run)

    p = sub.add_parser("sweep", help="one run per parameter value, summarised in sweep.csv")
    common(p)
    p.add_argument("--param", required=True, choices=["pilot_len", "t_f", "t_ho"],
                   help="t_f and t_ho values are in seconds")
    p.add_argument("--values", required=True, nargs="+", type=float)
    p.add_argument("--out", help="output directory")
    p.add_argument("--framework", action="append")
    p.add_argument("--csi", choices=["perfect", "sensed", "none"])
    p.add_argument("--workers", type=int, default=1, help="sweep points run in parallel")
    p.set_defaults(func=_cmd_sweep)

    p = sub.add_parser("oracle", help="compare jmra and dmrab with exhaustive search on toy instances")
    p.add_argument("--config", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--instances", type=int, default=20)
    p.add_argument("--threshold", type=float, default=0.95)
    p.set_defaults(func=_cmd_oracle)

    p = sub.add_parser("validate", help="check a scenario file and print its derived frame budget")
    p.add_argument("--config", required=True)
    p.set_defaults(func=_cmd_validate)

    p = sub.add_parser("plot", help="SVG figures from kpis.csv / sweep.csv files")
    p.add_argument("--kpis", nargs="*", help="kpis.csv files")
    p.add_argument("--sweep", nargs="*", help="sweep.csv files")
    p.add_argument("--out", default=".", help="directory for the SVG files")
    p.set_defaults(func=_cmd_plot)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.ERROR, format="%(levelname)s %(message)s")
    if args.command == "sweep" and args.param == "pilot_len":
        args.values = [int(v) for v in args.values]
    try:
        return args.func(args)
    except ConfigurationError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())

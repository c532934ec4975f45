"""A short desk-scale run of both frameworks, written to ./desk_demo with
SVG figures (matplotlib needed for the figures)."""

import sys
from pathlib import Path

from leoisac.harness import run_experiment

out = Path(sys.argv[1] if len(sys.argv) > 1 else "desk_demo")
frames = int(sys.argv[2]) if len(sys.argv) > 2 else 3
res = run_experiment("desk_small", out, frames=frames, progress=print)
for fw, s in res.manifest["summaries"].items():
    print(f"{fw:6s} throughput {s['mean_throughput_bps'] / 1e6:7.2f} Mbit/s  per-user "
          f"{s['mean_per_user_bps'] / 1e3:7.2f} kbit/s  Jain {s['mean_jain']:.3f}")
try:
    from leoisac.harness.plots import plot_outputs

    for p in plot_outputs([out / "kpis.csv"], [], out):
        print("wrote", p)
except ImportError:
    print("matplotlib not installed; skipping figures")

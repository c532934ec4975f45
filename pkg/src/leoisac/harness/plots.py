"""SVG figures from ``kpis.csv`` and ``sweep.csv`` files (needs matplotlib)."""

from __future__ import annotations

import csv
from collections import defaultdict
from pathlib import Path
from typing import Iterable, Optional

__all__ = ["read_csv", "plot_outputs"]


def read_csv(path) -> list:
    with open(path, newline="", encoding="utf-8") as fh:
        return list(csv.DictReader(fh))


def _num(v) -> Optional[float]:
    return float(v) if v not in ("", None) else None


def _figure():
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    plt.rcParams["svg.hashsalt"] = "leoisac"  # stable element ids in the SVG output
    return plt


def _series(rows, param, ycol):
    out = defaultdict(list)
    for r in rows:
        if r["param"] != param:
            continue
        y = _num(r[ycol])
        if y is not None:
            out[(r["framework"], r["csi"])].append((float(r["value"]), y))
    return {k: sorted(v) for k, v in out.items()}


def _line_plot(plt, series, xlabel, ylabel, path, logx=False, logy=False):
    fig, ax = plt.subplots(figsize=(6, 4))
    for (fw, csi), pts in sorted(series.items()):
        xs, ys = zip(*pts)
        ax.plot(xs, ys, marker="o", label=f"{fw} ({csi})")
    if logx:
        ax.set_xscale("log", base=2)
    if logy:
        ax.set_yscale("log")
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    ax.grid(True, alpha=0.3)
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)
    return path


def plot_outputs(kpis: Iterable = (), sweeps: Iterable = (), out_dir=".") -> list:
    """Write every figure the given files support and return their paths.

    From ``kpis.csv`` files: per-frame Jain index box plot per framework.
    From ``sweep.csv`` files: throughput and NMSE against pilot length,
    throughput against frame length.
    """
    plt = _figure()
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []

    jain = defaultdict(list)
    for path in kpis:
        for r in read_csv(path):
            v = _num(r["jain"])
            if v is not None:
                jain[f"{r['framework']} ({r['csi']})"].append(v)
    if jain:
        labels = sorted(jain)
        fig, ax = plt.subplots(figsize=(6, 4))
        ax.boxplot([jain[k] for k in labels])
        ax.set_xticks(range(1, len(labels) + 1), labels)
        ax.set_ylabel("Jain index per frame")
        ax.set_ylim(0, 1)
        fig.tight_layout()
        p = out / "jain_box.svg"
        fig.savefig(p, format="svg", metadata={"Date": None})
        plt.close(fig)
        written.append(p)

    rows = [r for path in sweeps for r in read_csv(path)]
    s = _series(rows, "pilot_len", "mean_throughput_bps")
    if s:
        written.append(_line_plot(plt, s, "pilot length [symbols]", "mean throughput [bit/s]",
                                  out / "throughput_vs_pilot_len.svg", logx=True))
    for col, name in (("nmse_gamma", "SNR"), ("nmse_att", "attenuation")):
        s = _series(rows, "pilot_len", col)
        if s:
            written.append(_line_plot(plt, s, "pilot length [symbols]", f"NMSE of {name}",
                                      out / f"{col}_vs_pilot_len.svg", logx=True, logy=True))
    s = _series(rows, "t_f", "mean_throughput_bps")
    if s:
        written.append(_line_plot(plt, s, "frame length T_F [s]", "mean throughput [bit/s]",
                                  out / "throughput_vs_frame_len.svg"))
    return written

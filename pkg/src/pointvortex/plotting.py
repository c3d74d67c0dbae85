"""Figures and CSV tables rendered from the CLI output files."""

from __future__ import annotations

import csv
import os

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .serialize import read_json, read_jsonl  # noqa: E402


def _report(path):
    doc = read_json(path)
    return doc.get("report", doc)


STYLE = {
    "figure.figsize": (5.0, 3.6),
    "figure.dpi": 120,
    "font.size": 9,
    "axes.linewidth": 0.6,
    "axes.spines.top": False,
    "axes.spines.right": False,
    "lines.linewidth": 1.0,
    "savefig.bbox": "tight",
}


def _write_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([repr(v) if isinstance(v, float) else v for v in row])
    return path


def _boundary(ax, domain):
    th = np.linspace(0, 2 * np.pi, 721)
    c = domain.boundary_curve(th)
    ax.plot(c.real, c.imag, color="0.3", lw=0.8)
    if domain.kind == "annulus":
        c = domain.inner_curve(th)
        ax.plot(c.real, c.imag, color="0.3", lw=0.8)


def render_trajectory(outdir, domain=None):
    """Paths, energy drift and separation of ``trajectory.jsonl``."""
    recs = read_jsonl(os.path.join(outdir, "trajectory.jsonl"))
    t = np.array([r["t"] for r in recs])
    X = np.array([r["x"] for r in recs], dtype=float)
    H = np.array([np.nan if r["H"] is None else r["H"] for r in recs])
    d = np.array([r["d"] for r in recs])
    files = []
    rows = [[float(ti), *map(float, xi), float(Hi), float(di)] for ti, xi, Hi, di in zip(t, X, H, d)]
    N = X.shape[1] // 2
    header = ["t"] + [f"{c}{i}" for i in range(N) for c in ("x", "y")] + ["H", "d"]
    files.append(_write_csv(os.path.join(outdir, "trajectory.csv"), header, rows))

    with plt.rc_context(STYLE):
        fig, ax = plt.subplots()
        if domain is not None:
            _boundary(ax, domain)
        for i in range(N):
            ax.plot(X[:, 2 * i], X[:, 2 * i + 1], lw=0.8, label=f"vortex {i}")
            ax.plot(X[0, 2 * i], X[0, 2 * i + 1], "o", ms=3, color="k")
        ax.set_aspect("equal")
        ax.set_xlabel("x")
        ax.set_ylabel("y")
        if N <= 6:
            ax.legend(frameon=False, fontsize=7)
        files.append(os.path.join(outdir, "trajectory.png"))
        fig.savefig(files[-1])
        plt.close(fig)

        fig, (a1, a2) = plt.subplots(2, 1, sharex=True)
        a1.plot(t, np.abs(H - H[0]) / (1 + abs(H[0])) + 1e-18)
        a1.set_yscale("log")
        a1.set_ylabel("relative |H - H(0)|")
        a2.plot(t, d)
        a2.set_yscale("log")
        a2.set_ylabel("min separation")
        a2.set_xlabel("t")
        files.append(os.path.join(outdir, "diagnostics.png"))
        fig.savefig(files[-1])
        plt.close(fig)
    return files


def render_ensemble(outdir):
    rep = _report(os.path.join(outdir, "ensemble.json"))
    cf = rep["collapse_fraction"]
    deltas = sorted(float(k) for k in cf)
    vals = np.array([cf[repr(dl)] for dl in deltas], dtype=float)
    files = [
        _write_csv(
            os.path.join(outdir, "collapse_curve.csv"),
            ["delta", "fraction", "wilson_low", "wilson_high"],
            [[dl, *map(float, v)] for dl, v in zip(deltas, vals)],
        )
    ]
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots()
        if len(deltas):
            dl = np.array(deltas)
            f = vals[:, 0]
            pos = f > 0
            err = np.clip(np.vstack([f - vals[:, 1], vals[:, 2] - f]), 0.0, None)
            ax.errorbar(dl[pos], f[pos], yerr=err[:, pos], fmt="o-", ms=3, capsize=2, label="fraction (95% Wilson)")
            if np.any(~pos):
                # no flagged runs: show the upper confidence limit
                ax.plot(dl[~pos], vals[~pos, 2], "v", ms=4, color="0.4", label="upper limit, none flagged")
            ax.set_xscale("log")
            ax.set_yscale("log")
            ax.legend(frameon=False, fontsize=7)
        ax.set_xlabel(r"$\delta$")
        ax.set_ylabel("fraction with min separation below $\\delta$")
        files.append(os.path.join(outdir, "collapse_curve.png"))
        fig.savefig(files[-1])
        plt.close(fig)

        h = rep["tau_histogram"]
        edges, counts = np.array(h["edges"]), np.array(h["counts"])
        fig, ax = plt.subplots()
        ax.stairs(counts, edges, fill=True, alpha=0.6)
        ax.set_xlabel("stop time")
        ax.set_ylabel("runs")
        files.append(os.path.join(outdir, "stop_times.png"))
        fig.savefig(files[-1])
        plt.close(fig)
    return files


def render_inequalities(outdir):
    rep = _report(os.path.join(outdir, "inequalities.json"))
    levels = rep["quadrature_levels"]
    est = rep["estimates"]
    files = [
        _write_csv(
            os.path.join(outdir, "inequalities.csv"),
            ["integral"] + [f"2^{m}" for m in levels],
            [[name, *map(float, v)] for name, v in sorted(est.items())],
        )
    ]
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots()
        for name in ("coupling_over_distance", "coupling_over_boundary"):
            ax.plot(levels, est[name], "o-", ms=3, label=name.replace("_", " "))
        ax.set_xlabel("log2 sample count")
        ax.set_ylabel("estimate")
        ax.legend(frameon=False)
        files.append(os.path.join(outdir, "inequalities.png"))
        fig.savefig(files[-1])
        plt.close(fig)
    return files


def render_bounds(outdir):
    rep = _report(os.path.join(outdir, "bounds.json"))
    gap = rep["gap_max_by_stratum"]
    grad = rep["gradient_distance_by_stratum"]
    keys = [k for k in gap if k != "bulk"]
    dl = np.array([float(k) for k in keys])
    files = [
        _write_csv(
            os.path.join(outdir, "bounds.csv"),
            ["stratum", "gap_max", "gradient_distance_max"],
            [[k, float(gap[k]), float(grad[k])] for k in gap],
        )
    ]
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots()
        order = np.argsort(dl)
        ax.plot(dl[order], np.array([gap[k] for k in keys])[order], "o-", ms=3, label="max(-2 pi robin - ln d)")
        ax.plot(dl[order], np.array([grad[k] for k in keys])[order], "s-", ms=3, label="max |grad robin| d")
        ax.set_xscale("log")
        ax.set_xlabel("distance to boundary")
        ax.legend(frameon=False)
        files.append(os.path.join(outdir, "bounds.png"))
        fig.savefig(files[-1])
        plt.close(fig)
    return files


def render_all(outdir, domain=None):
    """Render every figure whose source file exists in ``outdir``."""
    files = []
    if os.path.exists(os.path.join(outdir, "trajectory.jsonl")):
        files += render_trajectory(outdir, domain)
    if os.path.exists(os.path.join(outdir, "ensemble.json")):
        files += render_ensemble(outdir)
    if os.path.exists(os.path.join(outdir, "inequalities.json")):
        files += render_inequalities(outdir)
    if os.path.exists(os.path.join(outdir, "bounds.json")):
        files += render_bounds(outdir)
    return files

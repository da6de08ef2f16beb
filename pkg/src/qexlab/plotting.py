"""Figure rendering for the report paths.

Each CLI report command drops a PNG next to its CSV.  Figures are data
plots with matplotlib defaults plus a small shared style; nothing here
affects the numeric outputs.
"""

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

_STYLE = {
    "figure.figsize": (6.4, 4.2),
    "axes.grid": True,
    "grid.linestyle": ":",
    "grid.alpha": 0.6,
    "font.size": 10,
    "legend.fontsize": 9,
}


def _styled():
    return plt.rc_context(_STYLE)


def sweep_figure(records, path, title="ratio sweep"):
    with _styled():
        fig, ax = plt.subplots()
        recs = [r for r in records if np.isfinite(r.ratio)]
        by_key = {}
        for r in recs:
            by_key.setdefault((r.d, r.surface), []).append(r)
        for (d, surface), group in sorted(by_key.items()):
            group = sorted(group, key=lambda g: g.rho)
            rho = [g.rho for g in group]
            ratio = [g.ratio for g in group]
            ax.loglog(rho, ratio, "o-", label=f"d={d} {surface}")
        ax.set_xlabel("rho")
        ax.set_ylabel("T / (|E| |F|)^{d/(d+1)}")
        ax.set_title(title)
        ax.legend()
        fig.tight_layout()
        fig.savefig(path, dpi=150)
        plt.close(fig)


def probe_figure(probe, path):
    with _styled():
        fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(9.0, 4.0))
        rows = sorted(probe.rows, key=lambda r: r.rho)
        rho = [r.rho for r in rows]
        ax1.loglog(rho, [r.ratio_sphere for r in rows], "o-",
                   label="sphere (degenerate radii)")
        ax1.loglog(rho, [r.ratio_parab for r in rows], "s--",
                   label="paraboloid (same radii)")
        ax1.set_xlabel("rho")
        ax1.set_ylabel("ratio")
        ax1.set_title(f"decay exponents: sphere {probe.fit_exponent_sphere:.3f}, "
                      f"parab {probe.fit_exponent_parab:.3f}")
        ax1.legend()
        overlap = [r.overlap for r in rows]
        if np.any(np.isfinite(overlap)):
            ax2.semilogx(rho, overlap, "d-")
            ax2.set_xlabel("rho")
            ax2.set_ylabel("mean pairwise slice overlap")
            ax2.set_title("slice overlap")
        fig.tight_layout()
        fig.savefig(path, dpi=150)
        plt.close(fig)


def partition_figure(report, path):
    with _styled():
        fig, ax = plt.subplots()
        vals = sorted((p.t for p in report.pieces), reverse=True)
        ax.bar(range(len(vals)), vals)
        share = report.total.value / max(len(report.pieces), 1)
        ax.axhline(share, color="k", linestyle="--",
                   label="total / piece count")
        ax.set_xlabel("piece (sorted)")
        ax.set_ylabel("piece bilinear form")
        ax.set_title("pigeonhole over decomposition pieces")
        ax.legend()
        fig.tight_layout()
        fig.savefig(path, dpi=150)
        plt.close(fig)


def tower_figure(tower, path):
    with _styled():
        fig, axes = plt.subplots(1, min(len(tower.levels), 3),
                                 figsize=(9.5, 3.4), squeeze=False)
        for j, ax in enumerate(axes[0]):
            lvl = tower.levels[j]
            if lvl.samples.shape[0] == 0:
                continue
            if lvl.samples.shape[1] == 1:
                ax.hist(lvl.samples[:, 0], bins=40)
                ax.set_xlabel(f"level {j + 1} coordinate")
            else:
                ax.plot(lvl.samples[:, 0], lvl.samples[:, 1], ".",
                        markersize=2)
                ax.set_xlabel(f"level {j + 1} s_1")
                ax.set_ylabel("s_2")
            ax.set_title(f"level {j + 1}: {lvl.samples.shape[0]} pts")
        fig.tight_layout()
        fig.savefig(path, dpi=150)
        plt.close(fig)

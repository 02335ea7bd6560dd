"""Matplotlib renderings of the report tables (Agg backend, PNG output)."""

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from ..interferometer import fringe_model
from ..pipelines import saturation_curve


def save_figure(path, draw, size=(6.4, 4.8)):
    fig = plt.figure(figsize=size)
    try:
        draw(fig)
        fig.tight_layout()
        fig.savefig(path, dpi=120, metadata={"Software": None})
    finally:
        plt.close(fig)


def draw_fig3(fig, rows):
    ax = fig.add_subplot()
    t_dense = np.linspace(min(r["T"] for r in rows) * 0.98, 1.0, 400)
    ax.plot(t_dense, saturation_curve(t_dense), "k-", lw=1, label="saturation (theory)")
    t_noisy = [r["T_noisy"] for r in rows]
    ax.errorbar(t_noisy, [r["lhs_noisy"] for r in rows], yerr=[r["lhs_se"] for r in rows], fmt="^", color="tab:blue",
                ms=5, capsize=2, label=r"lhs $\cos\Phi$")
    ax.errorbar(t_noisy, [r["rhs_noisy"] for r in rows], yerr=[r["rhs_se"] for r in rows], fmt="o", color="tab:red",
                ms=4, capsize=2, mfc="none", label="rhs")
    ax.plot([r["T"] for r in rows], [r["lhs_noiseless"] for r in rows], "x", color="0.4", label="noiseless")
    ax.set_xlabel("T (mean transition probability)")
    ax.set_ylabel("value")
    ax.set_title("Bargmann-phase relation, equilateral sweep on |H>")
    ax.legend(fontsize=8)


def draw_fig4(fig, rows, mus):
    ax = fig.add_subplot()
    h = [r["h_deg"] for r in rows]
    ax.plot(h, [r["analytic"] for r in rows], "k-", lw=1, label="analytic")
    ax.errorbar(h, [r["lhs_noisy"] for r in rows], yerr=[r["lhs_se"] for r in rows], fmt=".", color="tab:blue",
                capsize=1.5, label="reconstructed")
    ax.axhline(1.0, color="k", ls="--", lw=1)
    for a in mus:
        ax.axvline(a, color="tab:green", ls=":", lw=1)
    ax.set_xlabel("preparation HWP angle h (deg)")
    ax.set_ylabel("OUR left-hand side")
    ax.set_title("Overlap relation for linearly polarised inputs")
    ax.legend(fontsize=8)


def draw_musmap(fig, sol):
    ax = fig.add_subplot()
    grid = np.array(sol.grid)
    n_t = sol.resolution
    theta = grid[:, 0].reshape(n_t, 2 * n_t)
    phi = grid[:, 1].reshape(n_t, 2 * n_t)
    lhs = grid[:, 2].reshape(n_t, 2 * n_t)
    mesh = ax.pcolormesh(np.degrees(phi), np.degrees(theta), lhs, shading="nearest", cmap="viridis")
    fig.colorbar(mesh, ax=ax, label="OUR left-hand side")
    for k, fam in enumerate(sol.families):
        pts = np.array([(t, p) for t, p, *_ in fam])
        ax.plot(np.degrees(pts[:, 1]), np.degrees(pts[:, 0]), ".", ms=2, color=f"C{k + 1}", label=f"family {k}")
    for name, hit in sol.known_axis_hits.items():
        x, y, z = hit["bloch"]
        ax.plot(np.degrees(np.mod(np.arctan2(y, x), 2 * np.pi)), np.degrees(np.arccos(np.clip(z, -1, 1))), "w*",
                ms=9, mec="k", clip_on=False)
        ax.annotate(name, (np.degrees(np.mod(np.arctan2(y, x), 2 * np.pi)), np.degrees(np.arccos(np.clip(z, -1, 1)))),
                    fontsize=7, color="w", xytext=(4, 4), textcoords="offset points", annotation_clip=False)
    ax.set_xlabel("azimuth (deg)")
    ax.set_ylabel("polar angle (deg)")
    ax.invert_yaxis()
    ax.set_title("degenerate: every state saturates" if sol.degenerate else "minimum-uncertainty families")
    if sol.families:
        ax.legend(fontsize=7, loc="lower right")


def draw_otoc(fig, rows):
    t = [r["t"] for r in rows]
    ax1, ax2 = fig.subplots(2, 1, sharex=True)
    ax1.plot(t, [r["abs_F"] for r in rows], label="|F|")
    ax1.plot(t, [r["bound_11"] for r in rows], "--", label="upper bound")
    ax1.set_ylabel("modulus")
    ax1.legend(fontsize=8)
    ax2.plot(t, [r["lhs_12"] for r in rows], label="2(1 - Re F)")
    ax2.plot(t, [r["rhs_12"] for r in rows], "--", label="lower bound")
    ax2.set_ylabel("squared commutator")
    ax2.set_xlabel("t")
    ax2.legend(fontsize=8)


def draw_verify(fig, rows):
    ax = fig.add_subplot()
    labels = [f"{r['number']}. {r['name']}" for r in rows]
    colors = ["tab:green" if r["passed"] else "tab:red" for r in rows]
    ax.barh(range(len(rows)), [1] * len(rows), color=colors)
    ax.set_yticks(range(len(rows)), labels, fontsize=8)
    ax.invert_yaxis()
    ax.set_xticks([])
    ax.set_title("acceptance checks (green pass, red fail)")


def draw_fits(fig, scans, fits):
    ax = fig.add_subplot()
    for k, (name, scan) in enumerate(scans.items()):
        fit = fits[name]
        color = f"C{k}"
        ax.plot(scan.theta, scan.counts, "o", ms=3, color=color, label=f"{name} (V={fit.visibility:.3f})")
        dense = np.linspace(scan.theta[0], scan.theta[-1], 300)
        ax.plot(dense, fringe_model(dense, fit.A1, fit.A2, fit.theta0), "-", lw=1, color=color)
    ax.set_xlabel("phase shift (rad)")
    ax.set_ylabel("counts")
    ax.legend(fontsize=7)

"""Figure rendering for run reports.

Plots are written next to the delimited metrics output; the harness
itself stays plot-free and only supplies the per-round records.
"""

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

__all__ = ["render_report_figures"]


def render_report_figures(records, out_prefix):
    """Render the MAE curve and, when present, coefficient-distance and
    metric-eigenvalue traces from per-round records.

    Returns the list of files written (paths "<out_prefix>.<name>.png").
    """
    written = []

    ts = [r["t"] for r in records if "mae_avg_so_far" in r]
    mae = [r["mae_avg_so_far"] for r in records if "mae_avg_so_far" in r]
    if ts:
        fig, ax = plt.subplots(figsize=(7, 4.5))
        ax.plot(ts, mae)
        ax.set_xlabel("round t")
        ax.set_ylabel("average MAE so far")
        ax.grid(True, alpha=0.3)
        path = f"{out_prefix}.mae.png"
        fig.tight_layout()
        fig.savefig(path, dpi=120)
        plt.close(fig)
        written.append(path)

    ts = [r["t"] for r in records if "p_dist" in r]
    dist = [r["p_dist"] for r in records if "p_dist" in r]
    if ts:
        fig, ax = plt.subplots(figsize=(7, 4.5))
        ax.plot(ts, dist)
        ax.set_xlabel("round t")
        ax.set_ylabel("coefficient distance to reference (Frobenius)")
        ax.grid(True, alpha=0.3)
        path = f"{out_prefix}.pdist.png"
        fig.tight_layout()
        fig.savefig(path, dpi=120)
        plt.close(fig)
        written.append(path)

    ts = [r["t"] for r in records if "omega_eig_min" in r]
    if ts:
        fig, ax = plt.subplots(figsize=(7, 4.5))
        for key, label in (
            ("omega_eig_min", "omega min"),
            ("omega_eig_max", "omega max"),
            ("gamma_eig_min", "gamma min"),
            ("gamma_eig_max", "gamma max"),
        ):
            ax.plot(ts, [r[key] for r in records if key in r], label=label)
        ax.set_xlabel("round t")
        ax.set_ylabel("metric eigenvalues")
        ax.set_ylim(-0.05, 1.1)
        ax.legend()
        ax.grid(True, alpha=0.3)
        path = f"{out_prefix}.eigs.png"
        fig.tight_layout()
        fig.savefig(path, dpi=120)
        plt.close(fig)
        written.append(path)

    return written

"""Matplotlib report figures rendered next to the delimited outputs.

These complement the deterministic SVG charts: richer styling for human
consumption, no byte-stability promises.  The Agg backend keeps rendering
headless.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

_VERDICT_COLORS = {
    "CertifiedStable": "#2ca02c",
    "NotCertified": "#d62728",
    "NoEquilibrium": "#7f7f7f",
}


def _styled_axes(ax):
    ax.grid(True, alpha=0.3, linewidth=0.6)
    for side in ("top", "right"):
        ax.spines[side].set_visible(False)
    return ax


def save_trajectory_figure(path: str, t, x, K, p=None, c=None) -> None:
    """Two-panel figure: state variables on top, treatment rates below."""
    with_rates = p is not None and c is not None
    if with_rates:
        fig, (ax_state, ax_rate) = plt.subplots(
            2, 1, sharex=True, figsize=(8.0, 6.0),
            gridspec_kw={"height_ratios": [2.2, 1.0]})
    else:
        fig, ax_state = plt.subplots(figsize=(8.0, 4.5))
        ax_rate = None

    _styled_axes(ax_state)
    ax_state.plot(t, x, color="#1f77b4", lw=1.6, label="tumor x")
    ax_state.plot(t, K, color="#d62728", lw=1.6, label="capacity K")
    ax_state.set_ylabel("size")
    ax_state.legend(frameon=False, loc="best")

    if ax_rate is not None:
        _styled_axes(ax_rate)
        ax_rate.plot(t, p, color="#9467bd", lw=1.4, label="p(t)")
        ax_rate.plot(t, c, color="#8c564b", lw=1.4, label="c(t)")
        ax_rate.set_ylabel("treatment rate")
        ax_rate.legend(frameon=False, loc="best")
        ax_rate.set_xlabel("t")
    else:
        ax_state.set_xlabel("t")

    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def save_sweep_figure(path: str, axis_names, axis_rows, metrics, verdicts) -> None:
    """Convergence metric across the grid, colored by the analytic verdict.

    One axis: metric against the swept value.  Otherwise: metric against the
    grid-point index in grid order.
    """
    fig, ax = plt.subplots(figsize=(8.0, 4.5))
    _styled_axes(ax)
    if len(axis_names) == 1:
        xs = [row[0] for row in axis_rows]
        ax.set_xlabel(axis_names[0])
    else:
        xs = list(range(len(axis_rows)))
        ax.set_xlabel("grid point (grid order)")

    floor = 1e-16
    ys = [m if m == m and m > floor else floor for m in metrics]
    for verdict in _VERDICT_COLORS:
        sel = [i for i, v in enumerate(verdicts) if v == verdict]
        if not sel:
            continue
        ax.scatter([xs[i] for i in sel], [ys[i] for i in sel],
                   s=28, color=_VERDICT_COLORS[verdict], label=verdict, zorder=3)
    ax.set_yscale("log")
    ax.axhline(1e-4, color="#444444", lw=0.8, ls="--")
    ax.set_ylabel("convergence metric")
    ax.legend(frameon=False, loc="best")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)

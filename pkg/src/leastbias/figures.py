"""Figure rendering for command reports.

Every saver draws one artifact for one command, writes a PNG to the given
path, and returns the path. The Agg backend keeps rendering headless and
file-only; nothing here affects numerical results.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

DPI = 150

__all__ = [
    "save_distribution_figure",
    "save_ground_state_figure",
    "save_collapse_figure",
    "save_film_figure",
    "save_curvature_figure",
    "save_descent_figure",
    "save_deviation_figure",
    "save_suite_figure",
]


def _finish(fig, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path, dpi=DPI, bbox_inches="tight")
    plt.close(fig)
    return path


def save_distribution_figure(solution, path) -> Path:
    """Level occupations of a maximum-entropy solution, log scale."""
    p = solution.distribution.weights
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    ax.bar(np.arange(p.size), p, color="tab:blue", width=0.8)
    ax.set_yscale("log")
    ax.set_xlabel("level index")
    ax.set_ylabel("probability")
    ax.set_title(f"least-biased occupation (beta = {solution.beta:.6g})")
    return _finish(fig, path)


def save_ground_state_figure(result, path) -> Path:
    """Ground-state profile: line plot in 1-D, midplane heatmap otherwise."""
    values = result.state.field.values
    grid = result.state.grid
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    if values.ndim == 1:
        ax.plot(grid.axis_coordinates(0), values, color="tab:blue")
        ax.set_xlabel("position")
        ax.set_ylabel("amplitude")
    else:
        mid = values.shape[-1] // 2
        image = values[(slice(None), slice(None)) + (mid,) * (values.ndim - 2)]
        x1 = grid.axis_coordinates(1)
        x0 = grid.axis_coordinates(0)
        extent = (x1[0], x1[-1], x0[0], x0[-1])
        handle = ax.imshow(image, origin="lower", extent=extent, cmap="viridis")
        fig.colorbar(handle, ax=ax, label="amplitude")
        ax.set_xlabel("axis 1")
        ax.set_ylabel("axis 0")
    ax.set_title(f"ground state (energy = {result.energy:.8g})")
    return _finish(fig, path)


def save_collapse_figure(scan, path) -> Path:
    """Energy balance across widths with the scan minimum marked."""
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    ax.plot(scan.sigmas, scan.kinetic, label="kinetic", color="tab:blue")
    ax.plot(scan.sigmas, scan.potential, label="potential", color="tab:red")
    ax.plot(scan.sigmas, scan.total, label="total", color="black", linewidth=2)
    sigma_star, total_star = scan.minimum()
    ax.plot([sigma_star], [total_star], marker="o", color="black")
    ax.axhline(0.0, color="gray", linewidth=0.5)
    ax.set_xlabel("width")
    ax.set_ylabel("energy")
    ax.set_title("width scan: kinetic floor vs attraction")
    ax.legend()
    return _finish(fig, path)


def save_film_figure(solution, path) -> Path:
    """Height field of the relaxed film."""
    fig, ax = plt.subplots(figsize=(5.4, 4.4))
    handle = ax.imshow(solution.height.values.T, origin="lower", cmap="viridis")
    fig.colorbar(handle, ax=ax, label="height")
    ax.set_xlabel("axis 0 index")
    ax.set_ylabel("axis 1 index")
    ax.set_title("least-area film over the frame")
    return _finish(fig, path)


def save_curvature_figure(scalars: np.ndarray, chart, path, name: str = "") -> Path:
    """Scalar curvature over the chart quadrature grid."""
    (lo0, hi0), (lo1, hi1) = chart
    fig, ax = plt.subplots(figsize=(5.8, 4.4))
    handle = ax.imshow(np.asarray(scalars).T, origin="lower",
                       extent=(lo0, hi0, lo1, hi1), aspect="auto", cmap="coolwarm")
    fig.colorbar(handle, ax=ax, label="scalar curvature")
    ax.set_xlabel("axis 0")
    ax.set_ylabel("axis 1")
    ax.set_title(f"scalar curvature{f' ({name})' if name else ''}")
    return _finish(fig, path)


def save_descent_figure(result, path) -> Path:
    """Monotone roughness history of the frame descent."""
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    history = np.asarray(result.history)
    positive = history[history > 0]
    floor = positive.min() * 0.5 if positive.size else 1e-18
    ax.semilogy(np.arange(history.size), np.maximum(history, floor),
                color="tab:blue")
    ax.set_xlabel("iteration")
    ax.set_ylabel("roughness functional")
    ax.set_title("projected descent over orthogonal frames")
    return _finish(fig, path)


def save_deviation_figure(table: np.ndarray, path) -> Path:
    """Anticommutator deviation table; identically zero when the algebra holds."""
    fig, ax = plt.subplots(figsize=(4.6, 4.0))
    handle = ax.imshow(np.asarray(table), origin="upper", cmap="magma", vmin=0.0)
    fig.colorbar(handle, ax=ax, label="max deviation")
    ax.set_xticks(range(4))
    ax.set_yticks(range(4))
    ax.set_xlabel("nu")
    ax.set_ylabel("mu")
    ax.set_title("Clifford relation residuals")
    return _finish(fig, path)


def save_suite_figure(records, path) -> Path:
    """One green/red bar per acceptance criterion."""
    names = [r["name"] for r in records]
    passed = [bool(r["passed"]) for r in records]
    colors = ["tab:green" if ok else "tab:red" for ok in passed]
    fig, ax = plt.subplots(figsize=(7.0, 0.42 * max(len(names), 4) + 1.2))
    y = np.arange(len(names))
    ax.barh(y, np.ones(len(names)), color=colors)
    ax.set_yticks(y)
    ax.set_yticklabels(names, fontsize=8)
    ax.invert_yaxis()
    ax.set_xticks([])
    ax.set_xlim(0, 1)
    total = sum(passed)
    ax.set_title(f"acceptance battery: {total}/{len(names)} passed")
    return _finish(fig, path)

"""Diagnostic figures comparing observed and imputed values.

Figures are rendered with matplotlib straight to SVG files.  Output is
byte-deterministic: jitter and down-sampling use a caller-provided seed
and the SVG writer runs with a fixed hash salt and no timestamp.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

import matplotlib
import numpy as np
from matplotlib.figure import Figure

from .errors import DataError

__all__ = ["DensityCurve", "kde", "render_stripplot", "render_density"]

OBSERVED_COLOR = "blue"
IMPUTED_COLOR = "magenta"
GRID_POINTS = 512
DOWNSAMPLE_LIMIT = 100_000

_SVG_RC = {"svg.hashsalt": "mixedreduce", "svg.fonttype": "path"}


@dataclass(frozen=True)
class DensityCurve:
    grid: np.ndarray
    density: np.ndarray
    bandwidth: float


def silverman_bandwidth(values: np.ndarray) -> float:
    """0.9 * min(sd, IQR/1.34) * m^(-1/5), falling back to sd when the
    interquartile range collapses to zero."""
    values = np.asarray(values, dtype=np.float64)
    sd = float(values.std(ddof=1))
    q75, q25 = np.percentile(values, [75, 25])
    spread = min(sd, (q75 - q25) / 1.34)
    if spread == 0.0:
        spread = sd
    return 0.9 * spread * values.size ** (-0.2)


def kde(values: np.ndarray, bandwidth: float | None = None) -> DensityCurve:
    """Gaussian kernel density on a 512-point grid over
    [min - 3h, max + 3h]."""
    values = np.asarray(values, dtype=np.float64)
    if values.size < 2 or not np.all(np.isfinite(values)):
        raise DataError("density estimation needs at least 2 finite values")
    lo, hi = float(values.min()), float(values.max())
    if hi <= lo:
        raise DataError("density estimation needs values with positive spread")
    if bandwidth is None:
        bandwidth = silverman_bandwidth(values)
    if bandwidth <= 0:
        raise DataError("bandwidth must be positive")

    grid = np.linspace(lo - 3 * bandwidth, hi + 3 * bandwidth, GRID_POINTS)
    density = np.zeros(GRID_POINTS, dtype=np.float64)
    norm = 1.0 / (values.size * bandwidth * np.sqrt(2 * np.pi))
    for start in range(0, values.size, 65536):
        chunk = values[start : start + 65536]
        z = (grid[:, None] - chunk[None, :]) / bandwidth
        density += np.exp(-0.5 * z * z).sum(axis=1)
    return DensityCurve(grid, density * norm, float(bandwidth))


def _save_svg(fig: Figure, out_path) -> None:
    with matplotlib.rc_context(_SVG_RC):
        fig.savefig(out_path, format="svg", metadata={"Date": None})


def _subsample(values: np.ndarray, rng: np.random.Generator) -> tuple[np.ndarray, bool]:
    if values.size <= DOWNSAMPLE_LIMIT:
        return values, False
    picked = rng.choice(values.size, size=DOWNSAMPLE_LIMIT, replace=False)
    return values[np.sort(picked)], True


def render_stripplot(
    observed: Mapping[str, np.ndarray],
    imputed: Mapping[str, np.ndarray],
    out_path,
    seed: int = 0,
) -> None:
    """One horizontal band per variable: observed points in blue,
    imputed points in magenta, with seeded vertical jitter."""
    if not observed:
        raise DataError("stripplot needs at least one variable")
    rng = np.random.default_rng(seed)

    fig = Figure(figsize=(8.0, 1.0 + 0.6 * len(observed)))
    ax = fig.add_subplot(111)
    any_imputed = False
    subsampled = False
    for band, (name, obs_values) in enumerate(observed.items()):
        obs = np.asarray(obs_values, dtype=np.float64)
        imp = np.asarray(imputed.get(name, ()), dtype=np.float64)
        obs, s1 = _subsample(obs, rng)
        imp, s2 = _subsample(imp, rng)
        subsampled = subsampled or s1 or s2
        jitter_obs = rng.uniform(-0.25, 0.25, size=obs.size)
        jitter_imp = rng.uniform(-0.25, 0.25, size=imp.size)
        ax.scatter(
            obs,
            np.full(obs.size, band) + jitter_obs,
            s=8,
            color=OBSERVED_COLOR,
            alpha=0.6,
            linewidths=0,
            gid=f"strip-observed-{band}",
        )
        if imp.size:
            any_imputed = True
            ax.scatter(
                imp,
                np.full(imp.size, band) + jitter_imp,
                s=10,
                color=IMPUTED_COLOR,
                alpha=0.9,
                linewidths=0,
                gid=f"strip-imputed-{band}",
            )

    ax.set_yticks(range(len(observed)))
    ax.set_yticklabels(list(observed))
    ax.set_xlabel("value")
    handles = [
        matplotlib.lines.Line2D(
            [], [], marker="o", linestyle="", color=OBSERVED_COLOR, label="observed"
        )
    ]
    if any_imputed:
        handles.append(
            matplotlib.lines.Line2D(
                [], [], marker="o", linestyle="", color=IMPUTED_COLOR, label="imputed"
            )
        )
    note = " (subsampled)" if subsampled else ""
    ax.legend(handles=handles, loc="best", title=f"points{note}" if note else None)
    fig.tight_layout()
    _save_svg(fig, out_path)


def render_density(
    observed: np.ndarray,
    imputed: np.ndarray,
    out_path,
    bandwidth: float | None = None,
) -> None:
    """Overlay the observed (blue) and imputed (magenta) density curves."""
    obs_curve = kde(observed, bandwidth)
    imp_curve = kde(imputed, bandwidth)

    fig = Figure(figsize=(8.0, 4.5))
    ax = fig.add_subplot(111)
    ax.plot(
        obs_curve.grid,
        obs_curve.density,
        color=OBSERVED_COLOR,
        label="observed",
        gid="density-observed",
    )
    ax.plot(
        imp_curve.grid,
        imp_curve.density,
        color=IMPUTED_COLOR,
        label="imputed",
        gid="density-imputed",
    )
    ax.set_xlabel("value")
    ax.set_ylabel("density")
    ax.legend(loc="best")
    fig.tight_layout()
    _save_svg(fig, out_path)

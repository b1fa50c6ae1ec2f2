"""
Picture of a potential's poles with their Stokes (solid) and anti-Stokes
(dashed) rays, written as SVG.
"""

import logging
import math
from typing import List, Optional

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
from matplotlib import patches  # noqa: E402

from ode import PoleRecord, RationalPotential, analyze, local_radius, r_infinity  # noqa: E402

logger = logging.getLogger(__name__)


def _ray(ax, pole: PoleRecord, theta: float, reach: float, r_inf: float, **style) -> None:
    z_dir = pole.z_direction(theta)
    if pole.is_infinite:
        start, end = 0.75 * r_inf, 1.1 * r_inf
    else:
        start, end = 0.0, reach
    c = 0j if pole.is_infinite else pole.location
    d = complex(math.cos(z_dir), math.sin(z_dir))
    p, q = c + start * d, c + end * d
    ax.plot([p.real, q.real], [p.imag, q.imag], **style)


def plot_stokes(phi: RationalPotential, path: str, records: Optional[List[PoleRecord]] = None,
                title: Optional[str] = None) -> str:
    records = records if records is not None else analyze(phi)
    r_inf = r_infinity(records)
    fig, ax = plt.subplots(figsize=(6, 6))
    ax.add_patch(patches.Circle((0, 0), r_inf, fill=False, color="0.7", linewidth=0.8, linestyle=":"))
    for pole in records:
        reach = 0.9 * local_radius(records, pole) if not pole.is_infinite else 0.0
        if not pole.is_infinite:
            marker = "o" if pole.is_regular else "s"
            ax.scatter([pole.location.real], [pole.location.imag], c="k", marker=marker, s=24, zorder=3)
        for theta in pole.stokes_angles:
            _ray(ax, pole, theta, reach, r_inf, color="tab:blue", linewidth=1.4)
        for theta in pole.anti_stokes_angles:
            _ray(ax, pole, theta, reach, r_inf, color="tab:red", linewidth=1.0, linestyle="--")
    ax.set_xlim(-1.2 * r_inf, 1.2 * r_inf)
    ax.set_ylim(-1.2 * r_inf, 1.2 * r_inf)
    ax.set_aspect("equal")
    ax.set_xlabel("Re z")
    ax.set_ylabel("Im z")
    ax.set_title(title or "Stokes (solid) and anti-Stokes (dashed) directions")
    fig.savefig(path, format="svg")
    plt.close(fig)
    logger.info(f"✅ wrote {path}")
    return path

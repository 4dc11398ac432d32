"""Deterministic SVG rendering.

Same input gives a byte-identical file: the SVG id salt is fixed and the
creation date is omitted.  Parameters and companion data hashes go into
the SVG description.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional, Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .errors import UsageError  # noqa: E402

STYLE = {
    "svg.hashsalt": "nsstab",
    "svg.fonttype": "path",
    "font.size": 9,
    "axes.labelsize": 10,
    "legend.fontsize": 8,
    "lines.linewidth": 1.2,
    "axes.grid": True,
    "grid.alpha": 0.3,
}


@dataclass
class Curve:
    x: np.ndarray
    y: np.ndarray
    label: Optional[str] = None
    style: str = "-"
    color: Optional[str] = None


@dataclass
class Panel:
    curves: List[Curve] = field(default_factory=list)
    markers: List[tuple] = field(default_factory=list)  # (x, y, label)
    hlines: List[float] = field(default_factory=list)
    xlabel: str = ""
    ylabel: str = ""
    title: str = ""
    ylim: Optional[tuple] = None
    xlim: Optional[tuple] = None


def _validate(panels: Sequence[Panel]):
    if not panels:
        raise UsageError("nothing to plot")
    for p in panels:
        if not p.curves:
            raise UsageError(f"panel {p.title!r} has no data")
        for c in p.curves:
            x = np.asarray(c.x)
            y = np.asarray(c.y)
            if x.shape != y.shape:
                raise UsageError(f"curve {c.label!r}: x and y differ in length")
            if x.size < 2:
                raise UsageError(f"curve {c.label!r}: need at least two points")


def render(path, panels: Sequence[Panel], description: str = "", title: str = "",
           panel_size=(4.2, 3.2)) -> Path:
    _validate(panels)
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with plt.rc_context(STYLE):
        fig, axes = plt.subplots(1, len(panels), figsize=(panel_size[0] * len(panels), panel_size[1]),
                                 squeeze=False)
        for ax, p in zip(axes[0], panels):
            for c in p.curves:
                ax.plot(c.x, c.y, c.style, label=c.label, color=c.color)
            for y in p.hlines:
                ax.axhline(y, color="0.4", lw=0.8)
            for mx, my, lab in p.markers:
                ax.plot([mx], [my], "o", ms=4, color="k")
                if lab:
                    ax.annotate(lab, (mx, my), textcoords="offset points", xytext=(4, 4), fontsize=8)
            ax.set_xlabel(p.xlabel)
            ax.set_ylabel(p.ylabel)
            if p.ylim is not None:
                ax.set_ylim(*p.ylim)
            if p.xlim is not None:
                ax.set_xlim(*p.xlim)
            if p.title:
                ax.set_title(p.title, fontsize=9)
            if any(c.label for c in p.curves):
                ax.legend(loc="best")
        if title:
            fig.suptitle(title, fontsize=10)
        fig.tight_layout()
        fig.savefig(path, format="svg",
                    metadata={"Date": None, "Description": description, "Creator": "nsstab"})
        plt.close(fig)
    return path

"""Static SVG figures for spectra and fit overlays."""

from __future__ import annotations

import matplotlib
from matplotlib.backends.backend_svg import FigureCanvasSVG
from matplotlib.figure import Figure


def overlay_svg(path, series, xlabel="Probe detuning (MHz)", ylabel="", title=None,
                secondary=None, secondary_label=""):
    """Write an SVG with ``series`` plotted on shared axes.

    ``series`` is a list of ``(x, y, label, style)`` where ``style`` is
    ``"dots"`` or ``"line"``.  ``secondary`` (same format) goes on a second
    panel below, e.g. a difference signal under a transmission trace.
    """
    nrows = 2 if secondary else 1
    fig = Figure(figsize=(6.4, 3.2 * nrows))
    FigureCanvasSVG(fig)
    axes = fig.subplots(nrows, 1, sharex=True, squeeze=False)[:, 0]
    panels = [(axes[0], series, ylabel)]
    if secondary:
        panels.append((axes[1], secondary, secondary_label))
    for ax, group, label in panels:
        for x, y, name, style in group:
            if style == "dots":
                ax.plot(x, y, ".", ms=2, label=name)
            else:
                ax.plot(x, y, "-", lw=1, label=name)
        ax.set_ylabel(label)
        if any(s[2] for s in group):
            ax.legend(fontsize="small", frameon=False)
    axes[-1].set_xlabel(xlabel)
    if title:
        axes[0].set_title(title)
    fig.tight_layout()
    # Fixed salt and no date keep the SVG byte-stable across runs.
    with matplotlib.rc_context({"svg.hashsalt": "ladder-eit"}):
        fig.savefig(path, format="svg", metadata={"Date": None})
    return path

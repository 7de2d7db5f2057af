"""SVG plots of rate-distortion curves."""

import io
import logging
from pathlib import Path

import matplotlib as mpl
from matplotlib.figure import Figure

from TVAR_Rate_Distortion.artifacts.writers import atomic_write_text
from TVAR_Rate_Distortion.errors import InputError
from TVAR_Rate_Distortion.rate_distortion.curves import NATS_PER_BIT, RdCurve

logger = logging.getLogger(__name__)

# Fixed ids, text kept as text and no simplification: the SVG is a pure function of the curves.
SVG_RC = {"svg.hashsalt": "tvar-rd", "svg.fonttype": "none", "path.simplify": False}


def render_svg(curves: list[RdCurve], units: str = "nats") -> str:
    """
    Render curves as one SVG document.

    Each curve becomes one line with gid ``curve-<i>``, labelled by its source tag.

    Args:
        curves (list[RdCurve]): Curves to draw, at least one.
        units (str): Rate axis unit, ``"nats"`` or ``"bits"``.

    Returns
    -------
        str: SVG text.
    """
    if not curves:
        msg = "Nothing to plot: no curves given"
        raise InputError(msg)
    scale = 1.0 / NATS_PER_BIT if units == "bits" else 1.0
    with mpl.rc_context(SVG_RC):
        fig = Figure(figsize=(6.4, 4.8))
        ax = fig.add_subplot()
        for i, curve in enumerate(curves):
            ax.plot(curve.distortions, curve.rates * scale, label=curve.source_tag, gid=f"curve-{i}")
        ax.set_xlabel("Distortion D (mean squared error per letter)")
        ax.set_ylabel(f"Rate R(D) [{units}/letter]")
        ax.grid(visible=True, alpha=0.3)
        ax.legend()
        fig.tight_layout()
        buffer = io.StringIO()
        fig.savefig(buffer, format="svg", metadata={"Date": None})
    return buffer.getvalue()


def plot_curves(curves: list[RdCurve], path: str | Path, units: str = "nats") -> Path:
    """Render ``curves`` and write the SVG atomically."""
    path = atomic_write_text(path, render_svg(curves, units))
    logger.info("Plot of %d curve(s) written to %s", len(curves), path)
    return path

"""Plot-ready series and PNG rendering for CLI reports."""

from __future__ import annotations

import csv
import io
from pathlib import Path

from .errors import PreconditionError
from .fractal import IntervalCover, SurvivorCover, mass_dist_trend
from .singular import DensityReport, GrowthStats

KINDS = {
    "density": ("N", "density"),
    "growth": ("k", "log_qk_over_k"),
    "dimension": ("generation", "bound"),
    "survivors": ("generation", "survivors"),
}


def series(report, kind: str) -> list[tuple[float, float]]:
    """x/y pairs for one plot kind; an empty report gives an empty series."""
    if kind not in KINDS:
        raise PreconditionError(f"unknown plot kind {kind!r}")
    if report is None or (isinstance(report, (list, tuple)) and not report):
        return []
    if kind == "density":
        if not isinstance(report, DensityReport):
            raise PreconditionError("density series needs a DensityReport")
        bad = set(report.bad_ell)
        out, good = [], 0
        for N in range(1, report.N + 1):
            good += N not in bad
            out.append((N, good / N))
        return out
    if kind == "growth":
        if not isinstance(report, GrowthStats):
            raise PreconditionError("growth series needs GrowthStats")
        return [(k, float(v)) for k, v in zip(report.ks, report.log_qk_over_k)]
    if kind == "dimension":
        if isinstance(report, list) and all(isinstance(c, IntervalCover) for c in report):
            trend = mass_dist_trend(report)
            return [(g + 3, v) for g, v in enumerate(trend)]
        raise PreconditionError("dimension series needs a list of covers")
    if not isinstance(report, SurvivorCover):
        raise PreconditionError("survivor series needs a SurvivorCover")
    return [(i, n) for i, n in enumerate(report.counts)]


def emit_plotdata(report, kind: str) -> str:
    """CSV text with a header row and one row per point."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(KINDS[kind] if kind in KINDS else ("x", "y"))
    for x, y in series(report, kind):
        w.writerow((x, repr(float(y)) if isinstance(y, float) else y))
    return buf.getvalue()


def render(report, kind: str, path: Path, title: str = "") -> Path | None:
    """Write a PNG of the series; returns None when there is nothing to draw."""
    pts = series(report, kind)
    if not pts:
        return None
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    xs, ys = zip(*pts)
    fig, ax = plt.subplots(figsize=(6, 4), dpi=100)
    ax.plot(xs, ys, marker="o" if len(xs) < 60 else None, lw=1.2)
    xl, yl = KINDS[kind]
    ax.set_xlabel(xl)
    ax.set_ylabel(yl)
    if kind == "survivors":
        ax.set_yscale("log")
    if title:
        ax.set_title(title)
    ax.grid(alpha=0.3)
    fig.tight_layout()
    path = Path(path)
    # fixed metadata keeps repeated runs byte-identical
    fig.savefig(path, metadata={"Software": None})
    plt.close(fig)
    return path

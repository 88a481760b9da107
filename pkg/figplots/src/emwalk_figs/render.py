"""Deterministic figure rendering for experiment CSV artifacts.

Fixed style, Agg backend, no timestamps; the SHA-256 of the input CSV is
embedded in the image metadata, so re-rendering identical inputs yields
identical bytes.
"""

from __future__ import annotations

import hashlib
from pathlib import Path

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from .errors import SchemaMismatch
from .specs import PlotSpec, load_table

_STYLE = {
    "figure.figsize": (7.0, 4.5),
    "figure.dpi": 130,
    "savefig.dpi": 130,
    "font.size": 10,
    "axes.grid": True,
    "grid.alpha": 0.3,
    "lines.linewidth": 1.4,
    "legend.fontsize": 8,
    "svg.hashsalt": "emwalk-figs",
}

_CYCLE = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf",
          "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22"]


def _checksum(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def _sorted_groups(frame, columns):
    grouped = frame.groupby(list(columns), sort=True)
    return list(grouped)


def _label_for(key, columns) -> str:
    vals = key if isinstance(key, tuple) else (key,)
    return ", ".join(f"{c}={v}" for c, v in zip(columns, vals))


def _render_loglog(ax, frame, roles, labels):
    for i, (key, part) in enumerate(_sorted_groups(frame, roles["group"])):
        part = part.sort_values(roles["x"], ascending=True)
        ax.loglog(part[roles["x"]], part[roles["y"]], marker="o", ms=3.5,
                  color=_CYCLE[i % len(_CYCLE)], label=_label_for(key, roles["group"]))
    # quadratic guide anchored to the smallest-x point of the first curve
    first = frame.sort_values(roles["x"]).iloc[0]
    x = np.array(sorted(frame[roles["x"]].unique()))
    guide = first[roles["y"]] * (x / first[roles["x"]]) ** 2
    ax.loglog(x, guide, "k--", lw=0.9, label="slope 2 guide")
    ax.set_xlabel(labels.get("x", roles["x"]))
    ax.set_ylabel(labels.get("y", roles["y"]))
    ax.legend(loc="best")


def _render_timeseries(ax, frame, roles, labels):
    for i, (key, part) in enumerate(_sorted_groups(frame, roles["group"])):
        part = part.sort_values(roles["x"])
        ax.plot(part[roles["x"]], part[roles["y"]],
                color=_CYCLE[i % len(_CYCLE)], label=_label_for(key, roles["group"]))
    ax.set_xlabel(labels.get("x", roles["x"]))
    ax.set_ylabel(labels.get("y", roles["y"]))
    ax.legend(loc="best")


def _render_scan(ax, frame, roles, labels):
    for i, (key, part) in enumerate(_sorted_groups(frame, roles["group"])):
        part = part.sort_values(roles["x"])
        ax.plot(part[roles["x"]], part[roles["y"]], marker="o", ms=3.0,
                color=_CYCLE[i % len(_CYCLE)], label=_label_for(key, roles["group"]))
    ax.set_xlabel(labels.get("x", roles["x"]))
    ax.set_ylabel(labels.get("y", roles["y"]))
    ax.legend(loc="best")


def _render_heatmap_grid(fig, frame, roles, labels):
    groups = _sorted_groups(frame, roles["group"])
    vmax = float(frame[roles["value"]].max())  # shared scale across panels
    axes = fig.subplots(1, len(groups), squeeze=False)[0]
    for ax, (key, part) in zip(axes, groups):
        p = part["p"].to_numpy(dtype=int)
        q = part["q"].to_numpy(dtype=int)
        v = part[roles["value"]].to_numpy()
        p0, p1 = p.min(), p.max()
        q0, q1 = q.min(), q.max()
        img = np.zeros((p1 - p0 + 1, q1 - q0 + 1))
        img[p - p0, q - q0] = v
        im = ax.imshow(img, origin="lower", extent=(q0 - 0.5, q1 + 0.5, p0 - 0.5, p1 + 0.5),
                       vmin=0.0, vmax=vmax, cmap="inferno", aspect="auto")
        ax.set_title(_label_for(key, roles["group"]), fontsize=8)
        ax.set_xlabel(labels.get("x", "q"))
    axes[0].set_ylabel(labels.get("y", "p"))
    fig.colorbar(im, ax=list(axes), shrink=0.85, label=labels.get("value", roles["value"]))


def render(spec: PlotSpec) -> Path:
    """Render one figure; returns the output path."""
    frame, roles = load_table(spec)
    digest = _checksum(spec.input_csv)
    spec.output.parent.mkdir(parents=True, exist_ok=True)
    with plt.rc_context(_STYLE):
        fig = plt.figure()
        try:
            if spec.figure_kind == "heatmap_grid":
                _render_heatmap_grid(fig, frame, roles, spec.labels)
            else:
                ax = fig.add_subplot(111)
                {"loglog": _render_loglog,
                 "timeseries": _render_timeseries,
                 "scan": _render_scan}[spec.figure_kind](ax, frame, roles, spec.labels)
                if "title" in spec.labels:
                    ax.set_title(spec.labels["title"])
            suffix = spec.output.suffix.lower()
            if suffix == ".png":
                metadata = {"input-sha256": digest}
            elif suffix == ".svg":
                metadata = {"Date": None, "Description": f"input-sha256:{digest}"}
            else:
                raise SchemaMismatch(f"unsupported output format {suffix!r} (use .png or .svg)")
            fig.savefig(spec.output, metadata=metadata)
        finally:
            plt.close(fig)
    return spec.output

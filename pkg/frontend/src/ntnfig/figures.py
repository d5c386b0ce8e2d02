"""Build the four figure kinds from result tables.

Rendering is a pure function of the CSV bytes plus the spec: fixed canvas
size, fixed fonts, colors assigned from a fixed palette by sorted series
label, constant output metadata.  Re-rendering the same inputs reproduces
the same image bytes.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import matplotlib
import numpy as np
from matplotlib.figure import Figure

from .csvdata import DataTable, read_table

KINDS = ("lines", "cdf", "coverage", "heatmap")

_PALETTE = matplotlib.colormaps["tab10"].colors
_UNITS = {
    "km": "km",
    "s": "s",
    "db": "dB",
    "dbm": "dBm",
    "mbj": "Mb/J",
    "mbps": "Mb/s",
    "bps": "b/s",
    "mhz": "MHz",
    "ghz": "GHz",
}


class FigureError(ValueError):
    """The spec or the data cannot produce a sound figure."""


@dataclass(frozen=True)
class FigureSpec:
    inputs: tuple[Path, ...]
    kind: str
    out: Path
    x_label: str | None = None
    y_label: str | None = None
    title: str | None = None

    def __post_init__(self) -> None:
        if self.kind not in KINDS:
            raise FigureError(f"unknown figure kind '{self.kind}' (choose from {', '.join(KINDS)})")
        if not self.inputs:
            raise FigureError("no input CSV given")
        object.__setattr__(self, "inputs", tuple(Path(p) for p in self.inputs))
        object.__setattr__(self, "out", Path(self.out))


def axis_label(column: str) -> str:
    """Human label with the unit split off the column name suffix."""
    base, _, suffix = column.rpartition("_")
    if base and suffix in _UNITS:
        return f"{base.replace('_', ' ')} [{_UNITS[suffix]}]"
    return column.replace("_", " ")


def _series_colors(labels: list[str]) -> dict[str, tuple]:
    return {name: _PALETTE[i % len(_PALETTE)] for i, name in enumerate(sorted(labels))}


def _new_axes() -> tuple[Figure, object]:
    fig = Figure(figsize=(6.4, 4.4), dpi=130, layout="constrained")
    return fig, fig.add_subplot()


def _haps_word(value: str) -> str:
    if value in ("true", "false"):
        return "haps on" if value == "true" else "haps off"
    return f"haps={value}"


def _lines(spec: FigureSpec) -> Figure:
    table = read_table(spec.inputs[0])
    groups = table.groups(("strategy", "haps_available"))
    labels = {key: f"{key[0]}, {_haps_word(key[1])}" for key in groups}
    colors = _series_colors(list(labels.values()))

    fig, ax = _new_axes()
    for key in sorted(groups, key=lambda k: labels[k]):
        sub = groups[key]
        x = sub.numbers("distance_km")
        y = sub.numbers("mean_total_s")
        order = np.argsort(x)
        ax.plot(x[order], y[order], marker="o", markersize=3,
                color=colors[labels[key]], label=labels[key])
    ax.set_xlabel(spec.x_label or axis_label("distance_km"))
    ax.set_ylabel(spec.y_label or axis_label("mean_total_s"))
    ax.legend(fontsize=8)
    ax.grid(True, alpha=0.3)
    if spec.title:
        ax.set_title(spec.title)
    return fig


def _cdf(spec: FigureSpec) -> Figure:
    table = read_table(spec.inputs[0])
    if "statistic" in table.columns:
        rows = tuple(r for r in table.cells if r[table.columns.index("statistic")] == "cdf")
        if not rows:
            raise FigureError(f"{spec.inputs[0].name} has no cdf rows")
        table = DataTable(table.source, table.metadata, table.columns, rows)
    groups = table.groups(("mode", "n_haps"))
    labels = {key: f"{key[0]}, {key[1]} haps" for key in groups}
    colors = _series_colors(list(labels.values()))

    fig, ax = _new_axes()
    for key in sorted(groups, key=lambda k: labels[k]):
        sub = groups[key]
        x = sub.numbers("ee_mbj")
        y = sub.numbers("cdf_value")
        order = np.argsort(x)
        x, y = x[order], y[order]
        if np.any(np.diff(y) < 0):
            raise FigureError(f"cdf for '{labels[key]}' in {spec.inputs[0].name} is not non-decreasing")
        ax.plot(x, y, color=colors[labels[key]], label=labels[key])
    ax.set_ylim(0.0, 1.0)
    ax.set_xlabel(spec.x_label or axis_label("ee_mbj"))
    ax.set_ylabel(spec.y_label or "cumulative probability")
    ax.legend(fontsize=8)
    ax.grid(True, alpha=0.3)
    if spec.title:
        ax.set_title(spec.title)
    return fig


def _coverage(spec: FigureSpec) -> Figure:
    table = read_table(spec.inputs[0])
    groups = table.groups(("mode", "n_haps", "n_sats"))
    labels = {key: f"{key[0]}, {key[1]} haps, {key[2]} sats" for key in groups}
    colors = _series_colors(list(labels.values()))

    fig, ax = _new_axes()
    has_ci = "ci_low" in table.columns and "ci_high" in table.columns
    for key in sorted(groups, key=lambda k: labels[k]):
        sub = groups[key]
        x = sub.numbers("threshold_db")
        y = sub.numbers("coverage")
        order = np.argsort(x)
        color = colors[labels[key]]
        ax.plot(x[order], y[order], marker="o", markersize=3, color=color, label=labels[key])
        if has_ci:
            ax.fill_between(x[order], sub.numbers("ci_low")[order],
                            sub.numbers("ci_high")[order], color=color, alpha=0.15, lw=0)
    ax.set_ylim(0.0, 1.0)
    ax.set_xlabel(spec.x_label or axis_label("threshold_db"))
    ax.set_ylabel(spec.y_label or "coverage probability")
    ax.legend(fontsize=8)
    ax.grid(True, alpha=0.3)
    if spec.title:
        ax.set_title(spec.title)
    return fig


def _nodes_path(spec: FigureSpec) -> Path:
    if len(spec.inputs) > 1:
        return spec.inputs[1]
    grid = spec.inputs[0]
    sibling = grid.with_name(f"{grid.stem}_nodes{grid.suffix}")
    if not sibling.exists():
        raise FigureError(
            f"heatmap needs a node table: pass it as a second input or provide {sibling.name}"
        )
    return sibling


def _heatmap(spec: FigureSpec) -> Figure:
    grid = read_table(spec.inputs[0])
    nodes = read_table(_nodes_path(spec))

    fig, ax = _new_axes()
    sc = ax.scatter(
        grid.numbers("x_km"), grid.numbers("y_km"), c=grid.numbers("capacity_mbps"),
        s=10, marker="s", cmap="viridis", linewidths=0,
    )
    fig.colorbar(sc, ax=ax, label=axis_label("capacity_mbps"))

    nodes._index("node_id")  # a node table without ids is the wrong file
    layers = nodes.column("layer")
    uplink = nodes.numbers("uplink_mbps")
    nx = nodes.numbers("x_km")
    ny = nodes.numbers("y_km")
    for i in range(len(nodes)):
        ax.plot(nx[i], ny[i], marker="^", markersize=5, color="crimson",
                markeredgecolor="black", markeredgewidth=0.4)
        ax.annotate(
            f"L{layers[i]}: {uplink[i]:.0f}",
            (nx[i], ny[i]),
            textcoords="offset points", xytext=(3, 3), fontsize=5,
        )
    ax.set_aspect("equal")
    ax.set_xlabel(spec.x_label or axis_label("x_km"))
    ax.set_ylabel(spec.y_label or axis_label("y_km"))
    if spec.title:
        ax.set_title(spec.title)
    return fig


_BUILDERS = {"lines": _lines, "cdf": _cdf, "coverage": _coverage, "heatmap": _heatmap}


def build_figure(spec: FigureSpec) -> Figure:
    """The figure object for a spec; render() saves it."""
    return _BUILDERS[spec.kind](spec)


def render(spec: FigureSpec) -> Path:
    """Write the figure to spec.out and return the path."""
    fig = build_figure(spec)
    out = spec.out
    out.parent.mkdir(parents=True, exist_ok=True)
    kwargs = {"metadata": {"Software": "ntnfig"}} if out.suffix.lower() == ".png" else {}
    fig.savefig(out, **kwargs)
    return out

# chartforge-bank: chart_type={{CHART_TYPE}} color_scheme={{color_scheme}} legend={{legend}} grid={{grid}} font={{font}} mark_texture={{mark_texture}} annotated={{annotated}}
"""Render a `{{CHART_TYPE}}` chart: python script.py DATA_JSON OUT_PNG."""
import json
import sys

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
from matplotlib.patches import Rectangle  # noqa: E402

CHART_TYPE = "{{CHART_TYPE}}"
STYLE = {
    "color_scheme": "{{color_scheme}}",
    "legend": "{{legend}}",
    "grid": "{{grid}}",
    "font": "{{font}}",
    "mark_texture": "{{mark_texture}}",
    "annotated": {{annotated_py}},
}

PALETTES = {
    "tab10": "tab10",
    "viridis": "viridis",
    "pastel": "Pastel1",
    "mono_blue": "Blues",
    "warm": "autumn",
    "cool": "cool",
}
FONTS = {
    "sans": ("DejaVu Sans", "normal"),
    "serif": ("DejaVu Serif", "normal"),
    "mono": ("DejaVu Sans Mono", "normal"),
    "condensed": ("DejaVu Sans", "condensed"),
}
HATCHES = {"solid": None, "hatched": "//", "dotted": "..", "crosshatch": "xx"}
LINESTYLES = {"solid": "-", "hatched": "--", "dotted": ":", "crosshatch": "-."}
LEGEND_LOC = {
    "upper_right": {"loc": "upper right"},
    "upper_left": {"loc": "upper left"},
    "lower_center": {"loc": "lower center"},
    "outside_right": {"loc": "center left", "bbox_to_anchor": (1.0, 0.5)},
}
GRID = {"none": None, "major": "-", "dashed": "--", "dotted": ":"}

DRAWN = []


def text(s):
    """Record a string drawn on the canvas and return it."""
    s = str(s)
    DRAWN.append(s)
    return s


def fmt(v):
    r = float("%.6g" % v)
    if r == int(r) and abs(r) < 2 ** 53:
        return str(int(r))
    return repr(r)


def colors(n):
    cmap = plt.get_cmap(PALETTES.get(STYLE["color_scheme"], "tab10"))
    if cmap.N <= 20:
        return [cmap(i % cmap.N) for i in range(n)]
    lo, hi = (0.35, 0.95) if STYLE["color_scheme"] == "mono_blue" else (0.0, 0.9)
    return [cmap(lo + (hi - lo) * i / max(n - 1, 1)) for i in range(n)]


def hatch():
    return HATCHES.get(STYLE["mark_texture"])


def linestyle():
    return LINESTYLES.get(STYLE["mark_texture"], "-")


def value_label(ax, x, y, v, **kw):
    if STYLE["annotated"]:
        ax.annotate(text(fmt(v)), (x, y), textcoords="offset points", xytext=(0, 3),
                    ha="center", fontsize=7, **kw)


def rows(payload):
    return [r for r in payload.get("data", []) if isinstance(r, dict)]


def categories(payload):
    return [str(c) for c in payload.get("x_axis", {}).get("categories", [])]


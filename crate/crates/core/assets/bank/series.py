

def draw_radar(fig, payload):
    import math

    ax = fig.add_subplot(111, polar=True)
    cats = categories(payload)
    n = len(cats)
    angles = [2 * math.pi * i / n for i in range(n)] + [0.0]
    series = rows(payload)
    for row, color in zip(series, colors(len(series))):
        vals = list(row.get("values", []))
        ax.plot(angles, vals + vals[:1], color=color, linestyle=linestyle(), label=text(row.get("label", "")))
        ax.fill(angles, vals + vals[:1], color=color, alpha=0.15)
        for a, v in zip(angles, vals):
            value_label(ax, a, v, v)
    ax.set_xticks(angles[:-1])
    ax.set_xticklabels([text(c) for c in cats])
    ax.set_yticklabels([])
    decorate(fig, ax, payload, polar=True)


def draw_heatmap(fig, payload):
    ax = fig.add_subplot(111)
    cats = categories(payload)
    series = rows(payload)
    grid = [list(r.get("values", [])) for r in series]
    cmap = PALETTES.get(STYLE["color_scheme"], "viridis")
    ax.imshow(grid, cmap=cmap, aspect="auto")
    ax.set_xticks(range(len(cats)))
    ax.set_xticklabels([text(c) for c in cats], rotation=30, ha="right")
    ax.set_yticks(range(len(series)))
    ax.set_yticklabels([text(r.get("label", "")) for r in series])
    for i, row in enumerate(grid):
        for j, v in enumerate(row):
            value_label(ax, j, i, v, va="center")
    decorate(fig, ax, payload, legend=False)


def draw(fig, payload):
    if CHART_TYPE == "radar":
        return draw_radar(fig, payload)
    if CHART_TYPE == "heatmap":
        return draw_heatmap(fig, payload)
    ax = fig.add_subplot(111)
    cats = categories(payload)
    series = rows(payload)
    xs = list(range(len(cats)))
    palette = colors(len(series))
    width = 0.8 / max(len(series), 1)
    bottoms = [0.0] * len(cats)
    twin = None
    for k, (row, color) in enumerate(zip(series, palette)):
        vals = list(row.get("values", []))
        label = text(row.get("label", ""))
        if CHART_TYPE in ("bar", "bar_3d", "grouped_bar"):
            offs = [x - 0.4 + width * (k + 0.5) for x in xs]
            ax.bar(offs, vals, width=width * 0.95, color=color, hatch=hatch(),
                   edgecolor="black" if CHART_TYPE == "bar_3d" else color, label=label)
            if CHART_TYPE == "bar_3d":
                for x, v in zip(offs, vals):
                    ax.add_patch(Rectangle((x - width * 0.35, 0), width * 0.95, v, facecolor=color,
                                           alpha=0.35, zorder=0))
            for x, v in zip(offs, vals):
                value_label(ax, x, v, v)
        elif CHART_TYPE == "stacked_bar":
            ax.bar(xs, vals, bottom=bottoms, color=color, hatch=hatch(), label=label)
            for x, b, v in zip(xs, bottoms, vals):
                value_label(ax, x, b + v / 2, v)
            bottoms = [b + v for b, v in zip(bottoms, vals)]
        else:
            target = ax
            if CHART_TYPE == "multi_axis_line" and k == 1:
                twin = ax.twinx()
                target = twin
            if CHART_TYPE == "step_line":
                target.step(xs, vals, where="mid", color=color, linestyle=linestyle(), label=label)
            else:
                target.plot(xs, vals, color=color, linestyle=linestyle(), marker="o", label=label)
            if CHART_TYPE == "area":
                target.fill_between(xs, vals, alpha=0.25, color=color)
            for x, v in zip(xs, vals):
                value_label(target, x, v, v)
    ax.set_xticks(xs)
    ax.set_xticklabels([text(c) for c in cats])
    if twin is not None:
        h1, l1 = ax.get_legend_handles_labels()
        h2, l2 = twin.get_legend_handles_labels()
        ax.legend(h1 + h2, l1 + l2, **LEGEND_LOC.get(STYLE["legend"], {"loc": "best"}), fontsize=8)
        decorate(fig, ax, payload, legend=False)
    else:
        decorate(fig, ax, payload)

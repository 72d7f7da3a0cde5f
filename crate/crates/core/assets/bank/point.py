

def draw(fig, payload):
    ax = fig.add_subplot(111)
    data = rows(payload)
    palette = colors(len(data))
    for row, c in zip(data, palette):
        x, y = row.get("x", 0), row.get("y", 0)
        size = row.get("size")
        area = 30 if size is None else 12 * float(size)
        ax.scatter([x], [y], s=area, color=c, alpha=0.75, edgecolors="black",
                   hatch=hatch(), label=text(row.get("label", "")))
        if STYLE["annotated"]:
            shown = "(" + text(fmt(x)) + ", " + text(fmt(y)) + ")"
            if size is not None:
                shown += " " + text(fmt(size))
            ax.annotate(shown, (x, y), textcoords="offset points", xytext=(0, 6), ha="center", fontsize=7)
    decorate(fig, ax, payload)

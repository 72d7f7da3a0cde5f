

def draw(fig, payload):
    ax = fig.add_subplot(111)
    data = rows(payload)
    up, down = colors(2) if STYLE["color_scheme"] != "tab10" else ("#2ca02c", "#d62728")
    for i, r in enumerate(data):
        o, h, lo, c = r.get("open", 0), r.get("high", 0), r.get("low", 0), r.get("close", 0)
        color = up if c >= o else down
        ax.vlines(i, lo, h, color="black", linewidth=1)
        ax.add_patch(Rectangle((i - 0.3, min(o, c)), 0.6, abs(c - o) or 0.01, facecolor=color,
                               edgecolor="black", hatch=hatch()))
        if STYLE["annotated"]:
            for key, v in (("open", o), ("high", h), ("low", lo), ("close", c)):
                ax.annotate(text(fmt(v)), (i + 0.32, v), fontsize=6, va="center")
    ax.set_xlim(-0.7, len(data) - 0.3)
    ax.set_xticks(range(len(data)))
    ax.set_xticklabels([text(r.get("label", "")) for r in data], rotation=30, ha="right")
    decorate(fig, ax, payload, legend=False)

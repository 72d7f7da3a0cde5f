

def draw(fig, payload):
    ax = fig.add_subplot(111)
    data = rows(payload)
    labels = [str(r.get("label", "")) for r in data]
    counts = [r.get("count", 0) for r in data]
    xs = list(range(len(counts)))
    color = colors(1)[0]
    ax.bar(xs, counts, width=1.0, color=color, edgecolor="black", hatch=hatch())
    for x, v in zip(xs, counts):
        value_label(ax, x, v, v)
    ax.set_xticks(xs)
    ax.set_xticklabels([text(lbl) for lbl in labels], rotation=30, ha="right")
    decorate(fig, ax, payload, legend=False)

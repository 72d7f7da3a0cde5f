

def draw(fig, payload):
    ax = fig.add_subplot(111)
    data = rows(payload)
    stats = []
    for r in data:
        stats.append({
            "label": text(r.get("label", "")),
            "whislo": r.get("min", 0),
            "q1": r.get("q1", 0),
            "med": r.get("median", 0),
            "q3": r.get("q3", 0),
            "whishi": r.get("max", 0),
            "fliers": [],
        })
    parts = ax.bxp(stats, patch_artist=True, showfliers=False)
    for box, c in zip(parts["boxes"], colors(len(stats))):
        box.set_facecolor(c)
        if hatch():
            box.set_hatch(hatch())
    for i, r in enumerate(data):
        for key in ("min", "q1", "median", "q3", "max"):
            if key in r:
                if STYLE["annotated"]:
                    ax.annotate(text(fmt(r[key])), (i + 1.28, r[key]), fontsize=6, va="center")
    decorate(fig, ax, payload, legend=False)

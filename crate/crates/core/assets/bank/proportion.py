

def draw(fig, payload):
    import math

    data = rows(payload)
    labels = [str(r.get("label", "")) for r in data]
    vals = [float(r.get("value", 0)) for r in data]
    palette = colors(len(vals))
    if CHART_TYPE == "rose":
        ax = fig.add_subplot(111, polar=True)
        n = max(len(vals), 1)
        angles = [2 * math.pi * i / n for i in range(len(vals))]
        bars = ax.bar(angles, vals, width=2 * math.pi / n * 0.9, color=palette, hatch=hatch())
        for bar, label in zip(bars, labels):
            bar.set_label(text(label))
        for a, v in zip(angles, vals):
            value_label(ax, a, v, v)
        ax.set_xticks([])
        ax.set_yticklabels([])
        decorate(fig, ax, payload, polar=True)
        return
    ax = fig.add_subplot(111)
    if CHART_TYPE in ("pie", "ring"):
        wedges, _ = ax.pie(vals, colors=palette, startangle=90, counterclock=False,
                           wedgeprops={"width": 0.45} if CHART_TYPE == "ring" else {})
        total = sum(vals) or 1.0
        angle = 90.0
        for w, label, v in zip(wedges, labels, vals):
            w.set_label(text(label))
            if hatch():
                w.set_hatch(hatch())
            mid = math.radians(angle - 180.0 * v / total)
            angle -= 360.0 * v / total
            value_label(ax, 0.75 * math.cos(mid), 0.75 * math.sin(mid), v)
        ax.set_aspect("equal")
        decorate(fig, ax, payload, polar=True)
    elif CHART_TYPE == "funnel":
        top = max(vals) if vals else 1.0
        for i, (label, v, c) in enumerate(zip(labels, vals, palette)):
            ax.barh(-i, v, left=(top - v) / 2, color=c, hatch=hatch(), label=text(label))
            value_label(ax, top / 2, -i - 0.15, v)
        ax.set_yticks([])
        ax.set_xticks([])
        decorate(fig, ax, payload)
    else:
        # slice-and-dice treemap
        total = sum(vals) or 1.0
        x = 0.0
        for i, (label, v, c) in enumerate(zip(labels, vals, palette)):
            w = v / total
            ax.add_patch(Rectangle((x, 0), w, 1, facecolor=c, edgecolor="white", hatch=hatch(),
                                   label=text(label)))
            value_label(ax, x + w / 2, 0.5, v)
            x += w
        ax.set_xlim(0, 1)
        ax.set_ylim(0, 1)
        ax.set_xticks([])
        ax.set_yticks([])
        decorate(fig, ax, payload)

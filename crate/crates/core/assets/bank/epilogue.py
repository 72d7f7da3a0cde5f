

def decorate(fig, ax, payload, polar=False, legend=True):
    title = payload.get("title")
    if title:
        ax.set_title(text(title))
    x_label = payload.get("x_axis", {}).get("label")
    y_axis = payload.get("y_axis", {})
    if polar:
        parts = []
        if y_axis.get("label"):
            parts.append(text(y_axis["label"]))
            if y_axis.get("unit"):
                parts[-1] += " (" + text(y_axis["unit"]) + ")"
        if x_label:
            parts.append(text(x_label))
        if parts:
            fig.text(0.5, 0.02, " by ".join(parts), ha="center", fontsize=8)
    else:
        if x_label:
            ax.set_xlabel(text(x_label))
        if y_axis.get("label"):
            unit = y_axis.get("unit")
            shown = text(y_axis["label"])
            if unit:
                shown += " (" + text(unit) + ")"
            ax.set_ylabel(shown)
        style = GRID.get(STYLE["grid"])
        if style:
            ax.grid(True, linestyle=style, alpha=0.5)
            ax.set_axisbelow(True)
    if legend:
        handles, labels = ax.get_legend_handles_labels()
        if handles:
            ax.legend(**LEGEND_LOC.get(STYLE["legend"], {"loc": "best"}), fontsize=8)


def main():
    if len(sys.argv) != 3:
        sys.stderr.write("usage: script.py DATA_JSON OUT_PNG\n")
        return 2
    with open(sys.argv[1], encoding="utf-8") as fh:
        payload = json.load(fh)
    family, stretch = FONTS.get(STYLE["font"], ("DejaVu Sans", "normal"))
    plt.rcParams["font.family"] = family
    plt.rcParams["font.stretch"] = stretch
    plt.rcParams["svg.hashsalt"] = "chartforge"
    fig = plt.figure(figsize=(6.4, 4.8), dpi=100)
    draw(fig, payload)
    fig.tight_layout()
    fig.savefig(sys.argv[2], format="png", dpi=100, metadata={"Software": None})
    plt.close(fig)
    with open(sys.argv[2] + ".txt", "w", encoding="utf-8") as fh:
        fh.write("\n".join(DRAWN) + "\n")
    return 0


if __name__ == "__main__":
    sys.exit(main())

"""Score bar chart written next to the manifest."""

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

SELECTED_COLOR = "#c0392b"
SKIPPED_COLOR = "#95a5a6"


def plot_scores(scored, path, title="Segment scores"):
    """One bar per candidate segment, height = score; selected segments in
    red. The SVG output carries no timestamp so reruns are byte-identical."""
    n = len(scored)
    fig, ax = plt.subplots(figsize=(max(6.0, 0.25 * n + 2.0), 3.5))
    try:
        xs = range(n)
        heights = [s.score for s in scored]
        colors = [SELECTED_COLOR if s.selected else SKIPPED_COLOR for s in scored]
        bars = ax.bar(xs, heights, color=colors, width=0.8)
        for bar, s in zip(bars, scored):
            bar.set_gid(f"segment-{s.segment.index}")
        ax.set_xlabel("segment")
        ax.set_ylabel("score")
        ax.set_title(title)
        ax.set_xlim(-0.6, n - 0.4)
        ax.bar([], [], color=SELECTED_COLOR, label="selected")
        ax.bar([], [], color=SKIPPED_COLOR, label="not selected")
        ax.legend(loc="upper right", frameon=False)
        for side in ("top", "right"):
            ax.spines[side].set_visible(False)
        fig.tight_layout()
        with plt.rc_context({"svg.hashsalt": "audiosum", "svg.fonttype": "none"}):
            fig.savefig(path, format="svg", metadata={"Date": None})
    finally:
        plt.close(fig)

import logging

import matplotlib
import pandas as pd

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

logger = logging.getLogger(__name__)

# svg.hashsalt pins the generated element ids so reruns produce identical files
_SVG_STYLE = {"svg.hashsalt": "corpus-divergence", "svg.fonttype": "none"}


def line_chart(lines, path, title="", xlabel="", ylabel=""):
    """Write an SVG line chart; ``lines`` maps a label to (x values, y values)."""
    with plt.rc_context(_SVG_STYLE):
        fig, ax = plt.subplots(figsize=(8, 4))
        for label, (xs, ys) in lines.items():
            ax.plot(list(xs), list(ys), marker="o", markersize=3, label=label)
        ax.set_title(title)
        ax.set_xlabel(xlabel)
        ax.set_ylabel(ylabel)
        if len(lines) > 1:
            ax.legend()
        ax.grid(alpha=0.3)
        fig.autofmt_xdate()
        fig.savefig(path, format="svg", metadata={"Date": None})
        plt.close(fig)
    logger.info("Wrote chart %s", path)
    return path


def disagreement_chart(series_list, path):
    lines = {}
    for series in series_list:
        months = pd.to_datetime([month for month, _, _ in series.entries], format="%Y-%m")
        values = [value for _, value, _ in series.entries]
        lines[series.channel_id] = (months, values)
    return line_chart(lines, path, "Monthly viewership disagreement", "month", "dislikes / (likes + dislikes)")


def sweep_chart(frame, path):
    lines = {
        pair: (group["size"].tolist(), group["similarity"].tolist())
        for pair, group in frame.groupby("pair", sort=True)
    }
    return line_chart(lines, path, "Similarity by source vocabulary size", "|V_s|", "similarity (%)")

"""Figure rendering for the CLI report paths.

Every report command drops PNG figures next to its delimited output.
matplotlib is imported lazily with the Agg backend so library use never
touches a display.
"""

from __future__ import annotations


def _pyplot():
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    return plt


def _png_metadata(manifest):
    if manifest is None:
        return None
    import json

    return {"manifest": json.dumps(manifest, sort_keys=True)}


def save_count_histogram(path, labels, counts, title: str, manifest=None) -> None:
    """Fourfold-coincidence bar chart for one measurement setting."""
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(7, 4))
    ax.bar(range(len(counts)), counts, color="#336699")
    ax.set_xticks(range(len(labels)))
    ax.set_xticklabels(labels, rotation=90, fontsize=8, family="monospace")
    ax.set_ylabel("coincidences")
    ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=150, metadata=_png_metadata(manifest))
    plt.close(fig)


def save_value_bars(
    path,
    labels,
    values,
    sigmas,
    title: str,
    ylabel: str,
    ylim=None,
    hline=None,
    manifest=None,
) -> None:
    """Bar chart of scalar results with error bars."""
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(8, 4))
    ax.bar(
        range(len(values)),
        values,
        yerr=sigmas if any(s > 0 for s in sigmas) else None,
        capsize=3,
        color="#558855",
    )
    ax.set_xticks(range(len(labels)))
    ax.set_xticklabels(labels, rotation=90, fontsize=8, family="monospace")
    ax.set_ylabel(ylabel)
    if ylim is not None:
        ax.set_ylim(*ylim)
    if hline is not None:
        ax.axhline(hline, color="black", linewidth=0.8)
    ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=150, metadata=_png_metadata(manifest))
    plt.close(fig)

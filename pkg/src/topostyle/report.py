"""Outcome serialization, result tables and persistence-diagram plots."""
from __future__ import annotations

import csv
import json
from pathlib import Path

from .imaging import CHANNELS
from .metrics import METRICS

METRIC_TITLES = {"bottleneck": "Bottleneck", "wasserstein1": "1-Wasserstein"}
FLAG_WORDS = {"MAX": "max", "MIN": "min", "NONE": "-"}

OUTCOME_FIELDS = (
    "target", "metric", "dimension", "channel", "observed", "q", "n_le", "n_ge",
    "n_permutations", "mode", "seed", "flag", "significant", "attainable", "alpha", "size_a", "size_b",
)


def _fmt(value) -> str:
    if isinstance(value, float):
        return repr(value)
    if value is None:
        return ""
    return str(value)


def write_outcomes(outcomes: list[dict], design: str, out_dir) -> list[str]:
    """One JSON file per test plus ``outcomes.json`` and ``outcomes.csv``."""
    out_dir = Path(out_dir)
    per_test = out_dir / "outcomes"
    per_test.mkdir(parents=True, exist_ok=True)
    written = []
    for o in outcomes:
        name = f"{o['target']}__{o['channel']}__h{o['dimension']}__{o['metric']}.json"
        (per_test / name).write_text(json.dumps(o, indent=1, sort_keys=True) + "\n")
    written.append(str(per_test))
    (out_dir / "outcomes.json").write_text(json.dumps({"design": design, "outcomes": outcomes}, indent=1) + "\n")
    with open(out_dir / "outcomes.csv", "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(OUTCOME_FIELDS)
        for o in outcomes:
            writer.writerow([_fmt(o[f]) for f in OUTCOME_FIELDS])
    written += [str(out_dir / "outcomes.json"), str(out_dir / "outcomes.csv")]
    return written


def load_outcomes(out_dir) -> tuple[str, list[dict]]:
    data = json.loads((Path(out_dir) / "outcomes.json").read_text())
    return data["design"], data["outcomes"]


def _cell_markdown(o: dict) -> str:
    text = f"{o['q']:.3f}"
    if o["significant"]:
        text = f"**{text}**"
    if o["flag"] == "MAX":
        text += "<sup>*</sup>"
    elif o["flag"] == "MIN":
        text += "<sub>*</sub>"
    return text


def _lookup(outcomes):
    return {(o["target"], o["metric"], o["dimension"], o["channel"]): o for o in outcomes}


def render_tables(outcomes: list[dict], design: str, out_dir) -> list[str]:
    """Paper-style tables: targets x channels per (metric, dimension).

    For the vs-single design only the min/max flags are tabulated.
    """
    out_dir = Path(out_dir)
    tables = out_dir / "tables"
    tables.mkdir(parents=True, exist_ok=True)
    table = _lookup(outcomes)
    targets = sorted({o["target"] for o in outcomes})
    dims = sorted({o["dimension"] for o in outcomes})
    missing = [
        key for key in ((t, m, d, c) for t in targets for m in METRICS for d in dims for c in CHANNELS)
        if key not in table
    ]
    if missing:
        raise ValueError(f"{len(missing)} result cells are missing, e.g. {missing[0]}")
    written = []
    md = [f"# Permutation tests ({design})", ""]

    if design == "vs-single":
        md += [
            "Whether the single image's split had the maximum (max), minimum (min) or neither (-) "
            "average distance among all splits.",
            "",
        ]
        for target in targets:
            md += [f"## {target}", "", "| | " + " | ".join(c.capitalize() for c in CHANNELS) + " |",
                   "|---" * (len(CHANNELS) + 1) + "|"]
            path = tables / f"flags_{target}.csv"
            with open(path, "w", newline="") as fh:
                writer = csv.writer(fh, lineterminator="\n")
                writer.writerow(["metric", "dimension", *CHANNELS])
                for metric in METRICS:
                    for d in dims:
                        flags = [FLAG_WORDS[table[(target, metric, d, c)]["flag"]] for c in CHANNELS]
                        writer.writerow([metric, d, *flags])
                        md.append(f"| {d}-PH {METRIC_TITLES[metric]} | " + " | ".join(flags) + " |")
            md.append("")
            written.append(str(path))
    else:
        md += [
            "Cells show q, the fraction of splits whose average cross distance is at or below the "
            "observed one. **Bold** marks significant results; <sup>*</sup> (resp. <sub>*</sub>) marks "
            "an observed split with the strict maximum (resp. minimum) average distance.",
            "",
        ]
        for metric in METRICS:
            for d in dims:
                md += [f"## {d}-PH {METRIC_TITLES[metric]}", "",
                       "| | " + " | ".join(c.capitalize() for c in CHANNELS) + " |",
                       "|---" * (len(CHANNELS) + 1) + "|"]
                path = tables / f"{metric}_h{d}.csv"
                with open(path, "w", newline="") as fh:
                    writer = csv.writer(fh, lineterminator="\n")
                    writer.writerow(["target", *CHANNELS, *(f"{c}_flag" for c in CHANNELS),
                                     *(f"{c}_significant" for c in CHANNELS)])
                    for t in targets:
                        cells = [table[(t, metric, d, c)] for c in CHANNELS]
                        writer.writerow([t, *(f"{o['q']:.3f}" for o in cells), *(o["flag"] for o in cells),
                                         *(int(o["significant"]) for o in cells)])
                        md.append(f"| {t} | " + " | ".join(_cell_markdown(o) for o in cells) + " |")
                md.append("")
                written.append(str(path))

    report = out_dir / "report.md"
    report.write_text("\n".join(md))
    written.append(str(report))
    return written


def plot_diagrams(store, out_dir) -> list[str]:
    """One SVG scatter of persistence diagrams per (channel, dimension), coloured by group."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    plt.rcParams["svg.hashsalt"] = "topostyle"
    out_dir = Path(out_dir) / "diagrams"
    out_dir.mkdir(parents=True, exist_ok=True)
    groups = store.groups
    names = sorted(set(groups.values()))
    colors = {g: plt.cm.tab10(k % 10) for k, g in enumerate(names)}
    written = []
    for channel in CHANNELS:
        for dim in (0, 1):
            fig, ax = plt.subplots(figsize=(4.5, 4.5))
            for g in names:
                first = True
                for image_id in (i for i in store.ids if groups[i] == g):
                    pts = store.get(image_id, channel, dim).capped()
                    ax.scatter(pts[:, 0], pts[:, 1], s=6, alpha=0.5, color=colors[g],
                               label=g if first else None)
                    first = False
            ax.plot([0, 256], [0, 256], color="0.5", lw=0.8)
            ax.set_xlim(-4, 260)
            ax.set_ylim(-4, 260)
            ax.set_xlabel("birth")
            ax.set_ylabel("death")
            ax.set_title(f"{channel}, {dim}-PH")
            ax.legend(loc="lower right", fontsize=7)
            path = out_dir / f"{channel}_h{dim}.svg"
            fig.savefig(path, format="svg", metadata={"Date": None})
            plt.close(fig)
            written.append(str(path))
    return written

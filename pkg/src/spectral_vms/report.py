"""Deterministic CSV artifacts and figure rendering.

Numeric cells are written with 17 significant digits in scientific notation,
which round-trips IEEE doubles exactly; lines always end with LF so the
byte content of an artifact is a pure function of the data.
"""

import os
from dataclasses import dataclass

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np


def format_number(x):
    return f"{float(x):.16e}"


@dataclass
class CsvArtifact:
    path: str
    header: list
    rows: list  # list of row tuples, cells float or str
    provenance: list  # list of "key = value" strings


def write_csv(artifact):
    lines = [f"# {line}" for line in artifact.provenance]
    lines.append(",".join(artifact.header))
    for row in artifact.rows:
        cells = [c if isinstance(c, str) else format_number(c) for c in row]
        lines.append(",".join(cells))
    data = "\n".join(lines) + "\n"
    os.makedirs(os.path.dirname(artifact.path) or ".", exist_ok=True)
    with open(artifact.path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(data)
    return artifact.path


def read_csv(path):
    """Parse a CSV artifact back into (provenance, header, columns).

    Numeric cells become floats; cells that do not parse stay strings.
    """
    provenance = []
    header = None
    rows = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.rstrip("\n")
            if not line:
                continue
            if line.startswith("#"):
                provenance.append(line[1:].strip())
                continue
            if header is None:
                header = line.split(",")
                continue
            cells = []
            for cell in line.split(","):
                try:
                    cells.append(float(cell))
                except ValueError:
                    cells.append(cell)
            rows.append(cells)
    columns = {name: [row[i] for row in rows] for i, name in enumerate(header)}
    for name, col in columns.items():
        if all(isinstance(c, float) for c in col):
            columns[name] = np.array(col)
    return provenance, header, columns


def save_curves(path, x, curves, title="", xlabel="x", ylabel="U", logx=False, logy=False):
    """Render labelled curves over a common abscissa to a PNG file."""
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    for label, y in curves:
        ax.plot(x, y, label=label, linewidth=1.2)
    if logx:
        ax.set_xscale("log")
    if logy:
        ax.set_yscale("log")
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    if title:
        ax.set_title(title)
    ax.legend(fontsize=8)
    fig.tight_layout()
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    fig.savefig(path, dpi=130)
    plt.close(fig)
    return path


def save_step_panels(path, x, panels, title=""):
    """One subplot per solver mode, one curve per recorded time level."""
    n = len(panels)
    fig, axes = plt.subplots(1, n, figsize=(4.5 * n, 3.6), squeeze=False)
    for ax, (label, fields) in zip(axes[0], panels):
        for i, field in enumerate(fields):
            ax.plot(x, field, linewidth=1.0, label=f"step {i}")
        ax.set_title(label, fontsize=9)
        ax.set_xlabel("x")
        ax.legend(fontsize=7)
    if title:
        fig.suptitle(title)
    fig.tight_layout()
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    fig.savefig(path, dpi=130)
    plt.close(fig)
    return path

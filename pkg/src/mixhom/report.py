"""Report artifacts: CSV tables, a JSON manifest with the config hash, and
hand-emitted SVG line plots.

CSV is the primary artifact and must be byte-identical across reruns of the
same config, so all floats are written with repr (shortest round-trip form)
and row order is fixed by the experiment code.
"""

from __future__ import annotations

import csv
import hashlib
import json
import os
from dataclasses import dataclass, field

SCHEMA_VERSION = 1
TOOL_VERSION = "0.1.0"


def config_hash(cfg: dict) -> str:
    """sha256 over the canonical JSON serialization of the config."""
    canon = json.dumps(cfg, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canon.encode()).hexdigest()


@dataclass
class PlotSpec:
    x: str
    y: str
    logx: bool = False
    logy: bool = False


@dataclass
class ExperimentReport:
    name: str
    columns: list
    rows: list  # list of dicts keyed by columns
    scalars: dict  # named scalar results; acceptance assertions read these
    config: dict
    plot: PlotSpec | None = None
    schema_version: int = SCHEMA_VERSION
    notes: list = field(default_factory=list)


def _fmt(v) -> str:
    if isinstance(v, float):
        return repr(v)
    return str(v)


def emit_report(rep: ExperimentReport, out_dir: str,
                formats=("csv", "json", "svg")) -> list:
    """Write the report artifacts; returns the list of paths written."""
    os.makedirs(out_dir, exist_ok=True)
    written = []
    if "csv" in formats:
        path = os.path.join(out_dir, f"{rep.name}.csv")
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(rep.columns)
            for row in rep.rows:
                w.writerow([_fmt(row[c]) for c in rep.columns])
        written.append(path)
    if "json" in formats:
        path = os.path.join(out_dir, f"{rep.name}.manifest.json")
        manifest = {
            "experiment": rep.name,
            "schema_version": rep.schema_version,
            "tool_version": TOOL_VERSION,
            "config": rep.config,
            "config_hash": config_hash(rep.config),
            "scalars": rep.scalars,
            "notes": rep.notes,
        }
        with open(path, "w") as fh:
            json.dump(manifest, fh, indent=2, sort_keys=True)
            fh.write("\n")
        written.append(path)
    if "svg" in formats and rep.plot is not None and rep.rows:
        path = os.path.join(out_dir, f"{rep.name}.svg")
        xs = [float(r[rep.plot.x]) for r in rep.rows]
        ys = [float(r[rep.plot.y]) for r in rep.rows]
        write_line_svg(path, xs, ys, rep.plot.x, rep.plot.y,
                       logx=rep.plot.logx, logy=rep.plot.logy, title=rep.name)
        written.append(path)
    return written


def _axis_transform(vals, log):
    import math

    if not log:
        return list(vals)
    return [math.log10(v) for v in vals]


def write_line_svg(path, xs, ys, xlabel, ylabel, logx=False, logy=False,
                   title=""):
    """Minimal deterministic line/scatter plot, no plotting dependency."""
    W, H = 640, 400
    ml, mr, mt, mb = 70, 20, 30, 50
    tx = _axis_transform(xs, logx)
    ty = _axis_transform(ys, logy)
    x0, x1 = min(tx), max(tx)
    y0, y1 = min(ty), max(ty)
    if x1 == x0:
        x1 = x0 + 1.0
    if y1 == y0:
        y1 = y0 + 1.0

    def px(v):
        return ml + (v - x0) / (x1 - x0) * (W - ml - mr)

    def py(v):
        return H - mb - (v - y0) / (y1 - y0) * (H - mt - mb)

    pts = " ".join(f"{px(a):.2f},{py(b):.2f}" for a, b in zip(tx, ty))
    lines = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}">',
        f'<rect width="{W}" height="{H}" fill="white"/>',
        f'<text x="{W/2:.0f}" y="20" text-anchor="middle" '
        f'font-size="14">{title}</text>',
        f'<line x1="{ml}" y1="{H-mb}" x2="{W-mr}" y2="{H-mb}" '
        'stroke="black"/>',
        f'<line x1="{ml}" y1="{mt}" x2="{ml}" y2="{H-mb}" stroke="black"/>',
        f'<polyline points="{pts}" fill="none" stroke="steelblue" '
        'stroke-width="1.5"/>',
    ]
    for a, b in zip(tx, ty):
        lines.append(
            f'<circle cx="{px(a):.2f}" cy="{py(b):.2f}" r="3" '
            'fill="steelblue"/>'
        )
    xl = f"log10 {xlabel}" if logx else xlabel
    yl = f"log10 {ylabel}" if logy else ylabel
    lines.append(
        f'<text x="{(ml+W-mr)/2:.0f}" y="{H-15}" text-anchor="middle" '
        f'font-size="12">{xl}</text>'
    )
    lines.append(
        f'<text x="15" y="{(mt+H-mb)/2:.0f}" text-anchor="middle" '
        f'font-size="12" transform="rotate(-90 15 {(mt+H-mb)/2:.0f})">'
        f"{yl}</text>"
    )
    for v, lab in ((x0, _fmt_tick(x0)), (x1, _fmt_tick(x1))):
        lines.append(
            f'<text x="{px(v):.2f}" y="{H-mb+15}" text-anchor="middle" '
            f'font-size="10">{lab}</text>'
        )
    for v, lab in ((y0, _fmt_tick(y0)), (y1, _fmt_tick(y1))):
        lines.append(
            f'<text x="{ml-5}" y="{py(v):.2f}" text-anchor="end" '
            f'font-size="10">{lab}</text>'
        )
    lines.append("</svg>")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def _fmt_tick(v: float) -> str:
    return f"{v:.4g}"

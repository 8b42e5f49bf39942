"""Deterministic result tables: CSV, aligned text, and a JSON metadata echo."""

from __future__ import annotations

import json
import os

from . import __version__
from .errors import SchemaMismatch
from .matio import fmt

LAYOUTS = {
    "synthetic": ("method", "topology", "variant", "sigma2", "mse", "alpha1", "alpha2"),
    "timevertex": ("method", "k", "sigma2", "mse", "alpha1", "alpha2", "lam"),
    "deblur": ("method", "frame", "mse", "psnr", "ssim"),
    "gridmap": ("alpha1", "alpha2", "mse"),
    "trace": ("epoch", "alpha1", "alpha2", "loss"),
}

MSE_NORMALIZATION = {
    "synthetic": "total",
    "timevertex": "per-entry",
    "deblur": "per-pixel",
    "gridmap": "total",
    "trace": "total",
}


def _cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return str(v).lower()
    if isinstance(v, (int,)) and not isinstance(v, bool):
        return str(v)
    if isinstance(v, float) or hasattr(v, "dtype"):
        return fmt(float(v))
    return str(v)


def _short(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return f"{v:.6g}"
    return _cell(v)


def emit_results(rows, layout: str, outdir: str, stem: str, config: dict | None = None) -> dict:
    """Write <stem>.csv, <stem>.txt and <stem>.meta.json under ``outdir``.

    Rows are dicts keyed exactly by the layout's columns; the grid map is
    sorted by (alpha1, alpha2). Returns the written paths.
    """
    if layout not in LAYOUTS:
        raise SchemaMismatch(f"unknown layout {layout!r}; know {tuple(LAYOUTS)}")
    cols = LAYOUTS[layout]
    for r in rows:
        if set(r) != set(cols):
            raise SchemaMismatch(f"row keys {sorted(r)} do not match layout {sorted(cols)}")
    if layout == "gridmap":
        rows = sorted(rows, key=lambda r: (r["alpha1"], r["alpha2"]))
    os.makedirs(outdir, exist_ok=True)
    csv_path = os.path.join(outdir, stem + ".csv")
    txt_path = os.path.join(outdir, stem + ".txt")
    meta_path = os.path.join(outdir, stem + ".meta.json")

    with open(csv_path, "w") as f:
        f.write(",".join(cols) + "\n")
        for r in rows:
            f.write(",".join(_cell(r[c]) for c in cols) + "\n")

    cells = [[_short(r[c]) for c in cols] for r in rows]
    widths = [max([len(c)] + [len(row[i]) for row in cells]) for i, c in enumerate(cols)]
    with open(txt_path, "w") as f:
        f.write("  ".join(c.ljust(widths[i]) for i, c in enumerate(cols)).rstrip() + "\n")
        for row in cells:
            f.write("  ".join(v.ljust(widths[i]) for i, v in enumerate(row)).rstrip() + "\n")

    meta = {
        "version": __version__,
        "layout": layout,
        "mse_normalization": MSE_NORMALIZATION[layout],
        "rows": len(rows),
        "config": config or {},
    }
    with open(meta_path, "w") as f:
        json.dump(meta, f, indent=2, sort_keys=True)
        f.write("\n")
    return {"csv": csv_path, "txt": txt_path, "meta": meta_path}

"""Deterministic CSV, JSON and SVG writers."""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path

import numpy as np

from .errors import ValidationError

THRESHOLD_PREFIX = "threshold_"
AUX_PREFIXES = (THRESHOLD_PREFIX, "margin_", "lifespan_")


def fmt(x) -> str:
    """17 significant digits; integers and strings pass through."""
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, str):
        return x
    return "%.17g" % float(x)


def write_csv(path: Path, header: list[str], rows) -> Path:
    path = Path(path)
    with path.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([fmt(x) for x in row])
    return path


def read_csv(path: Path) -> tuple[list[str], np.ndarray]:
    """Header plus a float array; raises ValidationError on malformed input."""
    path = Path(path)
    try:
        with path.open(newline="", encoding="utf-8") as fh:
            rows = list(csv.reader(fh))
    except (OSError, UnicodeDecodeError) as exc:
        raise ValidationError(f"cannot read {path}: {exc}") from exc
    if not rows or not rows[0]:
        raise ValidationError(f"{path} has no header row")
    header = rows[0]
    body = rows[1:]
    if any(len(r) != len(header) for r in body):
        raise ValidationError(f"{path}: ragged rows")
    try:
        data = np.array([[float(x) for x in r] for r in body], dtype=float).reshape(len(body), len(header))
    except ValueError as exc:
        raise ValidationError(f"{path}: non-numeric entry ({exc})") from exc
    return header, data


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        x = float(obj)
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return x
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    return obj


def write_json(path: Path, payload: dict) -> Path:
    path = Path(path)
    text = json.dumps(_jsonable(payload), sort_keys=True, indent=2, allow_nan=False)
    path.write_text(text + "\n", encoding="utf-8")
    return path


def plot_series(csv_path: Path, out_dir: Path) -> list[Path]:
    """One SVG per norm column against t, thresholds overlaid when present."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    header, data = read_csv(csv_path)
    if "t" not in header:
        raise ValidationError(f"{csv_path}: missing 't' column")
    t = data[:, header.index("t")]
    thresholds = [h for h in header if h.startswith(THRESHOLD_PREFIX)]
    columns = [h for h in header if h != "t" and not h.startswith(AUX_PREFIXES)]
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    with plt.rc_context({"svg.hashsalt": "nslorentz", "svg.fonttype": "none"}):
        for col in columns:
            fig, ax = plt.subplots(figsize=(6, 4))
            y = data[:, header.index(col)]
            ok = np.isfinite(y)
            ax.plot(t[ok], y[ok], marker=".", label=col, gid=f"series_{col}")
            for th in thresholds:
                yy = data[:, header.index(th)]
                m = np.isfinite(yy)
                ax.plot(t[m], yy[m], linestyle="--", label=th, gid=th)
            ax.set_xlabel("t")
            ax.set_ylabel(col)
            if t.size:
                ax.legend(loc="best")
            path = out_dir / f"{col}.svg"
            fig.savefig(path, format="svg", metadata={"Date": None})
            plt.close(fig)
            written.append(path)
    return written

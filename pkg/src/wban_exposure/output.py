"""CSV and text writers for heatmaps, CDFs, reports and run summaries."""

from __future__ import annotations

import os

import numpy as np

from .sweep import EmpiricalCdf, Heatmap


def _fmt(v: float) -> str:
    return format(float(v), ".17g")


def _header(items: dict) -> str:
    return "# " + ";".join(f"{k}={v}" for k, v in items.items())


def _parse_header(line: str) -> dict:
    if not line.startswith("#"):
        raise ValueError("missing metadata header row")
    out = {}
    for part in line[1:].strip().split(";"):
        if part:
            k, _, v = part.partition("=")
            out[k] = v
    return out


def write_heatmap_csv(path, h: Heatmap) -> None:
    """One row per x (grid length), one column per y (grid width)."""
    meta = {"metric": h.metric, "unit": h.unit, "rows": h.shape[0], "cols": h.shape[1]}
    meta.update(h.metadata)
    lines = [_header(meta)]
    for i in range(h.shape[0]):
        lines.append(",".join(
            "" if h.mask[i, j] else _fmt(h.values[i, j]) for j in range(h.shape[1])
        ))
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write("\n".join(lines) + "\n")


def read_heatmap_csv(path) -> Heatmap:
    with open(path, encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    meta = _parse_header(lines[0])
    rows = [line.split(",") for line in lines[1:] if line]
    values = np.array([[float(c) if c else np.nan for c in row] for row in rows])
    mask = np.array([[c == "" for c in row] for row in rows])
    metric = meta.pop("metric")
    unit = meta.pop("unit")
    meta.pop("rows", None)
    meta.pop("cols", None)
    return Heatmap(values, mask, metric, unit, meta)


def write_cdf_csv(path, cdf: EmpiricalCdf, metric: str) -> None:
    meta = {
        "metric": metric,
        "limit": _fmt(cdf.limit),
        "n": cdf.values.shape[0],
        "fraction_above_limit": _fmt(cdf.fraction_above()),
    }
    lines = [_header(meta), "value,cumulative_probability"]
    lines.extend(f"{_fmt(v)},{_fmt(p)}" for v, p in zip(cdf.values, cdf.probabilities))
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write("\n".join(lines) + "\n")


def read_cdf_csv(path) -> EmpiricalCdf:
    with open(path, encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    meta = _parse_header(lines[0])
    data = np.array([[float(c) for c in line.split(",")] for line in lines[2:] if line])
    data = data.reshape(-1, 2)
    return EmpiricalCdf(data[:, 0], data[:, 1], float(meta["limit"]))


def write_summary(path, items: dict) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        for k, v in items.items():
            if isinstance(v, float):
                v = repr(v)
            fh.write(f"{k}={v}\n")


def read_summary(path) -> dict:
    out = {}
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            k, _, v = line.rstrip("\n").partition("=")
            out[k] = v
    return out


def write_text(path, text: str) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


def ensure_dir(path) -> None:
    os.makedirs(path, exist_ok=True)
    if not os.access(path, os.W_OK):
        raise PermissionError(f"output directory {path} is not writable")

"""File formats: curve/solution/report JSON, trajectory CSV, SVG curve plots."""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path

import numpy as np

from .dynamics import Configuration, PhysicalParams
from .spectral import FourierCurve
from .symmetry import SymmetrySpec, rotation


def _to_jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_to_jsonable(v) for v in obj]
    if isinstance(obj, np.generic):
        return obj.item()
    return obj


def dump_json(path, obj):
    Path(path).write_text(json.dumps(_to_jsonable(obj), indent=2, sort_keys=True) + "\n")


def load_json(path):
    return json.loads(Path(path).read_text())


def save_curve(path, curve: FourierCurve):
    dump_json(path, curve.to_dict())


def load_curve(path) -> FourierCurve:
    return FourierCurve.from_dict(load_json(path))


def solution_record(curve: FourierCurve, spec: SymmetrySpec, params: PhysicalParams) -> dict:
    return {
        "curve": curve.to_dict(),
        "symmetry": {"n": spec.n, "W": spec.W, "T": spec.T},
        "physics": {"alpha": params.alpha, "m": params.m, "Omega": params.Omega},
    }


def save_solution(path, curve, spec, params):
    dump_json(path, solution_record(curve, spec, params))


def load_solution(path):
    data = load_json(path)
    try:
        sym, phys = data["symmetry"], data["physics"]
        curve = FourierCurve.from_dict(data["curve"])
        spec = SymmetrySpec(int(sym["n"]), int(sym["W"]), float(sym["T"]))
        params = PhysicalParams(spec.n, float(phys["alpha"]), float(phys["m"]), float(phys["Omega"]))
    except KeyError as exc:
        raise ValueError(f"{path}: solution file missing key {exc.args[0]!r}") from None
    return curve, spec, params


def write_configuration_csv(path, config: Configuration):
    """Columns t, body, x, y; one row per body and grid time."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["t", "body", "x", "y"])
        for j, t in enumerate(config.times):
            for i in range(config.n):
                x, y = config.positions[i, j]
                w.writerow([repr(float(t)), i, repr(float(x)), repr(float(y))])


def read_configuration_csv(path, T: float) -> Configuration:
    rows = list(csv.DictReader(open(path, newline="")))
    n = max(int(r["body"]) for r in rows) + 1
    times = np.array(sorted({float(r["t"]) for r in rows}))
    index = {t: j for j, t in enumerate(times)}
    pos = np.empty((n, times.size, 2))
    for r in rows:
        pos[int(r["body"]), index[float(r["t"])]] = float(r["x"]), float(r["y"])
    return Configuration(n, T, times, pos)


def render_svg(curve: FourierCurve, spec: SymmetrySpec, path=None, samples: int = 2048,
               size: int = 480, title: str | None = None):
    """Closed SVG path of the curve plus a marker per body at t = 0.

    Returns ``(svg_text, points)`` where ``points`` are the plotted samples.
    """
    pts = curve.sample(samples)
    bodies = np.array([rotation(2 * math.pi * i / spec.n) @ curve.evaluate(i * curve.T / spec.n)
                       for i in range(spec.n)])
    extent = 1.08 * float(np.max(np.abs(np.vstack([pts, bodies]))))
    extent = extent if extent > 0 else 1.0
    scale = size / (2 * extent)

    def xy(p):
        # SVG y grows downwards
        return f"{(p[0] + extent) * scale:.6f},{(extent - p[1]) * scale:.6f}"

    d = "M " + " L ".join(xy(p) for p in pts) + " Z"
    label = title or f"n={spec.n}, W={spec.W}"
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" '
        f'viewBox="0 0 {size} {size}">',
        f"  <title>{label}</title>",
        f'  <line x1="0" y1="{size / 2}" x2="{size}" y2="{size / 2}" stroke="#ddd"/>',
        f'  <line x1="{size / 2}" y1="0" x2="{size / 2}" y2="{size}" stroke="#ddd"/>',
        f'  <path d="{d}" fill="none" stroke="#1f4e79" stroke-width="1.2"/>',
    ]
    for b in bodies:
        cx, cy = xy(b).split(",")
        parts.append(f'  <circle cx="{cx}" cy="{cy}" r="4" fill="#c0392b"/>')
    parts.append("</svg>")
    text = "\n".join(parts) + "\n"
    if path is not None:
        Path(path).write_text(text)
    return text, pts


def parse_svg_path(text: str) -> np.ndarray:
    """Recover the plotted points (in SVG units) from a file written by ``render_svg``."""
    start = text.index(' d="') + 4
    d = text[start : text.index('"', start)]
    coords = d.replace("M", "").replace("Z", "").split("L")
    return np.array([[float(v) for v in c.strip().split(",")] for c in coords])

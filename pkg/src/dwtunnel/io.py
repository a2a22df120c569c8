"""Config parsing, CSV serialization and SVG line charts."""
from __future__ import annotations

import csv
import io as _io
import json
import math
import os
import tempfile
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence

import numpy as np

from .errors import ConfigurationError
from .experiment import GridSpec, InitialSpec, RunConfig, RunRecord, ScanRecord
from .grid import SpatialGrid, WaveField
from .potential import PotentialProvider

__all__ = [
    "TIMESERIES_HEADER",
    "SCAN_HEADER",
    "SNAPSHOT_HEADER",
    "OutputBundle",
    "format_number",
    "parse_config",
    "load_config",
    "write_timeseries",
    "write_scan",
    "write_snapshot",
    "read_csv",
    "render_plot",
]

TIMESERIES_HEADER = [
    "tau", "norm", "prob_left", "prob_right", "mean_x",
    "energy_total", "energy_potential", "barrier_height",
]
SCAN_HEADER = [
    "epsilon", "max_prob_right", "first_passage_tau", "transfer_cycles", "final_energy", "status",
]
SNAPSHOT_HEADER = ["x", "re_psi", "im_psi", "prob_density", "potential"]

SIG_DIGITS = 12

_REQUIRED = ("alpha", "beta", "epsilon", "tau_max")
_TOP_KEYS = set(_REQUIRED) | {
    "dtau", "grid", "scheme", "record_stride_tau", "snapshot_taus", "initial",
}
_GRID_KEYS = {"x_max", "n_points"}
_INITIAL_KEYS = {"well", "width"}


@dataclass
class OutputBundle:
    directory: Path
    timeseries_path: Optional[Path] = None
    scan_path: Optional[Path] = None
    snapshot_paths: List[Path] = field(default_factory=list)
    plot_paths: List[Path] = field(default_factory=list)


def format_number(v) -> str:
    """12 significant digits; scientific notation for |v| < 1e-4 or |v| >= 1e6."""
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        raise TypeError("booleans are not numeric fields")
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    v = float(v)
    if math.isnan(v):
        return "nan"
    if math.isinf(v):
        return "inf" if v > 0 else "-inf"
    if v == 0.0:
        return "0"
    if abs(v) < 1e-4 or abs(v) >= 1e6:
        return np.format_float_scientific(v, precision=SIG_DIGITS - 1, unique=False, trim="-")
    return np.format_float_positional(
        v, precision=SIG_DIGITS, unique=False, fractional=False, trim="-"
    )


# -- configuration -----------------------------------------------------------


def _number(doc, key, path, integer=False):
    v = doc[key]
    name = f"{path}{key}"
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigurationError(f"{name} must be a number, got {v!r}", key=name)
    if integer:
        if float(v) != int(v):
            raise ConfigurationError(f"{name} must be an integer, got {v!r}", key=name)
        return int(v)
    return float(v)


def _reject_unknown(doc, allowed, path):
    unknown = sorted(set(doc) - allowed)
    if unknown:
        name = f"{path}{unknown[0]}"
        raise ConfigurationError(f"unknown configuration key {name!r}", key=name)


def config_from_mapping(doc: dict) -> RunConfig:
    if not isinstance(doc, dict):
        raise ConfigurationError("configuration must be a JSON object")
    _reject_unknown(doc, _TOP_KEYS, "")
    for key in _REQUIRED:
        if key not in doc:
            raise ConfigurationError(f"missing required key {key!r}", key=key)

    kwargs = {k: _number(doc, k, "") for k in _REQUIRED}
    for key in ("dtau", "record_stride_tau"):
        if key in doc:
            kwargs[key] = _number(doc, key, "")

    grid = doc.get("grid", {})
    if not isinstance(grid, dict):
        raise ConfigurationError("grid must be an object", key="grid")
    _reject_unknown(grid, _GRID_KEYS, "grid.")
    gdefault = GridSpec()
    kwargs["grid"] = GridSpec(
        x_max=_number(grid, "x_max", "grid.") if "x_max" in grid else gdefault.x_max,
        n_points=_number(grid, "n_points", "grid.", integer=True) if "n_points" in grid else gdefault.n_points,
    )

    if "scheme" in doc:
        if not isinstance(doc["scheme"], str):
            raise ConfigurationError("scheme must be a string", key="scheme")
        kwargs["scheme"] = doc["scheme"]

    if "snapshot_taus" in doc:
        snaps = doc["snapshot_taus"]
        if not isinstance(snaps, list):
            raise ConfigurationError("snapshot_taus must be an array", key="snapshot_taus")
        kwargs["snapshot_taus"] = tuple(
            _number({"snapshot_taus": s}, "snapshot_taus", "") for s in snaps
        )

    initial = doc.get("initial", {})
    if not isinstance(initial, dict):
        raise ConfigurationError("initial must be an object", key="initial")
    _reject_unknown(initial, _INITIAL_KEYS, "initial.")
    idefault = InitialSpec()
    kwargs["initial"] = InitialSpec(
        well=initial.get("well", idefault.well),
        width=_number(initial, "width", "initial.") if "width" in initial else idefault.width,
    )
    try:
        return RunConfig(**kwargs)
    except ConfigurationError:
        raise
    except (TypeError, ValueError) as exc:
        raise ConfigurationError(str(exc)) from exc


def parse_config(text: str) -> RunConfig:
    """Parse and validate a JSON configuration document."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigurationError(f"malformed JSON: {exc}") from exc
    return config_from_mapping(doc)


def load_config(path) -> RunConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigurationError(f"cannot read config {path}: {exc}") from exc
    return parse_config(text)


# -- CSV ---------------------------------------------------------------------


def _atomic_write(path, text: str):
    path = Path(path)
    try:
        fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", suffix=".tmp", dir=path.parent or ".")
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except OSError as exc:
        raise OSError(f"failed writing {path}: {exc}") from exc


def _csv_text(header, rows) -> str:
    buf = _io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([c if isinstance(c, str) else format_number(c) for c in row])
    return buf.getvalue()


def write_timeseries(record: RunRecord, path) -> Path:
    hb = record.barrier_height
    rows = [
        (s.tau, s.norm, s.prob_left, s.prob_right, s.mean_x, s.energy_total, s.energy_potential, hb)
        for s in record.samples
    ]
    _atomic_write(path, _csv_text(TIMESERIES_HEADER, rows))
    return Path(path)


def write_scan(records: Sequence[ScanRecord], path) -> Path:
    rows = []
    for r in records:
        m = r.metrics
        rows.append((
            r.epsilon,
            m.max_prob_right if m else math.nan,
            m.first_passage_tau if m else None,
            m.transfer_cycles if m else "",
            r.final_energy,
            r.status,
        ))
    _atomic_write(path, _csv_text(SCAN_HEADER, rows))
    return Path(path)


def write_snapshot(field: WaveField, grid: SpatialGrid, pot: PotentialProvider,
                   tau: float, path) -> Path:
    u = pot.sample(grid, tau)
    psi = field.amplitudes
    rho = field.density()
    rows = zip(grid.nodes, psi.real, psi.imag, rho, u)
    _atomic_write(path, _csv_text(SNAPSHOT_HEADER, rows))
    return Path(path)


def read_csv(path) -> Dict[str, list]:
    """Columns of a CSV written by this module.

    Numeric cells become floats, empty cells ``None``, anything else stays a
    string.
    """
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ValueError(f"{path} is empty") from None
        cols: Dict[str, list] = {h: [] for h in header}
        for row in reader:
            for h, cell in zip(header, row):
                if cell == "":
                    cols[h].append(None)
                    continue
                try:
                    cols[h].append(float(cell))
                except ValueError:
                    cols[h].append(cell)
    return cols


# -- SVG ---------------------------------------------------------------------

_PALETTE = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"]
_DASHES = ["", "6,4", "2,3", "8,3,2,3"]
_W, _H = 800, 420
_ML, _MR, _MT, _MB = 70, 20, 40, 50


def _nice_ticks(lo, hi, n=5):
    if hi == lo:
        return [lo]
    raw = (hi - lo) / n
    mag = 10 ** math.floor(math.log10(raw))
    step = min((m * mag for m in (1, 2, 2.5, 5, 10) if m * mag >= raw), default=10 * mag)
    start = math.ceil(lo / step) * step
    ticks = []
    t = start
    while t <= hi + 1e-9 * step:
        ticks.append(0.0 if abs(t) < 1e-12 * step else t)
        t += step
    return ticks


def _esc(s: str) -> str:
    return s.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;").replace('"', "&quot;")


def _as_float_array(values):
    return np.array([math.nan if not isinstance(v, float) else v for v in values], dtype=float)


def svg_line_chart(x, series: Dict[str, np.ndarray], x_label: str, title: str = "") -> str:
    x = np.asarray(x, dtype=float)
    finite_y = np.concatenate([y[np.isfinite(y)] for y in series.values()] or [np.empty(0)])
    finite_x = x[np.isfinite(x)]
    x_lo, x_hi = (float(finite_x.min()), float(finite_x.max())) if finite_x.size else (0.0, 1.0)
    y_lo, y_hi = (float(finite_y.min()), float(finite_y.max())) if finite_y.size else (0.0, 1.0)
    if x_hi == x_lo:
        x_lo, x_hi = x_lo - 0.5, x_hi + 0.5
    if y_hi == y_lo:
        pad = 0.5 if y_lo == 0 else abs(y_lo) * 0.1
        y_lo, y_hi = y_lo - pad, y_hi + pad
    pad = 0.05 * (y_hi - y_lo)
    y_lo, y_hi = y_lo - pad, y_hi + pad
    pw, ph = _W - _ML - _MR, _H - _MT - _MB

    def sx(v):
        return _ML + (v - x_lo) / (x_hi - x_lo) * pw

    def sy(v):
        return _MT + (y_hi - v) / (y_hi - y_lo) * ph

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_W}" height="{_H}" '
        f'viewBox="0 0 {_W} {_H}" font-family="sans-serif" font-size="12">',
        f'<rect x="0" y="0" width="{_W}" height="{_H}" fill="white"/>',
    ]
    if title:
        out.append(f'<text x="{_W / 2:.1f}" y="22" text-anchor="middle" font-size="14">{_esc(title)}</text>')
    out.append(f'<rect x="{_ML}" y="{_MT}" width="{pw}" height="{ph}" fill="none" stroke="black"/>')
    for t in _nice_ticks(x_lo, x_hi):
        px = sx(t)
        out.append(f'<line x1="{px:.2f}" y1="{_MT + ph}" x2="{px:.2f}" y2="{_MT + ph + 5}" stroke="black"/>')
        out.append(f'<text x="{px:.2f}" y="{_MT + ph + 18}" text-anchor="middle">{t:.4g}</text>')
    for t in _nice_ticks(y_lo, y_hi):
        py = sy(t)
        out.append(f'<line x1="{_ML - 5}" y1="{py:.2f}" x2="{_ML}" y2="{py:.2f}" stroke="black"/>')
        out.append(f'<text x="{_ML - 8}" y="{py + 4:.2f}" text-anchor="end">{t:.4g}</text>')
    out.append(f'<text x="{_ML + pw / 2:.1f}" y="{_H - 10}" text-anchor="middle">{_esc(x_label)}</text>')

    for i, (name, y) in enumerate(series.items()):
        color = _PALETTE[i % len(_PALETTE)]
        dash = _DASHES[i % len(_DASHES)]
        dash_attr = f' stroke-dasharray="{dash}"' if dash else ""
        ok = np.isfinite(x) & np.isfinite(y)
        # split into runs of finite points
        segments, cur = [], []
        for xi, yi, good in zip(x, y, ok):
            if good:
                cur.append(f"{sx(xi):.2f},{sy(yi):.2f}")
            elif cur:
                segments.append(cur)
                cur = []
        if cur:
            segments.append(cur)
        for seg in segments:
            out.append(
                f'<polyline fill="none" stroke="{color}" stroke-width="1.5"{dash_attr} '
                f'data-series="{_esc(name)}" points="{" ".join(seg)}"/>'
            )
        ly = _MT + 16 + 16 * i
        lx = _ML + pw - 150
        out.append(f'<line x1="{lx}" y1="{ly - 4}" x2="{lx + 24}" y2="{ly - 4}" stroke="{color}" stroke-width="1.5"{dash_attr}/>')
        out.append(f'<text x="{lx + 30}" y="{ly}">{_esc(name)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def render_plot(csv_path, columns: Sequence[str], out_path, title: str = "") -> Path:
    """Line chart of ``columns`` against the CSV's first column, written as SVG."""
    data = read_csv(csv_path)
    header = list(data)
    if not columns:
        raise ValueError("no columns requested")
    for c in columns:
        if c not in data:
            raise KeyError(f"column {c!r} not found in {csv_path} (available: {', '.join(header)})")
    x_name = header[0]
    svg = svg_line_chart(
        _as_float_array(data[x_name]),
        {c: _as_float_array(data[c]) for c in columns},
        x_label=x_name,
        title=title,
    )
    _atomic_write(out_path, svg)
    return Path(out_path)

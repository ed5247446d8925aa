import csv
import json
import numpy as np
import os
from dataclasses import asdict, dataclass, field
from os import path as osp

__all__ = [
    'CSV_HEADER', 'COVER_HEADER', 'ResultRow', 'ExperimentResult', 'format_aux', 'parse_aux', 'emit_csv', 'read_csv',
    'emit_table', 'emit_json', 'emit_svg_lines', 'mean_curves'
]

CSV_HEADER = ['experiment', 'trial', 'm', 'sigma', 'method', 'error_l2', 'runtime_ms', 'seed', 'aux']
COVER_HEADER = ['eta', 'delta', 'count', 'covered_mass', 'n_samples', 'seed']

SVG_COLORS = ['#1f77b4', '#d62728', '#2ca02c', '#ff7f0e', '#9467bd', '#8c564b', '#e377c2', '#17becf']


def _fmt(value):
    """Shortest text that reads back to the same value."""
    if isinstance(value, (bool, np.bool_)):
        return str(int(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def format_aux(aux):
    """Flat ``key=value;...`` text with keys sorted."""
    return ';'.join(f'{k}={_fmt(aux[k])}' for k in sorted(aux))


def parse_aux(text):
    out = {}
    for item in filter(None, text.split(';')):
        key, _, value = item.partition('=')
        out[key] = value
    return out


@dataclass
class ResultRow:
    """One recovery attempt; ``seed`` replays the trial."""
    experiment: str
    trial: int
    m: int
    sigma: float
    method: str
    error_l2: float
    runtime_ms: float = 0.0
    seed: int = 0
    aux: dict = field(default_factory=dict)

    def sort_key(self):
        return (self.m, self.trial, self.method)

    def fields(self):
        return [
            self.experiment,
            _fmt(self.trial),
            _fmt(self.m),
            _fmt(self.sigma),
            self.method,
            _fmt(self.error_l2),
            _fmt(self.runtime_ms),
            _fmt(self.seed),
            format_aux(self.aux)
        ]


@dataclass
class ExperimentResult:
    """Everything an experiment hands back for writing.

    ``tables`` maps a file stem to ``(header, rows)``; ``series`` maps a method to (x, y) points.
    """
    experiment: str
    rows: list = field(default_factory=list)
    reports: list = field(default_factory=list)
    tables: dict = field(default_factory=dict)
    series: dict = field(default_factory=dict)
    summary: dict = field(default_factory=dict)

    @property
    def failed_reports(self):
        return [r for r in self.reports if r.holds is False]


def _open_for_write(path):
    folder = osp.dirname(osp.abspath(path))
    try:
        os.makedirs(folder, exist_ok=True)
        return open(path, 'w', newline='', encoding='utf-8')
    except OSError as error:
        raise OSError(f'cannot write {path}: {error}') from error


def emit_csv(rows, path):
    """Write result rows, sorted by (m, trial, method), under the fixed header."""
    rows = sorted(rows, key=ResultRow.sort_key)
    with _open_for_write(path) as f:
        writer = csv.writer(f, lineterminator='\n')
        writer.writerow(CSV_HEADER)
        for row in rows:
            writer.writerow(row.fields())


def read_csv(path):
    with open(path, newline='', encoding='utf-8') as f:
        return list(csv.DictReader(f))


def emit_table(header, rows, path):
    """Write dict rows under ``header``; missing keys are left empty."""
    with _open_for_write(path) as f:
        writer = csv.writer(f, lineterminator='\n')
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(row[k]) if row.get(k) is not None else '' for k in header])


def _to_builtin(obj):
    if hasattr(obj, 'to_dict'):
        return _to_builtin(obj.to_dict())
    if isinstance(obj, dict):
        return {str(k): _to_builtin(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_to_builtin(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (np.integer, np.floating, np.bool_)):
        return obj.item()
    if hasattr(obj, '__dataclass_fields__'):
        return _to_builtin(asdict(obj))
    return obj


def emit_json(obj, path):
    with _open_for_write(path) as f:
        json.dump(_to_builtin(obj), f, indent=2, sort_keys=True)
        f.write('\n')


def mean_curves(rows, value='error_l2'):
    """Mean of ``value`` per (method, m), as sorted (m, mean) lists keyed by method."""
    groups = {}
    for row in rows:
        groups.setdefault(row.method, {}).setdefault(row.m, []).append(getattr(row, value))
    return {method: [(m, float(np.mean(v))) for m, v in sorted(per_m.items())] for method, per_m in groups.items()}


def emit_svg_lines(series, path, width=640, height=400, title='', x_label='m', y_label='mean error'):
    """Minimal line chart: one polyline per series, linear axes, a legend.

    Points with a non-finite coordinate are left out.
    """
    margin = 50
    series = {name: [(x, y) for x, y in values if np.isfinite(x) and np.isfinite(y)] for name, values in series.items()}
    points = [p for values in series.values() for p in values]
    if points:
        xs, ys = zip(*points)
        x_lo, x_hi = min(xs), max(xs)
        y_lo, y_hi = min(0.0, min(ys)), max(ys)
    else:
        x_lo, x_hi, y_lo, y_hi = 0.0, 1.0, 0.0, 1.0
    x_span = (x_hi - x_lo) or 1.0
    y_span = (y_hi - y_lo) or 1.0

    def sx(x):
        return margin + (x - x_lo) / x_span * (width - 2 * margin)

    def sy(y):
        return height - margin - (y - y_lo) / y_span * (height - 2 * margin)

    lines = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
        f'<line x1="{margin}" y1="{height - margin}" x2="{width - margin}" y2="{height - margin}" stroke="black"/>',
        f'<line x1="{margin}" y1="{margin}" x2="{margin}" y2="{height - margin}" stroke="black"/>',
        f'<text x="{width / 2:.1f}" y="{height - 10}" text-anchor="middle" font-size="12">{x_label}</text>',
        f'<text x="15" y="{height / 2:.1f}" text-anchor="middle" font-size="12" '
        f'transform="rotate(-90 15 {height / 2:.1f})">{y_label}</text>',
        f'<text x="{margin}" y="{height - margin + 15}" font-size="10">{x_lo:g}</text>',
        f'<text x="{width - margin}" y="{height - margin + 15}" font-size="10" text-anchor="end">{x_hi:g}</text>',
        f'<text x="{margin - 5}" y="{margin}" font-size="10" text-anchor="end">{y_hi:.3g}</text>',
    ]
    if title:
        lines.append(f'<text x="{width / 2:.1f}" y="20" text-anchor="middle" font-size="14">{title}</text>')
    for i, (name, values) in enumerate(sorted(series.items())):
        color = SVG_COLORS[i % len(SVG_COLORS)]
        coords = ' '.join(f'{sx(x):.2f},{sy(y):.2f}' for x, y in values)
        lines.append(f'<polyline fill="none" stroke="{color}" stroke-width="2" points="{coords}"/>')
        legend_y = margin + 15 * i
        lines.append(f'<text x="{width - margin + 5}" y="{legend_y}" font-size="10" fill="{color}">{name}</text>')
    lines.append('</svg>')
    with _open_for_write(path) as f:
        f.write('\n'.join(lines) + '\n')

"""
CSV and SVG writers for result tables.
"""

import csv
import logging
import os
from html import escape
from typing import Dict, List, Optional, Sequence, Tuple

from qwalk2d.config import Config, ConfigurationError
from qwalk2d.experiments import ResultTable, TableKind

logger = logging.getLogger(__name__)

PALETTE = ('#1f77b4', '#d62728', '#2ca02c', '#ff7f0e', '#9467bd', '#8c564b', '#e377c2', '#17becf')
DASHES = ('', '6,3', '2,2', '8,3,2,3')


def _format_cell(value) -> str:
    if value is None:
        return ''
    if isinstance(value, bool):
        return str(int(value))
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        # keep CSV_DIGITS significant digits for small values
        if value != 0.0 and abs(value) < 0.1:
            return f"{value:.{Config.CSV_DIGITS - 1}e}"
        return f"{value:.{Config.CSV_DIGITS}f}"
    return str(value)


def _prepare(path: str) -> str:
    directory = os.path.dirname(os.path.abspath(path))
    try:
        os.makedirs(directory, exist_ok=True)
    except OSError as e:
        raise ConfigurationError(f"Cannot create output directory {directory}: {e}") from e
    return path


def emit_csv(table: ResultTable, path: str) -> str:
    """Write the header and rows; p in series tables keeps its short form"""
    _prepare(path)
    try:
        with open(path, 'w', newline='', encoding='utf-8') as handle:
            writer = csv.writer(handle, lineterminator='\n')
            writer.writerow(table.header)
            for row in table.rows:
                if table.kind == TableKind.SERIES:
                    step, p, measure, value = row
                    writer.writerow([step, f"{p:g}", measure, _format_cell(value)])
                else:
                    writer.writerow([_format_cell(cell) for cell in row])
    except OSError as e:
        raise ConfigurationError(f"Cannot write {path}: {e}") from e
    logger.info(f"💾 Wrote {len(table.rows)} rows to {path}")
    return path


class SvgBuilder:
    def __init__(self):
        self.svg = ""

    def header(self, width: int, height: int):
        self.svg += (
            '<?xml version="1.0" encoding="UTF-8" standalone="no"?>\n'
            f'<svg version="1.1" width="{width}" height="{height}" viewBox="0 0 {width} {height}" '
            'xmlns="http://www.w3.org/2000/svg">\n'
            f'<rect x="0" y="0" width="{width}" height="{height}" fill="#ffffff"/>\n'
        )

    def group_start(self, attr: Dict[str, str]):
        g_attr = [f'{key}="{escape(value)}"' for key, value in attr.items()]
        self.svg += f'<g {" ".join(g_attr)}>\n'

    def group_end(self):
        self.svg += '</g>\n'

    def filled_rectangle(self, x1: float, y1: float, x2: float, y2: float, fill: str, extra: str = ""):
        self.svg += (
            f'<rect x="{x1:.2f}" y="{y1:.2f}" width="{x2 - x1:.2f}" height="{y2 - y1:.2f}" '
            f'fill="{fill}" {extra}/>\n'
        )

    def line(self, x1: float, y1: float, x2: float, y2: float, stroke: str = '#000000', extra: str = ""):
        self.svg += (
            f'<line x1="{x1:.2f}" y1="{y1:.2f}" x2="{x2:.2f}" y2="{y2:.2f}" stroke="{stroke}" {extra}/>\n'
        )

    def polyline(self, points: Sequence[Tuple[float, float]], stroke: str, dash: str = ''):
        coords = " ".join(f"{x:.2f},{y:.2f}" for x, y in points)
        dash_attr = f' stroke-dasharray="{dash}"' if dash else ''
        self.svg += f'<polyline points="{coords}" fill="none" stroke="{stroke}" stroke-width="1.5"{dash_attr}/>\n'

    def text(self, x: float, y: float, string: str, extra: str = ""):
        self.svg += f'<text x="{x:.2f}" y="{y:.2f}" font-family="sans-serif" font-size="11" {extra}>{escape(string)}</text>\n'

    def get_svg(self) -> str:
        return f"{self.svg}</svg>\n"


def _gray(value: float, peak: float) -> str:
    # 0 → white, peak → black
    level = 255 - int(round(255 * value / peak)) if peak > 0 else 255
    level = min(255, max(0, level))
    return f"rgb({level},{level},{level})"


def _heatmap(table: ResultTable) -> str:
    cells = {(int(x), int(y)): float(p) for x, y, p in table.rows}
    t = max(max(abs(x), abs(y)) for x, y in cells)
    L = 2 * t + 1
    size = max(6, min(24, 480 // L))
    margin = 40
    width = height = 2 * margin + L * size
    peak = max(cells.values())

    svg = SvgBuilder()
    svg.header(width, height + 40)
    svg.text(margin, 20, table.title or 'distribution', 'font-weight="bold"')
    svg.group_start({'id': 'cells'})
    for (x, y), p in sorted(cells.items()):
        left = margin + (x + t) * size
        top = 30 + margin + (t - y) * size
        svg.filled_rectangle(left, top, left + size, top + size, _gray(p, peak),
                             f'data-x="{x}" data-y="{y}"')
    svg.group_end()

    bottom = 30 + margin + L * size
    svg.line(margin, bottom, margin + L * size, bottom)
    svg.line(margin, 30 + margin, margin, bottom)
    for coord in sorted({-t, 0, t}):
        svg.text(margin + (coord + t + 0.5) * size - 4, bottom + 14, str(coord))
        svg.text(margin - 24, 30 + margin + (t - coord + 0.5) * size + 4, str(coord))
    svg.text(margin + L * size / 2, bottom + 30, 'x')
    svg.text(8, 30 + margin + L * size / 2, 'y')
    return svg.get_svg()


def _series(table: ResultTable) -> Dict[Tuple[str, float], List[Tuple[int, Optional[float]]]]:
    series: Dict[Tuple[str, float], List[Tuple[int, Optional[float]]]] = {}
    for step, p, measure, value in table.rows:
        series.setdefault((measure, p), []).append((step, value))
    return series


def _lines(table: ResultTable) -> str:
    series = _series(table)
    steps = [step for points in series.values() for step, _ in points]
    values = [v for points in series.values() for _, v in points if v is not None]
    max_step = max(max(steps), 1)
    low, high = min(values, default=0.0), max(values, default=1.0)
    if high - low < 1e-12:
        low, high = low - 0.5, high + 0.5

    plot_w, plot_h = 480, 300
    left, top = 60, 40
    legend_h = 16 * len(series)
    svg = SvgBuilder()
    svg.header(left + plot_w + 200, top + plot_h + 50 + legend_h)
    svg.text(left, 20, table.title or 'series', 'font-weight="bold"')

    def to_px(step: float, value: float) -> Tuple[float, float]:
        return left + plot_w * step / max_step, top + plot_h * (1 - (value - low) / (high - low))

    svg.line(left, top + plot_h, left + plot_w, top + plot_h)
    svg.line(left, top, left, top + plot_h)
    for step in range(0, max_step + 1, max(1, max_step // 10)):
        x, _ = to_px(step, low)
        svg.line(x, top + plot_h, x, top + plot_h + 4)
        svg.text(x - 3, top + plot_h + 16, str(step))
    for value in (low, (low + high) / 2, high):
        _, y = to_px(0, value)
        svg.line(left - 4, y, left, y)
        svg.text(4, y + 4, f"{value:.3g}")
    svg.text(left + plot_w / 2, top + plot_h + 34, 'step')
    svg.text(left + plot_w + 10, top + 10, 'value')

    for index, ((measure, p), points) in enumerate(series.items()):
        color = PALETTE[index % len(PALETTE)]
        dash = DASHES[index % len(DASHES)]
        svg.group_start({'class': 'series', 'data-measure': measure, 'data-p': f"{p:g}"})
        run: List[Tuple[float, float]] = []
        for step, value in points:
            if value is None:
                if len(run) > 1:
                    svg.polyline(run, color, dash)
                run = []
                continue
            run.append(to_px(step, value))
        if len(run) > 1:
            svg.polyline(run, color, dash)
        elif len(run) == 1:
            svg.filled_rectangle(run[0][0] - 2, run[0][1] - 2, run[0][0] + 2, run[0][1] + 2, color)
        svg.group_end()

        legend_y = top + plot_h + 50 + 16 * index
        svg.line(left, legend_y - 4, left + 24, legend_y - 4, color,
                 'stroke-width="1.5"' + (f' stroke-dasharray="{dash}"' if dash else ''))
        svg.text(left + 30, legend_y, f"{measure} p={p:g}")
    return svg.get_svg()


def emit_svg(table: ResultTable, kind: str, path: str) -> str:
    """Heatmap for distribution tables, one polyline per (measure, p) for series tables"""
    if kind == 'heatmap':
        if table.kind != TableKind.DISTRIBUTION:
            raise ConfigurationError("A heatmap needs a distribution table")
        content = _heatmap(table)
    elif kind == 'lines':
        if table.kind != TableKind.SERIES:
            raise ConfigurationError("A line plot needs a series table")
        content = _lines(table)
    else:
        raise ConfigurationError(f"Unknown plot kind '{kind}'; choose heatmap or lines")

    _prepare(path)
    try:
        with open(path, 'w', encoding='utf-8') as handle:
            handle.write(content)
    except OSError as e:
        raise ConfigurationError(f"Cannot write {path}: {e}") from e
    logger.info(f"🖼️ Wrote {kind} plot to {path}")
    return path


def default_plot_kind(table: ResultTable) -> str:
    return 'heatmap' if table.kind == TableKind.DISTRIBUTION else 'lines'


def emit_table(table: ResultTable, base_path: str, formats: Sequence[str]) -> List[str]:
    """Write the table once per requested format, extension appended to base_path"""
    written = []
    for fmt in formats:
        if fmt == 'csv':
            written.append(emit_csv(table, f"{base_path}.csv"))
        elif fmt == 'svg':
            written.append(emit_svg(table, default_plot_kind(table), f"{base_path}.svg"))
        else:
            raise ConfigurationError(f"Unknown output format '{fmt}'")
    return written

"""Shared fixtures: a synthetic bar-chart panel whose five-step improvement
series exercises every taxonomy class the linter cares about."""
from __future__ import annotations

import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from figchain.figmap import parse_figure_map
from figchain.svgdoc import parse_figure

PANEL_MAP_TEXT = """\
# synthetic temperature panel roles
path / => size
id-prefix canvas => size
id-prefix title => title
id-prefix axis-y-title => axes-title
id-prefix axis-x-title => axes-title
id-prefix axis-tick-label => axes-label
id-prefix axis-tick => axes-tick
id-prefix axis-line => axes-axis-line
id-prefix legend-title => legend-title
id-prefix legend-box => legend-general
id-prefix legend-swatch => legend-symbols
id-prefix legend-label => legend-labels
id-prefix mark-bar => marks-bar
id-prefix note => annotation
default => other
"""


def panel_svg(
    *,
    title: str = "Change in GSAT",
    y_axis_title: str | None = None,
    x_axis_title: str = "(Wm-2)",
    legend_box: bool = True,
    legend_title: str | None = None,
    height: int = 300,
    width: int = 400,
    bar_fill: str = "#b35806",
    bar_heights: tuple[float, ...] = (60.0, 100.0, 140.0),
    bar_geometry=None,
) -> bytes:
    """One synthetic chart panel; keyword knobs map onto the five operations."""
    baseline = 250.0
    bars = []
    if bar_geometry is None:
        bar_geometry = [
            (60.0 + 80.0 * k, baseline - h, 40.0, h) for k, h in enumerate(bar_heights)
        ]
    for k, (x, y, w, h) in enumerate(bar_geometry):
        bars.append(
            f'    <rect id="mark-bar-{k}" x="{x:g}" y="{y:g}" width="{w:g}" '
            f'height="{h:g}" fill="{bar_fill}"/>'
        )
    lines = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}">',
        f'  <rect id="canvas" x="0" y="0" width="{width}" height="{height}" fill="#f4f1ea"/>',
        f'  <text id="title" x="200" y="30">{title}</text>',
    ]
    if y_axis_title is not None:
        lines.append(f'  <text id="axis-y-title" x="18" y="150">{y_axis_title}</text>')
    lines.append('  <g id="plot">')
    lines.extend(bars)
    lines.append('    <line id="axis-line-x" x1="50" y1="250" x2="350" y2="250" stroke="#333"/>')
    for k in range(3):
        cx = 80.0 + 80.0 * k
        lines.append(
            f'    <line id="axis-tick-{k}" x1="{cx:g}" y1="250" x2="{cx:g}" y2="255" stroke="#333"/>'
        )
        lines.append(
            f'    <text id="axis-tick-label-{k}" x="{cx:g}" y="268">{k + 1}</text>'
        )
    lines.append('  </g>')
    lines.append(f'  <text id="axis-x-title" x="200" y="285">{x_axis_title}</text>')
    if legend_title is not None:
        lines.append(f'  <text id="legend-title" x="290" y="52">{legend_title}</text>')
    lines.append('  <g id="legend" transform="translate(280,60)">')
    if legend_box:
        lines.append(
            '    <rect id="legend-box" x="0" y="0" width="100" height="46" '
            'fill="none" stroke="#000"/>'
        )
    for k, label in enumerate(("CO2", "Aerosols")):
        y = 8.0 + 20.0 * k
        lines.append(
            f'    <rect id="legend-swatch-{k}" x="6" y="{y:g}" width="12" height="12" fill="#888"/>'
        )
        lines.append(f'    <text id="legend-label-{k}" x="24" y="{y + 10:g}">{label}</text>')
    lines.append('  </g>')
    lines.append('</svg>')
    return "\n".join(lines).encode("utf-8")


# The five documented operations, in order: (commit message, panel kwargs AFTER the op).
OPERATION_SERIES = [
    ("[title: update title text]", {"title": "Change in global surface temperature"}),
    (
        "[axes-title: add y-axis title, remove brackets in x-axis title]",
        {"y_axis_title": "Emitted Components", "x_axis_title": "Wm-2"},
    ),
    ("[legend-general: remove black stroke]", {"legend_box": False}),
    ('[legend-title: add title "Climate effect through"]', {"legend_title": "Climate effect through"}),
    ("[size-height: increase height]", {"height": 360}),
]


def operation_states() -> list[dict]:
    """Panel kwargs before/after each operation, cumulatively applied."""
    states = [{}]
    acc: dict = {}
    for _msg, delta in OPERATION_SERIES:
        acc = {**acc, **delta}
        states.append(dict(acc))
    return states


@pytest.fixture(scope="session")
def panel_map():
    return parse_figure_map(PANEL_MAP_TEXT)


@pytest.fixture(scope="session")
def op_series_svgs() -> list[bytes]:
    """Six panel states: index k is the figure after the first k operations."""
    return [panel_svg(**kwargs) for kwargs in operation_states()]


@pytest.fixture()
def base_panel(op_series_svgs):
    return parse_figure(op_series_svgs[0])


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    """One pass/fail line per acceptance criterion at the end of the run."""
    rows = []
    for status, label in (("passed", "PASS"), ("failed", "FAIL"), ("error", "FAIL")):
        for rep in terminalreporter.stats.get(status, []):
            nodeid = getattr(rep, "nodeid", "")
            if "test_acceptance.py" in nodeid and getattr(rep, "when", "call") == "call":
                rows.append((nodeid.split("::")[-1], label))
    if rows:
        terminalreporter.section("acceptance criteria")
        for name, label in sorted(rows):
            terminalreporter.write_line(f"{label}  {name}")

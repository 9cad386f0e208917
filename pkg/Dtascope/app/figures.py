"""
Static SVG figures for an analysis bundle.

Python lays out every mark in pixel coordinates; the Jinja2 templates under
`templates/` only emit them. All numbers are formatted with fixed precision so
the same AnalysisResult always renders to the same bytes.
"""
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from jinja2 import Environment, PackageLoader, StrictUndefined
from scipy.special import expit, logit

from ..core_data.study_records import Dataset
from ..core_data.transforms import observed_proportions
from ..influence_diagnostics.records import FLAGGING_METHODS, AnalysisResult, Thresholds
from ..sroc.sroc_curve import fpr_grid

logger = logging.getLogger(__name__)

WIDTH, HEIGHT = 800, 600
TITLE_BAND = 36
CURVE_POINTS = 200
NORMAL_975 = 1.96

FIGURE_FILES = ("fig1_scatter.svg", "fig2_distances.svg", "fig3_dauc.svg", "fig4_sroc_panels.svg")

METHOD_TITLES = {
    "relative_distance": "SRD",
    "standardized_residual": "SSR",
    "bayesian_p_value": "Bayesian p-value",
    "diagnostic_odds_ratio": "RD of DOR",
    "auc_influence": "AUC",
}

_env = Environment(
    loader=PackageLoader("Dtascope.app", "templates"),
    undefined=StrictUndefined,
    autoescape=True,
    trim_blocks=True,
    lstrip_blocks=True,
    keep_trailing_newline=True,
)


def _f(value: float) -> str:
    return f"{value:.2f}"


def _tick_label(value: float) -> str:
    return f"{value:.3g}"


@dataclass
class Panel:
    """One set of axes. Marks are stored already mapped to pixels."""
    title: str
    left: float
    top: float
    width: float
    height: float
    x_range: Tuple[float, float]
    y_range: Tuple[float, float]
    x_label: str = ""
    y_label: str = ""
    lines: List[Dict[str, str]] = field(default_factory=list)
    rects: List[Dict[str, str]] = field(default_factory=list)
    circles: List[Dict[str, str]] = field(default_factory=list)
    polylines: List[Dict[str, str]] = field(default_factory=list)
    texts: List[Dict[str, str]] = field(default_factory=list)

    def px(self, x: float) -> float:
        lo, hi = self.x_range
        return self.left + (x - lo) / (hi - lo) * self.width

    def py(self, y: float) -> float:
        lo, hi = self.y_range
        return self.top + self.height - (y - lo) / (hi - lo) * self.height

    @property
    def frame(self) -> Dict[str, str]:
        return {"x": _f(self.left), "y": _f(self.top), "width": _f(self.width), "height": _f(self.height)}

    @property
    def title_position(self) -> Dict[str, str]:
        return {"x": _f(self.left + self.width / 2), "y": _f(self.top - 8)}

    @property
    def x_label_position(self) -> Dict[str, str]:
        return {"x": _f(self.left + self.width / 2), "y": _f(self.top + self.height + 30)}

    @property
    def y_label_position(self) -> Dict[str, str]:
        return {"x": _f(self.left - 34), "y": _f(self.top + self.height / 2)}

    def line(self, x1, y1, x2, y2, css="rule"):
        self.lines.append({"x1": _f(self.px(x1)), "y1": _f(self.py(y1)),
                           "x2": _f(self.px(x2)), "y2": _f(self.py(y2)), "css": css})

    def hline(self, y, css="rule"):
        if self.y_range[0] <= y <= self.y_range[1]:
            self.line(self.x_range[0], y, self.x_range[1], y, css)

    def circle(self, x, y, r=5.0, css="study"):
        self.circles.append({"cx": _f(self.px(x)), "cy": _f(self.py(y)), "r": _f(r), "css": css})

    def bar(self, x, value, half_width, css="bar"):
        top, bottom = self.py(max(value, 0.0)), self.py(min(value, 0.0))
        self.rects.append({"x": _f(self.px(x - half_width)), "y": _f(top),
                           "width": _f(self.px(x + half_width) - self.px(x - half_width)),
                           "height": _f(max(bottom - top, 0.0)), "css": css})

    def polyline(self, xs, ys, css="curve"):
        points = " ".join(f"{_f(self.px(x))},{_f(self.py(y))}" for x, y in zip(xs, ys))
        self.polylines.append({"points": points, "css": css})

    def text(self, x, y, label, anchor="middle", css="tick"):
        self.texts.append({"x": _f(x), "y": _f(y), "label": label, "anchor": anchor, "css": css})

    def y_ticks(self, count=5):
        for value in np.linspace(self.y_range[0], self.y_range[1], count):
            self.text(self.left - 4, self.py(value) + 3, _tick_label(float(value)), anchor="end")

    def x_ticks(self, values, labels=None):
        labels = labels or [_tick_label(v) for v in values]
        for value, label in zip(values, labels):
            self.text(self.px(value), self.top + self.height + 12, label)


def _grid_boxes(rows: int, cols: int, margin=(48, 12, 26, 40)) -> List[Tuple[float, float, float, float]]:
    """(left, top, width, height) of each plot area, row-major. margin = (left, right, top, bottom)."""
    cell_w = WIDTH / cols
    cell_h = (HEIGHT - TITLE_BAND) / rows
    left_m, right_m, top_m, bottom_m = margin
    boxes = []
    for r in range(rows):
        for c in range(cols):
            boxes.append((c * cell_w + left_m, TITLE_BAND + r * cell_h + top_m,
                          cell_w - left_m - right_m, cell_h - top_m - bottom_m))
    return boxes


def _thresholds(result: AnalysisResult) -> Thresholds:
    return Thresholds(**result.metadata.get("thresholds", {}))


# --------------------------------------------------------------------------- #
# panel data (also used by tests)
# --------------------------------------------------------------------------- #
@dataclass(frozen=True)
class BarPanelData:
    title: str
    statistic: str
    bars: List[Tuple[int, Optional[float]]]
    rules: List[float]
    # highlight a bar sitting exactly on a rule, as the |delta AUC| flag does
    inclusive: bool = False

    def highlighted(self, value: float) -> bool:
        if self.inclusive:
            return any(value >= rule if rule > 0 else value <= rule for rule in self.rules)
        return any(value > rule if rule > 0 else value < rule for rule in self.rules)


def distance_panels(result: AnalysisResult) -> List[BarPanelData]:
    """The ten relative-distance and residual panels, in display order (a)-(j)."""
    thr = _thresholds(result)
    rules = {
        "rd_a": [thr.srd], "rd_b": [thr.srd], "srd": [thr.srd], "ard": [thr.srd], "rd_dor": [thr.rd_dor],
        "sr_a": [-NORMAL_975, NORMAL_975], "sr_b": [-NORMAL_975, NORMAL_975], "ssr": [thr.ssr],
        "asr": [NORMAL_975], "sr_dor": [-NORMAL_975, NORMAL_975],
    }
    titles = {
        "rd_a": "RD sensitivity", "rd_b": "RD FPR", "srd": "SRD", "ard": "ARD", "rd_dor": "RD DOR",
        "sr_a": "SR sensitivity", "sr_b": "SR FPR", "ssr": "SSR", "asr": "ASR", "sr_dor": "SR DOR",
    }
    panels = []
    for letter, statistic in zip("abcdefghij", rules):
        bars = [(r.study_id, getattr(r, statistic)) for r in result.records]
        panels.append(BarPanelData(f"({letter}) {titles[statistic]}", statistic, bars, rules[statistic]))
    return panels


def sroc_panel_sets(result: AnalysisResult) -> List[Tuple[str, List[int]]]:
    """(title, flagged ids) for the all-studies panel and one panel per flagging method."""
    sets = [("All studies", [])]
    for method in FLAGGING_METHODS:
        sets.append((METHOD_TITLES[method], result.flagged(method)))
    return sets


# --------------------------------------------------------------------------- #
# figures
# --------------------------------------------------------------------------- #
def _unit_panel(title, box) -> Panel:
    panel = Panel(title, *box, x_range=(0.0, 1.0), y_range=(0.0, 1.0), x_label="FPR", y_label="Sensitivity")
    panel.x_ticks([0.0, 0.25, 0.5, 0.75, 1.0])
    panel.y_ticks()
    return panel


def _scatter_panel(result: AnalysisResult, dataset: Dataset) -> Panel:
    panel = _unit_panel("Observed sensitivity and FPR", (70, TITLE_BAND + 20, WIDTH - 110, HEIGHT - TITLE_BAND - 80))
    for study in dataset:
        sens, fpr = observed_proportions(study)
        panel.circle(fpr, sens, css="study")
        panel.text(panel.px(fpr) + 7, panel.py(sens) - 5, str(study.id), anchor="start", css="label")
    panel.circle(result.pooled.eta_b.value, result.pooled.eta_a.value, r=7.0, css="pooled")
    return panel


def _bar_panel(data: BarPanelData, box) -> Panel:
    values = [v for _, v in data.bars if v is not None]
    lo = min([0.0] + values + data.rules)
    hi = max([0.0] + values + data.rules)
    pad = 0.1 * (hi - lo or 1.0)
    lo = lo - pad if lo < 0.0 else 0.0
    n = len(data.bars)
    panel = Panel(data.title, *box, x_range=(0.0, n + 1.0), y_range=(lo, hi + pad), x_label="Deleted study")
    for position, (study_id, value) in enumerate(data.bars, start=1):
        if value is not None:
            panel.bar(position, value, 0.35, css="bar-flag" if data.highlighted(value) else "bar")
    panel.hline(0.0, css="axis")
    for rule in data.rules:
        panel.hline(rule)
    positions = list(range(1, n + 1))
    step = max(1, n // 10)
    panel.x_ticks(positions[::step], [str(study_id) for study_id, _ in data.bars][::step])
    panel.y_ticks()
    return panel


def dauc_panel_data(result: AnalysisResult) -> BarPanelData:
    thr = _thresholds(result)
    return BarPanelData("Change in AUC when each study is deleted", "delta_auc",
                        [(r.study_id, r.delta_auc) for r in result.records], [-thr.delta_auc, thr.delta_auc],
                        inclusive=True)


def _dauc_panel(result: AnalysisResult) -> Panel:
    panel = _bar_panel(dauc_panel_data(result), (70, TITLE_BAND + 20, WIDTH - 110, HEIGHT - TITLE_BAND - 80))
    panel.y_label = "Delta AUC"
    return panel


def _sroc_panel(title, box, result: AnalysisResult, dataset: Dataset, flagged: Sequence[int]) -> Panel:
    panel = _unit_panel(title, box)
    flagged = set(flagged)
    for study in dataset:
        sens, fpr = observed_proportions(study)
        panel.circle(fpr, sens, r=4.0, css="flagged" if study.id in flagged else "study")

    fpr = fpr_grid(CURVE_POINTS)
    panel.polyline(fpr, expit(result.sroc.intercept + result.sroc.slope * logit(fpr)), css="curve")
    panel.circle(result.pooled.eta_b.value, result.pooled.eta_a.value, r=5.0, css="pooled")

    refit = next((r for r in result.refits if set(r.removed_ids) == flagged), None) if flagged else None
    if refit is not None:
        panel.polyline(fpr, expit(refit.sroc_intercept + refit.sroc_slope * logit(fpr)), css="curve-refit")
        panel.circle(refit.pooled.eta_b.value, refit.pooled.eta_a.value, r=5.0, css="pooled-refit")
    return panel


def _render(template: str, path: Path, **context) -> Path:
    svg = _env.get_template(template).render(width=WIDTH, height=HEIGHT, **context)
    path.write_text(svg, encoding="utf-8")
    return path


def render_figures(result: AnalysisResult, dataset: Dataset, out_dir) -> List[Path]:
    out_dir = Path(out_dir)
    if not out_dir.is_dir():
        raise NotADirectoryError(f"{out_dir} is not a directory")

    files = [
        _render("fig1_scatter.svg.j2", out_dir / FIGURE_FILES[0],
                title=f"{dataset.name}: study estimates", panels=[_scatter_panel(result, dataset)]),
        _render("fig2_distances.svg.j2", out_dir / FIGURE_FILES[1],
                title="Relative distances and standardized residuals",
                panels=[_bar_panel(data, box) for data, box in zip(distance_panels(result), _grid_boxes(2, 5))]),
        _render("fig3_dauc.svg.j2", out_dir / FIGURE_FILES[2],
                title="Influence on the AUC", panels=[_dauc_panel(result)]),
        _render("fig4_sroc_panels.svg.j2", out_dir / FIGURE_FILES[3],
                title="SROC curves with and without flagged studies",
                panels=[_sroc_panel(title, box, result, dataset, ids)
                        for (title, ids), box in zip(sroc_panel_sets(result), _grid_boxes(2, 3))]),
    ]
    logger.info("Wrote %d figures to %s", len(files), out_dir)
    return files

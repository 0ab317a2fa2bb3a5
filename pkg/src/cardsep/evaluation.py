"""Component-level comparison against ground truth.

Predictions are matched to ground-truth regions greedily by descending
intersection-over-union. Counts follow the usual table: truth Text/pred Text
is a true positive, truth Graphics/pred Text a false positive, truth
Text/pred Graphics a false negative and truth Graphics/pred Graphics a true
negative. A prediction that matches nothing is compared against implicit
graphics (background texture, noise); a text truth that nothing matches is a
false negative. A graphics truth that nothing matches was removed along with
the background and is not counted.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from typing import Iterable, Sequence

from cardsep.components import (
    ClassifiedComponent,
    ClassifierParams,
    Label,
    SeparationResult,
    separate_text_graphics,
)
from cardsep.errors import ConfigError, RegionsParseError
from cardsep.raster import GrayImage, Rect


@dataclass(frozen=True)
class GroundTruthRegion:
    label: Label
    bbox: Rect


@dataclass(frozen=True)
class Prediction:
    label: Label
    bbox: Rect


@dataclass(frozen=True)
class ConfusionCounts:
    tp: int = 0
    fp: int = 0
    tn: int = 0
    fn: int = 0

    def __post_init__(self):
        if min(self.tp, self.fp, self.tn, self.fn) < 0:
            raise ValueError("confusion counts must be non-negative")

    def __add__(self, other: ConfusionCounts) -> ConfusionCounts:
        return ConfusionCounts(self.tp + other.tp, self.fp + other.fp,
                               self.tn + other.tn, self.fn + other.fn)

    @property
    def fpr(self) -> float | None:
        d = self.fp + self.tn
        return self.fp / d if d else None

    @property
    def tpr(self) -> float | None:
        d = self.tp + self.fn
        return self.tp / d if d else None


@dataclass(frozen=True)
class Metrics:
    """Recall, precision and accuracy; None where the denominator is zero."""

    recall: float | None
    precision: float | None
    accuracy: float | None


def metrics(c: ConfusionCounts) -> Metrics:
    def ratio(num, den):
        return num / den if den else None

    return Metrics(
        recall=ratio(c.tp, c.tp + c.fn),
        precision=ratio(c.tp, c.tp + c.fp),
        accuracy=ratio(c.tp + c.tn, c.tp + c.fp + c.tn + c.fn),
    )


def predictions_of(result: SeparationResult | Iterable) -> list[Prediction]:
    items = result.components if isinstance(result, SeparationResult) else result
    out = []
    for item in items:
        if isinstance(item, ClassifiedComponent):
            out.append(Prediction(item.label, item.region_box))
        else:
            out.append(item)
    return out


def match_components(result, truth: Sequence[GroundTruthRegion], iou_min: float = 0.5) -> ConfusionCounts:
    if not 0 < iou_min <= 1:
        raise ConfigError(f"iou_min must lie in (0, 1], got {iou_min}")
    preds = predictions_of(result)

    candidates = []
    for i, p in enumerate(preds):
        for j, t in enumerate(truth):
            iou = p.bbox.iou(t.bbox)
            if iou >= iou_min:
                candidates.append((-iou, i, j))
    candidates.sort()

    pred_match: dict[int, int] = {}
    truth_used = set()
    for _, i, j in candidates:
        if i not in pred_match and j not in truth_used:
            pred_match[i] = j
            truth_used.add(j)

    tp = fp = tn = fn = 0
    for i, p in enumerate(preds):
        truth_label = truth[pred_match[i]].label if i in pred_match else Label.GRAPHICS
        if truth_label is Label.TEXT:
            if p.label is Label.TEXT:
                tp += 1
            else:
                fn += 1
        elif p.label is Label.TEXT:
            fp += 1
        else:
            tn += 1
    fn += sum(1 for j, t in enumerate(truth) if t.label is Label.TEXT and j not in truth_used)
    return ConfusionCounts(tp, fp, tn, fn)


def roc_sweep(image: GrayImage, truth: Sequence[GroundTruthRegion], param_grid: Sequence[ClassifierParams],
              config=None) -> list[tuple[float, float]]:
    """(fpr, tpr) for each classifier setting, sorted by fpr then tpr.

    Background elimination runs once; separation is rerun per setting.
    Undefined rates (no graphics or no text at all) are reported as 0.
    """
    from cardsep.pipeline import PipelineConfig, eliminate

    if not param_grid:
        raise ConfigError("roc_sweep needs at least one parameter setting")
    config = config or PipelineConfig()
    background, mask = eliminate(image, config)
    points = []
    for params in param_grid:
        sep = separate_text_graphics(background, mask, params, config.pixel_thresholds())
        c = match_components(sep, truth, config.iou_min)
        points.append((c.fpr or 0.0, c.tpr or 0.0))
    return sorted(points)


# ---------------------------------------------------------------------------
# Region files: one "label x y w h [angle [confidence]]" per line
# ---------------------------------------------------------------------------

_LABELS = {"T": Label.TEXT, "G": Label.GRAPHICS}


def parse_regions(text: str) -> list[Prediction]:
    regions = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) < 5 or len(parts) > 7:
            raise RegionsParseError(lineno, f"expected 'label x y w h [angle [confidence]]', got {raw!r}")
        if parts[0] not in _LABELS:
            raise RegionsParseError(lineno, f"unknown label {parts[0]!r}")
        try:
            x, y, w, h = (int(v) for v in parts[1:5])
            if len(parts) > 5:
                float(parts[5])
        except ValueError:
            raise RegionsParseError(lineno, f"non-numeric field in {raw!r}") from None
        if x < 0 or y < 0 or w < 1 or h < 1:
            raise RegionsParseError(lineno, f"invalid box {x} {y} {w} {h}")
        regions.append(Prediction(_LABELS[parts[0]], Rect(x, y, w, h)))
    return regions


def parse_truth(text: str) -> list[GroundTruthRegion]:
    return [GroundTruthRegion(p.label, p.bbox) for p in parse_regions(text)]


def format_truth(truth: Iterable[GroundTruthRegion]) -> str:
    lines = ["# label x y w h"]
    for t in truth:
        b = t.bbox
        lines.append(f"{t.label.value} {b.x} {b.y} {b.w} {b.h}")
    return "\n".join(lines) + "\n"


METRICS_HEADER = ["image", "tp", "fp", "tn", "fn", "recall", "precision", "accuracy"]


def _fmt(v: float | None) -> str:
    return "" if v is None else f"{v:.4f}"


def metrics_csv(rows: Iterable[tuple[str, ConfusionCounts]]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(METRICS_HEADER)
    for name, c in rows:
        m = metrics(c)
        writer.writerow([name, c.tp, c.fp, c.tn, c.fn, _fmt(m.recall), _fmt(m.precision), _fmt(m.accuracy)])
    return buf.getvalue()


def roc_csv(points: Iterable[tuple[float, float]]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["fpr", "tpr"])
    for fpr, tpr in points:
        writer.writerow([f"{fpr:.4f}", f"{tpr:.4f}"])
    return buf.getvalue()

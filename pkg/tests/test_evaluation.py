import pytest

from cardsep.components import ClassifierParams, Label
from cardsep.errors import ConfigError, RegionsParseError
from cardsep.evaluation import (
    ConfusionCounts,
    GroundTruthRegion,
    Prediction,
    format_truth,
    match_components,
    metrics,
    metrics_csv,
    parse_regions,
    parse_truth,
    roc_csv,
    roc_sweep,
)
from cardsep.raster import Rect
from cardsep.synth import SynthCardSpec, generate_card

T, G = Label.TEXT, Label.GRAPHICS


def boxes(n, y=0):
    return [Rect(20 * k, y, 10, 10) for k in range(n)]


def test_perfect_match():
    truth = [GroundTruthRegion(T, b) for b in boxes(3)] + [GroundTruthRegion(G, b) for b in boxes(2, 50)]
    preds = [Prediction(t.label, t.bbox) for t in truth]
    assert match_components(preds, truth) == ConfusionCounts(3, 0, 2, 0)


def test_total_miss():
    assert match_components([], [GroundTruthRegion(T, Rect(0, 0, 5, 5))]) == ConfusionCounts(0, 0, 0, 1)


def test_mixed_tally():
    t1, t2, t3, g1 = boxes(4)
    truth = [GroundTruthRegion(T, t1), GroundTruthRegion(T, t2), GroundTruthRegion(T, t3), GroundTruthRegion(G, g1)]
    preds = [Prediction(T, t1), Prediction(T, t2), Prediction(T, g1)]
    assert match_components(preds, truth) == ConfusionCounts(2, 1, 0, 1)


def test_unmatched_predictions_count_against_graphics():
    truth = [GroundTruthRegion(T, Rect(0, 0, 10, 10))]
    preds = [Prediction(T, Rect(100, 100, 5, 5)), Prediction(G, Rect(200, 0, 5, 5))]
    assert match_components(preds, truth) == ConfusionCounts(0, 1, 1, 1)


def test_iou_threshold():
    truth = [GroundTruthRegion(T, Rect(0, 0, 10, 10))]
    shifted = [Prediction(T, Rect(4, 0, 10, 10))]  # IoU 60/140
    assert match_components(shifted, truth).tp == 0
    assert match_components(shifted, truth, iou_min=0.4).tp == 1
    for bad in (0, 1.5, -0.1):
        with pytest.raises(ConfigError):
            match_components(shifted, truth, bad)


def test_each_truth_matched_once():
    truth = [GroundTruthRegion(T, Rect(0, 0, 10, 10))]
    preds = [Prediction(T, Rect(0, 0, 10, 10)), Prediction(T, Rect(1, 0, 10, 10))]
    assert match_components(preds, truth) == ConfusionCounts(1, 1, 0, 0)


@pytest.mark.parametrize("counts, expected", [
    ((5, 0, 0, 0), (1, 1, 1)),
    ((3, 0, 0, 1), (0.75, 1, 0.75)),
    ((56, 2, 40, 1), (56 / 57, 56 / 58, 96 / 99)),
])
def test_metrics(counts, expected):
    m = metrics(ConfusionCounts(*counts))
    assert (m.recall, m.precision, m.accuracy) == expected


def test_metrics_rounded_values():
    m = metrics(ConfusionCounts(56, 2, 40, 1))
    assert [round(v, 4) for v in (m.recall, m.precision, m.accuracy)] == [0.9825, 0.9655, 0.9697]


def test_metrics_undefined():
    m = metrics(ConfusionCounts())
    assert m == metrics(ConfusionCounts(0, 0, 0, 0))
    assert (m.recall, m.precision, m.accuracy) == (None, None, None)
    assert metrics(ConfusionCounts(0, 0, 3, 0)).recall is None


def test_counts_add():
    assert ConfusionCounts(1, 2, 3, 4) + ConfusionCounts(1, 1, 1, 1) == ConfusionCounts(2, 3, 4, 5)
    with pytest.raises(ValueError):
        ConfusionCounts(-1, 0, 0, 0)


REJECT_ALL = ClassifierParams(min_area=10**9)
ACCEPT_ALL = ClassifierParams(r_min=0, r_max=1e9, ra_min=-1, ra_max=101, min_area=0,
                              line_thickness=0, max_char_height=10**9)


@pytest.fixture(scope="module")
def card():
    return generate_card(SynthCardSpec(n_text_lines=3, seed=11))


def test_roc_extremes(card):
    img, truth = card
    assert any(t.label is G for t in truth)
    points = roc_sweep(img, truth, [REJECT_ALL, ACCEPT_ALL])
    assert points[0] == (0.0, 0.0)
    assert points[-1] == (1.0, 1.0)


def test_roc_sorted(card):
    img, truth = card
    grid = [ClassifierParams(r_max=r) for r in (2.0, 8.0, 32.0)]
    points = roc_sweep(img, truth, grid)
    assert len(points) == 3 and points == sorted(points)
    assert [p[1] for p in points] == sorted(p[1] for p in points)


def test_roc_needs_grid(card):
    with pytest.raises(ConfigError):
        roc_sweep(card[0], card[1], [])


def test_parse_regions():
    text = "# header\n\nT 1 2 3 4\nG 5 6 7 8 # rule\nT 0 0 9 9 -1.25 ok\n"
    regions = parse_regions(text)
    assert [(r.label, r.bbox) for r in regions] == [
        (T, Rect(1, 2, 3, 4)), (G, Rect(5, 6, 7, 8)), (T, Rect(0, 0, 9, 9))]


@pytest.mark.parametrize("line", ["X 1 1 1 1", "T 1 1 1", "T a 1 1 1", "T 1 1 0 1", "T 1 1 1 1 z"])
def test_parse_errors_name_line(line):
    text = "\n".join(["T 0 0 1 1"] * 6 + [line])
    with pytest.raises(RegionsParseError, match="line 7"):
        parse_truth(text)


def test_truth_roundtrip():
    truth = [GroundTruthRegion(T, Rect(1, 2, 3, 4)), GroundTruthRegion(G, Rect(0, 0, 1, 1))]
    assert parse_truth(format_truth(truth)) == truth


def test_csv_formats():
    text = metrics_csv([("a", ConfusionCounts(3, 0, 0, 1)), ("b", ConfusionCounts())])
    assert text.splitlines() == [
        "image,tp,fp,tn,fn,recall,precision,accuracy",
        "a,3,0,0,1,0.7500,1.0000,0.7500",
        "b,0,0,0,0,,,",
    ]
    assert roc_csv([(0, 0), (0.5, 1)]) == "fpr,tpr\n0.0000,0.0000\n0.5000,1.0000\n"

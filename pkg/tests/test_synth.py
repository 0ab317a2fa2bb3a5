import numpy as np
import pytest

from cardsep.components import Label
from cardsep.pipeline import estimate_region_skew, region_image, run_pipeline
from cardsep.synth import SynthCardSpec, card_suite, generate_card, text_line_region


def test_deterministic():
    a_img, a_truth = generate_card(SynthCardSpec(seed=1))
    b_img, b_truth = generate_card(SynthCardSpec(seed=1))
    assert a_img == b_img and a_truth == b_truth
    c_img, _ = generate_card(SynthCardSpec(seed=2))
    assert c_img != a_img


def test_truth_counts():
    _, truth = generate_card(SynthCardSpec(n_text_lines=2, include_logo=True, include_lines=False, seed=3))
    assert sorted(t.label.value for t in truth) == ["G", "T", "T"]


def test_regions_do_not_crowd():
    _, truth = generate_card(SynthCardSpec(n_text_lines=5, seed=8))
    for i, a in enumerate(truth):
        for b in truth[i + 1:]:
            assert a.bbox.intersection(b.bbox) == 0


def test_ten_degree_line_recovered():
    img, truth = generate_card(SynthCardSpec(n_text_lines=1, skew_per_line=(10.0,), include_logo=False,
                                             include_lines=False, seed=4))
    result = run_pipeline(img)
    (region,) = result.regions
    est = estimate_region_skew(region_image(result.text_image, region.item))
    assert abs(est.angle - 10) <= 1.5


def test_glyph_boxes_have_gaps():
    region = text_line_region(0, seed=1).array
    ink_cols = (region < 128).any(axis=0)
    cols = np.flatnonzero(ink_cols)
    assert not ink_cols[cols[0]:cols[-1] + 1].all()


@pytest.mark.parametrize("kwargs", [
    {"background": 100},
    {"width": 10},
    {"n_text_lines": 2, "skew_per_line": (1.0, 2.0, 3.0)},
    {"skew_per_line": (45.0,)},
])
def test_invalid_specs(kwargs):
    with pytest.raises(ValueError):
        SynthCardSpec(**kwargs)


def test_suite_is_varied():
    specs = card_suite(20, seed=0)
    assert len({s.seed for s in specs}) == 20
    assert {s.include_logo for s in specs} == {True, False}


def test_text_truth_is_text():
    _, truth = generate_card(SynthCardSpec(n_text_lines=3, seed=9))
    assert sum(t.label is Label.TEXT for t in truth) == 3

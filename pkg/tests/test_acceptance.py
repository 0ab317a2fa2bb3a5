"""Acceptance criteria, one test each; every test logs a PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py`` (lines appear in the summary)
or ``python tests/test_acceptance.py``.
"""

import statistics
import time
from fractions import Fraction

import numpy as np

from acceptance_log import report
from oracles import flood_fill_components, threshold_oracle

from cardsep.background import ThresholdParams, adaptive_threshold
from cardsep.components import ClassifierParams, label_components
from cardsep.evaluation import ConfusionCounts, match_components, metrics, roc_sweep
from cardsep.pipeline import PipelineConfig, bench, estimate_region_skew, run_pipeline
from cardsep.skew import BottomProfile, deskew_region, profile_stats
from cardsep.synth import SynthCardSpec, card_suite, generate_card, text_line_region


def test_1_threshold_sweep():
    t0 = time.perf_counter()
    p = ThresholdParams(t_fixed=20, lam=100)
    scalar = [g for g in range(256) if adaptive_threshold(g, p) != threshold_oracle(g)]
    vector = adaptive_threshold(np.arange(256), p).tolist()
    mismatches = len(scalar) + sum(v != threshold_oracle(g) for g, v in enumerate(vector))
    hand = [adaptive_threshold(g, p) for g in (100, 110, 150)] == [20, 20, 80]
    dt = time.perf_counter() - t0
    ok = mismatches == 0 and hand and dt < 1
    report(1, "block threshold sweep", ok, f"{mismatches} mismatches over g_min 0..255, {dt:.3f} s")
    assert ok


def test_2_labeling_matches_flood_fill():
    t0 = time.perf_counter()
    rng = np.random.default_rng(2024)
    failures = 0
    for _ in range(500):
        h, w = rng.integers(1, 65, size=2)
        fg = rng.random((h, w)) < rng.uniform(0.2, 0.7)
        _, comps = label_components(fg)
        got = {(frozenset(c.pixels()), (c.bbox.x, c.bbox.y, c.bbox.w, c.bbox.h)) for c in comps}
        failures += got != flood_fill_components(fg.tolist())
    dt = time.perf_counter() - t0
    ok = failures == 0 and dt < 10
    report(2, "region growing vs flood fill", ok, f"{failures}/500 images differ, {dt:.2f} s")
    assert ok


def test_3_skew_recovery():
    t0 = time.perf_counter()
    errors, residuals = [], []
    for angle in range(-15, 16):
        for seed in range(5):
            region = text_line_region(angle, seed)
            est = estimate_region_skew(region)
            errors.append(abs(est.angle - angle))
            after = estimate_region_skew(deskew_region(region, est))
            residuals.append(abs(after.angle))
    dt = time.perf_counter() - t0
    errors, residuals = np.array(errors), np.array(residuals)
    within_15 = float(np.mean(errors <= 1.5))
    within_3 = float(np.mean(errors <= 3))
    resid_ok = float(np.mean(residuals <= 1))
    ok = within_15 >= 0.9 and within_3 == 1 and resid_ok >= 0.9 and dt < 30
    report(3, "skew recovery", ok,
           f"{within_15:.1%} within 1.5 deg, {within_3:.1%} within 3 deg, "
           f"{resid_ok:.1%} residual <= 1 deg, max error {errors.max():.2f} deg, {dt:.1f} s")
    assert ok


def test_4_separation_quality():
    t0 = time.perf_counter()
    total = ConfusionCounts()
    for spec in card_suite(50, seed=0):
        img, truth = generate_card(spec)
        total = total + match_components(run_pipeline(img).separation, truth)
    dt = time.perf_counter() - t0
    m = metrics(total)
    ok = m.recall >= 0.95 and m.precision >= 0.90 and dt < 60
    report(4, "50-card separation", ok,
           f"R={m.recall:.4f} P={m.precision:.4f} A={m.accuracy:.4f} "
           f"(tp={total.tp} fp={total.fp} tn={total.tn} fn={total.fn}), {dt:.1f} s")
    assert ok


def test_5_unit_exactness():
    t0 = time.perf_counter()

    def prof(heights):
        return BottomProfile(np.array(heights), np.ones(len(heights), bool))

    stats = [profile_stats(prof(h)) for h in ([10, 10, 10, 10], [2, 4, 6, 8], [0, 0, 0, 12])]
    stats_ok = stats == [(10, 0), (5, 2), (3, Fraction(9, 2))]

    cases = [((5, 0, 0, 0), (1, 1, 1)), ((3, 0, 0, 1), (Fraction(3, 4), 1, Fraction(3, 4))),
             ((56, 2, 40, 1), (Fraction(56, 57), Fraction(56, 58), Fraction(96, 99)))]
    metrics_ok = True
    for counts, expected in cases:
        m = metrics(ConfusionCounts(*counts))
        metrics_ok &= all(got == float(exp) for got, exp in zip((m.recall, m.precision, m.accuracy), expected))
    dt = time.perf_counter() - t0
    ok = stats_ok and metrics_ok and dt < 1
    report(5, "profile stats and metrics exactness", ok, f"stats {stats_ok}, metrics {metrics_ok}, {dt:.3f} s")
    assert ok


def test_6_roc_sanity():
    t0 = time.perf_counter()
    img, truth = generate_card(SynthCardSpec(n_text_lines=4, seed=6))
    grid = [
        ClassifierParams(min_area=10**9),
        ClassifierParams(r_max=2.0),
        ClassifierParams(),
        ClassifierParams(ra_max=99.9),
        ClassifierParams(r_min=0, r_max=1e9, ra_min=-1, ra_max=101, min_area=0,
                         line_thickness=0, max_char_height=10**9),
    ]
    points = roc_sweep(img, truth, grid)
    dt = time.perf_counter() - t0
    monotone = all(a[1] <= b[1] for a, b in zip(points, points[1:]))
    has_origin = (0.0, 0.0) in points
    has_right = any(fpr == 1.0 for fpr, _ in points)
    ok = monotone and has_origin and has_right and points == sorted(points) and dt < 10
    shown = " ".join(f"({f:.2f},{t:.2f})" for f, t in points)
    report(6, "ROC sweep", ok, f"{shown}, {dt:.2f} s")
    assert ok


def test_7_performance_envelope():
    img, _ = generate_card(SynthCardSpec(seed=7))
    r = bench(img, repetitions=5)
    shares = []
    for spec in card_suite(10, seed=1):
        t = run_pipeline(generate_card(spec)[0]).timings_ms
        shares.append(t["skew"] / t["total"])
    share = statistics.median(shares)
    ok = r.total_ms <= 500 and r.peak_bytes <= 16 * 2**20 and share <= 0.35
    report(7, "performance at 1024x768", ok,
           f"median total {r.total_ms:.1f} ms (bg {r.bg_ms:.1f}, cc {r.cc_ms:.1f}, skew {r.skew_ms:.1f}), "
           f"peak {r.peak_bytes / 2**20:.2f} MiB, skew share {share:.1%}")
    assert ok


def test_8_mode_equivalence():
    t0 = time.perf_counter()
    as_float, as_int = PipelineConfig(), PipelineConfig(mode="integer")
    label_diffs, worst = 0, 0.0
    for spec in card_suite(50, seed=0):
        img, _ = generate_card(spec)
        a, b = run_pipeline(img, as_float), run_pipeline(img, as_int)
        label_diffs += [c.label for c in a.separation.components] != [c.label for c in b.separation.components]
        for x, y in zip(a.regions, b.regions):
            worst = max(worst, abs(x.angle - y.angle))
    dt = time.perf_counter() - t0
    ok = label_diffs == 0 and worst <= 0.1 and dt < 60
    report(8, "integer vs float mode", ok, f"{label_diffs} cards with label changes, "
                                           f"max angle gap {worst:.2e} deg, {dt:.1f} s")
    assert ok


if __name__ == "__main__":
    import sys

    failed = 0
    for name, fn in sorted(globals().items()):
        if name.startswith("test_") and callable(fn):
            try:
                fn()
            except AssertionError:
                failed += 1
    sys.exit(1 if failed else 0)

"""Command-line front end: ``cardsep {separate,evaluate,bench,synth}``.

Exit status is 0 on success, 2 when an input file cannot be read and 3 for
a bad configuration, spec or region/truth file.
"""

from __future__ import annotations

import argparse
import dataclasses
import sys
from pathlib import Path

from cardsep.errors import ConfigError, PgmFormatError, RegionsParseError
from cardsep.evaluation import format_truth, match_components, metrics, metrics_csv, parse_regions, parse_truth
from cardsep.pipeline import BENCH_HEADER, MODES, PipelineConfig, bench, run_pipeline, write_outputs
from cardsep.raster import GrayImage, read_pgm, write_pgm
from cardsep.synth import SynthCardSpec, generate_card

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_CONFIG = 3


class CliError(Exception):
    def __init__(self, status: int, message: str):
        super().__init__(message)
        self.status = status


def _load_config(args) -> PipelineConfig:
    try:
        config = PipelineConfig.load(args.config) if args.config else PipelineConfig()
        if args.mode:
            config = dataclasses.replace(config, mode=args.mode)
    except OSError as e:
        raise CliError(EXIT_CONFIG, f"cannot read config: {e}") from None
    except ConfigError as e:
        raise CliError(EXIT_CONFIG, f"bad config {args.config}: {e}") from None
    return config


def _load_image(path) -> GrayImage:
    try:
        return read_pgm(path)
    except (OSError, PgmFormatError) as e:
        raise CliError(EXIT_INPUT, f"cannot read {path}: {e}") from None


def _read_text(path, status=EXIT_INPUT) -> str:
    try:
        return Path(path).read_text()
    except (OSError, UnicodeDecodeError) as e:
        raise CliError(status, f"cannot read {path}: {e}") from None


def cmd_separate(args) -> int:
    config = _load_config(args)
    img = _load_image(args.input)
    result = run_pipeline(img, config)
    write_outputs(result, args.out)
    print(f"{len(result.separation.components)} components, {len(result.regions)} text, written to {args.out}")
    return EXIT_OK


def _parse(parser, path):
    try:
        return parser(_read_text(path))
    except RegionsParseError as e:
        raise CliError(EXIT_CONFIG, f"{path}: {e}") from None


def cmd_evaluate(args) -> int:
    results = Path(args.results)
    regions_path = results / "regions.txt" if results.is_dir() else results
    preds = _parse(parse_regions, regions_path)
    truth = _parse(parse_truth, args.truth)
    iou_min = _load_config(args).iou_min
    counts = match_components(preds, truth, iou_min)
    m = metrics(counts)
    print(" ".join("n/a" if v is None else f"{v:.4f}" for v in (m.recall, m.precision, m.accuracy)))
    name = results.name if results.is_dir() else results.stem
    Path(args.out).write_text(metrics_csv([(name, counts)]))
    return EXIT_OK


def cmd_bench(args) -> int:
    config = _load_config(args)
    img = _load_image(args.input)
    if args.reps < 1:
        raise CliError(EXIT_CONFIG, f"--reps must be >= 1, got {args.reps}")
    report = bench(img, config, args.reps)
    print(",".join(BENCH_HEADER))
    print(report.csv_row())
    return EXIT_OK


_SPEC_BOOLS = {"include_logo", "include_lines", "texture"}
_SPEC_FLOATS = {"max_skew"}


def parse_synth_spec(text: str) -> dict:
    """``key = value`` lines naming SynthCardSpec fields; skew_per_line is comma separated."""
    names = {f.name for f in dataclasses.fields(SynthCardSpec)}
    values = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = (s.strip() for s in line.partition("="))
        if not sep or key not in names:
            raise ConfigError(f"line {lineno}: expected a spec field as 'key = value', got {raw!r}")
        try:
            if key == "skew_per_line":
                values[key] = tuple(float(v) for v in value.replace("[", "").replace("]", "").split(",") if v.strip())
            elif key in _SPEC_BOOLS:
                if value.lower() not in ("true", "false", "1", "0", "yes", "no"):
                    raise ValueError(value)
                values[key] = value.lower() in ("true", "1", "yes")
            elif key in _SPEC_FLOATS:
                values[key] = float(value)
            else:
                values[key] = int(value)
        except ValueError:
            raise ConfigError(f"line {lineno}: bad value {value!r} for {key}") from None
    return values


def cmd_synth(args) -> int:
    values = {}
    try:
        if args.spec:
            values = parse_synth_spec(_read_text(args.spec, EXIT_CONFIG))
        for key in ("width", "height", "n_text_lines", "background"):
            if getattr(args, key) is not None:
                values[key] = getattr(args, key)
        if args.skew is not None:
            values["skew_per_line"] = tuple(args.skew)
        if args.no_logo:
            values["include_logo"] = False
        if args.no_lines:
            values["include_lines"] = False
        if args.no_texture:
            values["texture"] = False
        if args.seed is not None:
            values["seed"] = args.seed
        spec = SynthCardSpec(**values)
    except (ConfigError, ValueError, TypeError) as e:
        raise CliError(EXIT_CONFIG, f"invalid spec: {e}") from None
    img, truth = generate_card(spec)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_pgm(out / "card.pgm", img)
    (out / "card.truth").write_text(format_truth(truth))
    print(f"{spec.width}x{spec.height} card with {len(truth)} regions written to {out}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cardsep", description="Business card text/graphics separation and skew correction")
    sub = parser.add_subparsers(dest="command", required=True)

    def pipeline_flags(p):
        p.add_argument("--config", help="key = value configuration file")
        p.add_argument("--mode", choices=MODES, help="arithmetic mode, overrides the config")

    p = sub.add_parser("separate", help="run the pipeline on one PGM card")
    p.add_argument("input")
    p.add_argument("--out", default="out", help="output directory (default: out)")
    pipeline_flags(p)
    p.set_defaults(func=cmd_separate)

    p = sub.add_parser("evaluate", help="score a regions file against ground truth")
    p.add_argument("results", help="regions file, or a directory holding regions.txt")
    p.add_argument("truth")
    p.add_argument("--out", default="metrics.csv", help="metrics CSV path (default: metrics.csv)")
    pipeline_flags(p)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("bench", help="time the pipeline stages and measure peak memory")
    p.add_argument("input")
    p.add_argument("--reps", type=int, default=5)
    pipeline_flags(p)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("synth", help="generate a synthetic card and its ground truth")
    p.add_argument("spec", nargs="?", help="optional key = value spec file")
    p.add_argument("--seed", type=int)
    p.add_argument("--out", default="synth", help="output directory (default: synth)")
    p.add_argument("--width", type=int)
    p.add_argument("--height", type=int)
    p.add_argument("--lines", dest="n_text_lines", type=int)
    p.add_argument("--skew", type=float, nargs="+", help="one angle for all lines, or one per line")
    p.add_argument("--background", type=int)
    p.add_argument("--no-logo", action="store_true")
    p.add_argument("--no-lines", action="store_true")
    p.add_argument("--no-texture", action="store_true")
    p.set_defaults(func=cmd_synth)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except CliError as e:
        print(f"cardsep: {e}", file=sys.stderr)
        return e.status


if __name__ == "__main__":
    sys.exit(main())

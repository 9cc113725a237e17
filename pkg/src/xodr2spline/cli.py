"""Command line entry point: ``xodr2spline convert`` and ``xodr2spline synth``."""

from __future__ import annotations

import argparse
import logging
import sys

from .batch import BatchOptions, convert_batch
from .converter import ConversionConfig, parse_sampling
from .ingest import DEFAULT_JSON_POINTER
from .resim import VehicleConfig

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_STRICT = 2

log = logging.getLogger("xodr2spline")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _sampling(value: str) -> str:
    try:
        parse_sampling(value)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None
    return value


def _alpha(value: str) -> float:
    a = float(value)
    if not 0.0 <= a <= 1.0:
        raise argparse.ArgumentTypeError("alpha must lie in [0, 1]")
    return a


def _positive_int(value: str) -> int:
    n = int(value)
    if n < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return n


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="xodr2spline", description="Convert OpenDRIVE roads to Catmull-Rom splines.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    conv = sub.add_parser("convert", help="convert a scenario file or directory")
    conv.add_argument("--input", required=True, help="scenario file or directory (.xodr / .json)")
    conv.add_argument("--output", required=True, help="output directory")
    conv.add_argument("--side", choices=("left", "right", "both"), default="both",
                      help="boundary used for control points; both averages them into the centerline")
    conv.add_argument("--alpha", type=_alpha, default=0.5)
    conv.add_argument("--points-per-segment", type=_positive_int, default=1)
    conv.add_argument("--sampling", type=_sampling, default="starts", help="starts | step:<metres>")
    conv.add_argument("--json-pointer", default=DEFAULT_JSON_POINTER)
    conv.add_argument("--pairing", choices=("nearest", "index"), default="nearest")
    conv.add_argument("--lanes", choices=("all", "driving"), default="all")
    conv.add_argument("--validate", action="store_true")
    conv.add_argument("--resim", action="store_true", help="re-simulate valid roads (implies --validate)")
    conv.add_argument("--lane", choices=("center", "right"), default="center")
    conv.add_argument("--jobs", type=_positive_int, default=1)
    conv.add_argument("--strict", action="store_true", help="exit 2 if any road fails to convert")
    conv.add_argument("--figures", action="store_true", help="also write matplotlib PNG figures")

    synth = sub.add_parser("synth", help="write a synthetic .xodr corpus")
    synth.add_argument("--output", required=True)
    synth.add_argument("--count", type=_positive_int, default=100)
    synth.add_argument("--seed", type=int, default=0)
    synth.add_argument("--campaigns", type=_positive_int, default=1)
    return parser


def _convert(args) -> int:
    opts = BatchOptions(
        config=ConversionConfig(
            alpha=args.alpha,
            points_per_segment=args.points_per_segment,
            sampling=args.sampling,
            lanes=args.lanes,
            side=args.side,
        ),
        json_pointer=args.json_pointer,
        pairing=args.pairing,
        validate=args.validate or args.resim,
        resim=args.resim,
        lane=args.lane,
        vehicle=VehicleConfig(),
        figures=args.figures,
        jobs=args.jobs,
    )
    try:
        summaries, records = convert_batch(args.input, args.output, opts)
    except FileNotFoundError as exc:
        log.error("%s", exc)
        return EXIT_USAGE
    for rec in records:
        if not rec.converted:
            log.warning("%s/%s: %s: %s", rec.campaign, rec.road_id, *rec.error)
    for s in summaries:
        pct = "-" if s.pass_percent is None else f"{s.pass_percent:.2f}"
        print(
            f"{s.campaign_id}: total={s.total} converted={s.converted} errors={s.conversion_errors} "
            f"valid={s.valid} pass={s.sim_pass} fail={s.sim_fail} pass%={pct} wall={s.wall_time:.2f}s"
        )
    failed = sum(s.conversion_errors for s in summaries)
    return EXIT_STRICT if args.strict and failed else EXIT_OK


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    if args.command == "convert":
        return _convert(args)
    from .synth import write_corpus

    paths = write_corpus(args.output, args.count, args.seed, args.campaigns)
    print(f"wrote {len(paths)} roads to {args.output}")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())

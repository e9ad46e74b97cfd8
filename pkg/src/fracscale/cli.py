"""Command-line interface: ``fracscale {scale,kernels,bench}``."""
from __future__ import annotations

import argparse
import csv
import io
import math
import statistics
import sys
from fractions import Fraction

import numpy as np

from .fcfs import ScaleJob, output_shape, scale
from .imageio import ImageError, from_tensor, read_image, to_tensor, write_image
from .kernels import Interpolation, RationalScale, build_bank
from .metrics import CSV_HEADER, SSIM_DESCRIPTION, compare
from .tensor import PadMode

DOWN_FACTORS = ("2/11", "1/4", "1/2", "2/3", "5/6", "10/11")
UP_FACTORS = ("11/10", "6/5", "3/2", "2/1", "27/11", "4/1")
DEFAULT_FACTORS = DOWN_FACTORS + UP_FACTORS
METHODS = [m.value for m in Interpolation]

BENCH_EPILOG = f"""\
CSV columns: {",".join(CSV_HEADER)}
  factor      scale factor r/s (both image axes)
  method      nearest | bilinear | bicubic
  height,width  input size in pixels
  psnr_db     PSNR between FCFS and oracle outputs (max 255), "inf" when identical
  ssim        SSIM between the two outputs
  t_fcfs_s, t_oracle_s  median wall time over --reps runs, after one warm-up run
{SSIM_DESCRIPTION}
"""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def parse_factors(text: str, ndim: int) -> tuple[RationalScale, ...]:
    """``"r/s"`` applies to every dim; ``"rh/sh,rw/sw"`` gives one per dim."""
    parts = [RationalScale.parse(p) for p in text.split(",")]
    if len(parts) == 1:
        return tuple(parts) * ndim
    if len(parts) != ndim:
        raise ValueError(f"factor {text!r} has {len(parts)} entries for {ndim} dims")
    return tuple(parts)


def make_test_pattern(size: int) -> np.ndarray:
    """Radial gradient plus an 8-pixel checkerboard, values in [0, 255]."""
    y, x = np.mgrid[0:size, 0:size].astype(np.float64)
    c = (size - 1) / 2.0
    radius = np.hypot(y - c, x - c) / max(np.hypot(c, c), 1.0)
    checker = ((y // 8 + x // 8) % 2) * 2.0 - 1.0
    return np.clip(200.0 * (1.0 - radius) + 40.0 * checker + 27.5, 0.0, 255.0)


def cmd_scale(args) -> int:
    img = read_image(args.input)
    pixels = to_tensor(img)
    spatial = pixels.shape[:2]
    job = ScaleJob(parse_factors(args.factor, 2), args.method, args.padding)
    if pixels.ndim == 2:
        out = scale(pixels, job)
    else:
        out = np.stack([scale(pixels[:, :, c], job) for c in range(pixels.shape[2])], axis=2)
    write_image(from_tensor(out), args.output)
    print(f"{tuple(spatial)} -> {output_shape(spatial, job.factors)}")
    return 0


def _parse_phase(text: str, bank) -> tuple[int, ...]:
    parts = [p.strip() for p in text.split(",")]
    if len(parts) == 1:
        parts *= bank.ndim
    if len(parts) != bank.ndim:
        raise ValueError(f"phase {text!r} needs {bank.ndim} entries")
    if any("/" in p for p in parts):
        return bank.phase_for_fraction([Fraction(p) for p in parts])
    return tuple(int(p) for p in parts)


def cmd_kernels(args) -> int:
    bank = build_bank(parse_factors(args.factor, args.rank), args.method)
    if args.phase is not None:
        phase = _parse_phase(args.phase, bank)
        start, extent = {"nearest": (0, 2), "bilinear": (0, 2), "bicubic": (-1, 4)}[args.method]
        box = bank.window(phase, (start,) * bank.ndim, (extent,) * bank.ndim)
        print(f"# phase {phase}, box starts {start} px from the floor pixel")
        np.savetxt(sys.stdout, np.atleast_2d(box), fmt="%.2f")
        return 0
    text = bank.to_json(indent=1)
    if args.dump_kernels in (None, "-"):
        print(text)
    else:
        with open(args.dump_kernels, "w") as fh:
            fh.write(text + "\n")
        print(f"wrote {len(bank.kernels)} kernels to {args.dump_kernels}", file=sys.stderr)
    return 0


def cmd_bench(args) -> int:
    sizes = [int(s) for s in args.sizes.split(",")]
    factors = [RationalScale.parse(f) for f in args.factors]
    methods = METHODS if args.method == "all" else [args.method]
    if any(n < 1 for n in sizes) or args.reps < 1:
        raise ValueError("sizes and --reps must be positive")

    reports = []
    for n in sizes:
        x = make_test_pattern(n)
        for f in factors:
            for m in methods:
                job = ScaleJob.uniform(f, 2, m, args.padding)
                reports.append(compare(x, job, reps=args.reps, max_value=255.0))

    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for rep in reports:
        writer.writerow(rep.csv_row())
    if args.csv in (None, "-"):
        sys.stdout.write(buf.getvalue())
        table_out = sys.stderr
    else:
        with open(args.csv, "w", newline="") as fh:
            fh.write(buf.getvalue())
        table_out = sys.stdout

    print(f"# {SSIM_DESCRIPTION}", file=table_out)
    print(f"# baseline: in-repo direct-gather oracle; reps={args.reps}", file=table_out)
    print(f"{'size':>5} {'factor':>6} {'method':>8} {'psnr_db':>8} {'ssim':>14} "
          f"{'fcfs_ms':>9} {'oracle_ms':>9}", file=table_out)
    for rep in reports:
        print(f"{rep.in_shape[0]:>5} {rep.factor_string():>6} {str(rep.method):>8} "
              f"{rep.psnr_db:>8.1f} {rep.ssim:>14.12f} {rep.elapsed_fcfs_s * 1e3:>9.3f} "
              f"{rep.elapsed_oracle_s * 1e3:>9.3f}", file=table_out)
    ratio = statistics.median(r.elapsed_fcfs_s for r in reports) / statistics.median(
        r.elapsed_oracle_s for r in reports)
    print(f"# median fcfs/oracle time ratio: {ratio:.3f}", file=table_out)
    worst = max(r.max_abs_diff for r in reports)
    if not math.isfinite(worst) or worst > 1e-9:
        print(f"warning: FCFS and oracle differ by up to {worst:.3g}", file=sys.stderr)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="fracscale", description="Fully convolutional fractional image scaling.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(p, factor_required=True):
        p.add_argument("--method", choices=METHODS, default="bilinear")
        p.add_argument("--padding", choices=[m.value for m in PadMode], default="replicate")
        if factor_required:
            p.add_argument("--factor", required=True,
                           help='"r/s" for both axes or "rh/sh,rw/sw"')

    p = sub.add_parser("scale", help="resize a PNG/PGM/PPM image")
    common(p)
    p.add_argument("input")
    p.add_argument("output")
    p.set_defaults(func=cmd_scale)

    p = sub.add_parser("kernels", help="print the kernel bank for a factor")
    common(p)
    p.add_argument("--rank", type=int, choices=(1, 2, 3), default=2)
    p.add_argument("--dump-kernels", metavar="PATH", help='write bank JSON to PATH ("-" for stdout)')
    p.add_argument("--phase", help='phase indices "j1,j2" or offsets "1/3,1/3"; prints one kernel')
    p.set_defaults(func=cmd_kernels)

    p = sub.add_parser("bench", help="time FCFS against the oracle and score PSNR/SSIM",
                       epilog=BENCH_EPILOG, formatter_class=argparse.RawDescriptionHelpFormatter)
    p.add_argument("--method", choices=METHODS + ["all"], default="all")
    p.add_argument("--padding", choices=[m.value for m in PadMode], default="replicate")
    p.add_argument("--factors", nargs="+", default=list(DEFAULT_FACTORS), metavar="R/S")
    p.add_argument("--sizes", default="128", help="comma-separated square test-pattern sizes")
    p.add_argument("--reps", type=int, default=100)
    p.add_argument("--csv", help='CSV output path (default: stdout)')
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, ImageError, OSError) as e:
        print(f"fracscale: error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

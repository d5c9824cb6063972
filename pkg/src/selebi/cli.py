"""Command line front end.

The subcommands reuse the HTTP service's parameter model and the shared
CSV renderers, so a file processed from a shell and one posted to the
service come back byte-identical. stdout carries only requested
artifacts (the report JSON, CSV tables); everything else goes to stderr.

Exit codes: 0 on success, 2 when the input file or the parameters are
unusable, 3 when the planned grid has a frame with no dual window. The
exit-3 path writes the planned grid next to the output path so the
offending frame can be inspected without rerunning.
"""

import argparse
import json
import sys
from pathlib import Path

from . import __version__, dumps
from .evaluate import CASES, run_table, to_csv
from .gabor import FrameNotInvertibleError
from .pipeline import analyze, stretch
from .service.models import StretchParams
from .wavio import WavError, read_wav, write_wav

__all__ = ["main"]

EXIT_USAGE = 2
EXIT_NOT_INVERTIBLE = 3


def _log(message):
    print(message, file=sys.stderr)


def _params(args):
    return StretchParams(
        alpha=args.alpha,
        method=args.method,
        window_length=args.window_length,
        synthesis_hop=args.synthesis_hop,
        beta=args.beta,
        theta_mag=args.theta_mag,
        theta_p_low=args.theta_p_low,
        theta_p_high=args.theta_p_high,
        median_kernel=args.median_kernel,
        min_prominence=args.min_prominence,
        detect_channel=args.detect_channel,
    )


def _read(path):
    try:
        return read_wav(path)
    except OSError as err:
        raise WavError(f"cannot read {path}: {err}")


def cmd_stretch(args):
    try:
        samples, rate, encoding = _read(args.input)
        cfg = _params(args).to_config(rate)
    except (WavError, ValueError) as err:
        _log(f"error: {err}")
        return EXIT_USAGE
    try:
        out, report = stretch(
            samples, cfg, method=args.method, detect_channel=args.detect_channel
        )
    except FrameNotInvertibleError as err:
        grid_path = Path(args.output).with_suffix(".grid.csv")
        analysis = analyze(
            samples, cfg, method=args.method, detect_channel=args.detect_channel
        )
        grid_path.write_text(dumps.render("grid", analysis))
        _log(f"error: {err}")
        _log(f"planned grid written to {grid_path}")
        return EXIT_NOT_INVERTIBLE
    except ValueError as err:
        _log(f"error: {err}")
        return EXIT_USAGE
    try:
        clipped = write_wav(args.output, out, rate, encoding)
    except OSError as err:
        _log(f"error: cannot write {args.output}: {err}")
        return EXIT_USAGE
    if clipped:
        _log(f"warning: {clipped} samples clipped to full scale")
    if args.report:
        json.dump(report.to_dict(), sys.stdout, indent=2)
        sys.stdout.write("\n")
    return 0


def cmd_bench(args):
    try:
        results = run_table(
            methods=tuple(args.methods.split(",")),
            cases=tuple(args.cases.split(",")),
            alphas=tuple(float(a) for a in args.alphas.split(",")),
            fs=args.rate,
            duration=args.duration,
        )
    except ValueError as err:
        _log(f"error: {err}")
        return EXIT_USAGE
    table = to_csv(results)
    if args.out:
        try:
            Path(args.out).write_text(table)
        except OSError as err:
            _log(f"error: cannot write {args.out}: {err}")
            return EXIT_USAGE
    else:
        sys.stdout.write(table)
    return 0


def cmd_inspect(args):
    try:
        samples, rate, _ = _read(args.input)
        cfg = _params(args).to_config(rate)
        analysis = analyze(
            samples, cfg, method=args.method, detect_channel=args.detect_channel
        )
    except (WavError, ValueError) as err:
        _log(f"error: {err}")
        return EXIT_USAGE
    table = dumps.render(args.dump, analysis)
    if args.out:
        target = Path(args.out)
        try:
            target.mkdir(parents=True, exist_ok=True)
            (target / f"{args.dump}.csv").write_text(table)
        except OSError as err:
            _log(f"error: cannot write to {args.out}: {err}")
            return EXIT_USAGE
        _log(f"wrote {target / f'{args.dump}.csv'}")
    else:
        sys.stdout.write(table)
    return 0


def cmd_serve(args):
    import uvicorn

    from .service import create_app

    uvicorn.run(create_app(), host=args.host, port=args.port)
    return 0


def _add_stretch_options(parser):
    # Defaults mirror StretchParams; range checking happens in the core
    # config so the shell and the service reject identical inputs.
    parser.add_argument("--alpha", type=float, default=1.0,
                        help="stretch factor, at least 1 (default 1)")
    parser.add_argument("--method", choices=("pv", "selebi"), default="selebi",
                        help="uniform phase vocoder or event-adaptive grid")
    parser.add_argument("--window-length", type=int, default=2048,
                        help="analysis window length in samples")
    parser.add_argument("--synthesis-hop", type=int, default=128,
                        help="output hop in samples")
    parser.add_argument("--beta", type=float, default=4.0,
                        help="extra window compression at event centers")
    parser.add_argument("--theta-mag", type=float, default=0.01,
                        help="magnitude gate for the percussive mask")
    parser.add_argument("--theta-p-low", type=float, default=0.5,
                        help="lower phase-deviation bound of the mask band")
    parser.add_argument("--theta-p-high", type=float, default=0.75,
                        help="upper phase-deviation bound of the mask band")
    parser.add_argument("--median-kernel", type=int, default=5,
                        help="median filter width for the event curve")
    parser.add_argument("--min-prominence", type=float, default=0.1,
                        help="smallest curve prominence that counts as an event")
    parser.add_argument("--detect-channel", type=int, default=None,
                        help="detect events on this channel instead of the mixdown")


def _parser():
    parser = argparse.ArgumentParser(
        prog="selebi",
        description="Offline time stretching with event-adaptive analysis windows.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    commands = parser.add_subparsers(dest="command", required=True)

    p = commands.add_parser("stretch", help="stretch a WAV file")
    p.add_argument("input", help="input WAV path")
    p.add_argument("output", help="output WAV path")
    _add_stretch_options(p)
    p.add_argument("--report", action="store_true",
                   help="print the run report as JSON on stdout")
    p.set_defaults(func=cmd_stretch)

    p = commands.add_parser("bench", help="error table over synthetic cases")
    p.add_argument("--methods", default="pv,selebi",
                   help="comma-separated methods (default pv,selebi)")
    p.add_argument("--cases", default=",".join(CASES),
                   help="comma-separated case names (default all)")
    p.add_argument("--alphas", default="2,4",
                   help="comma-separated stretch factors (default 2,4)")
    p.add_argument("--rate", type=int, default=22050,
                   help="sample rate of the synthetic signals")
    p.add_argument("--duration", type=float, default=1.0,
                   help="duration of the synthetic signals in seconds")
    p.add_argument("--out", help="write the CSV here instead of stdout")
    p.set_defaults(func=cmd_bench)

    p = commands.add_parser("inspect", help="dump detection diagnostics as CSV")
    p.add_argument("input", help="input WAV path")
    _add_stretch_options(p)
    p.add_argument("--dump", choices=dumps.KINDS, default="events",
                   help="which diagnostic to emit")
    p.add_argument("--out", help="directory for the CSV instead of stdout")
    p.set_defaults(func=cmd_inspect)

    p = commands.add_parser("serve", help="run the HTTP service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv=None):
    args = _parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())

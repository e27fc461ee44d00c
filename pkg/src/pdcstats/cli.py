"""Command-line entry point.

    pdcstats simulate --config run.json --out hist.txt [--workers N]
    pdcstats analyze {klyshko,gamma,combined,lee,q} (--hist F | --joint F) [...]
    pdcstats report --joint F [--single F] --out report.json

Exit status: 0 on success, 1 on usage errors, 2 on data errors.
"""

from __future__ import annotations

import argparse
import csv
import sys
from pathlib import Path

from . import __version__
from .criteria import (
    combined,
    format_significance_table,
    gamma_wdsby,
    klyshko_k,
    lee_r_joint,
    mandel_q,
    significance_table,
)
from .io import load_config, parse_histogram, parse_joint_histogram, write_histogram
from .report import build_report, file_provenance, klyshko_csv
from .simulator import simulate

EXIT_OK, EXIT_USAGE, EXIT_DATA = 0, 1, 2

CSV_FIELDS = ["criterion", "index", "value", "threshold", "std_error", "significance", "violated", "status"]


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_help(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


def _nbar(text: str):
    if text == "estimate":
        return text
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a positive number or 'estimate', got {text!r}") from None
    if not value > 0:
        raise argparse.ArgumentTypeError("nbar must be positive")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="pdcstats", description="Photon-counting nonclassicality toolkit.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("simulate", help="run a Monte Carlo counting experiment")
    p.add_argument("--config", required=True, help="JSON file with ExperimentConfig fields")
    p.add_argument("--out", required=True, help="histogram file to write")
    p.add_argument("--workers", type=int, default=1, help="worker threads (output does not depend on it)")

    p = sub.add_parser("analyze", help="evaluate one criterion on a histogram")
    p.add_argument("criterion", choices=["klyshko", "gamma", "combined", "lee", "q"])
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--hist", help="single-beam histogram file")
    src.add_argument("--joint", help="joint histogram file (single-beam tests use the signal marginal)")
    p.add_argument("--n", type=int, nargs="+", help="photon numbers for klyshko (default: all)")
    p.add_argument("--n1", type=int, nargs="+", default=[1, 2, 3, 4], help="trigger counts for lee")
    p.add_argument("--n2", type=int, nargs="+", default=[1, 2, 3, 4], help="idler counts for lee")
    p.add_argument("--nbar", type=_nbar, default="estimate", help="trigger mean for lee, or 'estimate'")
    p.add_argument("--form", choices=["conditional", "joint"], default="conditional",
                   help="evaluate lee from heralded conditionals or directly on the joint table")
    p.add_argument("--table", action="store_true", help="print lee results as a grid instead of CSV")

    p = sub.add_parser("report", help="write a full JSON report and klyshko_kn.csv")
    p.add_argument("--joint", required=True, help="joint histogram file")
    p.add_argument("--single", help="separate single-beam histogram for the single-beam tests")
    p.add_argument("--out", required=True, help="JSON report path; klyshko_kn.csv goes alongside")
    p.add_argument("--n1", type=int, nargs="+", default=[1, 2, 3, 4])
    p.add_argument("--n2", type=int, nargs="+", default=[1, 2, 3, 4])
    p.add_argument("--nbar", type=_nbar, default="estimate")
    return parser


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, bool):
        return str(x).lower()
    return repr(float(x))


def _print_results(results, out) -> None:
    w = csv.writer(out, lineterminator="\n")
    w.writerow(CSV_FIELDS)
    for r in results:
        w.writerow([r.name.value, " ".join(map(str, r.index)), _fmt(r.value), _fmt(r.threshold),
                    _fmt(r.std_error), _fmt(r.significance), _fmt(r.violated), r.status.value])


def _cmd_simulate(args, out) -> int:
    if args.workers < 1:
        raise UsageError("--workers must be at least 1")
    config = load_config(args.config)
    write_histogram(simulate(config, workers=args.workers), args.out)
    print(f"wrote {args.out} ({config.geometry}, {config.pulses} pulses)", file=out)
    return EXIT_OK


def _cmd_analyze(args, out) -> int:
    if args.criterion == "lee":
        if args.joint is None:
            raise UsageError("analyze lee needs --joint")
        joint = parse_joint_histogram(args.joint)
        if args.form == "joint":
            table = {(a, b): lee_r_joint(joint, a, b) for a in args.n1 for b in args.n2}
        else:
            table = significance_table(joint, args.n1, args.n2, args.nbar)
        if args.table:
            print(format_significance_table(table), file=out)
        else:
            _print_results([table[k] for k in sorted(table)], out)
        return EXIT_OK

    hist = parse_histogram(args.hist) if args.hist else parse_joint_histogram(args.joint).marginal("signal")
    if args.criterion == "klyshko":
        ns = args.n or range(1, max(len(hist.counts) - 2, 1) + 1)
        results = [klyshko_k(hist, n) for n in ns]
    else:
        fn = {"gamma": gamma_wdsby, "combined": combined, "q": mandel_q}[args.criterion]
        results = [fn(hist)]
    _print_results(results, out)
    return EXIT_OK


def _cmd_report(args, out) -> int:
    joint = parse_joint_histogram(args.joint)
    inputs = {"joint": file_provenance(args.joint)}
    single = None
    if args.single:
        single = parse_histogram(args.single)
        inputs["single"] = file_provenance(args.single)
    report = build_report(joint, single, args.n1, args.n2, args.nbar, inputs=inputs)
    out_path = Path(args.out)
    out_path.write_text(report.to_json(), encoding="utf-8", newline="")
    csv_path = out_path.with_name("klyshko_kn.csv")
    csv_path.write_text(klyshko_csv(report.klyshko_series), encoding="utf-8", newline="")
    print(f"wrote {out_path} and {csv_path}", file=out)
    return EXIT_OK


def run_cli(argv=None, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        handler = {"simulate": _cmd_simulate, "analyze": _cmd_analyze, "report": _cmd_report}[args.command]
        return handler(args, out)
    except UsageError as exc:
        print(exc, file=err)
        return EXIT_USAGE
    except SystemExit as exc:
        # --help / --version
        return exc.code if isinstance(exc.code, int) else EXIT_OK
    except (ValueError, OSError) as exc:
        print(f"pdcstats: error: {exc}", file=err)
        return EXIT_DATA


def main() -> None:
    sys.exit(run_cli())


if __name__ == "__main__":
    main()

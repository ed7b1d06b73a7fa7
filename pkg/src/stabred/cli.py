"""Command line front end.

Usage:
    stabred FAMILY.json [FAMILY.json ...] [options]

Exit codes:
    0  every family reduced (or checked) to a stable configuration
    1  unreadable file, schema violation or malformed graph
    2  the family is not reducible: non-standard fibre, non log canonical
       junction or a contracted section that is not ample
    3  internal failure (including an exhausted step budget)

Diagnostics go to standard error; reports go to standard output unless
``--report-file`` is given.  With several inputs, the ``--trace``, ``--dot``,
``--output`` and ``--report-file`` paths name directories and each family
writes ``<stem>.<ext>`` inside them.
"""

from __future__ import annotations

import argparse
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

from . import __version__
from .engine import MODES, check_mode_shape, reduce_family, verify_stable
from .errors import StabRedError
from .familyio import dump_family, load_family
from .report import build_report, emit_dot, format_trace, report_json, report_text

EXIT_OK = 0
EXIT_NOT_STABLE = 2
EXIT_INTERNAL = 3


@dataclass(frozen=True)
class Options:
    mode: str | None = None
    trace: str | None = None
    dot: str | None = None
    output: str | None = None
    report: str = "text"
    report_file: str | None = None
    check_only: bool = False
    multi: bool = False


@dataclass(frozen=True)
class Outcome:
    source: str
    exit_code: int
    report: str
    diagnostics: str


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="stabred",
        description="Stable reduction of degenerating elliptic surfaces given by their dual graph.",
    )
    p.add_argument("inputs", nargs="+", metavar="FAMILY", help="family file(s) in JSON")
    p.add_argument("--mode", choices=MODES, help="override the mode given in the file")
    p.add_argument("--trace", metavar="PATH", help="write the step trace here")
    p.add_argument("--dot", metavar="PATH", help="write the final dual graph as DOT text here")
    p.add_argument("--output", metavar="PATH", help="write the final graph as a family file here")
    p.add_argument("--report", choices=("text", "json"), default="text", help="report format")
    p.add_argument("--report-file", metavar="PATH", help="write the report here instead of stdout")
    p.add_argument("--check-only", action="store_true", help="verify stability without reducing")
    p.add_argument("--jobs", type=int, default=1, metavar="N", help="process N files concurrently")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    return p


def _dest(path: str | None, source: str, ext: str, multi: bool) -> Path | None:
    if path is None:
        return None
    if not multi:
        return Path(path)
    return Path(path) / f"{Path(source).stem}.{ext}"


def _write(path: Path | None, text: str) -> None:
    if path is None:
        return
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8")


def run_one(source: str, opts: Options) -> Outcome:
    """Process one family in isolation; never raises."""
    diagnostics = []
    g = None
    try:
        g = load_family(source)
        if opts.mode:
            g = g.with_mode(opts.mode)
        if opts.check_only:
            verdicts = verify_stable(g)
            final, trace = g, None
            code = EXIT_OK if verdicts.all_pass else EXIT_NOT_STABLE
            if code:
                bad = ", ".join(v.node for v in verdicts.verdicts if not v.ok)
                diagnostics.append(f"{source}: not stable at {bad}")
        else:
            check_mode_shape(g)
            final, trace = reduce_family(g)
            verdicts = verify_stable(final)
            code = EXIT_OK
        _write(_dest(opts.trace, source, "trace", opts.multi), format_trace(trace) if trace else "# trace steps=0\n")
        _write(_dest(opts.dot, source, "dot", opts.multi), emit_dot(final))
        _write(_dest(opts.output, source, "json", opts.multi), dump_family(final))
        report = build_report(source, final, verdicts, trace, code)
    except StabRedError as err:
        code = err.exit_code
        diagnostics.append(f"{source}: {type(err).__name__}: {err}")
        report = build_report(source, g, None, None, code, err) if g is not None else None
    except Exception as err:  # noqa: BLE001 - the process boundary reports everything
        code = EXIT_INTERNAL
        diagnostics.append(f"{source}: internal error: {type(err).__name__}: {err}")
        report = None
    if report is None:
        text = ""
    else:
        text = report_json(report) if opts.report == "json" else report_text(report)
    return Outcome(source, code, text, "\n".join(diagnostics))


def _run_star(args: tuple[str, Options]) -> Outcome:
    return run_one(*args)


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if args.jobs < 1:
        print("stabred: --jobs must be at least 1", file=sys.stderr)
        return 1
    multi = len(args.inputs) > 1
    opts = Options(
        mode=args.mode,
        trace=args.trace,
        dot=args.dot,
        output=args.output,
        report=args.report,
        report_file=args.report_file,
        check_only=args.check_only,
        multi=multi,
    )
    work = [(src, opts) for src in args.inputs]
    if args.jobs > 1 and multi:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            outcomes = list(pool.map(_run_star, work))
    else:
        outcomes = [_run_star(w) for w in work]
    for out in outcomes:
        if out.diagnostics:
            print(out.diagnostics, file=sys.stderr)
        dest = _dest(opts.report_file, out.source, "report", multi)
        if dest is not None:
            _write(dest, out.report)
        elif out.report:
            sys.stdout.write(out.report)
    return max(out.exit_code for out in outcomes)

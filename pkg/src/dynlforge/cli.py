"""Command line: ``dynlforge validate | suite | export``.

Exit codes: 0 pass, 2 structure error, 3 parse error, 4 residual failure,
5 usage error or unknown name.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import __version__
from .algebra import load_setup
from .catalog import NAMES as CATALOG_NAMES, catalog_get
from .errors import DynlError, ParseError, StructureError, UnknownName
from .report import ResidualReport, setup_hash
from .suites import SUITES, SuiteOptions, run_suite

EXIT_OK, EXIT_STRUCTURE, EXIT_PARSE, EXIT_RESIDUAL, EXIT_USAGE = 0, 2, 3, 4, 5

log = logging.getLogger("dynlforge")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _load(source):
    """A setup from a JSON file, or from the catalog when no such file exists."""
    path = Path(source)
    if not path.exists():
        try:
            return catalog_get(source)
        except UnknownName:
            raise ParseError(f"no such file: {source}") from None
    return load_setup(path)


def _emit(text, out):
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def cmd_validate(args):
    G = _load(args.file)
    rep = ResidualReport(G.name or Path(args.file).stem, setup_hash(G), "validate", 0)
    for r in G.report.records:
        rep.add(r["residual"], r["value"], r["tol"])
    _emit(rep.to_jsonl(), args.out)
    return EXIT_OK if rep.verdict == "pass" else EXIT_STRUCTURE


def cmd_suite(args):
    G = _load(args.file)
    opts = SuiteOptions(seed=args.seed, grid_radius=args.grid_radius, grid_count=args.grid_count,
                        order=args.order, workers=args.workers)
    rep = run_suite(G, args.suite, opts)
    _emit(rep.to_jsonl(), args.out)
    return EXIT_OK if rep.verdict == "pass" else EXIT_RESIDUAL


def cmd_export(args):
    G = catalog_get(args.name)
    _emit(json.dumps(G.to_document(), indent=2, sort_keys=True) + "\n", args.out)
    return EXIT_OK


def build_parser():
    p = _Parser(prog="dynlforge", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    v = sub.add_parser("validate", help="run the structural validation of a setup file")
    v.add_argument("file")
    v.add_argument("--out")
    v.set_defaults(func=cmd_validate)

    s = sub.add_parser("suite", help="run a residual suite on a setup file")
    s.add_argument("file")
    s.add_argument("suite", choices=SUITES)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--grid-radius", type=float, default=None)
    s.add_argument("--grid-count", type=int, default=40)
    s.add_argument("--order", type=int, default=None)
    s.add_argument("--workers", type=int, default=4)
    s.add_argument("--out")
    s.set_defaults(func=cmd_suite)

    e = sub.add_parser("export", help="print a catalog setup as JSON")
    e.add_argument("name", help="one of: " + ", ".join(CATALOG_NAMES))
    e.add_argument("--out")
    e.set_defaults(func=cmd_export)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except UnknownName as exc:
        log.error("%s", exc)
        return EXIT_USAGE
    except ParseError as exc:
        log.error("parse error: %s", exc)
        return EXIT_PARSE
    except StructureError as exc:
        log.error("structure error: %s", exc)
        return EXIT_STRUCTURE
    except DynlError as exc:
        log.error("%s", exc)
        return EXIT_STRUCTURE


if __name__ == "__main__":
    sys.exit(main())

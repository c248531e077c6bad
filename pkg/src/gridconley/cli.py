"""Command line front end.

Subcommands either run everything a spec asks for (analyze) or narrow
it to a single analysis.  Exit codes: 0 success, 1 input error, 2 when
an analysis-level verification fails (the report still gets written,
with failure markers).
"""
from __future__ import annotations

import argparse
import sys
from typing import Optional, Sequence

from .specio import SpecError, emit, load_spec, narrow_spec, run

_COMMANDS = {
    "analyze": None,
    "chain": "chain",
    "morse": "morse",
    "lyapunov": "lyapunov",
    "index": "conley",
    "perturb": "perturb",
    "hybrid": "hybrid",
    "paths": "paths",
}


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gridconley",
        description="Grid-scale dynamics: chain recurrence, Morse structure, "
        "Lyapunov fields, index pairs, perturbations, hybrid systems.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    helps = {
        "analyze": "run every analysis the spec requests",
        "chain": "chain recurrence along the eps ladder",
        "morse": "chain components, their order, and attractor-repeller pairs",
        "lyapunov": "complete Lyapunov field with verification",
        "index": "isolation checks and an index pair for the spec region",
        "perturb": "repeller or saddle elimination with certificate",
        "hybrid": "associated relation, length-window relation, chain data",
        "paths": "enumerate hybrid paths in the spec region",
    }
    for name in _COMMANDS:
        p = sub.add_parser(name, help=helps[name])
        p.add_argument("--spec", required=True, help="path to a system spec (JSON)")
        p.add_argument("--out-dir", default=".", help="directory for emitted files")
        p.add_argument(
            "--eps",
            type=float,
            default=None,
            help="replace the spec's eps ladder with this single value",
        )
        p.add_argument(
            "--seed",
            type=int,
            default=None,
            help="seed for randomized test drivers; analyses are deterministic",
        )
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        spec = load_spec(args.spec)
        only = _COMMANDS[args.command]
        if only is not None:
            spec = narrow_spec(spec, [only], eps=args.eps)
        elif args.eps is not None:
            spec = narrow_spec(spec, spec.analysis.analyses, eps=args.eps)
        report = run(spec)
    except SpecError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    written = emit(report, args.out_dir)
    for path in written:
        print(path)
    if not report.ok:
        failed = [
            name
            for name, block in report.results.items()
            if isinstance(block, dict) and block.get("verified") is False
        ]
        print(f"verification failed: {', '.join(sorted(failed))}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())

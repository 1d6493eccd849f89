"""Command line entry point: ``spiketensor run`` and ``spiketensor predict``.

Exit status is 0 on success, 2 on a configuration error and 1 when
``--check`` is given and a theory-vs-simulation gate fails.
"""
from __future__ import annotations

import argparse
import logging
import sys
from typing import Optional, Sequence

from .config import PROFILES, ConfigError, from_mapping, load_config, with_overrides
from .gates import check
from .records import write_csv
from .runners import run

EXIT_OK, EXIT_GATE, EXIT_CONFIG = 0, 1, 2

log = logging.getLogger("spiketensor")


def _int_list(text: str) -> list:
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from exc


def _float_list(text: str) -> list:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from exc


class _Parser(argparse.ArgumentParser):
    # usage errors are configuration errors
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="spiketensor", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p_run = sub.add_parser("run", help="run a Monte-Carlo experiment from a JSON config")
    p_run.add_argument("--config", required=True, help="path to the JSON config")
    p_run.add_argument("--out", help="CSV output path (default: output_path from config, else stdout)")
    p_run.add_argument("--profile", choices=PROFILES, default="paper", help="default sizes (default: paper)")
    p_run.add_argument("--threads", type=int, default=1, help="worker threads (default: 1)")
    p_run.add_argument("--seed", type=int, help="base seed; overrides TENSORLAB_SEED and the config")
    p_run.add_argument("--check", action="store_true", help="evaluate acceptance gates; exit 1 on failure")
    p_run.add_argument("--figures", action="store_true", help="also write PNG figures next to the CSV")

    p_pred = sub.add_parser("predict", help="closed-form predictions without simulation")
    p_pred.add_argument("--dims", type=_int_list, required=True, help="a,b,c")
    p_pred.add_argument("--ranks", type=_int_list, required=True, help="p,q,r")
    p_pred.add_argument("--n", type=float, help="N parameter (default: sum of dims)")
    p_pred.add_argument("--s2", type=_float_list, default=[], help="squared signal singular values v1,v2,...")
    p_pred.add_argument("--delta", type=float, default=0.01, help="failure probability for the noise bound")
    p_pred.add_argument("--c-universal", type=float, default=1.0, help="universal constant for the noise bound")
    p_pred.add_argument("--out", help="CSV output path (default: stdout)")
    return parser


def _cmd_run(args) -> int:
    if args.threads < 1:
        raise ConfigError("--threads must be at least 1")
    cfg = load_config(args.config, profile=args.profile, seed=args.seed)
    out = args.out or cfg.output_path
    if args.figures and out in (None, "-"):
        raise ConfigError("--figures needs a file output (--out or output_path)")
    rows, columns = run(cfg, threads=args.threads)
    write_csv(rows, columns, out)
    log.info("wrote %d records", len(rows))
    if args.figures:
        from .figures import render  # matplotlib is imported only on demand

        for path in render(cfg.experiment, rows, out):
            log.info("wrote %s", path)
    if args.check:
        results = check(cfg.experiment, rows)
        for res in results:
            print(res.line(), file=sys.stderr)
        if not all(r.passed for r in results):
            return EXIT_GATE
    return EXIT_OK


def _cmd_predict(args) -> int:
    data = {"experiment": "predict", "dims": args.dims, "ranks": args.ranks, "s2": args.s2,
            "delta": args.delta, "c_universal": args.c_universal}
    if args.n is not None:
        data.update(n_convention="custom", n_param=args.n)
    cfg = from_mapping(data)
    rows, columns = run(cfg)
    write_csv(rows, columns, args.out)
    return EXIT_OK


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "run":
            return _cmd_run(args)
        return _cmd_predict(args)
    except ConfigError as exc:
        print(f"spiketensor: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())

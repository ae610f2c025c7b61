"""Command-line entry point.

    intrinsic-chern chern --sizes 12,16,24 --out runs/chern
    intrinsic-chern index --config configs/index.yaml --threads 4

Exit code 0 means every record succeeded and 1 means some record failed.
Bad configs or arguments exit with 2.
Config and argument errors are printed to stderr as one JSON object.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys

from .config import KINDS, load_config
from .errors import ConfigError
from .experiments import SCHEMA_VERSION, run_experiment

EXIT_OK, EXIT_RECORD_FAILED, EXIT_CONFIG = 0, 1, 2


def _int_list(text: str) -> list:
    try:
        return [int(v) for v in text.replace(" ", "").split(",") if v]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        _structured_error("usage", message)
        sys.exit(EXIT_CONFIG)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="intrinsic-chern", description="Chern cocycle and index experiments on finite lattices.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="kind", required=True, parser_class=_Parser)
    for kind in KINDS:
        p = sub.add_parser(kind)
        p.add_argument("--config", help="YAML or JSON experiment config")
        p.add_argument("--out", help="output directory for results.csv / results.json")
        p.add_argument("--seeds", type=_int_list, help="comma-separated disorder seeds")
        p.add_argument("--sizes", type=_int_list, help="comma-separated sizes: torus side or box radius (grid N for oracle)")
        p.add_argument("--threads", type=int, help="worker threads for independent sweep points")
        p.add_argument("--tolerance", type=float, help="acceptance tolerance recorded per result")
    return parser


def _structured_error(kind: str, message: str, **extra):
    payload = {"error": kind, "message": message, "schema_version": SCHEMA_VERSION, **extra}
    print(json.dumps(payload), file=sys.stderr)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        overrides = dict(seeds=args.seeds, sizes=args.sizes, threads=args.threads,
                         tolerance=args.tolerance, output=args.out)
        cfg = load_config(args.config, **overrides, kind=args.kind)
    except ConfigError as exc:
        _structured_error("config", str(exc), config=args.config)
        return EXIT_CONFIG

    records = run_experiment(cfg)
    failed = [r for r in records if not r.ok]
    for r in records:
        shown = {k: v for k, v in r.values.items() if not isinstance(v, (list, dict))}
        status = r.status if r.ok else f"{r.status}: {r.error['type']}: {r.error['message']}"
        print(f"[{r.item}] size={r.params.get('size')} seed={r.params.get('seed')} {shown} {status}")
    if cfg.output:
        print(f"wrote {cfg.output}/results.csv and results.json")
    return EXIT_RECORD_FAILED if failed else EXIT_OK


if __name__ == "__main__":
    sys.exit(main())

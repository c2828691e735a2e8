"""planetoid-convert command line entry point."""

from __future__ import annotations

import argparse
import sys

from planetoid_convert.convert import DATASET_NAMES, ConvertError, convert


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="planetoid-convert",
        description="Convert pickled ind.<name>.* citation files into a "
        "graph-bundle directory",
    )
    parser.add_argument("input_dir", help="directory holding the ind.<name>.* files")
    parser.add_argument("name", help=f"dataset name: {', '.join(DATASET_NAMES)}")
    parser.add_argument("output_dir", help="bundle directory to write")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        out = convert(args.input_dir, args.name, args.output_dir)
    except ConvertError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(f"wrote {out}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())

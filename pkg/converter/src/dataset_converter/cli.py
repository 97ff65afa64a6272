"""Command-line entry point: convert one dataset to the neutral container."""

from __future__ import annotations

import argparse
import json
import sys

from .convert import DATASETS, convert, default_manifest_path
from .errors import ConversionError


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hopgat-convert",
        description="convert a published graph dataset into the neutral JSON container",
    )
    parser.add_argument("--dataset", required=True, choices=DATASETS)
    parser.add_argument("--src", required=True, help="directory holding the source files")
    parser.add_argument("--out", required=True, help="container file to write")
    parser.add_argument(
        "--manifest", default=None,
        help="manifest path (default: <out stem>.manifest.json next to --out)",
    )
    parser.add_argument(
        "--checksums", default=None,
        help="JSON file of expected sha256 digests per source file name",
    )
    return parser


def main(argv=None) -> int:
    args = make_parser().parse_args(argv)
    expected = None
    if args.checksums:
        with open(args.checksums) as fh:
            expected = json.load(fh)
    try:
        manifest = convert(
            args.src, args.dataset, args.out,
            expected_checksums=expected, manifest_path=args.manifest,
        )
    except ConversionError as err:
        print(f"conversion failed: {err}", file=sys.stderr)
        return 1
    print(json.dumps(manifest.to_dict(), indent=2))
    print(
        f"wrote {args.out} and {args.manifest or default_manifest_path(args.out)}",
        file=sys.stderr,
    )
    return 0


if __name__ == "__main__":
    sys.exit(main())

#!/usr/bin/env python3
"""Rebuild every shipped calibration table in one go.

Each preset prints its comparison table; with --out the underlying
records land in that directory as <preset>.<format> for later plotting.
"""

import argparse
from pathlib import Path

from nullsim.campaign import export_results
from nullsim.presets import PRESET_NAMES, run_repro


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument(
        "names",
        nargs="*",
        metavar="preset",
        help=f"presets to rebuild, default all: {', '.join(PRESET_NAMES)}",
    )
    ap.add_argument("--out", default=None, help="directory for result files")
    ap.add_argument("--format", choices=("csv", "json"), default="csv")
    args = ap.parse_args()
    for name in args.names:
        if name not in PRESET_NAMES:
            ap.error(f"unknown preset {name!r}")

    for name in args.names or PRESET_NAMES:
        records, table = run_repro(name)
        print(f"== {name} ==")
        print("\n".join(table))
        print()
        if args.out:
            out_dir = Path(args.out)
            out_dir.mkdir(parents=True, exist_ok=True)
            stem = name.replace("-", "_")
            for f in export_results(
                records, args.format, str(out_dir / f"{stem}.{args.format}")
            ):
                print(f"wrote {f}")


if __name__ == "__main__":
    main()

#!/usr/bin/env python3
"""Create the desk-scale workspace (synthetic data + config).

Usage: python scripts/make_desk_data.py [target_dir] [--seed N]
Then run, e.g.:
    powercast ingest --config target_dir/desk.json
"""

import argparse

from powercast.desk import make_desk_workspace


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("target", nargs="?", default="desk_run")
    parser.add_argument("--seed", type=int, default=7)
    args = parser.parse_args()
    config = make_desk_workspace(args.target, seed=args.seed)
    print(f"desk workspace ready: {config}")


if __name__ == "__main__":
    main()

"""Run every shipped config (or the ones given) through the CLI.

    python scripts/run_configs.py [--out results] [--seed N] [configs/*.toml ...]

Outputs land in ``<out>/<config stem>.*``; the script stops at the first
non-zero exit code and returns it.
"""

import argparse
import glob
import os
import sys
import time

from photon_chain_lab.cli import main as cli_main

HERE = os.path.dirname(os.path.abspath(__file__))


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("configs", nargs="*")
    ap.add_argument("--out", default="results")
    ap.add_argument("--seed", type=int)
    args = ap.parse_args(argv)
    paths = args.configs or sorted(glob.glob(os.path.join(HERE, "..", "configs", "*.toml")))
    for path in paths:
        stem = os.path.splitext(os.path.basename(path))[0]
        cmd = ["run", path, "--output", os.path.join(args.out, stem)]
        if args.seed is not None:
            cmd += ["--seed", str(args.seed)]
        start = time.perf_counter()
        code = cli_main(cmd)
        print(f"{stem}: exit {code} in {time.perf_counter() - start:.1f} s", file=sys.stderr)
        if code:
            return code
    return 0


if __name__ == "__main__":
    sys.exit(main())

"""Print the headline numbers of every ``*.summary.json`` under a directory."""

import argparse
import glob
import json
import os


def _flat(prefix, obj, out):
    if isinstance(obj, dict):
        for k, v in obj.items():
            _flat(f"{prefix}.{k}" if prefix else k, v, out)
    else:
        out.append((prefix, obj))


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("directory", nargs="?", default="results")
    args = ap.parse_args()
    for path in sorted(glob.glob(os.path.join(args.directory, "*.summary.json"))):
        with open(path) as fh:
            doc = json.load(fh)
        print(f"== {os.path.basename(path)} ({doc['experiment']})")
        items = []
        _flat("", doc["summary"], items)
        for key, value in items:
            print(f"  {key} = {value}")


if __name__ == "__main__":
    main()

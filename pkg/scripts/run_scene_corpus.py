"""Run every bundled scene and compare exit codes against expectations.

Scenes named counterexample_* must exit 1; everything else must exit 0.
Usage: python3 scripts/run_scene_corpus.py [--format text|json]
"""

import argparse
import io
import pathlib
import sys
from contextlib import redirect_stdout

from klab.cli import main

SCENES = pathlib.Path(__file__).resolve().parent.parent / "scenes"


def run():
    parser = argparse.ArgumentParser()
    parser.add_argument("--format", choices=("text", "json"), default="text")
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    surprises = []
    rows = []
    for path in sorted(SCENES.glob("*.json")):
        expected = 1 if path.name.startswith("counterexample_") else 0
        buf = io.StringIO()
        with redirect_stdout(buf):
            code = main(["run", str(path), "--format", args.format,
                         "--seed", str(args.seed)])
        verdict = "as expected" if code == expected else "SURPRISE"
        rows.append((path.name, code, expected, verdict))
        if code != expected:
            surprises.append(path.name)
            sys.stdout.write(buf.getvalue())

    width = max(len(r[0]) for r in rows)
    print(f"{'scene':<{width}}  exit  expected  verdict")
    for name, code, expected, verdict in rows:
        print(f"{name:<{width}}  {code:>4}  {expected:>8}  {verdict}")
    if surprises:
        print(f"\n{len(surprises)} scene(s) off contract: {surprises}")
        return 1
    print(f"\nall {len(rows)} scenes match their exit-code contract")
    return 0


if __name__ == "__main__":
    sys.exit(run())

#!/usr/bin/env python3
# Runs each "$ args" block of a golden file against the CLI and diffs byte for byte.
import difflib
import shlex
import subprocess
import sys


def blocks(path):
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    for chunk in text.split("\n\n"):
        lines = chunk.strip("\n").split("\n")
        if not lines or not lines[0].startswith("$ "):
            continue
        status = lines[-1]
        if not (status.startswith("[exit ") and status.endswith("]")):
            raise SystemExit(f"{path}: block without [exit N]: {lines[0]}")
        yield lines[0][2:], "\n".join(lines[1:-1]), int(status[6:-1])


def main():
    exe, golden = sys.argv[1], sys.argv[2]
    bad = 0
    count = 0
    for args, want, want_status in blocks(golden):
        count += 1
        proc = subprocess.run([exe] + shlex.split(args), capture_output=True, text=True, encoding="utf-8")
        got = (proc.stdout + proc.stderr).rstrip("\n")
        if got != want or proc.returncode != want_status:
            bad += 1
            print(f"FAIL $ {args}  (exit {proc.returncode}, wanted {want_status})")
            for line in difflib.unified_diff(want.split("\n"), got.split("\n"), "expected", "actual", lineterm=""):
                print("   " + line)
    print(f"{count - bad}/{count} golden cases match")
    return 1 if bad or count == 0 else 0


if __name__ == "__main__":
    sys.exit(main())

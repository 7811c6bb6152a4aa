#!/usr/bin/env python3
# Validates --json output of a spread of commands against the schema.
import json
import subprocess
import sys

import jsonschema

CASES = [
    ["eval", "sum(i=1..inf, i)", "sum(i=1..inf, (-1)^i)", "sum(i=1..inf, 1/i)", "cos(w)", "floor(w/2)"],
    ["--shadow", "eval", "3 + 1/w", "cos(w)"],
    ["eval", "survival(proc(harmonic rate=3 start=4/3))", "log(w)"],
    ["compare", "w", "3"],
    ["compare", "sum(i=1..inf, (-1)^(i-1)*i)", "0"],
    ["compare", "cos(w)", "0"],
    ["shadow", "variance(dist(cauchy)) - 2*w/pi"],
    ["classify", "log(w)"],
    ["--prefix", "4", "sequence", "1 - 2^-w"],
    ["audit", "ftc", "int(x=0..inf, x*exp(-x))"],
    ["audit", "pareto", "stream(delay stream(const 1))", "stream(const 1)"],
    ["audit", "overtaking", "stream(const 1)", "stream(arith (-3) 1)"],
    ["audit", "anonymity", "stream(arith 1 1)", "{1:5, 5:1, 2:3, 3:2}"],
    ["audit", "partition", "positives", "evens", "odds"],
    ["audit", "subset", "evens", "positives"],
    ["audit", "identities", "proc(flips base=2)"],
    ["audit", "discrepancy", "proc(flips base=2)"],
    ["eval", "foo(1)"],
    ["eval", "int(x=0..1, 1/x)"],
    ["compare", "w"],
]


def main():
    exe, schema_path = sys.argv[1], sys.argv[2]
    with open(schema_path, encoding="utf-8") as fh:
        schema = json.load(fh)
    jsonschema.Draft202012Validator.check_schema(schema)
    validator = jsonschema.Draft202012Validator(schema)
    bad = 0
    for args in CASES:
        proc = subprocess.run([exe, "--json"] + args, capture_output=True, text=True, encoding="utf-8")
        try:
            doc = json.loads(proc.stdout)
        except json.JSONDecodeError as e:
            print(f"FAIL {args}: not JSON ({e}); stderr: {proc.stderr.strip()}")
            bad += 1
            continue
        errors = list(validator.iter_errors(doc))
        if doc.get("status") != proc.returncode:
            errors.append(f"status field {doc.get('status')} but exit code {proc.returncode}")
        for err in errors:
            print(f"FAIL {args}: {getattr(err, 'message', err)}")
        bad += bool(errors)
    # the schema must also reject damaged documents
    sample = json.loads(subprocess.run([exe, "--json", "compare", "w", "3"], capture_output=True, text=True).stdout)
    damaged = [
        {k: v for k, v in sample.items() if k != "result"},
        {**sample, "result": {**sample["result"], "verdict": "bigger"}},
        {**sample, "left": {k: v for k, v in sample["left"].items() if k != "determinacy"}},
        {**sample, "status": 7},
    ]
    for i, doc in enumerate(damaged):
        if validator.is_valid(doc):
            print(f"FAIL damaged document {i} was accepted")
            bad += 1
    print(f"{len(CASES) - bad}/{len(CASES)} JSON documents validate")
    return 1 if bad else 0


if __name__ == "__main__":
    sys.exit(main())

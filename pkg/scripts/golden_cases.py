#!/usr/bin/env python3
"""Classify the golden symbols and print the Sarason function of each NonCE case."""

import argparse
import json

from ncrat import sarason as sr
from ncrat.ncparse import realize_text

CASES = [
    ("z1", 1),
    ("0.7071067811865476*(z1+z2)", 2),
    ("(z1-0.5)*(1-0.5*z1)^-1", 1),
    ("0.5+0.5*z1", 1),
    ("z1*(2+z1)^-1", 1),
    ("0.5*z1+0.5*z2", 2),
]


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("-N", type=int, default=3, help="coefficient order to print")
    args = ap.parse_args()
    for text, d in CASES:
        b = realize_text(text, d)
        cls = sr.classify(b)
        row = {"b": text, "d": d, "verdict": cls.verdict, "a0_squared": cls.a0_squared}
        if cls.verdict == sr.NONCE:
            a = sr.sarason(b)
            rep = sr.verify_column(b, a, 4, 1e-8)
            row["a_coeffs"] = [round(c.real, 12) for c in a.coeff_vector(args.N)[: 1 + d]]
            row["verify_pass"] = rep.passed
        print(json.dumps(row))


if __name__ == "__main__":
    main()

#!/usr/bin/env python3
"""Truncated entropy of I - b^* b against a(0)^2 for growing N.

Shows the O(1/N) approach when the outer function has a boundary zero.
"""

import argparse

from ncrat import focktrunc as ft
from ncrat import sarason as sr
from ncrat.ncparse import realize_text

CASES = [("0.5+0.5*z1", 1, 60), ("z1*(2+z1)^-1", 1, 60), ("0.5*z1+0.5*z2", 2, 8), ("0.3+0.4*z1*z2-0.2*z2", 2, 8)]


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.parse_args()
    for text, d, top in CASES:
        b = realize_text(text, d)
        a0 = sr.a0_squared(b)
        t = ft.defect_symbol(b.coeffs(top + 2), top)
        print(f"b = {text}  (a0_squared = {a0:.12f})")
        for N in sorted({1, 2, 4, 6, 8, 10, 20, 40, top} & set(range(1, top + 1))):
            eps = ft.entropy_schur(t, N).value
            print(f"  N={N:3d}  entropy={eps:.12f}  gap={eps - a0:.3e}  N*gap={N * (eps - a0):.4f}")


if __name__ == "__main__":
    main()

#!/usr/bin/env python3
"""Clark moments versus Radon–Nikodym moments, and entropy of inner Clark measures."""

import argparse

from ncrat import fejerriesz as fr
from ncrat import focktrunc as ft
from ncrat.ncparse import realize_text

NONCE = [("0.5+0.5*z1", 1), ("z1*(2+z1)^-1", 1), ("0.5*z1+0.5*z2", 2), ("0.3+0.4*z1*z2-0.2*z2", 2)]
INNER = [("z1", 1), ("0.7071067811865476*(z1+z2)", 2), ("(z1-0.5)*(1-0.5*z1)^-1", 1)]


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--maxlen", type=int, default=4)
    args = ap.parse_args()
    for text, d in NONCE:
        b = realize_text(text, d)
        clark = fr.clark_moments(b, args.maxlen)
        rn = fr.rn_moments(b, args.maxlen)
        gap = rn.moments.max_abs_diff(clark.moments)
        print(f"{text:28s} clark mass {clark.mass:.6f}  rn mass {rn.mass:.6f}  max gap {gap:.2e}")
    for text, d in INNER:
        mu = fr.clark_moments(realize_text(text, d), 10 if d == 1 else 6)
        print(f"{text:28s} inner, entropy at N={mu.order}: {ft.entropy_schur(mu.symbol(), mu.order).value:.2e}")


if __name__ == "__main__":
    main()

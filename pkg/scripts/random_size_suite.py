#!/usr/bin/env python3
"""Realization sizes on random contractive colligations.

Checks dim a <= dim b, dim h <= dim r + 1 and dim d <= 2 dim h after minimization.
"""

import argparse
import time

import numpy as np

from ncrat import fejerriesz as fr
from ncrat import realize as rz
from ncrat import sarason as sr


def random_contractive(rng, d, n, scale):
    M = rng.standard_normal((d * n + 1, n + 1)) + 1j * rng.standard_normal((d * n + 1, n + 1))
    M *= scale / np.linalg.norm(M, 2)
    return rz.FMRealization(M[: d * n, :n].reshape(d, n, n), M[: d * n, n].reshape(d, n), M[d * n, :n], M[d * n, n])


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--seed", type=int, default=2024)
    ap.add_argument("--cases", type=int, default=25)
    args = ap.parse_args()
    rng = np.random.default_rng(args.seed)
    print("case d dim_b dim_a dim_h dim_d(unmin) residual ok")
    bad = 0
    t0 = time.perf_counter()
    for i in range(args.cases):
        d, n = 1 + i % 2, 1 + i % 3
        b = random_contractive(rng, d, n, 0.9 if d == 1 else 0.7)
        nb = rz.minimize(b).n
        a = sr.sarason(b)
        h = fr.herglotz_square(b)
        fac = fr.factorize(h)
        rep = fac.report
        ok = a.n <= nb and h.n <= nb + 1 and rep.dim_d <= 2 * h.n and rep.passed
        bad += not ok
        print(f"{i:4d} {d} {nb:5d} {a.n:5d} {h.n:5d} {rep.dim_d:5d}({rep.dim_unminimized}) {rep.residual:.1e} {ok}")
    print(f"violations: {bad}, elapsed {time.perf_counter() - t0:.1f}s")


if __name__ == "__main__":
    main()

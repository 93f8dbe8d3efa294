"""Regenerate the frozen 2F1 table with mpmath at 40 digits.

    python3 tools/make_golden.py > src/finsler_hardy/data/hyp2f1_golden.csv
"""
import csv
import sys

import mpmath as mp

mp.mp.dps = 40

TRIPLES = [
    # generic b - a
    (0.3, 0.8, 1.7), (0.25, 1.1, 0.6), (-0.35, 0.45, 1.5),
    # b = a
    (0.6, 0.6, 1.9), (1.25, 1.25, 2.1),
    # b - a a positive integer
    (0.4, 2.4, 1.3), (0.2, 3.2, 2.9),
    # c - a an integer above b - a
    (0.5, 1.5, 3.5), (1.0, 1.0, 2.0),
    # terminating and reflected
    (-3.0, 2.5, 1.7), (0.7, 1.3, 1.3),
    # ground-state triples for (n, alpha, b) = (3, 0, 2), (2, 0.5, 2), (4, -0.5, 3)
    (0.0, 0.5, 0.5), (0.25, 0.75, 0.5), (-0.25, 0.25, 0.75), (0.5, 1.0, 1.5), (-0.125, 0.125, 1.25),
]
ZS = [-0.1, -0.5, -0.9, -1.0, -1.5, -2.0, -3.0, -10.0, -100.0, -1e4]


def main():
    w = csv.writer(sys.stdout, lineterminator="\n")
    w.writerow(["a", "b", "c", "z", "value"])
    for a, b, c in TRIPLES:
        for z in ZS:
            v = mp.hyp2f1(a, b, c, z)
            w.writerow([repr(a), repr(b), repr(c), repr(z), mp.nstr(v, 20, min_fixed=-1, max_fixed=0)])


if __name__ == "__main__":
    main()

#!/usr/bin/env python3
"""ASCII map of the stability plane over [-3,3]^2.

Legend: E empty chamber, N cyclic chamber, Z Z_t chamber, * on a wall,
. other chamber, ? inconclusive at this resolution, o origin.

Usage: chamber_grid.py [STEPS_PER_UNIT] [KMAX]
"""

import sys
from fractions import Fraction

from wallx.quiver import Theta, classify_theta


def main(argv):
    steps = int(argv[1]) if len(argv) > 1 else 5
    kmax = int(argv[2]) if len(argv) > 2 else 40
    n = 3 * steps
    step = Fraction(1, steps)
    for j in range(n, -n - 1, -1):
        row = []
        for i in range(-n, n + 1):
            res = classify_theta(Theta(i * step, j * step), kmax)
            if res.kind == "degenerate":
                row.append("o")
            elif res.kind == "wall":
                row.append("*")
            elif res.kind == "inconclusive":
                row.append("?")
            elif res.chamber == "empty":
                row.append("E")
            elif res.chamber == "NC":
                row.append("N")
            elif res.chamber == "Zt":
                row.append("Z")
            else:
                row.append(".")
        print("".join(row))
    return 0


if __name__ == "__main__":
    sys.exit(main(sys.argv))

#!/usr/bin/env python3
"""Solve the moment equations for fully symmetric triangle quadrature rules
with positive weights and interior points, and print them as a C++ table.

Orbit layout per degree: (centroid?, #S21 orbits, #S111 orbits).
Run: python3 tools/gen_quadrature.py > src/quadrature_tables.inc
"""
import math
import sys

import numpy as np
from scipy.optimize import least_squares

ORBITS = {
    1: (1, 0, 0),
    2: (0, 1, 0),
    3: (0, 2, 0),
    4: (0, 2, 0),
    5: (1, 2, 0),
    6: (0, 2, 1),
    7: (0, 3, 1),
    8: (1, 3, 1),
    9: (1, 4, 1),
    10: (1, 2, 3),
    12: (0, 5, 3),
    14: (0, 6, 4),
}

# Degrees 12 and 14 are hard to hit from random starts; refine from the
# published Dunavant (1985) parameters instead. S21 entries: (b, w) for the
# orbit (1-2b, b, b); S111 entries: (a, b, w).
SEEDS = {
    12: [0.488217389773805, 0.025731066440455, 0.439724392294460, 0.043692544538038,
         0.271210385012116, 0.062858224217885, 0.127576145541586, 0.034796112930709,
         0.021317350453210, 0.006166261051559,
         0.608943235779788, 0.115343494534698, 0.040371557766381,
         0.695836086787803, 0.022838332222257, 0.022356773202303,
         0.858014033544073, 0.025734050548330, 0.017316231108659],
    14: [0.488963910362179, 0.021883581369429, 0.417644719340454, 0.032788353544125,
         0.273477528308839, 0.051774104507292, 0.177205532412543, 0.042162588736993,
         0.061799883090873, 0.014433699669777, 0.019390961248701, 0.004923403602400,
         0.172266687821356, 0.057124757403648, 0.024665753212564,
         0.336861459796345, 0.092916249356972, 0.038571510787061,
         0.298372882136258, 0.014646950055654, 0.014436308113534,
         0.118974497696957, 0.001268330932872, 0.005010228838501],
}


def exact_moment(a, b):
    return math.factorial(a) * math.factorial(b) / math.factorial(a + b + 2)


def expand(params, layout):
    c, n21, n111 = layout
    pts, wts = [], []
    k = 0
    if c:
        pts.append((1 / 3, 1 / 3, 1 / 3))
        wts.append(params[k])
        k += 1
    for _ in range(n21):
        a, w = params[k], params[k + 1]
        k += 2
        for p in ((a, a, 1 - 2 * a), (a, 1 - 2 * a, a), (1 - 2 * a, a, a)):
            pts.append(p)
            wts.append(w)
    for _ in range(n111):
        a, b, w = params[k], params[k + 1], params[k + 2]
        k += 3
        g = 1 - a - b
        for p in ((a, b, g), (a, g, b), (b, a, g), (b, g, a), (g, a, b), (g, b, a)):
            pts.append(p)
            wts.append(w)
    return np.array(pts), np.array(wts)


def residual(params, layout, deg):
    pts, wts = expand(params, layout)
    x, y = pts[:, 1], pts[:, 2]
    res = []
    for a in range(deg + 1):
        for b in range(deg + 1 - a):
            res.append(0.5 * np.dot(wts, x**a * y**b) - exact_moment(a, b))
    return np.array(res) * 100.0


def valid(params, layout, deg):
    pts, wts = expand(params, layout)
    if np.any(wts <= 0) or np.any(pts <= 1e-12):
        return False
    # distinct S111 points (not degenerating into S21)
    c, n21, n111 = layout
    k = c + 2 * n21
    for _ in range(n111):
        a, b = params[k], params[k + 1]
        g = 1 - a - b
        if min(abs(a - b), abs(a - g), abs(b - g)) < 1e-6:
            return False
        k += 3
    return np.max(np.abs(residual(params, layout, deg))) < 1e-13


def solve(deg, rng):
    layout = ORBITS[deg]
    c, n21, n111 = layout
    npts = c + 3 * n21 + 6 * n111
    lo, hi = [], []
    if c:
        lo.append(0.0), hi.append(2.0)
    for _ in range(n21):
        lo += [0.0, 0.0]
        hi += [0.5, 2.0]
    for _ in range(n111):
        lo += [0.0, 0.0, 0.0]
        hi += [1.0, 1.0, 2.0]
    if deg in SEEDS:
        sol = least_squares(residual, SEEDS[deg], args=(layout, deg), method="lm",
                            xtol=1e-15, ftol=1e-15, gtol=1e-15)
        if valid(sol.x, layout, deg):
            return expand(sol.x, layout)
    for _ in range(20000):
        x0 = []
        if c:
            x0.append(rng.uniform(0, 2 / npts))
        for _ in range(n21):
            x0 += [rng.uniform(0.01, 0.49), rng.uniform(0, 2 / npts)]
        for _ in range(n111):
            a = rng.uniform(0.01, 0.6)
            b = rng.uniform(0.01, 0.99 - a)
            x0 += [a, b, rng.uniform(0, 2 / npts)]
        sol = least_squares(residual, x0, args=(layout, deg), method="lm",
                            xtol=1e-15, ftol=1e-15, gtol=1e-15, max_nfev=400)
        if valid(sol.x, layout, deg):
            return expand(sol.x, layout)
    raise RuntimeError(f"no rule found for degree {deg}")


def main():
    degrees = [int(a) for a in sys.argv[1:]] or sorted(ORBITS)
    rng = np.random.default_rng(20240917 + sum(degrees))
    out = sys.stdout
    out.write("// Generated by tools/gen_quadrature.py. Do not edit by hand.\n")
    out.write("// Each entry: barycentric (l0, l1, l2) and weight; weights sum to 1.\n\n")
    for deg in degrees:
        pts, wts = solve(deg, rng)
        out.write(f"constexpr RawPoint kDegree{deg}[] = {{\n")
        for p, w in zip(pts, wts):
            out.write(f"    {{{float(p[0])!r}, {float(p[1])!r}, {float(p[2])!r}, {float(w)!r}}},\n")
        out.write("};\n\n")
        print(f"degree {deg}: {len(wts)} points", file=sys.stderr)


if __name__ == "__main__":
    main()

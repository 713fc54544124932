"""Bounded scalar maximization."""

import math

import numpy as np

INV_PHI = (math.sqrt(5) - 1) / 2
INV_PHI2 = (3 - math.sqrt(5)) / 2


def golden_section_max(f, a, b, tol=1e-6):
    """Golden-section search for the maximum of a unimodal `f` on ``[a, b]``.

    Returns ``(x, f(x))`` with the bracket shrunk below `tol`. Endpoint
    values are compared at the end so a boundary maximum is returned exactly.
    """
    a, b = min(a, b), max(a, b)
    h = b - a
    if h <= tol:
        x = 0.5 * (a + b)
        return x, f(x)
    n = int(math.ceil(math.log(tol / h) / math.log(INV_PHI)))
    c, d = a + INV_PHI2 * h, a + INV_PHI * h
    yc, yd = f(c), f(d)
    for _ in range(n):
        if yc > yd:
            b, d, yd = d, c, yc
            h *= INV_PHI
            c = a + INV_PHI2 * h
            yc = f(c)
        else:
            a, c, yc = c, d, yd
            h *= INV_PHI
            d = a + INV_PHI * h
            yd = f(d)
    x, y = (c, yc) if yc > yd else (d, yd)
    return x, y


def guarded_max(f, a, b, tol=1e-6, grid=10_000):
    """Maximize `f` on ``[a, b]``: coarse grid scan, then golden-section refinement.

    The scan picks the best grid cell, so a function that is only unimodal
    near its maximum is still handled. The bracket passed to the golden
    search is the two neighbouring grid cells.
    """
    xs = np.linspace(a, b, grid + 1)
    ys = np.array([f(x) for x in xs])
    k = int(np.argmax(ys))
    lo, hi = xs[max(k - 1, 0)], xs[min(k + 1, grid)]
    x, y = golden_section_max(f, lo, hi, tol)
    # boundary maxima: golden search only approaches an endpoint to within tol
    for xe, ye in ((xs[0], ys[0]), (xs[-1], ys[-1])):
        if ye >= y:
            x, y = xe, ye
    return float(x), float(y)

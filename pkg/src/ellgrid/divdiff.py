"""Divided-difference operators on lattice walks and the product-mapping
theorem.

D maps x-indexed values to y-indexed ones, (Df)(y_n) = (f(x_{n+1}) -
f(x_n))/(x_{n+1} - x_n); M is the companion average.  The adjoints run the
other way.  Every product-map constant is computed by several independent
closed forms and the spread is asserted: the index conventions are the most
error-prone part of the whole construction, so redundancy is the point.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .algebra import Poly
from .errors import BreakdownError
from .lattice import LatticeWalk

C_SPREAD_TOL = 1e-7


@dataclass
class GridFunction:
    """Values on a contiguous index range of a walk, on the x- or y-axis."""

    walk: LatticeWalk
    values: dict
    axis: str = "x"

    @staticmethod
    def sample(walk, fn, lo, hi, axis="x"):
        walk.ensure(lo, hi + (1 if axis == "x" else 0))
        pts = {n: (walk.x(n) if axis == "x" else walk.y(n))
               for n in range(lo, hi + 1)}
        return GridFunction(walk, {n: fn(p) for n, p in pts.items()}, axis)

    def __getitem__(self, n):
        return self.values[n]

    def indices(self):
        return sorted(self.values)


def D(f: GridFunction):
    """(Df)(y_n) = (f(x_{n+1}) - f(x_n))/(x_{n+1} - x_n)."""
    if f.axis != "x":
        raise ValueError("D acts on x-indexed functions")
    out = {}
    for n in f.indices():
        if n + 1 not in f.values:
            continue
        dx = f.walk.x(n + 1) - f.walk.x(n)
        if dx == 0:
            raise BreakdownError("mirror point x_{n+1} = x_n", where="divdiff",
                                 index=n)
        out[n] = (f.values[n + 1] - f.values[n]) / dx
    return GridFunction(f.walk, out, "y")


def M(f: GridFunction):
    """(Mf)(y_n) = (f(x_{n+1}) + f(x_n))/2."""
    if f.axis != "x":
        raise ValueError("M acts on x-indexed functions")
    out = {n: (f.values[n + 1] + f.values[n]) / 2.0
           for n in f.indices() if n + 1 in f.values}
    return GridFunction(f.walk, out, "y")


def D_adj(g: GridFunction):
    """(D^dag g)(x_n) = -(g(y_n) - g(y_{n-1}))/(y_n - y_{n-1})."""
    if g.axis != "y":
        raise ValueError("D_adj acts on y-indexed functions")
    out = {}
    for n in g.indices():
        if n - 1 not in g.values:
            continue
        dy = g.walk.y(n) - g.walk.y(n - 1)
        if dy == 0:
            raise BreakdownError("y_n = y_{n-1}", where="divdiff", index=n)
        out[n] = -(g.values[n] - g.values[n - 1]) / dy
    return GridFunction(g.walk, out, "x")


def M_adj(g: GridFunction):
    """(M^dag g)(x_n) = (g(y_n) + g(y_{n-1}))/2."""
    if g.axis != "y":
        raise ValueError("M_adj acts on y-indexed functions")
    out = {n: (g.values[n] + g.values[n - 1]) / 2.0
           for n in g.indices() if n - 1 in g.values}
    return GridFunction(g.walk, out, "x")


def summation_by_parts(f: GridFunction, g: GridFunction, N):
    """Residual of the discrete integration-by-parts identity on 0..N-1:

    sum f(x_n)(D^dag g)(x_n) dy_{n-1} = sum (Df)(y_n) g(y_n) dx_n
                                        + f(x_0) g(y_{-1}) - f(x_N) g(y_{N-1}).
    """
    w = f.walk
    Dg, Df = D_adj(g), D(f)
    left = sum(f[n] * Dg[n] * (w.y(n) - w.y(n - 1)) for n in range(0, N))
    right = sum(Df[n] * g[n] * (w.x(n + 1) - w.x(n)) for n in range(0, N))
    right += f[0] * g[-1] - f[N] * g[N - 1]
    scale = max(1.0, *(abs(f[n]) for n in range(0, N + 1))) \
        * max(1.0, *(abs(g[n]) for n in range(-1, N)))
    return abs(left - right) / scale


# -- the rational products P_{m,r,s} -----------------------------------------------

def x_product(walk, walk_p, m, r, s):
    """P_{m,r,s}(x) = prod (x - x_{r..r+m-1}) / prod (x - x'_{s..s+m-1})."""
    walk.ensure(min(r, 0), max(r + m, 0))
    walk_p.ensure(min(s, 0), max(s + m, 0))
    xs = [walk.x(r + i) for i in range(m)]
    xps = [walk_p.x(s + i) for i in range(m)]

    def P(x):
        num = np.prod([x - xi for xi in xs]) if xs else 1.0
        den = np.prod([x - xi for xi in xps]) if xps else 1.0
        return num / den

    return P


def y_weight(walk, walk_p, m, r, s):
    """W(y) = prod (y - y_{r..r+m-2}) / prod (y - y'_{s-1..s+m-1})."""
    ys = [walk.y(r + j) for j in range(m - 1)]
    yps = [walk_p.y(s - 1 + j) for j in range(m + 1)]

    def W(y):
        num = np.prod([y - v for v in ys]) if ys else 1.0
        den = np.prod([y - v for v in yps])
        return num / den

    return W


def y_product(walk, walk_p, m, r, s):
    """Q_{m,r,s}(y) = prod (y - y_{r..r+m-1}) / prod (y - y'_{s..s+m-1})."""
    ys = [walk.y(r + j) for j in range(m)]
    yps = [walk_p.y(s + j) for j in range(m)]

    def Q(y):
        num = np.prod([y - v for v in ys]) if ys else 1.0
        den = np.prod([y - v for v in yps]) if yps else 1.0
        return num / den

    return Q


def x_weight_adjoint(walk, walk_p, m, r, s):
    """WA(x) = prod (x - x_{r+1..r+m-1}) / prod (x - x'_{s..s+m})."""
    xs = [walk.x(r + 1 + i) for i in range(m - 1)]
    xps = [walk_p.x(s + i) for i in range(m + 1)]

    def WA(x):
        num = np.prod([x - v for v in xs]) if xs else 1.0
        den = np.prod([x - v for v in xps])
        return num / den

    return WA


@dataclass
class ProductMapData:
    """C_{m,r,s}, the interpolation decomposition of D_{m,r,s}, and the
    agreement diagnostics."""

    m: int
    r: int
    s: int
    C: complex
    C_forms: tuple
    R: Poly            # the degree-1 interpolant R_{r,s}
    rho: complex
    rho_forms: tuple
    spread: float

    def D_of(self, y, walk=None, walk_p=None, y_rm1=None, yp_sm1=None):
        return self.C * (self.R(y)
                         + self.rho * (y - self._yrm1) * (y - self._ypsm1))

    # endpoint anchors stored at construction
    _yrm1: complex = 0.0
    _ypsm1: complex = 0.0


def _tangent_dy_dx(curve, xa, ya, x_other, y_other):
    """dy/dx at an on-curve point, written through the factorizations:
    2 xa Y2(ya) + Y1(ya) = Y2(ya)(xa - x_other) and
    2 ya X2(xa) + X1(xa) = X2(xa)(ya - y_other)."""
    Y2, X2 = curve.Y(2), curve.X(2)
    return -(xa - x_other) * Y2(ya) / ((ya - y_other) * X2(xa))


def product_map(walk: LatticeWalk, walk_p: LatticeWalk, m, r, s,
                spread_tol=C_SPREAD_TOL):
    """C_{m,r,s} by four independent routes, D_{m,r,s} as (C, R_rs, rho).

    Routes: endpoint evaluations of D P_{m,r,s} at y_{r-1} and y_{r+m-1},
    and tangent-residue evaluations at the double points y'_{s-1}, y'_{s+m-1}.
    """
    if m == 0:
        R = _interp_R(walk, walk_p, r, s)
        data = ProductMapData(0, r, s, 0.0, (0.0,) * 4, R, 0.0, (0.0, 0.0), 0.0)
        data._yrm1 = walk.y(r - 1)
        data._ypsm1 = walk_p.y(s - 1)
        return data
    curve = walk.curve
    if walk_p.curve is not curve and not np.allclose(walk_p.curve.c, curve.c):
        raise BreakdownError("walks live on different curves", where="divdiff")
    walk.ensure(r - 1, r + m)
    walk_p.ensure(s - 1, s + m)
    Y2, X2 = curve.Y(2), curve.X(2)
    P = x_product(walk, walk_p, m, r, s)
    W = y_weight(walk, walk_p, m, r, s)
    x = walk.x
    y = walk.y
    xp = walk_p.x
    yp = walk_p.y

    # (1) endpoint y_{r-1}: only P(x_{r-1}) survives in the difference
    _es = np.errstate(divide="ignore", invalid="ignore")
    _es.__enter__()
    c1 = -P(x(r - 1)) / ((x(r) - x(r - 1)) * Y2(y(r - 1)) * W(y(r - 1)))
    # (2) endpoint y_{r+m-1}
    c2 = P(x(r + m)) / ((x(r + m) - x(r + m - 1)) * Y2(y(r + m - 1))
                        * W(y(r + m - 1)))
    # (3) residue at y'_{s-1}, double point (x'_s, y'_{s-1})
    t3 = _tangent_dy_dx(curve, xp(s), yp(s - 1), xp(s - 1), yp(s))
    num3 = np.prod([xp(s) - x(r + i) for i in range(m)])
    den3 = np.prod([xp(s) - xp(s + i) for i in range(1, m)]) if m > 1 else 1.0
    res3 = (num3 / den3) * t3 / (xp(s) - xp(s - 1))
    wres3 = np.prod([yp(s - 1) - yp(s + j) for j in range(0, m)]) \
        / (Y2(yp(s - 1)) * (np.prod([yp(s - 1) - y(r + j) for j in range(m - 1)])
                            if m > 1 else 1.0))
    c3 = res3 * wres3
    # (4) residue at y'_{s+m-1}, double point (x'_{s+m-1}, y'_{s+m-1})
    t4 = _tangent_dy_dx(curve, xp(s + m - 1), yp(s + m - 1),
                        xp(s + m), yp(s + m - 2))
    num4 = np.prod([xp(s + m - 1) - x(r + i) for i in range(m)])
    den4 = np.prod([xp(s + m - 1) - xp(s + i) for i in range(0, m - 1)]) \
        if m > 1 else 1.0
    res4 = -(num4 / den4) * t4 / (xp(s + m) - xp(s + m - 1))
    wres4 = np.prod([yp(s + m - 1) - yp(s - 1 + j) for j in range(0, m)]) \
        / (Y2(yp(s + m - 1)) * (np.prod([yp(s + m - 1) - y(r + j)
                                         for j in range(m - 1)]) if m > 1 else 1.0))
    c4 = res4 * wres4
    _es.__exit__(None, None, None)

    forms = (complex(c1), complex(c2), complex(c3), complex(c4))
    # endpoint collisions between the two walks (x_{r-1} = x'_s and the
    # like) blow up individual forms; the redundancy covers for them
    finite = [f for f in forms if np.isfinite(f.real) and np.isfinite(f.imag)]
    if len(finite) < 2:
        raise BreakdownError(f"C_{{{m},{r},{s}}}: fewer than two usable "
                             "closed forms", where="divdiff")
    C = complex(np.mean(finite))
    spread = max(abs(f - C) for f in finite) / max(abs(C), 1e-300)
    if spread > spread_tol:
        raise BreakdownError(
            f"C_{{{m},{r},{s}}} four-way spread {spread:.3e}", where="divdiff")

    R = _interp_R(walk, walk_p, r, s)
    # rho from the two remaining endpoint relations (Dxn1) and (Dxpn)
    rho_a = ((x(r + m) - x(r + m - 1)) * Y2(y(r + m - 1)) / 2.0
             - R(y(r + m - 1))) / ((y(r + m - 1) - y(r - 1))
                                   * (y(r + m - 1) - yp(s - 1)))
    rho_b = (-(xp(s + m) - xp(s + m - 1)) * Y2(yp(s + m - 1)) / 2.0
             - R(yp(s + m - 1))) / ((yp(s + m - 1) - y(r - 1))
                                    * (yp(s + m - 1) - yp(s - 1)))
    rho = (rho_a + rho_b) / 2.0
    if abs(rho_a - rho_b) > spread_tol * max(abs(rho), 1.0):
        raise BreakdownError(
            f"rho_{{{m},{r},{s}}} two-way disagreement "
            f"{abs(rho_a - rho_b):.3e}", where="divdiff")
    data = ProductMapData(m, r, s, C, forms, R, complex(rho),
                          (complex(rho_a), complex(rho_b)), float(spread))
    data._yrm1 = y(r - 1)
    data._ypsm1 = yp(s - 1)
    return data


def _interp_R(walk, walk_p, r, s):
    """R_{r,s}: the linear interpolant with R(y_{r-1}) = -(x_r - x_{r-1})
    Y2(y_{r-1})/2 and R(y'_{s-1}) = (x'_s - x'_{s-1}) Y2(y'_{s-1})/2."""
    Y2 = walk.curve.Y(2)
    ya, yb = walk.y(r - 1), walk_p.y(s - 1)
    va = -(walk.x(r) - walk.x(r - 1)) * Y2(ya) / 2.0
    vb = (walk_p.x(s) - walk_p.x(s - 1)) * Y2(yb) / 2.0
    if abs(yb - ya) < 1e-12 * max(1.0, abs(ya), abs(yb)):
        # coinciding anchors (the walks interleave); only consistent
        # values admit an interpolant, which is then the constant
        if abs(vb - va) > 1e-9 * max(1.0, abs(va)):
            raise BreakdownError("interpolant anchors collide with "
                                 "inconsistent values", where="divdiff")
        return Poly((va,))
    slope = (vb - va) / (yb - ya)
    return Poly((va - slope * ya, slope))


def product_map_adjoint(walk: LatticeWalk, walk_p: LatticeWalk, m, r, s,
                        spread_tol=C_SPREAD_TOL):
    """C^dag_{m,r,s} by four routes plus the D^dag endpoint values.

    Returns (Cdag, forms, spread, endpoints) where endpoints maps the four
    anchor x-values to D^dag there.
    """
    curve = walk.curve
    walk.ensure(r - 1, r + m + 1)
    walk_p.ensure(s - 1, s + m + 1)
    Y2, X2 = curve.Y(2), curve.X(2)
    Q = y_product(walk, walk_p, m, r, s)
    WA = x_weight_adjoint(walk, walk_p, m, r, s)
    x, y, xp, yp = walk.x, walk.y, walk_p.x, walk_p.y

    # (1) at x_r: Q(y_r) = 0 leaves +Q(y_{r-1})/(y_r - y_{r-1})
    c1 = Q(y(r - 1)) / ((y(r) - y(r - 1)) * X2(x(r)) * WA(x(r)))
    # (2) at x_{r+m}: Q(y_{r+m-1}) = 0 leaves -Q(y_{r+m})/(y_{r+m}-y_{r+m-1})
    c2 = -Q(y(r + m)) / ((y(r + m) - y(r + m - 1)) * X2(x(r + m))
                         * WA(x(r + m)))
    # (3) residue at x'_s, double point (x'_s, y'_s); dx/dy there
    s3 = 1.0 / _tangent_dy_dx(curve, xp(s), yp(s), xp(s + 1), yp(s - 1))
    num3 = np.prod([yp(s) - y(r + j) for j in range(m)])
    den3 = np.prod([yp(s) - yp(s + j) for j in range(1, m)]) if m > 1 else 1.0
    res3 = -(num3 / den3) * s3 / (yp(s) - yp(s - 1))
    w3 = np.prod([xp(s) - xp(s + i) for i in range(1, m + 1)]) \
        / (X2(xp(s)) * (np.prod([xp(s) - x(r + 1 + i) for i in range(m - 1)])
                        if m > 1 else 1.0))
    c3 = res3 * w3
    # (4) residue at x'_{s+m}, double point (x'_{s+m}, y'_{s+m-1})
    s4 = 1.0 / _tangent_dy_dx(curve, xp(s + m), yp(s + m - 1),
                              xp(s + m - 1), yp(s + m))
    num4 = np.prod([yp(s + m - 1) - y(r + j) for j in range(m)])
    den4 = np.prod([yp(s + m - 1) - yp(s + j) for j in range(0, m - 1)]) \
        if m > 1 else 1.0
    res4 = (num4 / den4) * s4 / (yp(s + m) - yp(s + m - 1))
    w4 = np.prod([xp(s + m) - xp(s + i) for i in range(0, m)]) \
        / (X2(xp(s + m)) * (np.prod([xp(s + m) - x(r + 1 + i)
                                     for i in range(m - 1)]) if m > 1 else 1.0))
    c4 = res4 * w4

    forms = (complex(c1), complex(c2), complex(c3), complex(c4))
    C = complex(np.mean(forms))
    spread = max(abs(f - C) for f in forms) / max(abs(C), 1e-300)
    if spread > spread_tol:
        raise BreakdownError(
            f"Cdag_{{{m},{r},{s}}} four-way spread {spread:.3e}",
            where="divdiff")
    endpoints = {
        "x_r": (y(r) - y(r - 1)) * C * X2(x(r)) / 2.0,
        "x_r+m": -(y(r + m) - y(r + m - 1)) * C * X2(x(r + m)) / 2.0,
        "xp_s": -(yp(s) - yp(s - 1)) * C * X2(xp(s)) / 2.0,
        "xp_s+m": (yp(s + m) - yp(s + m - 1)) * C * X2(xp(s + m)) / 2.0,
    }
    return C, forms, float(spread), endpoints


def slopes_ratio_check(walk, walk_p, m, r, s):
    """C_{m+1}/C_m against the two cross-ratio forms of the slopes identity."""
    Cm = product_map(walk, walk_p, m, r, s).C
    Cm1 = product_map(walk, walk_p, m + 1, r, s).C
    x, y, xp, yp = walk.x, walk.y, walk_p.x, walk_p.y
    f1 = ((y(r - 1) - yp(s + m)) * (x(r - 1) - x(r + m))) \
        / ((y(r - 1) - y(r + m - 1)) * (x(r - 1) - xp(s + m)))
    f2 = ((xp(s) - x(r + m)) * (yp(s - 1) - yp(s + m))) \
        / ((xp(s) - xp(s + m)) * (yp(s - 1) - y(r + m - 1)))
    got = Cm1 / Cm
    return got, f1, f2


def pp_ratio(walk, walk_p, m, r, s, n):
    """P(x_{n+1})/P(x_n) by the (R, rho) formula vs. direct evaluation."""
    data = product_map(walk, walk_p, m, r, s)
    Y2 = walk.curve.Y(2)
    yn = walk.y(n)
    dx = walk.x(n + 1) - walk.x(n)
    core = data.R(yn) + data.rho * (yn - data._yrm1) * (yn - data._ypsm1)
    formula = (core + dx * Y2(yn) / 2.0) / (core - dx * Y2(yn) / 2.0)
    P = x_product(walk, walk_p, m, r, s)
    pn = P(walk.x(n))
    if abs(pn) == 0.0:
        raise BreakdownError("P vanishes at x_n", where="divdiff", index=n)
    direct = P(walk.x(n + 1)) / pn
    return formula, direct


def rational_fit_degree(xs, vals, max_degree, rel_tol=1e-7):
    """Smallest d <= max_degree such that vals fit N(y)/D(y), deg N, D <= d.

    Homogeneous least squares on N(y_i) - vals_i D(y_i) = 0 with a rank
    check; returns (degree or None, residual of the best fit).
    """
    xs = np.asarray(xs, dtype=complex)
    vals = np.asarray(vals, dtype=complex)
    best = None
    for d in range(0, max_degree + 1):
        cols = []
        for k in range(d + 1):
            cols.append(xs ** k)
        for k in range(d + 1):
            cols.append(-vals * xs ** k)
        A = np.array(cols).T
        if A.shape[0] < A.shape[1] + 1:
            continue
        _, sv, Vh = np.linalg.svd(A)
        resid = sv[-1] / max(sv[0], 1e-300)
        best = (d, float(resid))
        if resid < rel_tol:
            return best
    return (None, best[1] if best else 1.0)

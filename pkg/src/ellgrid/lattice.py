"""Lattice walks on a biquadratic curve.

A walk is seeded by (x0, branch); after the single quadratic solve of the
seed, both directions extend through the sum-of-roots recurrence only.  The
cache is bidirectional and grows on demand.
"""

from __future__ import annotations

import numpy as np

from .algebra import Poly
from .biquadratic import BiquadraticCurve, EulerPolynomial, euler_polynomial
from .errors import BreakdownError, PoleError, INF_POINT

POLE_TOL = 1e-12
ROOT_RESIDUAL_TOL = 1e-9


def seed(curve: BiquadraticCurve, x0, branch="plus"):
    """The two y-roots of F(x0, y) = 0 as (y_minus1, y0).

    branch selects which determination of sqrt(P(x0)) becomes y0:
    y0 = (-X1(x0) + s*sqrt(P(x0))) / (2 X2(x0)) with s = +1 for "plus".
    """
    x0 = complex(x0)
    X0, X1, X2 = curve.X(0), curve.X(1), curve.X(2)
    a, b = X2(x0), X1(x0)
    scale = curve.norm() * max(1.0, abs(x0)) ** 2
    if abs(a) < POLE_TOL * scale:
        if abs(b) < POLE_TOL * scale:
            raise BreakdownError("X2(x0) = X1(x0) = 0: degenerate seed",
                                 where="lattice")
        y_only = -X0(x0) / b
        raise PoleError(f"X2(x0) = 0: single root y = {y_only}", where="lattice")
    s = 1.0 if branch == "plus" else -1.0
    root = np.sqrt(complex(curve.discriminant_x()(x0)))
    y0 = (-b + s * root) / (2.0 * a)
    ym1 = (-b - s * root) / (2.0 * a)
    return ym1, y0


class LatticeWalk:
    """Cached bidirectional sequence (x_n, y_n), n in Z.

    Invariants: F(x_n, y_n) = 0 and F(x_{n+1}, y_n) = 0.  Extension is
    sequential; pre-extend before sharing read-only across threads.
    """

    def __init__(self, curve: BiquadraticCurve, x0, branch="plus"):
        self.curve = curve
        self.branch = branch
        self._X1, self._X2 = curve.X(1), curve.X(2)
        self._Y1, self._Y2 = curve.Y(1), curve.Y(2)
        ym1, y0 = seed(curve, x0, branch)
        self._xs = {0: complex(x0)}
        self._ys = {0: y0, -1: ym1}
        self._lo, self._hi = 0, 0  # extent of x-cache

    # -- stepping -----------------------------------------------------------
    def _y_pole_guard(self, y, k):
        scale = self.curve.norm() * max(1.0, abs(y)) ** 2
        if abs(self._Y2(y)) < POLE_TOL * scale:
            raise PoleError("Y2(y) = 0 while stepping", where="lattice", index=k)

    def _x_pole_guard(self, x, k):
        scale = self.curve.norm() * max(1.0, abs(x)) ** 2
        if abs(self._X2(x)) < POLE_TOL * scale:
            raise PoleError("X2(x) = 0 while stepping", where="lattice", index=k)

    def _extend_forward(self):
        n = self._hi
        xn, yn = self._xs[n], self._ys[n]
        self._y_pole_guard(yn, n)
        xn1 = -self._Y1(yn) / self._Y2(yn) - xn
        self._x_pole_guard(xn1, n + 1)
        yn1 = -self._X1(xn1) / self._X2(xn1) - yn
        self._xs[n + 1] = xn1
        self._ys[n + 1] = yn1
        self._hi = n + 1

    def _extend_backward(self):
        n = self._lo
        xn = self._xs[n]
        ynm1 = self._ys[n - 1]
        self._y_pole_guard(ynm1, n - 1)
        xnm1 = -self._Y1(ynm1) / self._Y2(ynm1) - xn
        self._x_pole_guard(xnm1, n - 1)
        ynm2 = -self._X1(xnm1) / self._X2(xnm1) - ynm1
        self._xs[n - 1] = xnm1
        self._ys[n - 2] = ynm2
        self._lo = n - 1

    def ensure(self, lo, hi):
        while self._hi < hi:
            self._extend_forward()
        while self._lo > lo:
            self._extend_backward()
        return self

    def x(self, n):
        self.ensure(min(n, 0), max(n, 0))
        return self._xs[n]

    def y(self, n):
        # _ys is defined on [_lo - 1, _hi]
        self.ensure(min(n, 0), max(n, 0))
        return self._ys[n]

    def point(self, n):
        return self.x(n), self.y(n)

    def advance(self, n):
        """(x_n, y_n); alias for point() matching the operation name."""
        return self.point(n)

    def residual_check(self, lo, hi, rel_tol=1e-8):
        """max residual of F(x_n,y_n) and F(x_{n+1},y_n) over the range."""
        self.ensure(lo, hi + 1)
        worst = 0.0
        for n in range(lo, hi + 1):
            xn, yn = self.point(n)
            xn1 = self.x(n + 1)
            for xx in (xn, xn1):
                r = abs(self.curve(xx, yn)) / self.curve.scale_at(xx, yn)
                worst = max(worst, r)
        if worst > rel_tol:
            raise BreakdownError(f"walk residual {worst:.3e} > {rel_tol}",
                                 where="lattice")
        return worst


# -- E-polynomial driven machinery ---------------------------------------------

def sqrt_step_functions(euler: EulerPolynomial, P: Poly):
    """(R, S, sigma) with x_{n +/- 1} = R(x) +/- S(x) sqrt(P(x)).

    R = -(e12 x^2 + e11 x + e01) / (2 den), S = sigma / den, where den is the
    sumprodE denominator and sigma^2 P = (e12 x^2+e11 x+e01)^2 - 4(...)(...).
    """
    e = euler.e
    den = euler.sum_product_denominator()
    num_sum = Poly((e[0, 1], e[1, 1], e[1, 2]))
    num_prod = Poly((e[0, 0], e[0, 1], e[0, 2]))
    bracket = num_sum * num_sum - 4.0 * num_prod * den
    cP = bracket.exact_div(P, rel_tol=1e-7, where="lattice")
    if cP.degree > 0:
        raise BreakdownError("E-derived quartic not proportional to P",
                             where="lattice")
    sigma = np.sqrt(complex(cP.coeff(0))) / 2.0
    return num_sum, den, sigma


def advance_sqrt(walk: LatticeWalk, n, euler: EulerPolynomial | None = None):
    """x_{n+1} from x_n by the direct-formula square-root step.

    The two determinations R(x_n) +/- S(x_n) sqrt(P(x_n)) are x_{n+1} and
    x_{n-1}; the forward branch is the one that is not x_{n-1}.  At a zero
    of P the two coincide (mirror point) and x_{n+1} = x_n is returned.
    """
    if euler is None:
        euler = euler_polynomial(walk.curve)
    P = walk.curve.discriminant_x()
    num_sum, den, sigma = sqrt_step_functions(euler, P)
    xn = walk.x(n)
    d = den(xn)
    if abs(d) < POLE_TOL * max(1.0, euler.norm() * max(1.0, abs(xn)) ** 2):
        raise PoleError("sumprodE denominator vanished", where="lattice", index=n)
    R = -num_sum(xn) / (2.0 * d)
    root = np.sqrt(complex(P(xn)))
    S = sigma / d
    scale = max(1.0, abs(R))
    if abs(S * root) < 1e-9 * scale:
        # mirror configuration: the determinations coincide and the walk
        # bounces, x_{n+1} = x_{n-1} = R(x_n)
        return R
    cand = (R + S * root, R - S * root)
    prev = walk.x(n - 1)
    return max(cand, key=lambda z: abs(z - prev))


def fixed_points(curve: BiquadraticCurve):
    """Roots of E(x,x) = 0 classified mirror / true_fixed.

    true_fixed requires x to be a double root of P; degree deficiency of
    E(x,x) puts roots at infinity, classified against deg P <= 2.
    """
    euler = euler_polynomial(curve)
    diag = euler.diagonal().trim(1e-9)
    P = curve.discriminant_x().trim(1e-9)
    proots = P.roots()
    out = []
    seen = []
    for root in diag.roots():
        root = complex(root)
        if any(abs(root - s) < 1e-8 * (1.0 + abs(s)) for s in seen):
            continue
        seen.append(root)
        dists = sorted(abs(pr - root) for pr in proots)
        cluster = 1e-6 * (1.0 + abs(root))
        double = len(dists) >= 2 and dists[0] < cluster and dists[1] < cluster
        out.append((root, "true_fixed" if double else "mirror"))
    if diag.degree < 4:
        kind = "true_fixed" if P.degree <= 2 else "mirror"
        out.append((INF_POINT, kind))
    return out


def chi_ratio(walk: LatticeWalk, n, euler: EulerPolynomial | None = None):
    """chi_n = (x_{n+1} - x_{n-1}) / (y_n - y_{n-1})."""
    dy = walk.y(n) - walk.y(n - 1)
    if dy == 0:
        raise BreakdownError("y_n = y_{n-1} in chi ratio", where="lattice", index=n)
    return (walk.x(n + 1) - walk.x(n - 1)) / dy


def chi_closed_form(walk: LatticeWalk, euler: EulerPolynomial):
    """const * X2(x) / (e22 x^2 + e12 x + e02); the constant is pinned at n=1."""
    X2 = walk.curve.X(2)
    den = euler.sum_product_denominator()
    x1 = walk.x(1)
    const = chi_ratio(walk, 1) * den(x1) / X2(x1)

    def closed(n):
        xn = walk.x(n)
        return const * X2(xn) / den(xn)

    return closed


# -- special lattice factories ----------------------------------------------

class SpecialLatticeSpec:
    """A named closed-form lattice bundled with its curve and seed."""

    def __init__(self, kind, curve, x0, branch, closed_form, params):
        self.kind = kind
        self.curve = curve
        self.x0 = x0
        self.branch = branch
        self.closed_form = closed_form
        self.params = params

    def walk(self):
        return LatticeWalk(self.curve, self.x0, self.branch)

    def verify(self, lo=-8, hi=8, rel_tol=1e-9):
        w = self.walk()
        worst = 0.0
        for n in range(lo, hi + 1):
            got = w.x(n)
            want = self.closed_form(n)
            worst = max(worst, abs(got - want) / max(1.0, abs(want)))
        if worst > rel_tol:
            raise BreakdownError(
                f"{self.kind} closed form mismatch {worst:.3e}", where="lattice")
        return worst


def _pick_branch(curve, x0, closed_form):
    for branch in ("plus", "minus"):
        w = LatticeWalk(curve, x0, branch)
        if abs(w.x(1) - closed_form(1)) <= 1e-6 * max(1.0, abs(closed_form(1))):
            return branch
    raise BreakdownError("neither branch matches the closed form", where="lattice")


def arithmetic_lattice(h, x0=0.0):
    """F = (y - x)(y - x - h): x_n = x0 + n h."""
    h, x0 = complex(h), complex(x0)
    grid = np.zeros((3, 3), dtype=complex)
    # (y-x)(y-x-h) = x^2 + y^2 - 2xy + hx - hy
    grid[2, 0] = 1.0
    grid[0, 2] = 1.0
    grid[1, 1] = -2.0
    grid[1, 0] = h
    grid[0, 1] = -h
    curve = BiquadraticCurve(grid)
    closed = lambda n: x0 + n * h
    return SpecialLatticeSpec("arithmetic", curve, x0,
                              _pick_branch(curve, x0, closed), closed,
                              {"h": h, "x0": x0})


def geometric_lattice(q, xstar=0.0, x0=1.0):
    """Two lines (y - qx - b)(y - x) with b = xstar (1 - q):
    x_n = xstar + q^n (x0 - xstar)."""
    q, xstar, x0 = complex(q), complex(xstar), complex(x0)
    b = xstar * (1.0 - q)
    grid = np.zeros((3, 3), dtype=complex)
    # (y - qx - b)(y - x) = y^2 - (q+1)xy + q x^2 - b y + b x
    grid[0, 2] = 1.0
    grid[1, 1] = -(q + 1.0)
    grid[2, 0] = q
    grid[0, 1] = -b
    grid[1, 0] = b
    curve = BiquadraticCurve(grid)
    closed = lambda n: xstar + q ** n * (x0 - xstar)
    return SpecialLatticeSpec("geometric", curve, x0,
                              _pick_branch(curve, x0, closed), closed,
                              {"q": q, "xstar": xstar, "x0": x0})


def quadratic_lattice(a, b, c):
    """Wilson-type: x_n = a n^2 + b n + c, companion y at half-integers."""
    a, b, c = complex(a), complex(b), complex(c)
    Y2 = Poly.one()
    Y1 = Poly((-a / 2.0, -2.0))
    # Y0(y) = (y + a/4)^2 - a(y - c) - b^2/4
    Y0 = Poly((a * a / 16.0 + a * c - b * b / 4.0, a / 2.0 - a, 1.0))
    curve = BiquadraticCurve.from_y_view(Y0, Y1, Y2)
    closed = lambda n: a * n * n + b * n + c
    return SpecialLatticeSpec("quadratic", curve, c,
                              _pick_branch(curve, c, closed), closed,
                              {"a": a, "b": b, "c": c})


def trigonometric_lattice(theta0, thetastar, a, b, c, d):
    """Conic/NSU: x_n = b + a cos(theta0 + (2n-1) theta*),
    y_n = d + c cos(theta0 + 2n theta*)."""
    t0, ts = complex(theta0), complex(thetastar)
    a, b, c, d = complex(a), complex(b), complex(c), complex(d)
    sin_ts, tan_ts = np.sin(ts), np.tan(ts)
    # F = ((x-b)/(a sin t*) - (y-d)/(c tan t*))^2 + ((y-d)/c)^2 - 1
    u = Poly((-b, 1.0)) / (a * sin_ts)
    v = Poly((-d, 1.0)) / (c * tan_ts)
    w = Poly((-d, 1.0)) / c
    grid = np.zeros((3, 3), dtype=complex)
    # expand (u(x) - v(y))^2 + w(y)^2 - 1
    for i in range(2):
        for i2 in range(2):
            grid[i + i2, 0] += u.coeff(i) * u.coeff(i2)
    for j in range(2):
        for j2 in range(2):
            grid[0, j + j2] += v.coeff(j) * v.coeff(j2) + w.coeff(j) * w.coeff(j2)
    for i in range(2):
        for j in range(2):
            grid[i, j] += -2.0 * u.coeff(i) * v.coeff(j)
    grid[0, 0] -= 1.0
    curve = BiquadraticCurve(grid)
    closed = lambda n: b + a * np.cos(t0 + (2 * n - 1) * ts)
    x0 = closed(0)
    return SpecialLatticeSpec("trigonometric", curve, x0,
                              _pick_branch(curve, x0, closed), closed,
                              {"theta0": t0, "thetastar": ts,
                               "a": a, "b": b, "c": c, "d": d})

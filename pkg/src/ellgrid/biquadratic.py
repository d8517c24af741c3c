"""Biquadratic curves F(x,y) = sum c_ij x^i y^j, 0 <= i,j <= 2.

The coefficient grid is the single source of truth; the directional views
X_0..X_2 (coefficients of y^j, polynomials in x) and Y_0..Y_2 (coefficients
of x^i, polynomials in y) are read off it.  The laboratory builder
reconstructs a curve from a quartic discriminant P by prescribing the
vertical asymptotes u, v and square-root determinations there.
"""

from __future__ import annotations

import json

import numpy as np

from .algebra import Poly
from .errors import BreakdownError, PoleError

VIEW_REASSEMBLY_TOL = 1e-12
EXACT_DIV_TOL = 1e-9
RESULTANT_DROP_TOL = 1e-9
ON_CURVE_TOL = 1e-6


class BiquadraticCurve:
    """3x3 grid c[i][j] multiplying x^i y^j."""

    __slots__ = ("c",)

    def __init__(self, grid):
        c = np.asarray(grid, dtype=complex)
        if c.shape != (3, 3):
            raise ValueError("biquadratic grid must be 3x3")
        if np.max(np.abs(c)) == 0.0:
            raise BreakdownError("identically zero biquadratic", where="biquadratic")
        self.c = c.copy()
        self.c.setflags(write=False)

    # -- views ---------------------------------------------------------------
    def X(self, j):
        """Coefficient of y^j: polynomial in x."""
        return Poly(self.c[:, j])

    def Y(self, i):
        """Coefficient of x^i: polynomial in y."""
        return Poly(self.c[i, :])

    def views(self):
        """(X0, X1, X2, Y0, Y1, Y2, P, Q)."""
        return (self.X(0), self.X(1), self.X(2),
                self.Y(0), self.Y(1), self.Y(2),
                self.discriminant_x(), self.discriminant_y())

    def discriminant_x(self):
        """P = X1^2 - 4 X0 X2, degree <= 4 in x."""
        return self.X(1) * self.X(1) - 4.0 * self.X(0) * self.X(2)

    def discriminant_y(self):
        """Q = Y1^2 - 4 Y0 Y2, degree <= 4 in y."""
        return self.Y(1) * self.Y(1) - 4.0 * self.Y(0) * self.Y(2)

    # -- evaluation ------------------------------------------------------------
    def __call__(self, x, y):
        x, y = complex(x), complex(y)
        xs = np.array([1.0, x, x * x])
        ys = np.array([1.0, y, y * y])
        return complex(xs @ self.c @ ys)

    def scale_at(self, x, y):
        """Residual scale: max|c_ij| * max(1,|x|,|y|)^4."""
        m = max(1.0, abs(x), abs(y))
        return float(np.max(np.abs(self.c))) * m ** 4

    def on_curve(self, x, y, rel_tol=ON_CURVE_TOL):
        return abs(self(x, y)) <= rel_tol * self.scale_at(x, y)

    def norm(self):
        return float(np.max(np.abs(self.c)))

    # -- constructors -----------------------------------------------------------
    @staticmethod
    def from_x_view(X0: Poly, X1: Poly, X2: Poly):
        grid = np.zeros((3, 3), dtype=complex)
        for j, p in enumerate((X0, X1, X2)):
            if p.degree > 2:
                raise ValueError("x-view polynomial of degree > 2")
            for i in range(p.degree + 1):
                grid[i, j] = p.coeff(i)
        return BiquadraticCurve(grid)

    @staticmethod
    def from_y_view(Y0: Poly, Y1: Poly, Y2: Poly):
        grid = np.zeros((3, 3), dtype=complex)
        for i, p in enumerate((Y0, Y1, Y2)):
            if p.degree > 2:
                raise ValueError("y-view polynomial of degree > 2")
            for j in range(p.degree + 1):
                grid[i, j] = p.coeff(j)
        return BiquadraticCurve(grid)

    def transpose(self):
        """The curve G(x,y) = F(y,x) governing the companion y-lattice."""
        return BiquadraticCurve(self.c.T)

    def mobius_x(self, alpha, beta, gamma):
        """Curve in xi where xi = (alpha x + beta)/(1 + gamma x).

        Substitutes x = (xi - beta)/(alpha - gamma xi) and clears the two
        denominator powers, staying biquadratic.
        """
        return self._mobius(alpha, beta, gamma, axis="x")

    def mobius_y(self, alpha, beta, gamma):
        return self._mobius(alpha, beta, gamma, axis="y")

    def _mobius(self, alpha, beta, gamma, axis):
        num = Poly((-beta, 1.0))          # xi - beta
        den = Poly((alpha, -gamma))       # alpha - gamma xi
        grid = np.zeros((3, 3), dtype=complex)
        src = self.c if axis == "x" else self.c.T
        out = [[Poly(()) for _ in range(3)] for _ in range(3)]
        for i in range(3):
            w = Poly.one()
            for _ in range(i):
                w = w * num
            for _ in range(2 - i):
                w = w * den
            for j in range(3):
                out[i][j] = w * src[i, j]
        acc = [Poly(()) for _ in range(3)]
        for j in range(3):
            for i in range(3):
                acc[j] = acc[j] + out[i][j]
        for j in range(3):
            p = acc[j].trim()
            if p.degree > 2:
                raise BreakdownError("Moebius image not biquadratic", where="biquadratic")
            for i in range(p.degree + 1):
                grid[i, j] = p.coeff(i)
        cur = BiquadraticCurve(grid if axis == "x" else grid.T)
        return cur

    # -- serialization -------------------------------------------------------
    def to_json(self):
        return {"c": [[[self.c[i, j].real, self.c[i, j].imag] for j in range(3)]
                      for i in range(3)]}

    @staticmethod
    def from_json(obj):
        raw = obj["c"]
        grid = np.array([[complex(raw[i][j][0], raw[i][j][1]) for j in range(3)]
                         for i in range(3)])
        return BiquadraticCurve(grid)

    def to_json_str(self):
        return json.dumps(self.to_json())


def build_from_discriminant(P: Poly, u, v, sign_u=1, sign_v=1, shift=0.0):
    """Laboratory construction: X2 = (x-u)(x-v), X1 interpolates the chosen
    square-root determinations of P at u and v (plus shift * X2), X0 closes
    the identity X1^2 - 4 X0 X2 = P by exact division."""
    u, v = complex(u), complex(v)
    if abs(u - v) <= 1e-14 * max(1.0, abs(u), abs(v)):
        raise BreakdownError("coincident asymptotes u = v", where="biquadratic")
    Pu, Pv = P(u), P(v)
    scaleP = P.norm() * max(1.0, abs(u), abs(v)) ** 4
    if abs(Pu) < 1e-13 * scaleP or abs(Pv) < 1e-13 * scaleP:
        raise BreakdownError("P vanishes at an asymptote", where="biquadratic")
    su = complex(sign_u) * np.sqrt(complex(Pu))
    sv = complex(sign_v) * np.sqrt(complex(Pv))
    X2 = Poly.from_roots([u, v])
    # linear interpolant of (u, su), (v, sv)
    slope = (sv - su) / (v - u)
    X1 = Poly((su - slope * u, slope)) + complex(shift) * X2
    X0 = (X1 * X1 - P).exact_div(4.0 * X2, rel_tol=EXACT_DIV_TOL,
                                where="biquadratic")
    curve = BiquadraticCurve.from_x_view(X0, X1, X2)
    resid = (curve.discriminant_x() - P).norm()
    if resid > EXACT_DIV_TOL * max(P.norm(), 1.0):
        raise BreakdownError(
            f"discriminant reconstruction residual {resid:.3e}", where="biquadratic")
    return curve


class EulerPolynomial:
    """Symmetric biquadratic E(x,z) relating x_{n-1} and x_{n+1} through x_n."""

    __slots__ = ("e",)

    def __init__(self, grid):
        e = np.asarray(grid, dtype=complex)
        if e.shape != (3, 3):
            raise ValueError("Euler grid must be 3x3")
        if not np.array_equal(e, e.T):
            raise ValueError("Euler grid must be exactly symmetric")
        self.e = e.copy()
        self.e.setflags(write=False)

    def __call__(self, x, z):
        x, z = complex(x), complex(z)
        xs = np.array([1.0, x, x * x])
        zs = np.array([1.0, z, z * z])
        return complex(xs @ self.e @ zs)

    def conic_coeffs(self):
        """Coefficients of the R-conic in (Sigma, Pi) = (x+z, xz):
        e00 + e01*S + e02*S^2 + (e11 - 2 e02)*Pi + e12*S*Pi + e22*Pi^2."""
        e = self.e
        return (complex(e[0, 0]), complex(e[0, 1]), complex(e[0, 2]),
                complex(e[1, 1] - 2.0 * e[0, 2]), complex(e[1, 2]),
                complex(e[2, 2]))

    def sum_product_denominator(self):
        """e22 x^2 + e12 x + e02, the common denominator of sumprodE."""
        return Poly((self.e[0, 2], self.e[1, 2], self.e[2, 2]))

    def diagonal(self):
        """E(x,x) as a polynomial of degree <= 4."""
        out = np.zeros(5, dtype=complex)
        for i in range(3):
            for j in range(3):
                out[i + j] += self.e[i, j]
        return Poly(out)

    def norm(self):
        return float(np.max(np.abs(self.e)))


def _poly2_mul(a, b):
    """Multiply small polynomials in two variables stored as 2-D grids."""
    out = np.zeros((a.shape[0] + b.shape[0] - 1, a.shape[1] + b.shape[1] - 1),
                   dtype=complex)
    for (i, j), va in np.ndenumerate(a):
        if va != 0:
            out[i: i + b.shape[0], j: j + b.shape[1]] += va * b
    return out


def _det4_poly2(m):
    """Determinant of a 4x4 matrix of 2-variable polynomial grids."""
    def det(rows, cols):
        if len(rows) == 1:
            return m[rows[0]][cols[0]]
        acc = np.zeros((1, 1), dtype=complex)
        for k, col in enumerate(cols):
            minor = det(rows[1:], cols[:k] + cols[k + 1:])
            term = _poly2_mul(m[rows[0]][col], minor)
            sign = -1.0 if k % 2 else 1.0
            hi = np.zeros((max(acc.shape[0], term.shape[0]),
                           max(acc.shape[1], term.shape[1])), dtype=complex)
            hi[: acc.shape[0], : acc.shape[1]] += acc
            hi[: term.shape[0], : term.shape[1]] += sign * term
            acc = hi
        return acc
    return det([0, 1, 2, 3], [0, 1, 2, 3])


def euler_polynomial(curve: BiquadraticCurve):
    """Eliminate y between the sum and product relations by the 4x4
    bigradient determinant, expanded in (Sigma, Pi).

    The Sigma^2 Pi^2, Sigma^2 Pi and Sigma Pi^2 coefficients vanish on paper;
    they are asserted tiny and dropped.
    """
    c = curve.c
    # P1(y) = Sigma*Y2(y) + Y1(y): coefficients linear in Sigma
    # P2(y) = Pi*Y2(y) - Y0(y):   coefficients linear in Pi
    def lin_sigma(j):
        g = np.zeros((2, 1), dtype=complex)
        g[0, 0] = c[1, j]
        g[1, 0] = c[2, j]
        return g

    def lin_pi(j):
        g = np.zeros((1, 2), dtype=complex)
        g[0, 0] = -c[0, j]
        g[0, 1] = c[2, j]
        return g

    zero = np.zeros((1, 1), dtype=complex)
    a0, a1, a2 = lin_sigma(0), lin_sigma(1), lin_sigma(2)
    b0, b1, b2 = lin_pi(0), lin_pi(1), lin_pi(2)
    m = [[a0, a1, a2, zero],
         [zero, a0, a1, a2],
         [b0, b1, b2, zero],
         [zero, b0, b1, b2]]
    det = _det4_poly2(m)  # grid in (Sigma-power, Pi-power)
    full = np.zeros((3, 3), dtype=complex)
    full[: det.shape[0], : det.shape[1]] = det
    scale = float(np.max(np.abs(full)))
    if scale == 0.0:
        raise BreakdownError("identically-zero resultant: degenerate curve",
                             where="biquadratic")
    for (i, j) in ((2, 2), (2, 1), (1, 2)):
        if abs(full[i, j]) > RESULTANT_DROP_TOL * scale:
            raise BreakdownError(
                f"resultant Sigma^{i} Pi^{j} coefficient did not vanish "
                f"({abs(full[i, j]):.3e} vs scale {scale:.3e})",
                where="biquadratic")
        full[i, j] = 0.0
    # R(S,Pi) = k00 + k10 S + k20 S^2 + k01 Pi + k11 S Pi + k02 Pi^2
    k00, k10, k20 = full[0, 0], full[1, 0], full[2, 0]
    k01, k11, k02 = full[0, 1], full[1, 1], full[0, 2]
    # E = e00 + e01 (x+z) + e02 (x^2+z^2) + e11 xz + e12 xz(x+z) + e22 x^2z^2
    # against R = k00 + k10 S + k20 S^2 + k01 Pi + k11 S Pi + k02 Pi^2
    e = np.zeros((3, 3), dtype=complex)
    e[0, 0] = k00
    e[0, 1] = e[1, 0] = k10
    e[0, 2] = e[2, 0] = k20
    e[1, 1] = k01 + 2.0 * k20       # e11 - 2 e02 = k01
    e[1, 2] = e[2, 1] = k11
    e[2, 2] = k02
    nrm = np.max(np.abs(e))
    return EulerPolynomial(e / nrm)


def tangent_slope(curve: BiquadraticCurve, x, y):
    """dy/dx on the curve at an on-curve point; vertical tangents flagged."""
    x, y = complex(x), complex(y)
    if not curve.on_curve(x, y):
        raise BreakdownError(
            f"point ({x}, {y}) not on curve (residual {abs(curve(x, y)):.3e})",
            where="biquadratic")
    X1, X2 = curve.X(1), curve.X(2)
    Y1, Y2 = curve.Y(1), curve.Y(2)
    den = 2.0 * y * X2(x) + X1(x)
    num = 2.0 * x * Y2(y) + Y1(y)
    scale = curve.norm() * max(1.0, abs(x), abs(y)) ** 3
    if abs(den) < 1e-10 * scale:
        raise PoleError("vertical tangent", where="biquadratic")
    return -num / den

"""Dense polynomial and rational-function arithmetic over complex scalars.

Coefficients are ascending-degree complex arrays.  Arithmetic is exact up to
floating rounding: nothing is dropped silently.  Trimming against the drop
tolerance happens only where a caller asks for it (`Poly.trim`), which the
higher modules invoke after divisions that are exact on paper.
"""

from __future__ import annotations

import numpy as np

from .errors import BreakdownError, PoleError, INF_POINT

DROP_TOL = 1e-10  # relative, against max |coeff| of the polynomial


_LONG_COMPLEX = getattr(np, "complex256", None)


def _as_coeff_array(coeffs):
    raw = np.atleast_1d(np.asarray(coeffs)).ravel()
    # object arrays (exact rationals) and extended precision keep their
    # dtype; everything else is complex128
    if raw.dtype == object:
        a = raw
    elif _LONG_COMPLEX is not None and raw.dtype in (np.longdouble,
                                                     _LONG_COMPLEX):
        a = raw.astype(_LONG_COMPLEX)
    else:
        a = raw.astype(complex)
    if a.size == 0:
        return np.zeros(0, dtype=a.dtype)
    if a.dtype != object and not np.all(np.isfinite(a)):
        raise BreakdownError("non-finite polynomial coefficient", where="algebra")
    # strip trailing exact zeros only; tolerance-based trims are explicit
    n = a.size
    while n > 0 and a[n - 1] == 0:
        n -= 1
    return a[:n].copy()


class Poly:
    """Immutable dense polynomial, ascending coefficients, complex."""

    __slots__ = ("c",)

    def __init__(self, coeffs=()):
        object.__setattr__(self, "c", _as_coeff_array(coeffs))
        self.c.setflags(write=False)

    def __setattr__(self, *_):
        raise AttributeError("Poly is immutable")

    # -- constructors -----------------------------------------------------
    @staticmethod
    def zero():
        return Poly(())

    @staticmethod
    def one():
        return Poly((1.0,))

    @staticmethod
    def x():
        return Poly((0.0, 1.0))

    @staticmethod
    def from_roots(roots, lead=1.0):
        p = Poly((lead,))
        for r in roots:
            p = p * Poly((-r, 1.0))
        return p

    @staticmethod
    def constant(v):
        return Poly((v,))

    # -- basic queries -----------------------------------------------------
    @property
    def degree(self):
        """Degree; -1 for the zero polynomial."""
        return self.c.size - 1

    def is_zero(self, tol=0.0):
        if self.c.size == 0:
            return True
        return bool(np.max(np.abs(self.c)) <= tol)

    def coeff(self, k):
        if not (0 <= k < self.c.size):
            return 0.0 + 0.0j
        v = self.c[k]
        return v if self.c.dtype == object else complex(v)

    @property
    def lead(self):
        if self.c.size == 0:
            raise BreakdownError("zero polynomial has no leading coefficient",
                                 where="algebra")
        v = self.c[-1]
        return v if self.c.dtype == object else complex(v)

    def norm(self):
        return float(np.max(np.abs(self.c))) if self.c.size else 0.0

    # -- arithmetic ---------------------------------------------------------
    def astype_long(self):
        """Extended-precision copy (no-op for exact coefficients or when
        complex256 is unavailable)."""
        if _LONG_COMPLEX is None or self.c.dtype == object:
            return self
        return Poly(self.c.astype(_LONG_COMPLEX))

    @property
    def is_exact(self):
        return self.c.dtype == object

    def _wrap_scalar(self, other):
        if isinstance(other, Poly):
            return other
        if self.c.dtype == object and not isinstance(other, (float, complex)):
            return Poly(np.array([other], dtype=object))
        return Poly((other,))

    def __add__(self, other):
        other = self._wrap_scalar(other)
        n = max(self.c.size, other.c.size)
        a = np.zeros(n, dtype=np.result_type(self.c.dtype, other.c.dtype,
                                             complex))
        a[: self.c.size] += self.c
        a[: other.c.size] += other.c
        return Poly(a)

    __radd__ = __add__

    def __neg__(self):
        return Poly(-self.c)

    def __sub__(self, other):
        return self + (-self._wrap_scalar(other))

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, Poly):
            if self.c.size == 0 or other.c.size == 0:
                return Poly(())
            return Poly(np.convolve(self.c, other.c))
        return Poly(self.c * other)

    __rmul__ = __mul__

    def __truediv__(self, scalar):
        return Poly(self.c / scalar)

    def __eq__(self, other):
        return isinstance(other, Poly) and self.c.size == other.c.size \
            and bool(np.all(self.c == other.c))

    def __hash__(self):
        return hash(self.c.tobytes())

    def __repr__(self):
        return f"Poly({list(self.c)})"

    def divrem(self, den: "Poly"):
        """Quotient and remainder; deg(rem) < deg(den).  Errors on zero den."""
        if den.c.size == 0:
            raise BreakdownError("division by zero polynomial", where="algebra")
        dt = np.result_type(self.c.dtype, den.c.dtype, complex)
        num = self.c.astype(dt)
        d = den.c.astype(dt)
        if num.size < d.size:
            return Poly(()), Poly(num)
        q = np.zeros(num.size - d.size + 1, dtype=dt)
        for k in range(q.size - 1, -1, -1):
            q[k] = num[k + d.size - 1] / d[-1]
            num[k: k + d.size] -= q[k] * d
        return Poly(q), Poly(num[: d.size - 1])

    def __divmod__(self, den):
        return self.divrem(den)

    def exact_div(self, den: "Poly", rel_tol=DROP_TOL, where="algebra"):
        """Division that is exact on paper: asserts the remainder is tiny
        relative to the dividend, then trims the quotient."""
        q, r = self.divrem(den)
        scale = max(self.norm(), 1e-300)
        if r.norm() > rel_tol * scale:
            raise BreakdownError(
                f"exact division has residue {r.norm():.3e} > {rel_tol:.1e} * {scale:.3e}",
                where=where)
        return q.trim()

    def trim(self, rel_tol=DROP_TOL):
        """Drop trailing coefficients below rel_tol * max|coeff|."""
        if self.c.size == 0 or self.c.dtype == object:
            return self
        cut = rel_tol * float(np.max(np.abs(self.c)))
        n = self.c.size
        while n > 0 and abs(self.c[n - 1]) <= cut:
            n -= 1
        return Poly(self.c[:n])

    # -- analysis ------------------------------------------------------------
    def __call__(self, x):
        if self.c.size == 0:
            return np.zeros_like(np.asarray(x, dtype=complex)) if np.ndim(x) else 0.0 + 0.0j
        if np.ndim(x):
            return np.polyval(self.c[::-1], np.asarray(x, dtype=complex))
        xc = complex(x) if isinstance(x, (int, float, complex)) else x
        acc = 0 if self.c.dtype == object else self.c.dtype.type(0)
        for ck in self.c[::-1]:
            acc = acc * xc + ck
        return acc

    def deriv(self):
        if self.c.size <= 1:
            return Poly(())
        return Poly(self.c[1:] * np.arange(1, self.c.size))

    def roots(self):
        p = self.trim()
        if p.degree < 1:
            return np.zeros(0, dtype=complex)
        return np.roots(p.c[::-1])

    def shift(self, k):
        """Multiply by x**k."""
        if self.c.size == 0:
            return self
        return Poly(np.concatenate([np.zeros(k, dtype=complex), self.c]))

    def monic(self):
        p = self.trim()
        return p / p.lead

    def compose_linear(self, a, b):
        """self(a*x + b) as a Poly in x."""
        out = Poly(())
        lin = Poly((b, a))
        for ck in self.c[::-1]:
            out = out * lin + Poly((ck,))
        return out


class RationalFn:
    """num/den with a nonzero denominator; pole evaluation is an error."""

    __slots__ = ("num", "den")

    def __init__(self, num: Poly, den: Poly):
        if den.is_zero():
            raise BreakdownError("rational function with zero denominator",
                                 where="algebra")
        object.__setattr__(self, "num", num)
        object.__setattr__(self, "den", den)

    def __setattr__(self, *_):
        raise AttributeError("RationalFn is immutable")

    def __call__(self, x):
        d = self.den(x)
        scale = max(self.den.norm(), 1.0) * max(1.0, abs(x)) ** max(self.den.degree, 0)
        if abs(d) < 1e-14 * scale:
            raise PoleError(f"evaluation at pole x={x}", where="algebra")
        return self.num(x) / d

    @property
    def degree(self):
        return max(self.num.degree, self.den.degree)

    def __repr__(self):
        return f"RationalFn({self.num!r}, {self.den!r})"


def poly_arith(a: Poly, b: Poly, kind: str):
    """Uniform entry point used by the service layer."""
    if kind == "add":
        return a + b
    if kind == "sub":
        return a - b
    if kind == "mul":
        return a * b
    if kind == "divrem":
        return a.divrem(b)
    raise ValueError(f"unknown poly_arith kind {kind!r}")


def quadratic_roots(a, b, c, small_rel=1e-12):
    """Both roots of a z^2 + b z + c, numerically stable.

    The larger-magnitude root comes from the +/- sqrt formula with the
    non-cancelling sign, the companion from the product c/a.  When a is
    negligible against b the second root escapes to infinity and the
    INF_POINT marker is returned in its place.
    """
    a, b, c = complex(a), complex(b), complex(c)
    scale = max(abs(a), abs(b), abs(c))
    if scale == 0.0:
        raise BreakdownError("quadratic_roots with a=b=c=0", where="algebra")
    if abs(a) <= small_rel * max(abs(b), abs(c)):
        if abs(b) <= small_rel * abs(c):
            raise BreakdownError("quadratic_roots with a=b=0: no finite root",
                                 where="algebra")
        return -c / b, INF_POINT
    disc = b * b - 4.0 * a * c
    s = np.sqrt(complex(disc))
    # pick the sign that does not cancel b
    if (np.conj(b) * s).real < 0.0:
        s = -s
    q = -(b + s) / 2.0
    r1 = q / a
    if q == 0.0:  # b = 0 and disc = 0
        return 0.0 + 0.0j, 0.0 + 0.0j
    r2 = c / q
    return r1, r2


def divided_differences(xs, fs):
    """Newton divided-difference coefficients for nodes xs and values fs."""
    xs = np.asarray(xs, dtype=complex)
    coef = np.array(fs, dtype=complex)
    n = coef.size
    for j in range(1, n):
        coef[j:n] = (coef[j:n] - coef[j - 1: n - 1]) / (xs[j:n] - xs[0: n - j])
    return coef

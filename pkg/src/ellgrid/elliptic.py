"""Analytic layer: modulus from cross-ratio, Landen-chain elliptic integrals,
Jacobi sn, the canonical sn-curve, the cubic-curve addition law, and Jacobi
theta_1 / theta_2 with the lattice-difference product formula.

Everything iterative (Landen/AGM); no series in k.  tau = i K'/(2K), with the
nome p = exp(i pi tau).
"""

from __future__ import annotations

import cmath
from dataclasses import dataclass, replace
from itertools import permutations

import numpy as np

from .algebra import Poly
from .biquadratic import BiquadraticCurve
from .errors import BreakdownError, PoleError

LANDEN_TOL = 1e-14
LANDEN_MAX_ITERS = 60


# -- Landen machinery ------------------------------------------------------------

def landen_chain(k):
    """Descending chain k_1, k_2, ... with k_{i+1} = (1-k_i')/(1+k_i')."""
    k = complex(k)
    chain = []
    for _ in range(LANDEN_MAX_ITERS):
        kp = cmath.sqrt(1.0 - k * k)
        k = (1.0 - kp) / (1.0 + kp)
        chain.append(k)
        if abs(k) < LANDEN_TOL:
            return chain
    raise BreakdownError("Landen chain did not converge", where="elliptic")


def _atan_nearest(w, near):
    """arctan branch closest to `near` (complex-capable)."""
    t = cmath.atan(w)
    t += cmath.pi * round((near - t).real / cmath.pi)
    return t


def elliptic_F(phi, k):
    """Incomplete elliptic integral of the first kind, ascending Landen.

    phi may be complex; the arctan branch is carried so the iterated angle
    stays continuous.
    """
    phi, k = complex(phi), complex(k)
    if abs(k) < LANDEN_TOL:
        return phi
    scale = 1.0
    kn = k
    for _ in range(LANDEN_MAX_ITERS):
        kp = cmath.sqrt(1.0 - kn * kn)
        knext = (1.0 - kp) / (1.0 + kp)
        phi = phi + _atan_nearest(kp * cmath.tan(phi), phi)
        scale *= 0.5 * (1.0 + knext)
        kn = knext
        if abs(kn) < LANDEN_TOL:
            return phi * scale
    raise BreakdownError("elliptic_F did not converge", where="elliptic")


def complete_K(k):
    """K(k) = (pi/2) (1+k_1)(1+k_2)...  so that 4K is the sn period."""
    prod = 1.0 + 0.0j
    for ki in landen_chain(k):
        prod *= 1.0 + ki
    return (cmath.pi / 2.0) * prod


def sn(u, k):
    """Jacobi elliptic sine via the descending Landen recursion."""
    return _sn_ds(complex(u), complex(k))[0]


def sn_and_deriv(u, k):
    """(sn u, d sn/du) = (sn u, cn u dn u)."""
    return _sn_ds(complex(u), complex(k))


def _sn_ds(u, k):
    if abs(k) < LANDEN_TOL:
        return cmath.sin(u), cmath.cos(u)
    kp = cmath.sqrt(1.0 - k * k)
    k1 = (1.0 - kp) / (1.0 + kp)
    s1, d1 = _sn_ds(u / (1.0 + k1), k1)
    den = 1.0 + k1 * s1 * s1
    if abs(den) < 1e-13:
        raise PoleError("sn evaluated at a pole", where="elliptic")
    s = (1.0 + k1) * s1 / den
    ds = d1 * (1.0 - k1 * s1 * s1) / (den * den)
    return s, ds


def arcsn(z, k, Kprime=None):
    """Inverse of sn.  Real |z| <= 1 gives the principal real value; beyond
    1/k the branch recipe arcsn(z) = i K' + arcsn(1/(k z)) is used."""
    z, k = complex(z), complex(k)
    if abs(z.imag) < 1e-12 and abs(z.real) <= 1.0 + 1e-12:
        zr = max(-1.0, min(1.0, z.real))
        return complex(elliptic_F(cmath.asin(zr), k))
    if abs(z.imag) < 1e-12 and abs(z.real) >= abs(1.0 / k) * (1.0 - 1e-12):
        if Kprime is None:
            Kprime = complete_K(cmath.sqrt(1.0 - k * k))
        return 1j * Kprime + arcsn(1.0 / (k * z), k, Kprime)
    return elliptic_F(cmath.asin(z), k)


# -- modulus, Moebius normalization, profile -----------------------------------

def cross_ratio(z1, z2, z3, z4):
    return ((z3 - z1) / (z3 - z2)) / ((z4 - z1) / (z4 - z2))


def modulus_from_zeros(zeros):
    """(lambda, k, (alpha, beta, gamma)) with xi = (alpha x + beta)/(1 + gamma x)
    sending the four zeros to {-1/k, -1, 1, 1/k}."""
    z = [complex(v) for v in zeros]
    if len(z) != 4 or len({round(v.real, 12) + 1j * round(v.imag, 12) for v in z}) != 4:
        raise BreakdownError("four distinct zeros required", where="elliptic")
    lam = cross_ratio(*z)
    if abs(lam) < 1e-12 or abs(lam - 1.0) < 1e-12:
        raise BreakdownError("degenerate cross-ratio", where="elliptic")
    k = (cmath.sqrt(lam) - cmath.sqrt(lam - 1.0)) ** 2
    targets = (-1.0 / k, -1.0, 1.0, 1.0 / k)
    mob = _mobius_three_points(z[:3], targets[:3])
    alpha, beta, gamma = mob
    img4 = (alpha * z[3] + beta) / (1.0 + gamma * z[3])
    if abs(img4 - targets[3]) > 1e-9 * max(1.0, abs(targets[3])):
        raise BreakdownError(
            f"Moebius fourth-point residual {abs(img4 - targets[3]):.3e}",
            where="elliptic")
    return lam, k, mob


def _mobius_three_points(zs, ws):
    """(alpha, beta, gamma) of xi = (alpha x + beta)/(1 + gamma x) with
    xi(zs[i]) = ws[i]."""
    A = np.array([[z, 1.0, -w * z] for z, w in zip(zs, ws)], dtype=complex)
    b = np.array(ws, dtype=complex)
    try:
        sol = np.linalg.solve(A, b)
    except np.linalg.LinAlgError as exc:
        raise BreakdownError(f"Moebius solve failed: {exc}", where="elliptic")
    return complex(sol[0]), complex(sol[1]), complex(sol[2])


def mobius_apply(mob, x):
    alpha, beta, gamma = mob
    return (alpha * complex(x) + beta) / (1.0 + gamma * complex(x))


def mobius_invert(mob, xi):
    alpha, beta, gamma = mob
    den = alpha - gamma * complex(xi)
    if abs(den) < 1e-14 * max(1.0, abs(alpha)):
        raise PoleError("Moebius inverse at the pole", where="elliptic")
    return (complex(xi) - beta) / den


@dataclass(frozen=True)
class EllipticProfile:
    """Modulus, normalization, periods and (once a walk is attached) the
    step h and phase g of the lattice."""

    zeros: tuple
    lam: complex
    k: complex
    mobius: tuple          # (alpha, beta, gamma)
    landen: tuple
    K: complex
    Kprime: complex
    tau: complex
    p: complex
    h: complex | None = None
    g: complex | None = None

    @property
    def n_period(self):
        if self.h is None:
            return None
        return 4.0 * self.K / self.h

    def xi(self, x):
        return mobius_apply(self.mobius, x)

    def x_of_angle(self, u):
        return mobius_invert(self.mobius, sn(u, self.k))

    def frak_a(self):
        """arcsn(alpha/gamma): the angle of the Moebius pole (x = infinity)."""
        alpha, _, gamma = self.mobius
        return arcsn(alpha / gamma, self.k, self.Kprime)


def profile_from_zeros(zeros):
    lam, k, mob = modulus_from_zeros(zeros)
    chain = tuple(landen_chain(k))
    K = complete_K(k)
    Kp = complete_K(cmath.sqrt(1.0 - k * k))
    tau = 1j * Kp / (2.0 * K)
    p = cmath.exp(1j * cmath.pi * tau)
    return EllipticProfile(tuple(complex(z) for z in zeros), lam, k, mob,
                           chain, K, Kp, tau, p)


def _sorted_real_roots(poly: Poly):
    roots = sorted(poly.roots(), key=lambda z: z.real)
    if any(abs(r.imag) > 1e-8 * (1.0 + abs(r.real)) for r in roots):
        raise BreakdownError("complex discriminant zeros: pass an ordering "
                             "explicitly", where="elliptic")
    return [complex(r.real) for r in roots]


def profile_from_curve(curve: BiquadraticCurve, walk=None, lo=-1, hi=6):
    """Profile from the x-discriminant zeros (ascending order); when a walk
    is supplied, the step and phase are attached."""
    zeros = _sorted_real_roots(curve.discriminant_x().trim(1e-9))
    prof = profile_from_zeros(zeros)
    if walk is not None:
        h, g, _ = step_and_phase(prof, walk, lo, hi)
        prof = replace(prof, h=h, g=g)
    return prof


# -- step and phase via branch-tracked angle lifting ------------------------------

def _angle_base(prof, x):
    """(w, offset) with sn(w + offset) = xi(x); offset marks the iK' line
    carrying the |xi| > 1/k points."""
    k, Kp = prof.k, prof.Kprime
    xi = prof.xi(x)
    band_edge = 0.5 * (1.0 + abs(1.0 / k))
    if abs(xi) <= band_edge:
        return elliptic_F(cmath.asin(complex(xi)), k), 0.0 + 0.0j
    return elliptic_F(cmath.asin(1.0 / (k * complex(xi))), k), 1j * Kp


def _fold_near(prof, base, target, extra=1):
    """Candidate angles sn-equivalent to base, folded to the periods nearest
    target (both the w and 2K - w determinations)."""
    w, offset = base
    K, K4 = prof.K, 4.0 * prof.K
    out = []
    for b in (w, 2.0 * K - w):
        j0 = round(((target - offset - b) / K4).real)
        for j in range(j0 - extra, j0 + extra + 1):
            out.append(b + K4 * j + offset)
    return out


def angle_lift(prof, xs):
    """Lift lattice values to continuous sn-angles u_n (u_{n+1} - u_n = h).

    The first two steps are disambiguated jointly by requiring a constant
    step; later points follow greedily with the running mean step.
    """
    if len(xs) < 3:
        raise BreakdownError("need at least 3 points to lift angles",
                             where="elliptic")
    bases = [_angle_base(prof, x) for x in xs]
    u0 = bases[0][0] + bases[0][1]  # principal determination
    # period-shifted lifts are equally consistent; rank by defect first,
    # then by |step| so the canonical |h| <= 2K representative wins
    ranked = []
    for u1 in _fold_near(prof, bases[1], u0):
        for u2 in _fold_near(prof, bases[2], 2.0 * u1 - u0, extra=0):
            defect = abs((u2 - u1) - (u1 - u0))
            ranked.append((defect, abs(u1 - u0), u1, u2))
    dmin = min(r[0] for r in ranked)
    tol = max(10.0 * dmin, 1e-9 * abs(prof.K))
    _, _, u1, u2 = min((r for r in ranked if r[0] <= tol), key=lambda r: r[1])
    us = [u0, u1, u2]
    for n in range(3, len(xs)):
        h_run = (us[-1] - us[0]) / (len(us) - 1)
        target = us[-1] + h_run
        us.append(min(_fold_near(prof, bases[n], target, extra=0),
                      key=lambda c: abs(c - target)))
    return np.array(us, dtype=complex)


def step_and_phase(prof, walk, lo=-1, hi=6, spread_tol=1e-6):
    """h as the mean pairwise angle difference, g as the lifted angle of x_0.

    All consecutive pairs must agree on h to spread_tol * |h| (wrong branch
    bookkeeping shows up here).
    """
    walk.ensure(lo, hi)
    xs = [walk.x(n) for n in range(lo, hi + 1)]
    us = angle_lift(prof, xs)
    diffs = np.diff(us)
    h = complex(np.mean(diffs))
    spread = float(np.max(np.abs(diffs - h)))
    if spread > spread_tol * abs(h):
        raise BreakdownError(
            f"pairwise step spread {spread:.3e} exceeds {spread_tol} * |h|",
            where="elliptic")
    g = complex(us[-lo]) if lo <= 0 else complex(us[0] - lo * h)
    return h, g, spread


# -- canonical curve and the cubic model -------------------------------------------

def canonical_curve(k, a):
    """F(xi, eta) = -k^2 sn^2(a) xi^2 eta^2 + xi^2 + eta^2
    - 2 cn(a) dn(a) xi eta - sn^2(a); walking from xi_0 = 0 steps by h = 2a."""
    k, a = complex(k), complex(a)
    s, cd = sn_and_deriv(a, k)
    grid = np.zeros((3, 3), dtype=complex)
    grid[2, 2] = -(k * s) ** 2
    grid[2, 0] = 1.0
    grid[0, 2] = 1.0
    grid[1, 1] = -2.0 * cd
    grid[0, 0] = -s * s
    return BiquadraticCurve(grid)


def cubic_from_discriminant(P: Poly, z1):
    """R(r) = r^4 P(z1 + 1/r) as a cubic in r (z1 must be a zero of P)."""
    z1 = complex(z1)
    if abs(P(z1)) > 1e-8 * P.norm() * max(1.0, abs(z1)) ** 4:
        raise BreakdownError("z1 is not a zero of P", where="elliptic")
    d1 = P.deriv()
    d2 = d1.deriv()
    d3 = d2.deriv()
    eps = P.coeff(4)
    return Poly((eps, d3(z1) / 6.0, d2(z1) / 2.0, d1(z1)))


def to_cubic(curve: BiquadraticCurve, walk, z1, n_range):
    """Birational image (r_n, s_n) = (1/(x_n - z1),
    (X1(x_n) + 2 y_n X2(x_n)) / (x_n - z1)^2) of the walk."""
    z1 = complex(z1)
    X1, X2 = curve.X(1), curve.X(2)
    pts = []
    for n in n_range:
        x, y = walk.point(n)
        d = x - z1
        if abs(d) < 1e-12 * max(1.0, abs(x)):
            raise PoleError("x_n = z1 in cubic map", where="elliptic", index=n)
        r = 1.0 / d
        s = (X1(x) + 2.0 * y * X2(x)) / (d * d)
        pts.append((r, s))
    return pts


def cubic_residuals(P: Poly, z1, pts):
    """max |s^2 - R(r)| / scale over the points."""
    R = cubic_from_discriminant(P, z1)
    worst = 0.0
    for r, s in pts:
        scale = max(R.norm(), 1.0) * max(1.0, abs(r)) ** 3 + abs(s) ** 2
        worst = max(worst, abs(s * s - R(r)) / scale)
    return worst


def addition_collinearity(pts, stride, P: Poly, z1):
    """Chords (r_m, s_m) -- (r_{m+stride}, -s_{m+stride}) all meet the cubic
    at one point; returns ((r*, s*), relative spread over chords)."""
    z1 = complex(z1)
    dP = P.deriv()
    d2P = dP.deriv()
    Pp, Ppp = dP(z1), d2P(z1)
    stars = []
    for m in range(len(pts) - stride):
        r0, s0 = pts[m]
        r1, s1 = pts[m + stride]
        if abs(r1 - r0) < 1e-12 * max(1.0, abs(r0)):
            raise BreakdownError("degenerate chord (equal r)",
                                 where="elliptic", index=m)
        mu = (-s1 - s0) / (r1 - r0)
        rstar = (mu * mu - Ppp / 2.0) / Pp - r0 - r1
        sstar = mu * (rstar - r0) + s0
        stars.append((rstar, sstar))
    rs = np.array([p[0] for p in stars])
    ss = np.array([p[1] for p in stars])
    rstar, sstar = complex(np.mean(rs)), complex(np.mean(ss))
    spread = max(float(np.max(np.abs(rs - rstar))) / max(1.0, abs(rstar)),
                 float(np.max(np.abs(ss - sstar))) / max(1.0, abs(sstar)))
    return (rstar, sstar), spread


# -- theta functions ---------------------------------------------------------------

def theta1(u, p):
    """2 sum (-1)^m p^{(m+1/2)^2} sin((2m+1)u), truncated when the running
    term drops below 1e-16 of the running max."""
    u, p = complex(u), complex(p)
    if abs(p) >= 1.0:
        raise BreakdownError("theta nome |p| >= 1", where="elliptic")
    total = 0.0 + 0.0j
    biggest = 0.0
    for m in range(0, 200):
        term = 2.0 * (-1.0) ** m * p ** ((m + 0.5) ** 2) * cmath.sin((2 * m + 1) * u)
        total += term
        biggest = max(biggest, abs(term))
        if biggest > 0.0 and abs(term) < 1e-16 * biggest and m >= 2:
            return total
    return total


def theta1_product(u, p):
    """Product form 2 p^{1/4} sin u prod (1 - 2 p^{2m} cos 2u + p^{4m})(1 - p^{2m})."""
    u, p = complex(u), complex(p)
    acc = 2.0 * p ** 0.25 * cmath.sin(u)
    m = 1
    while abs(p) ** (2 * m) > 1e-18 and m < 500:
        q = p ** (2 * m)
        acc *= (1.0 - 2.0 * q * cmath.cos(2.0 * u) + q * q) * (1.0 - q)
        m += 1
    return acc


def theta2(u, p):
    return theta1(u + cmath.pi / 2.0, p)


def theta1_prime0(p):
    """theta'(0) = 2 p^{1/4} prod (1 - p^{2m})^3."""
    p = complex(p)
    acc = 2.0 * p ** 0.25
    m = 1
    while abs(p) ** (2 * m) > 1e-18 and m < 500:
        acc *= (1.0 - p ** (2 * m)) ** 3
        m += 1
    return acc


def frak_t(prof, a, b):
    """t(a, b) = theta(pi (a-b)/(4K)) theta2(pi (a+b)/(4K))."""
    scale = cmath.pi / (4.0 * prof.K)
    return theta1((a - b) * scale, prof.p) * theta2((a + b) * scale, prof.p)


def theta_constant_C(prof):
    """The n,m-independent constant of the lattice-difference formula."""
    alpha, beta, gamma = prof.mobius
    a = prof.frak_a()
    w = cmath.pi * a / (4.0 * prof.K)
    num = 4.0 * prof.K * (alpha - beta * gamma) * theta1(w, prof.p) ** 2 \
        * theta1(w - cmath.pi / 2.0, prof.p) ** 2
    den = cmath.pi * alpha ** 2 * theta1_prime0(prof.p) \
        * theta2(0.0, prof.p)
    return num / den


def lattice_difference_theta(prof, n, m, C=None):
    """x_n - x_m via the theta-quotient formula (angle indices may be any
    real or complex numbers)."""
    if prof.h is None:
        raise BreakdownError("profile lacks step/phase", where="elliptic")
    if C is None:
        C = theta_constant_C(prof)
    a = prof.frak_a()
    un = n * prof.h + prof.g
    um = m * prof.h + prof.g
    den = frak_t(prof, um, a) * frak_t(prof, un, a)
    if abs(den) < 1e-14:
        raise PoleError("theta zero in denominator", where="elliptic")
    return C * frak_t(prof, un, um) / den


def theta_constant_empirical(prof, walk, n, m):
    """C back-solved from one concrete lattice difference."""
    a = prof.frak_a()
    un = n * prof.h + prof.g
    um = m * prof.h + prof.g
    return (walk.x(n) - walk.x(m)) * frak_t(prof, um, a) * frak_t(prof, un, a) \
        / frak_t(prof, un, um)


# -- companion (y) profile and the elliptic-log term ratio -----------------------

@dataclass(frozen=True)
class CompanionProfile:
    """Moebius data of the y-lattice sharing (k, K, p) with the x-profile."""

    mobius: tuple  # (alpha_y, beta_y, gamma_y)

    def frak_b(self, prof):
        alpha, _, gamma = self.mobius
        return arcsn(alpha / gamma, prof.k, prof.Kprime)


def y_profile_from_walk(prof, walk, count=5):
    """Fit eta = (alpha_y y + beta_y)/(1 + gamma_y y) against
    eta_n = sn((n+1/2) h + g) on the walk's y-values, then verify."""
    ys = [walk.y(n) for n in range(0, count)]
    etas = [sn((n + 0.5) * prof.h + prof.g, prof.k) for n in range(0, count)]
    mob = _mobius_three_points(ys[:3], etas[:3])
    for yv, ev in zip(ys, etas):
        got = mobius_apply(mob, yv)
        if abs(got - ev) > 1e-7 * max(1.0, abs(ev)):
            raise BreakdownError(
                f"y-profile calibration residual {abs(got - ev):.3e}",
                where="elliptic")
    return CompanionProfile(mob)


def primed_angles(prof, walk_primed, lo=-1, hi=5):
    """(h', g') of a second walk on the same curve; h' = +/- h."""
    walk_primed.ensure(lo, hi)
    xs = [walk_primed.x(n) for n in range(lo, hi + 1)]
    us = angle_lift(prof, xs)
    diffs = np.diff(us)
    hp = complex(np.mean(diffs))
    if abs(abs(hp.real) - abs(prof.h.real)) > 1e-6 * abs(prof.h):
        raise BreakdownError("primed step is not +/- h", where="elliptic")
    gp = complex(us[-lo]) if lo <= 0 else complex(us[0] - lo * hp)
    return hp, gp


def elliptic_log_term_ratio_theta(prof, hp, gp, rho_angle, kappa_angle, n):
    """Term ratio T_{n+1}/T_n of the general-pole elliptic-logarithm
    expansion, as a pure theta-quotient.

    rho_angle is the y-angle of the equation's pole parameter, kappa_angle
    the x-angle of the evaluation point.  The pole angles of the two Moebius
    normalizations have cancelled out of this expression: it references only
    (h, g, h', g', K, p).
    """
    h, g, K, p = prof.h, prof.g, prof.K, prof.p
    t = lambda x, y: frak_t(prof, x, y)
    u = lambda k: k * h + g
    up = lambda k: k * hp + gp
    v = lambda k: (k + 0.5) * h + g
    vp = lambda k: (k + 0.5) * hp + gp
    f1 = t(vp(n), v(n)) / t(vp(n - 1), v(n - 1))
    f2 = t(u(-1), up(n)) * theta1(cmath.pi * (-n * h) / (4.0 * K), p) \
        / (t(v(-1), vp(n)) * theta1(cmath.pi * (-(n + 1) * h) / (4.0 * K), p))
    f3 = t(rho_angle, vp(n - 1)) / t(rho_angle, v(n))
    f4 = t(kappa_angle, u(n)) / t(kappa_angle, up(n))
    return f1 * f2 * f3 * f4


def elliptic_log_term_ratio_algebraic(prof, comp, walk, walk_p, rho_angle,
                                      kappa_angle, n, C_ratio):
    """The same term ratio from lattice values: the general-pole coefficient
    ratio times the point factor.  C_ratio is C_{n,0,0}/C_{n+1,0,0}."""
    y_rho = mobius_invert(comp.mobius, sn(rho_angle, prof.k))
    x_kappa = prof.x_of_angle(kappa_angle)
    coeff = ((walk_p.y(n) - walk.y(n)) / (walk_p.y(n - 1) - walk.y(n - 1))) \
        * C_ratio * (y_rho - walk_p.y(n - 1)) / (y_rho - walk.y(n))
    return coeff * (x_kappa - walk.x(n)) / (x_kappa - walk_p.x(n))


def companion_constant(prof, comp):
    """C_y of the y-difference theta formula, calibrated from one pair
    (constancy across pairs is a test)."""
    b = comp.frak_b(prof)
    v0 = 0.5 * prof.h + prof.g
    v1 = 1.5 * prof.h + prof.g
    y0 = mobius_invert(comp.mobius, sn(v0, prof.k))
    y1 = mobius_invert(comp.mobius, sn(v1, prof.k))
    return (y1 - y0) * frak_t(prof, v1, b) * frak_t(prof, v0, b) / frak_t(prof, v1, v0)

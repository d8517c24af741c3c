"""The second-order hypergeometric difference operator and its series
solutions.

The operator's recurrence rows are linear in the eigenvalue lambda, which
the truncation machinery exploits: every lambda-dependent scalar is carried
as a degree-<=1 Poly in lambda and ratios are taken with joint root
deflation, resolving the 0/0 limits of the singular starts.

Ground truth for the coefficients is the forward recurrence followed by
interpolatory extraction; the zeta-ladder closed forms are the second,
asserted route.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .algebra import Poly
from .biquadratic import BiquadraticCurve
from .divdiff import (D, D_adj, GridFunction, M, M_adj, product_map,
                      x_product)
from .errors import BreakdownError
from .expand import Expansion, coeffs_from_values
from .lattice import LatticeWalk

CONSTRAINT_TOL = 1e-9
DUAL_TOL = 1e-7


@dataclass
class HypergeomOperator:
    curve: BiquadraticCurve
    walk: LatticeWalk
    walk_p: LatticeWalk
    mu: Poly          # degree 3
    nu: Poly          # degree <= 1
    lam: complex
    R: Poly           # the R_{0,0} interpolant

    def constraint_residuals(self):
        """Residuals of the two singular-start constraints on mu, nu."""
        w, wp = self.walk, self.walk_p
        X2 = self.curve.X(2)
        scale = max(self.mu.norm(), 1.0) * max(1.0, abs(w.x(0))) ** 3
        r1 = abs(2.0 * self.mu(w.x(0))
                 + (w.y(0) - w.y(-1)) * X2(w.x(0)) * self.nu(w.x(0))) / scale
        r2 = abs(2.0 * self.mu(wp.x(1))
                 - (wp.y(1) - wp.y(0)) * X2(wp.x(1)) * self.nu(wp.x(1))) / scale
        return r1, r2


def interpolant_R(walk, walk_p):
    """R achieving R(y_{-1}) = -(x_0 - x_{-1}) Y2(y_{-1})/2 and
    R(y'_{-1}) = (x'_0 - x'_{-1}) Y2(y'_{-1})/2."""
    Y2 = walk.curve.Y(2)
    ya, yb = walk.y(-1), walk_p.y(-1)
    va = -(walk.x(0) - walk.x(-1)) * Y2(ya) / 2.0
    vb = (walk_p.x(0) - walk_p.x(-1)) * Y2(yb) / 2.0
    slope = (vb - va) / (yb - ya)
    return Poly((va - slope * ya, slope))


def build(curve, walk, walk_p, nu: Poly, lam, mu_free_root=None, mu=None):
    """Operator with mu either supplied (constraints verified) or built as
    the monic cubic with the two constrained values and the free root."""
    walk.ensure(-1, 2)
    walk_p.ensure(-1, 2)
    X2 = curve.X(2)
    if nu.degree > 1:
        raise BreakdownError("nu must have degree <= 1", where="secondord")
    x0, xp1 = walk.x(0), walk_p.x(1)
    v0 = -(walk.y(0) - walk.y(-1)) * X2(x0) * nu(x0) / 2.0
    v1 = (walk_p.y(1) - walk_p.y(0)) * X2(xp1) * nu(xp1) / 2.0
    if mu is None:
        xi = complex(mu_free_root)
        if nu.is_zero(1e-14):
            # both constraints force zeros of mu (possibly repeated at xi)
            mu = Poly.from_roots([x0, xp1, xi])
        else:
            # monic cubic through (xi, 0), (x0, v0), (xp1, v1)
            A = np.array([[1.0, z, z * z] for z in (xi, x0, xp1)],
                         dtype=complex)
            b = np.array([-xi ** 3, v0 - x0 ** 3, v1 - xp1 ** 3],
                         dtype=complex)
            sol = np.linalg.solve(A, b)
            mu = Poly((sol[0], sol[1], sol[2], 1.0))
    op = HypergeomOperator(curve, walk, walk_p, mu, nu, complex(lam),
                           interpolant_R(walk, walk_p))
    r1, r2 = op.constraint_residuals()
    if max(r1, r2) > CONSTRAINT_TOL:
        raise BreakdownError(f"constraint residuals {r1:.3e}, {r2:.3e}",
                             where="secondord")
    return op


def _lam_poly(const, slope):
    return Poly((const, slope))


def alpha_row(op, n):
    """alpha_n as a degree-1 Poly in lambda."""
    w, wp = op.walk, op.walk_p
    X2, Y2 = op.curve.X(2), op.curve.Y(2)
    xn, xn1 = w.x(n), w.x(n + 1)
    yn, ynm1 = w.y(n), w.y(n - 1)
    dy = yn - ynm1
    dx = xn1 - xn
    const = (-op.mu(xn) / (dy * X2(xn)) + op.nu(xn) / 2.0) \
        * (yn - wp.y(-1)) * (yn - wp.y(0)) / (dx * (xn - wp.x(1)) * Y2(yn))
    slope = -0.5 * (1.0 - (wp.y(0) - wp.y(-1)) / dy) \
        * (0.5 - op.R(yn) / (dx * Y2(yn)))
    return _lam_poly(const, slope)


def gamma_row(op, n):
    w, wp = op.walk, op.walk_p
    X2, Y2 = op.curve.X(2), op.curve.Y(2)
    xn, xnm1 = w.x(n), w.x(n - 1)
    yn, ynm1 = w.y(n), w.y(n - 1)
    dy = yn - ynm1
    dxm = xn - xnm1
    const = -(op.mu(xn) / (dy * X2(xn)) + op.nu(xn) / 2.0) \
        * (ynm1 - wp.y(-1)) * (ynm1 - wp.y(0)) / (dxm * (xn - wp.x(1))
                                                  * Y2(ynm1))
    slope = -0.5 * (1.0 + (wp.y(0) - wp.y(-1)) / dy) \
        * (0.5 + op.R(ynm1) / (dxm * Y2(ynm1)))
    return _lam_poly(const, slope)


def beta_row(op, n):
    a, g = alpha_row(op, n), gamma_row(op, n)
    return -a - g - Poly((0.0, 1.0))


def recurrence_row(op, n, lam=None):
    """(alpha_n, beta_n, gamma_n) at a concrete lambda."""
    lam = op.lam if lam is None else complex(lam)
    a, g = alpha_row(op, n)(lam), gamma_row(op, n)(lam)
    return a, -lam - a - g, g


def gamma_prime_row(op, n):
    """gamma'_n of the primed lattice, degree-1 Poly in lambda."""
    w, wp = op.walk, op.walk_p
    X2, Y2 = op.curve.X(2), op.curve.Y(2)
    xpn, xpnm1 = wp.x(n), wp.x(n - 1)
    ypn, ypnm1 = wp.y(n), wp.y(n - 1)
    dy = ypn - ypnm1
    dxm = xpn - xpnm1
    const = (-op.mu(xpn) / (dy * X2(xpn)) - op.nu(xpn) / 2.0) \
        * (ypnm1 - wp.y(-1)) * (ypnm1 - wp.y(0)) / (dxm * (xpn - wp.x(1))
                                                    * Y2(ypnm1))
    slope = -0.5 * (1.0 + (wp.y(0) - wp.y(-1)) / dy) \
        * (0.5 + op.R(ypnm1) / (dxm * Y2(ypnm1)))
    return _lam_poly(const, slope)


def apply_operator(op, fvals_fn, n, lam=None):
    """(L f)(x_n) assembled from the divided-difference operators; the
    oracle against which the recurrence rows are checked."""
    lam = op.lam if lam is None else complex(lam)
    w, wp = op.walk, op.walk_p
    X2, Y2 = op.curve.X(2), op.curve.Y(2)
    f = GridFunction.sample(w, fvals_fn, n - 2, n + 2, "x")
    Df, Mf = D(f), M(f)
    g = GridFunction(w, {k: (w.y(k) - wp.y(-1)) * (w.y(k) - wp.y(0))
                         * Df[k] / Y2(w.y(k)) for k in Df.indices()}, "y")
    h = GridFunction(w, {k: Mf[k] - op.R(w.y(k)) * Df[k] / Y2(w.y(k))
                         for k in Df.indices()}, "y")
    Dg, Mg = D_adj(g), M_adj(g)
    Dh, Mh = D_adj(h), M_adj(h)
    xn = w.x(n)
    part1 = (op.mu(xn) / X2(xn) * Dg[n] + op.nu(xn) * Mg[n]) / (xn - wp.x(1))
    part2 = -lam * (Mh[n] + (wp.y(0) - wp.y(-1)) / 2.0 * Dh[n])
    return part1 + part2


# -- series solution: recurrence route with lambda-deflation -------------------------

def _deflate_ratio(p: Poly, q: Poly, lam, tol=1e-9):
    """p(lam)/q(lam) with common roots at lam deflated (L'Hopital)."""
    pv, qv = p(lam), q(lam)
    scale_p = max(p.norm(), 1e-300) * max(1.0, abs(lam)) ** max(p.degree, 0)
    scale_q = max(q.norm(), 1e-300) * max(1.0, abs(lam)) ** max(q.degree, 0)
    guard = 0
    while abs(pv) < tol * scale_p and abs(qv) < tol * scale_q and guard < 4:
        p = p.divrem(Poly((-lam, 1.0)))[0]
        q = q.divrem(Poly((-lam, 1.0)))[0]
        pv, qv = p(lam), q(lam)
        guard += 1
    if abs(qv) < 1e-13 * scale_q:
        raise BreakdownError("ratio denominator vanished after deflation",
                             where="secondord")
    return pv / qv


def phi_values(op, c0, N, lam=None):
    """phi(x_0..x_N) from the singular-start recurrence, as the ratio of
    lambda-polynomials evaluated (and deflated) at the operator's lambda."""
    lam = op.lam if lam is None else complex(lam)
    # psi_n = phi(x_n) prod_{j<n} alpha_j, a polynomial in lambda
    alphas = [alpha_row(op, n) for n in range(N)]
    betas = [-alphas[0] - gamma_row(op, 0) - Poly((0.0, 1.0))]
    psi = [Poly((complex(c0),)), -betas[0] * Poly((complex(c0),))]
    gammas = [None]
    for n in range(1, N):
        b = -alphas[n] - gamma_row(op, n) - Poly((0.0, 1.0))
        betas.append(b)
        g = gamma_row(op, n)
        gammas.append(g)
        psi.append((-b * psi[n] - g * alphas[n - 1] * psi[n - 1]).trim(1e-14))
    vals = [complex(c0)]
    denom = Poly((1.0,))
    for n in range(1, N + 1):
        denom = denom * alphas[n - 1]
        vals.append(_deflate_ratio(psi[n], denom, lam))
    return vals


def solve_series(op, c0, M, lam=None, agree_tol=DUAL_TOL):
    """Expansion coefficients by two routes.

    (i) forward recurrence + interpolatory extraction (the ground truth);
    (ii) the zeta-ladder closed forms; maximum disagreement is returned and
    asserted.
    """
    lam = op.lam if lam is None else complex(lam)
    w, wp = op.walk, op.walk_p
    w.ensure(-1, M + 3)
    wp.ensure(-1, M + 3)
    fv = phi_values(op, c0, M, lam)
    nodes = [w.x(n) for n in range(M + 1)]
    poles = [wp.x(n) for n in range(M)]
    extracted = coeffs_from_values(nodes, fv, poles,
                                   cross_check=False, cancellation_guard=False)
    ladder = zeta_ladder_coeffs(op, c0, M, lam)
    worst = 0.0
    scale = max(max(abs(c) for c in extracted.coeffs), 1e-300)
    for a, b in zip(extracted.coeffs, ladder):
        worst = max(worst, abs(a - b) / scale)
    if worst > agree_tol:
        raise BreakdownError(f"series method duality broke: {worst:.3e}",
                             where="secondord")
    return Expansion(extracted.nodes, extracted.poles, extracted.coeffs), worst


def zeta_ladder_coeffs(op, c0, M, lam=None):
    """c_0..c_M via the zeta ladder (ratios of lambda-linear scalars)."""
    lam = op.lam if lam is None else complex(lam)
    w, wp = op.walk, op.walk_p
    x, xp = w.x, wp.x
    coeffs = [complex(c0)]
    if M == 0:
        return coeffs
    a0 = alpha_row(op, 0)
    r1 = _deflate_ratio(Poly((0.0, (x(1) - xp(0)) / (x(1) - x(0)))), a0, lam)
    coeffs.append(coeffs[0] * r1)
    for m in range(1, M):
        zeta = zeta_poly(op, m)
        am = alpha_row(op, m)
        pre = (x(m) - xp(m + 1)) / (x(m - 1) - xp(m))
        ratio = pre * _deflate_ratio(zeta, am, lam)
        coeffs.append(coeffs[-1] * ratio)
    return coeffs


def zeta_poly(op, m):
    """zeta_m as a degree-1 Poly in lambda.

    m = 1 uses the displayed closed form; m = 2 evaluates S_2 directly
    (the closed-form route has a genuine 0/0 there); m >= 3 uses the
    S_m endpoint formulas.
    """
    if m == 0:
        w, wp = op.walk, op.walk_p
        return Poly((0.0, 1.0 / ((w.x(0) - wp.x(1)) * (w.x(1) - w.x(0)))))
    if m == 1:
        return _zeta1(op)
    if m == 2:
        S2 = _S_direct(op, 2)
        K3 = _K_factor(op, 3)
        return _eval_linear(S2, op.walk_p.x(2)) / K3
    Sm = _S_endpoint_primed(op, m)
    K = _K_factor(op, m + 1)
    return Sm / K


def _zeta1(op):
    w, wp = op.walk, op.walk_p
    x, xp = w.x, wp.x
    a0 = alpha_row(op, 0)
    a1 = alpha_row(op, 1)
    b1 = -a1 - gamma_row(op, 1) - Poly((0.0, 1.0))
    pre = (x(0) - xp(1)) * (x(2) - xp(1)) / ((x(1) - xp(2)) * (x(2) - x(1)))
    inner = ((x(1) - x(0)) * (x(2) - xp(0)) / ((x(1) - xp(0)) * (x(2) - x(0)))) \
        * (a0 - b1) - a1
    return pre * inner


def _S_direct(op, m):
    """S_m as a lambda-linear line in x, from two lattice evaluations."""
    w, wp = op.walk, op.walk_p
    P = x_product(w, wp, m, 0, 0)

    def lp(n):
        a, g = alpha_row(op, n), gamma_row(op, n)
        b = -a - g - Poly((0.0, 1.0))
        val = a * P(w.x(n + 1)) + b * P(w.x(n)) + g * P(w.x(n - 1))
        fac = np.prod([w.x(n) - wp.x(i) for i in range(1, m + 1)]) \
            / np.prod([w.x(n) - w.x(i) for i in range(m - 1)])
        return val * fac

    na, nb = m, m + 1
    Sa, Sb = lp(na), lp(nb)
    xa, xb = w.x(na), w.x(nb)

    def line(xv):
        return (Sa * ((xv - xb) / (xa - xb)) + Sb * ((xv - xa) / (xb - xa)))

    return line


def _eval_linear(line, xv):
    return line(xv)


def _pm_ratio_factor(op, m, y, dx):
    """X-type factor of (Smm1)/(Smp): (T - dx Y2/2)/(T + dx Y2/2) with
    T = R_{0,2} + rho_{m-1,0,2} (y - y_{-1})(y - y'_1)."""
    data = product_map(op.walk, op.walk_p, m - 1, 0, 2)
    Y2 = op.curve.Y(2)
    T = data.R(y) + data.rho * (y - op.walk.y(-1)) * (y - op.walk_p.y(1))
    return (T - dx * Y2(y) / 2.0) / (T + dx * Y2(y) / 2.0)


def _K_factor(op, m):
    """S_m(x_{m-1}) / alpha_{m-1}: the lambda-free part of (Smm1)."""
    w, wp = op.walk, op.walk_p
    x, xp = w.x, wp.x
    Xm = _pm_ratio_factor(op, m, w.y(m - 1), x(m) - x(m - 1))
    return (x(m) - x(m - 1)) * (x(m) - xp(m)) * (x(m - 1) - xp(1)) \
        / ((x(m) - xp(0)) * (x(m) - xp(1)) * Xm)


def _S_endpoint_primed(op, m):
    """S_m(x'_m) per (Smp), lambda-linear through gamma'_m."""
    w, wp = op.walk, op.walk_p
    x, xp = w.x, wp.x
    Xpm = 1.0 / _pm_ratio_factor(op, m, wp.y(m - 1), xp(m) - xp(m - 1))
    gp = gamma_prime_row(op, m)
    fac = (xp(m - 1) - x(m - 1)) * (xp(m - 1) - xp(m)) * (xp(m) - xp(1)) \
        / ((xp(m - 1) - xp(0)) * (xp(m - 1) - xp(1)) * Xpm)
    return gp * fac


# -- eigenvalue truncation and biorthogonality ---------------------------------------

def eigen_truncate(op, m, check_points=8):
    """(lambda_m, phi_m) with zeta_m(lambda_m) = 0; the truncated expansion
    is re-solved at lambda_m and checked to annihilate L."""
    zeta = zeta_poly(op, m).trim(1e-12)
    if zeta.degree < 1:
        raise BreakdownError("zeta_m has no lambda slope", where="secondord",
                             index=m)
    lam_m = -zeta.coeff(0) / zeta.coeff(1)
    coeffs = zeta_ladder_coeffs(op, 1.0, m + 1, complex(lam_m))
    cscale = max(abs(c) for c in coeffs[: m + 1])
    if abs(coeffs[m + 1]) > 1e-8 * cscale:
        raise BreakdownError(
            f"c_(m+1) did not truncate: {abs(coeffs[m + 1]):.3e}",
            where="secondord", index=m)
    w, wp = op.walk, op.walk_p
    w.ensure(-1, m + check_points + 2)
    wp.ensure(-1, m + 2)
    phi = Expansion([w.x(n) for n in range(m + 1)],
                    [wp.x(n) for n in range(m)], coeffs[: m + 1])
    worst = residual_Lphi(op, phi, complex(lam_m),
                          range(1, check_points + 1))
    return complex(lam_m), phi, worst


def residual_Lphi(op, phi: Expansion, lam, n_range):
    """max |alpha_n phi_{n+1} + beta_n phi_n + gamma_n phi_{n-1}| / scale."""
    w = op.walk
    worst = 0.0
    for n in n_range:
        a, b, g = recurrence_row(op, n, lam)
        vals = [phi(w.x(n + 1)), phi(w.x(n)), phi(w.x(n - 1))]
        resid = a * vals[0] + b * vals[1] + g * vals[2]
        scale = max(abs(a), abs(b), abs(g)) * max(abs(v) for v in vals)
        worst = max(worst, abs(resid) / max(scale, 1e-300))
    return worst


def left_null_vector(op, lam, N):
    """g_0..g_{N+1} with (g^T (A + lam B))_j = 0 for columns j <= N, by
    forward recursion (g_{N+1} overshoots the truncation on purpose)."""
    rows = [recurrence_row(op, n, lam) for n in range(N + 2)]
    g = np.zeros(N + 2, dtype=complex)
    g[0] = 1.0
    g[1] = -rows[0][1] * g[0] / rows[1][2]
    for j in range(1, N + 1):
        g[j + 1] = -(g[j - 1] * rows[j - 1][0] + g[j] * rows[j][1]) \
            / rows[j + 1][2]
    return g


def eigen_pairing(op, r, s, N=40):
    """Normalized left/right eigenvector pairing g^(s) B phi_r on the
    0..N section, with the two analytic truncation-boundary terms removed.

    The closure is Wilkinson's identity (lam_s - lam_r) g B phi_r =
    boundary terms; lam (zeta roots), phi (coefficient ladder) and g
    (left recursion) are computed independently, so the residual is a
    three-way consistency check, vanishing only when all agree.
    For r = s the raw (nonzero) pairing is returned.
    """
    lam_r, phi_r, _ = eigen_truncate(op, r)
    g_lam = lam_r if r == s else eigen_truncate(op, s)[0]
    g = left_null_vector(op, g_lam, N)
    w = op.walk
    phi_vals = [phi_r(w.x(n)) for n in range(N + 2)]
    total = 0.0 + 0.0j
    magnitude = 0.0
    for n in range(N + 1):
        ba = alpha_row(op, n).coeff(1)
        bg = gamma_row(op, n).coeff(1)
        bb = -1.0 - ba - bg
        term = g[n] * (ba * phi_vals[n + 1] + bb * phi_vals[n]
                       + (bg * phi_vals[n - 1] if n > 0 else 0.0))
        total += term
        magnitude += abs(term)
    if r == s:
        return abs(total) / max(magnitude, 1e-300), total, magnitude
    if abs(g_lam - lam_r) < 1e-12 * max(1.0, abs(lam_r)):
        raise BreakdownError("eigenvalue collision", where="secondord")
    aN = recurrence_row(op, N, g_lam)[0]
    gN1 = recurrence_row(op, N + 1, g_lam)[2]
    boundary = (g[N] * aN * phi_vals[N + 1]
                - gN1 * g[N + 1] * phi_vals[N]) / (g_lam - lam_r)
    total = total - boundary
    magnitude = max(magnitude, abs(boundary))
    return abs(total) / max(magnitude, 1e-300), total, magnitude


def first_difference_residual(op, phi_vals, lam, n_range):
    """alpha_{n+1} dphi_{n+1} - (alpha_n + lam + gamma_{n+1}) dphi_n
    + gamma_n dphi_{n-1} = 0."""
    worst = 0.0
    for n in n_range:
        a_n, _, g_n = recurrence_row(op, n, lam)
        a_n1, _, g_n1 = recurrence_row(op, n + 1, lam)
        d = {k: phi_vals[k + 1] - phi_vals[k] for k in (n - 1, n, n + 1)}
        resid = a_n1 * d[n + 1] - (a_n + lam + g_n1) * d[n] + g_n * d[n - 1]
        scale = max(abs(a_n1), abs(a_n + lam + g_n1), abs(g_n)) \
            * max(abs(v) for v in d.values())
        worst = max(worst, abs(resid) / max(scale, 1e-300))
    return worst


def selfadjoint_check(walk, w_fn, n_range):
    """Symmetry omega_n alpha_n = omega_{n+1} gamma_{n+1} of D^dag w D,
    with omega_n = y_n - y_{n-1}, plus the Table-7 coefficient forms."""
    worst = 0.0
    for n in n_range:
        dxn = walk.x(n + 1) - walk.x(n)
        dyn = walk.y(n) - walk.y(n - 1)
        dyn1 = walk.y(n + 1) - walk.y(n)
        alpha_n = -w_fn(walk.y(n)) / (dxn * dyn)
        gamma_n1 = -w_fn(walk.y(n)) / (dxn * dyn1)
        lhs = dyn * alpha_n
        rhs = dyn1 * gamma_n1
        worst = max(worst, abs(lhs - rhs) / max(abs(rhs), 1e-300))
    return worst


def table7_residual(walk, w_fn, kind, fvals_fn, n_range):
    """Coefficient check of the four second-order operator rows of Table 7."""
    worst = 0.0
    for n in n_range:
        f = GridFunction.sample(walk, fvals_fn, n - 2, n + 2, "x")
        wgt = {k: w_fn(walk.y(k)) for k in range(n - 2, n + 2)}
        dxn = walk.x(n + 1) - walk.x(n)
        dxm = walk.x(n) - walk.x(n - 1)
        dym = walk.y(n) - walk.y(n - 1)
        fm1, f0, fp1 = f[n - 1], f[n], f[n + 1]
        if kind == "DwD":
            got = D_adj(GridFunction(walk, {k: wgt[k] * v for k, v in
                                            D(f).values.items()}, "y"))[n]
            want = (-wgt[n - 1] / (dxm * dym)) * fm1 \
                + (wgt[n - 1] / (dxm * dym) + wgt[n] / (dxn * dym)) * f0 \
                + (-wgt[n] / (dxn * dym)) * fp1
        elif kind == "MwM":
            got = M_adj(GridFunction(walk, {k: wgt[k] * v for k, v in
                                            M(f).values.items()}, "y"))[n]
            want = wgt[n - 1] / 4.0 * fm1 \
                + (wgt[n - 1] + wgt[n]) / 4.0 * f0 + wgt[n] / 4.0 * fp1
        else:
            raise ValueError(kind)
        worst = max(worst, abs(got - want) / max(abs(want), 1e-300))
    return worst


def lemma_fit_residual(op, m, n_range):
    """L P_m sampled on the lattice is fitted by r_m Ptilde_m + s_m
    Ptilde_{m-1}; returns the two-parameter least-squares residual."""
    w, wp = op.walk, op.walk_p
    P = x_product(w, wp, m, 0, 0)

    def ptilde(k, xv):
        num = np.prod([xv - w.x(i) for i in range(k)]) if k else 1.0
        den = np.prod([xv - wp.x(i) for i in range(1, k + 1)]) if k else 1.0
        return num / den

    rows, rhs = [], []
    for n in n_range:
        a, b, g = recurrence_row(op, n)
        val = a * P(w.x(n + 1)) + b * P(w.x(n)) + g * P(w.x(n - 1))
        rows.append([ptilde(m, w.x(n)), ptilde(m - 1, w.x(n))])
        rhs.append(val)
    A = np.array(rows, dtype=complex)
    bvec = np.array(rhs, dtype=complex)
    sol, *_ = np.linalg.lstsq(A, bvec, rcond=None)
    resid = float(np.max(np.abs(A @ sol - bvec)))
    return resid / max(1.0, float(np.max(np.abs(bvec))))


def sm_linearity_residual(op, m, n_points=4):
    """Values of the (Sm2) quotient lie on a line in x."""
    line = _S_direct(op, m)   # built from two points
    w, wp = op.walk, op.walk_p
    P = x_product(w, wp, m, 0, 0)
    worst = 0.0
    for n in range(m + 2, m + 2 + n_points):
        a, g = alpha_row(op, n), gamma_row(op, n)
        b = -a - g - Poly((0.0, 1.0))
        val = (a * P(w.x(n + 1)) + b * P(w.x(n)) + g * P(w.x(n - 1)))
        fac = np.prod([w.x(n) - wp.x(i) for i in range(1, m + 1)]) \
            / np.prod([w.x(n) - w.x(i) for i in range(m - 1)])
        got = (val * fac)(op.lam)
        want = line(w.x(n))(op.lam)
        worst = max(worst, abs(got - want) / max(abs(want), 1e-300))
    return worst


# -- classical degenerations ----------------------------------------------------

def taylor_2f1_coeffs(mu: Poly, nu: Poly, lam, a, M):
    """Taylor coefficients about the singular point a (mu(a) = 0) of
    mu f'' + nu f' - lam f = 0, with the Gauss ratio as the closed form."""
    a = complex(a)
    if abs(mu(a)) > 1e-10 * max(mu.norm(), 1.0) * max(1.0, abs(a)) ** 3:
        raise BreakdownError("a is not a root of mu", where="secondord")
    mup, mupp = mu.deriv(), mu.deriv().deriv()
    nup = nu.deriv()
    cs = [1.0 + 0.0j]
    for n in range(M):
        den = (n + 1) * (n * mup(a) + nu(a))
        if abs(den) < 1e-13:
            raise BreakdownError("2F1 ratio denominator vanished",
                                 where="secondord", index=n)
        cs.append(cs[-1] * (lam - n * nup(0) - n * (n - 1) * mupp(0) / 2.0)
                  / den)
    return cs


def taylor_2f1_residual(mu, nu, lam, a, cs):
    """Coefficientwise residual of mu f'' + nu f' - lam f as a series in
    (x - a)."""
    mu_s = mu.compose_linear(1.0, a)
    nu_s = nu.compose_linear(1.0, a)
    f = Poly(cs)
    expr = mu_s * f.deriv().deriv() + nu_s * f.deriv() - lam * f
    # only coefficients fully determined by cs are meaningful
    upto = len(cs) - 2
    resid = max(abs(expr.coeff(k)) for k in range(upto))
    return resid / max(1.0, max(abs(c) for c in cs))


def newton_3f2_coeffs(mu: Poly, nu: Poly, lam, a, h, M):
    """Newton-factorial coefficients on the arithmetic lattice with the
    singular point a: mu - h nu/2 must vanish at a."""
    a, h = complex(a), complex(h)
    sing = mu - (h / 2.0) * nu
    if abs(sing(a)) > 1e-9 * max(mu.norm(), 1.0) * max(1.0, abs(a)) ** 2:
        raise BreakdownError("a is not a singular point (mu - h nu/2)(a) != 0",
                             where="secondord")
    mupp = mu.deriv().deriv()(0)
    nup = nu.deriv()(0)
    # mu - h nu / 2 = mupp (x - a)(x - b)/2
    quot = sing.exact_div(Poly((-a, 1.0)), rel_tol=1e-8, where="secondord")
    b = -quot.coeff(0) / quot.coeff(1)
    cs = [1.0 + 0.0j]
    for n in range(M):
        den = (n + 1) * (n * (a - b + n * h) * mupp / 2.0 + nu(a + n * h))
        if abs(den) < 1e-13:
            raise BreakdownError("3F2 ratio denominator vanished",
                                 where="secondord", index=n)
        cs.append(cs[-1] * (lam - n * nup - n * (n - 1) * mupp / 2.0) / den)
    return cs


def newton_3f2_residual(mu, nu, lam, a, h, cs, k_range):
    """Pointwise residual of the central difference equation at x = a + k h
    for the Newton-factorial series."""
    def fval(x):
        acc = 0.0 + 0.0j
        run = 1.0 + 0.0j
        for n, c in enumerate(cs):
            if n > 0:
                run *= (x - a - (n - 1) * h)
            acc += c * run
        return acc

    worst = 0.0
    for k in k_range:
        x = a + k * h
        dd = (fval(x + h) - 2.0 * fval(x) + fval(x - h)) / (h * h)
        sd = (fval(x + h) - fval(x - h)) / (2.0 * h)
        resid = mu(x) * dd + nu(x) * sd - lam * fval(x)
        scale = max(abs(mu(x) * dd), abs(nu(x) * sd), abs(lam * fval(x)), 1.0)
        worst = max(worst, abs(resid) / scale)
    return worst

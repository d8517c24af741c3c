"""Two continued-fraction engines.

(a) The expansion of (sqrt(P) - V)/(gamma (x - x_m)(x - v)), stepping
through V_m / gamma_m / x_m with the square-root determinations at u and v
fixed once at initialization, plus the Pell identity of the convergents.

(b) The interpolatory fraction r_m (x - x_m)/(1 + ...): Thiele coefficients,
convergent recurrences, Casorati determinant, R_II contraction, and the
orthogonal-polynomial degeneration at confluent or infinite nodes.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .algebra import Poly
from .errors import BreakdownError, INF_POINT

BREAKDOWN_TOL = 1e-12
PELL_TOL = 1e-6


# -- sqrt(P) fraction -------------------------------------------------------------

@dataclass
class SqrtPState:
    m: int
    V: Poly
    gamma: complex
    x_m: complex
    delta: complex
    rho: complex          # = x_{m+1}; INF_POINT when delta degenerates
    alpha: complex
    beta: complex
    # fixed context
    P: Poly = None
    u: complex = 0.0
    v: complex = 0.0
    sqrtPu: complex = 0.0  # chosen determinations, never re-selected
    sqrtPv: complex = 0.0


def _fourth_root(P, V, u, v, x_m):
    """delta, rho with V^2 - P = delta (x-u)(x-v)(x-x_m)(x-rho)."""
    quart = V * V - P
    q = quart.exact_div(Poly.from_roots([u, v, x_m]), rel_tol=1e-8,
                        where="contfrac")
    if q.degree < 1:
        if q.degree < 0:
            raise BreakdownError("V^2 - P identically zero (degenerate sqrt)",
                                 where="contfrac")
        return complex(q.coeff(0)), INF_POINT
    delta = q.lead
    scale = max(abs(delta), quart.norm() / max(1.0, abs(u), abs(v)) ** 3)
    if abs(delta) < 1e-12 * scale:
        return complex(q.coeff(0)), INF_POINT
    return complex(delta), complex(-q.coeff(0) / delta)


def _alpha_beta(state):
    """alpha_m = 1/f_m(v), beta_m = 1/(f_m'(u)(u - v)), both as limits
    through the fixed square-root determinations."""
    P, u, v = state.P, state.u, state.v
    dP = P.deriv()
    den_v = dP(v) / (2.0 * state.sqrtPv) - state.V.deriv()(v)
    den_u = dP(u) / (2.0 * state.sqrtPu) - state.V.deriv()(u)
    if abs(den_v) < 1e-14 * max(1.0, dP.norm()) or \
       abs(den_u) < 1e-14 * max(1.0, dP.norm()):
        raise BreakdownError("derivative denominator vanished in alpha/beta",
                             where="contfrac", index=state.m)
    alpha = state.gamma * (v - state.x_m) / den_v
    beta = state.gamma * (u - state.x_m) / den_u
    return alpha, beta


def sqrtP_init(P: Poly, u, v, x0, sign_u=1, sign_v=1, sign_x0=1):
    """V_0 interpolates the chosen square-root determinations of P at
    u, v, x0; gamma_0 = 1."""
    u, v, x0 = complex(u), complex(v), complex(x0)
    pts = [u, v, x0]
    if min(abs(a - b) for i, a in enumerate(pts) for b in pts[i + 1:]) \
            < 1e-12 * max(1.0, *(abs(p) for p in pts)):
        raise BreakdownError("u, v, x0 must be distinct", where="contfrac")
    su = complex(sign_u) * np.sqrt(complex(P(u)))
    sv = complex(sign_v) * np.sqrt(complex(P(v)))
    s0 = complex(sign_x0) * np.sqrt(complex(P(x0)))
    V0 = _lagrange3(pts, [su, sv, s0])
    delta, rho = _fourth_root(P, V0, u, v, x0)
    st = SqrtPState(0, V0, 1.0 + 0.0j, x0, delta, rho, 0.0, 0.0,
                    P=P, u=u, v=v, sqrtPu=su, sqrtPv=sv)
    st.alpha, st.beta = _alpha_beta(st)
    return st


def _lagrange3(xs, vs):
    out = Poly(())
    for i in range(3):
        others = [xs[j] for j in range(3) if j != i]
        li = Poly.from_roots(others)
        out = out + vs[i] / li(xs[i]) * li
    return out


def sqrtP_step(state: SqrtPState):
    """V_{m+1} = -V_m - delta_m (x - rho_m)[alpha_m (x-u) + beta_m (x-v)]
    / gamma_m; x_{m+1} = rho_m; gamma_{m+1} = delta_m / gamma_m."""
    if state.rho is INF_POINT:
        raise BreakdownError("fourth root at infinity: periodic fraction "
                             "cannot be stepped through rho", where="contfrac",
                             index=state.m)
    lin = state.alpha * Poly((-state.u, 1.0)) + state.beta * Poly((-state.v, 1.0))
    Vn = -1.0 * state.V - (state.delta / state.gamma) \
        * Poly((-state.rho, 1.0)) * lin
    x_next = state.rho
    gamma_next = state.delta / state.gamma
    # the new V must keep interpolating the fixed determinations at u, v
    for pt, det in ((state.u, state.sqrtPu), (state.v, state.sqrtPv)):
        if abs(Vn(pt) - det) > 1e-7 * max(1.0, abs(det)):
            raise BreakdownError(
                f"V_{state.m + 1} lost the square-root determination "
                f"({abs(Vn(pt) - det):.3e})", where="contfrac",
                index=state.m + 1)
    delta, rho = _fourth_root(state.P, Vn, state.u, state.v, x_next)
    st = SqrtPState(state.m + 1, Vn, gamma_next, x_next, delta, rho, 0.0, 0.0,
                    P=state.P, u=state.u, v=state.v,
                    sqrtPu=state.sqrtPu, sqrtPv=state.sqrtPv)
    st.alpha, st.beta = _alpha_beta(st)
    return st


def sqrtP_run(P, u, v, x0, sign_u=1, sign_v=1, sign_x0=1, levels=4):
    states = [sqrtP_init(P, u, v, x0, sign_u, sign_v, sign_x0)]
    for _ in range(levels):
        states.append(sqrtP_step(states[-1]))
    return states


def sqrtP_convergents(states, depth):
    """A_m, B_m of the fraction; A_0 = 0, A_1 = (x - u), B_0 = 1."""
    u, v = states[0].u, states[0].v
    A = [Poly(()), Poly((-u, 1.0))]
    B = [Poly.one(), states[0].alpha * Poly((-u, 1.0))
         + states[0].beta * Poly((-v, 1.0))]
    uv = Poly.from_roots([u, v])
    for n in range(1, depth):
        lin = states[n].alpha * Poly((-u, 1.0)) + states[n].beta * Poly((-v, 1.0))
        A.append(lin * A[n] - uv * A[n - 1])
        B.append(lin * B[n] - uv * B[n - 1])
    return A, B


def pell_check(states, m):
    """Residual report for B_{m-1}^2 P - Atilde_{m-1}^2 = const (x-u)^m
    (x-v)^m (x-x_0)(x-x_m); the constant is fixed from leading coefficients
    (the paper's 4 delta_0 delta_m bookkeeping is reported alongside)."""
    st0 = states[0]
    P, u, v = st0.P, st0.u, st0.v
    A, B = sqrtP_convergents(states, m)
    Atil = st0.V * B[m - 1] + st0.gamma * Poly.from_roots([st0.x_m, v]) * A[m - 1]
    lhs = B[m - 1] * B[m - 1] * P - Atil * Atil
    shape = Poly.from_roots([u] * m + [v] * m + [st0.x_m, states[m].x_m])
    const = lhs.trim(1e-10).lead / shape.lead if lhs.trim(1e-10).degree >= 0 else 0.0
    resid = (lhs - const * shape).norm() / max(lhs.norm(), 1e-300)
    return {
        "m": m,
        "constant": complex(const),
        "paper_constant": 4.0 * states[0].delta * states[m].delta,
        "residual": float(resid),
        "x_m": complex(states[m].x_m),
        "ok": resid < PELL_TOL,
    }


def abel_identity_residual(states, m, curve=None):
    """delta_m (x - x_m)(x - x_{m+1}) = Y + 2 z_m X + z_m^2 (x-u)(x-v)
    where V_m = X + z_m (x-u)(x-v) splits off the u,v-interpolant."""
    st = states[m]
    if st.rho is INF_POINT:
        raise BreakdownError("rho at infinity", where="contfrac", index=m)
    u, v, P = st.u, st.v, st.P
    X2 = Poly.from_roots([u, v])
    z_m = st.V.coeff(2) - 0.0  # quadratic coefficient beyond the linear interpolant
    # linear interpolant of the determinations at u, v
    slope = (st.sqrtPv - st.sqrtPu) / (v - u)
    Xlin = Poly((st.sqrtPu - slope * u, slope))
    z_m = (st.V - Xlin).exact_div(X2, rel_tol=1e-7, where="contfrac")
    if z_m.degree > 0:
        raise BreakdownError("V - interpolant not proportional to (x-u)(x-v)",
                             where="contfrac", index=m)
    z = complex(z_m.coeff(0)) if z_m.degree == 0 else 0.0
    Y = (Xlin * Xlin - P).exact_div(X2, rel_tol=1e-7, where="contfrac")
    lhs = st.delta * Poly.from_roots([st.x_m, st.rho])
    rhs = Y + 2.0 * z * Xlin + z * z * X2
    return (lhs - rhs).norm() / max(rhs.norm(), 1e-300)


def two_point_pade_orders(states, depth, n_check=3):
    """Orders of contact of A_n/B_n with f_0 about u (n+1) and v (n),
    measured numerically on shrinking circles."""
    st0 = states[0]
    P, u, v = st0.P, st0.u, st0.v

    def f0(x):
        return (np.sqrt(complex(P(x))) * _branch(x) - st0.V(x)) \
            / (st0.gamma * (x - st0.x_m) * (x - v))

    def _branch(x):
        # determination continuous with the fixed choice at u (resp. v)
        return 1.0

    A, B = sqrtP_convergents(states, depth)
    out = []
    for n in range(1, depth + 1):
        errs_u, errs_v = [], []
        for eps in (1e-2, 1e-3):
            xu, xv = u + eps, v + eps
            su = np.sqrt(complex(P(xu)))
            if abs(su - st0.sqrtPu) > abs(su + st0.sqrtPu):
                su = -su
            sv = np.sqrt(complex(P(xv)))
            if abs(sv - st0.sqrtPv) > abs(sv + st0.sqrtPv):
                sv = -sv
            fu = (su - st0.V(xu)) / (st0.gamma * (xu - st0.x_m) * (xu - v))
            fv = (sv - st0.V(xv)) / (st0.gamma * (xv - st0.x_m) * (xv - v))
            errs_u.append(abs(B[n](xu) * fu - A[n](xu)))
            errs_v.append(abs(B[n](xv) * fv - A[n](xv)))
        order_u = np.log10(errs_u[0] / errs_u[1])
        order_v = np.log10(errs_v[0] / errs_v[1])
        out.append((n, float(order_u), float(order_v)))
    return out


# -- Thiele / interpolatory fraction -------------------------------------------

@dataclass
class InterpFraction:
    nodes: list
    r: list

    def depth(self):
        return len(self.r)


# extended precision for the tail transforms: the -1 subtraction loses
# digits level by level in double
_LDC = getattr(np, "complex256", complex)


def thiele_build(nodes, fvals, depth=None):
    """r_m by progressive interpolation through the tail fractions.

    Requires f(x_0) = 0.  Breakdown (non-normal table) is reported with the
    level, never repaired.
    """
    nodes_c = [complex(v) for v in nodes]
    fvals_c = [complex(v) for v in fvals]
    if abs(fvals_c[0]) > 1e-12 * max(1.0, *(abs(v) for v in fvals_c)):
        raise BreakdownError("thiele_build requires f(x_0) = 0",
                             where="contfrac")
    depth = len(nodes_c) - 1 if depth is None else depth
    scale = max(1.0, *(abs(v) for v in fvals_c))
    # keep any extra precision the caller supplied (longdouble inputs)
    xs = [_LDC(v) for v in nodes]
    tail = {j: _LDC(fvals[j]) for j in range(1, len(xs))}
    rs = []
    for m in range(depth):
        fm1 = tail[m + 1]
        if abs(complex(fm1)) < BREAKDOWN_TOL * scale:
            raise BreakdownError("Thiele breakdown (non-normal table)",
                                 where="contfrac", index=m)
        r_m = fm1 / (xs[m + 1] - xs[m])
        rs.append(complex(r_m))
        nxt = {}
        for j in range(m + 2, len(xs)):
            if abs(complex(tail[j])) < BREAKDOWN_TOL * scale:
                raise BreakdownError("Thiele breakdown (non-normal table)",
                                     where="contfrac", index=m)
            nxt[j] = r_m * (xs[j] - xs[m]) / tail[j] - 1.0
        tail = nxt
        if len(tail) == 0:
            break
    return InterpFraction(nodes_c, rs)


def convergents(fraction: InterpFraction, m):
    """(N_m, P_m) via the matrix two-term recurrence with the prequel
    N_{-1} = 1, P_{-1} = 0."""
    if m > fraction.depth():
        raise BreakdownError("convergent beyond built depth", where="contfrac")
    Nm1, Pm1 = Poly.one(), Poly(())
    N, P = Poly(()), Poly.one()
    for k in range(m):
        lin = fraction.r[k] * Poly((-fraction.nodes[k], 1.0))
        N, Nm1 = N + lin * Nm1, N
        P, Pm1 = P + lin * Pm1, P
    return N, P


def casorati_residual(fraction, m):
    """N_{m-1} P_m - P_{m-1} N_m vs (-1)^m r_0..r_{m-1} (x-x_0)..(x-x_{m-1})."""
    Nm1, Pm1 = convergents(fraction, m - 1)
    N, P = convergents(fraction, m)
    lhs = Nm1 * P - Pm1 * N
    rhs = Poly.one() * (-1.0) ** m
    for k in range(m):
        rhs = rhs * fraction.r[k] * Poly((-fraction.nodes[k], 1.0))
    return (lhs - rhs).norm() / max(rhs.norm(), 1e-300)


def contract_r2_residual(fraction, m):
    """The R_II three-term identity for the even denominators."""
    P2m2p = convergents(fraction, 2 * m + 2)[1]
    P2m = convergents(fraction, 2 * m)[1]
    P2m2 = convergents(fraction, 2 * m - 2)[1]
    x = fraction.nodes
    r = fraction.r
    mid = Poly.one() + r[2 * m] * Poly((-x[2 * m], 1.0)) \
        + r[2 * m + 1] * Poly((-x[2 * m + 1], 1.0))
    rhs = mid * P2m - r[2 * m - 1] * r[2 * m] \
        * Poly.from_roots([x[2 * m - 1], x[2 * m]]) * P2m2
    return (P2m2p - rhs).norm() / max(P2m2p.norm(), 1e-300)


def interpolation_residual(fraction, fvals, m):
    """max |N_m/P_m (x_j) - f(x_j)| over j <= m."""
    N, P = convergents(fraction, m)
    worst = 0.0
    scale = max(1.0, *(abs(v) for v in fvals[: m + 1]))
    for j in range(m + 1):
        xj = fraction.nodes[j]
        worst = max(worst, abs(N(xj) / P(xj) - fvals[j]) / scale)
    return worst


# -- fraction at infinity (orthogonal-polynomial degeneration) ----------------------

def rfrac_from_moments(moments, depth):
    """r_m of f = (r_0/x)/(1 + (r_1/x)/(1 + ...)) from the asymptotic
    moments f ~ sum moments[j] / x^{j+1}, by formal series peeling."""
    L = len(moments)
    a = np.asarray(moments, dtype=complex)
    rs = []
    for m in range(depth):
        if a.size == 0 or abs(a[0]) < 1e-300:
            raise BreakdownError("series peeling breakdown", where="contfrac",
                                 index=m)
        rs.append(complex(a[0]))
        # f_{m+1}(t) = a0 / A(t) - 1 with f_m = t A(t), t = 1/x
        inv = _series_reciprocal(a, L)
        b = a[0] * inv
        b[0] -= 1.0
        a = b[1:]
        L -= 1
    return rs


def _series_reciprocal(a, L):
    out = np.zeros(L, dtype=complex)
    out[0] = 1.0 / a[0]
    for k in range(1, L):
        acc = 0.0
        for j in range(1, min(k, a.size - 1) + 1):
            acc += a[j] * out[k - j]
        out[k] = -acc / a[0]
    return out


def denominators_at_infinity(rs):
    """Cleared denominators p_j: p_{k+1} = p_k + r_k p_{k-1} (k even),
    p_{k+1} = x p_k + r_k p_{k-1} (k odd); p_{2m} are the orthogonal
    polynomials of the contracted fraction."""
    pm1, p = Poly(()), Poly.one()
    out = [p]
    for k, r in enumerate(rs):
        if k % 2 == 0:
            p, pm1 = p + r * pm1, p
        else:
            p, pm1 = Poly((0.0, 1.0)) * p + r * pm1, p
        out.append(p)
    return out


def jacobi_from_moments(moments):
    """Monic three-term coefficients (alpha_k, beta_k) from power moments by
    the Chebyshev algorithm; serves the non-normal (odd-function) cases the
    r_m/x fraction cannot reach."""
    mu = np.asarray(moments, dtype=complex)
    n = mu.size // 2
    if n < 1:
        raise BreakdownError("need at least two moments", where="contfrac")
    sigma_prev = np.zeros(mu.size, dtype=complex)
    sigma = mu.copy()
    alphas = [complex(mu[1] / mu[0])]
    betas = [complex(mu[0])]
    for k in range(1, n):
        nxt = np.zeros(mu.size, dtype=complex)
        for ell in range(k, 2 * n - k):
            nxt[ell] = sigma[ell + 1] - alphas[k - 1] * sigma[ell] \
                - betas[k - 1] * sigma_prev[ell]
        if abs(nxt[k]) < 1e-300:
            break
        alphas.append(complex(nxt[k + 1] / nxt[k] - sigma[k] / sigma[k - 1]))
        betas.append(complex(nxt[k] / sigma[k - 1]))
        sigma_prev, sigma = sigma, nxt
    return alphas, betas


def jfraction_denominators(alphas, betas, depth):
    """Monic p_{k+1} = (x - alpha_k) p_k - beta_k p_{k-1} (beta_0 unused)."""
    pm1, p = Poly(()), Poly.one()
    out = [p]
    for k in range(depth):
        lin = Poly((-alphas[k], 1.0))
        p, pm1 = lin * p - (betas[k] if k > 0 else 0.0) * pm1, p
        out.append(p)
    return out

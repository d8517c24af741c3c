"""Interpolatory rational expansions sum c_m prod(x - x_i)/prod(x - x'_i).

Partial sums are always evaluated term by term with running products; the
Table-5/6 columns of the difference-equation solvers are reproduced exactly
this way, including the sign jump where a pole of the x' family passes near
the evaluation point.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .algebra import Poly, divided_differences
from .divdiff import product_map
from .errors import BreakdownError
from .lattice import LatticeWalk, seed

CANCELLATION_TOL = 1e-13
INTERP_TOL = 1e-8


@dataclass
class Expansion:
    nodes: list         # x_0 .. x_M (at least as many as coeffs - 1)
    poles: list         # x'_0 .. x'_{M-1}
    coeffs: list        # c_0 .. c_M

    def order(self):
        return len(self.coeffs) - 1

    def partial_sums(self, x):
        """S_0(x), ..., S_M(x), term by term with a running product."""
        out = []
        acc = 0.0 + 0.0j
        run = 1.0 + 0.0j
        for m, c in enumerate(self.coeffs):
            if m > 0:
                run *= (x - self.nodes[m - 1]) / (x - self.poles[m - 1])
            acc += c * run
            out.append(acc)
        return out

    def __call__(self, x, upto=None):
        sums = self.partial_sums(x)
        return sums[-1 if upto is None else upto]

    def interpolation_residual(self, fvals):
        """max_j |S_j(x_j) - f(x_j)| / scale for j <= order."""
        worst = 0.0
        scale = max(1.0, *(abs(v) for v in fvals))
        for j, fv in enumerate(fvals[: len(self.coeffs)]):
            worst = max(worst, abs(self(self.nodes[j], upto=j) - fv) / scale)
        return worst


def _basis_value(nodes, poles, m, x):
    num = np.prod([x - nodes[i] for i in range(m)]) if m else 1.0
    den = np.prod([x - poles[i] for i in range(m)]) if m else 1.0
    return num / den


def coeffs_from_values(nodes, fvals, poles, cross_check=True,
                       cancellation_guard=True):
    """Progressive interpolation coefficients c_k; partial sums interpolate
    f at x_0..x_k.

    Cross-checked against the divided-difference characterization: c_0+...+c_k
    is the k-th order divided difference of (x-x'_0)...(x-x'_{k-1}) f(x).
    """
    M = len(fvals) - 1
    nodes = [complex(v) for v in nodes]
    poles = [complex(v) for v in poles]
    scale = max(1.0, *(abs(v) for v in fvals))
    for i, xi in enumerate(nodes[: M + 1]):
        for j, xj in enumerate(nodes[:i]):
            if abs(xi - xj) < 1e-12 * max(1.0, abs(xi)):
                raise BreakdownError("duplicate interpolation node",
                                     where="expand", index=i)
        for j in range(min(i, len(poles))):
            if abs(xi - poles[j]) < 1e-10 * max(1.0, abs(xi)):
                raise BreakdownError("node collides with a pole",
                                     where="expand", index=i)
    coeffs = [complex(fvals[0])]
    for k in range(1, M + 1):
        xk = nodes[k]
        rem = complex(fvals[k]) - sum(
            coeffs[m] * _basis_value(nodes, poles, m, xk) for m in range(k))
        ck = rem / _basis_value(nodes, poles, k, xk)
        if cancellation_guard and 0.0 < abs(rem) < CANCELLATION_TOL * scale \
                and abs(ck) > 1e-10 * max(abs(v) for v in coeffs):
            # the remainder is down at rounding level yet the basis value
            # would amplify it into a visible coefficient
            raise BreakdownError(
                "catastrophic cancellation in progressive interpolation",
                where="expand", index=k)
        coeffs.append(ck)
    exp = Expansion(nodes[: M + 1], poles[:M], coeffs)
    if cross_check:
        _divdiff_cross_check(exp, fvals)
    return exp


def _divdiff_cross_check(exp, fvals, rel_tol=1e-6):
    """c_0 + ... + c_k vs the divided difference of prod(x - x'_i) f."""
    for k in (1, len(exp.coeffs) - 1):
        if k < 1:
            continue
        xs = exp.nodes[: k + 1]
        gs = [fv * np.prod([x - exp.poles[i] for i in range(k)])
              for x, fv in zip(xs, fvals[: k + 1])]
        dd = divided_differences(xs, gs)[-1]
        got = sum(exp.coeffs[: k + 1])
        if abs(got - dd) > rel_tol * max(1.0, abs(dd)):
            raise BreakdownError(
                f"divided-difference cross-check failed at order {k}: "
                f"{abs(got - dd):.3e}", where="expand")


def cauchy_kernel_expansion(t, nodes, poles, M):
    """Closed-form expansion of 1/(x - t)."""
    t = complex(t)
    for x in nodes[: M + 1]:
        if abs(x - t) < 1e-12 * max(1.0, abs(t)):
            raise BreakdownError("t collides with a node", where="expand")
    coeffs = [1.0 / (nodes[0] - t)]
    for n in range(1, M + 1):
        num = np.prod([t - poles[i] for i in range(n - 1)]) if n > 1 else 1.0
        den = np.prod([t - nodes[i] for i in range(n + 1)])
        coeffs.append((poles[n - 1] - nodes[n]) * num / den)
    return Expansion(list(nodes[: M + 1]), list(poles[:M]), coeffs)


def identity_expansion(nodes, poles, M):
    """Closed-form expansion of the function x itself."""
    coeffs = [complex(nodes[0])]
    for n in range(1, M + 1):
        coeffs.append(complex(nodes[n]) - complex(poles[n - 1]))
    return Expansion(list(nodes[: M + 1]), list(poles[:M]), coeffs)


# -- first-order difference equations ------------------------------------------

def _walk_nodes(walk, M):
    walk.ensure(-1, M + 1)
    return [walk.x(n) for n in range(M + 1)]


def elliptic_log_solve(curve, walk, walk_p, f0, M, A=None, agree_tol=1e-8):
    """Solve D f (y) = Y2(y)/(y - A), A = y'_{-1} of the primed walk.

    Coefficients by the closed form c_m = (y_{m-1} - y'_{m-1})/C_{m,0,0};
    the hypergeometric successive-ratio form is computed alongside and both
    must agree.  The direct lattice recurrence provides the interpolation
    cross-check.
    """
    Apole = walk_p.y(-1)
    if A is not None and abs(complex(A) - Apole) > 1e-8 * max(1.0, abs(Apole)):
        raise BreakdownError("A does not match y'_{-1} of the primed walk",
                             where="expand")
    walk.ensure(-1, M + 2)
    walk_p.ensure(-1, M + 2)
    Y2 = curve.Y(2)
    coeffs = [complex(f0)]
    for m in range(1, M + 1):
        data = product_map(walk, walk_p, m, 0, 0)
        if abs(data.C) < 1e-300:
            raise BreakdownError("C_{m,0,0} = 0", where="expand", index=m)
        coeffs.append((walk.y(m - 1) - walk_p.y(m - 1)) / data.C)
    # hypergeometric ratio form
    for m in range(1, M):
        num = (walk.y(m) - walk_p.y(m)) / (walk.y(m - 1) - walk_p.y(m - 1))
        num *= (walk_p.x(0) - walk_p.x(m)) * (walk_p.y(-1) - walk.y(m - 1))
        num /= (walk_p.x(0) - walk.x(m)) * (walk_p.y(-1) - walk_p.y(m))
        ratio = coeffs[m + 1] / coeffs[m]
        if abs(ratio - num) > agree_tol * max(1.0, abs(ratio)):
            raise BreakdownError(
                f"elliptic-log two-form disagreement at m={m}: "
                f"{abs(ratio - num):.3e}", where="expand")
    exp = Expansion(_walk_nodes(walk, M), _walk_nodes(walk_p, M - 1), coeffs)
    fvals = _elliptic_log_recurrence(curve, walk, Apole, f0, M)
    resid = exp.interpolation_residual(fvals)
    if resid > INTERP_TOL:
        raise BreakdownError(f"partial sums miss the recurrence values "
                             f"({resid:.3e})", where="expand")
    return exp


def _elliptic_log_recurrence(curve, walk, A, f0, M):
    Y2 = curve.Y(2)
    vals = [complex(f0)]
    for n in range(M):
        dx = walk.x(n + 1) - walk.x(n)
        vals.append(vals[-1] + dx * Y2(walk.y(n)) / (walk.y(n) - A))
    return vals


def exponential_solve(curve, walk, walk_p, a, c0, M, agree_tol=1e-8):
    """Solve D f = a M f with the step constraint x'_0 - x'_{-1} = 2/a.

    Three coefficient routes must agree: the successive-ratio closed form,
    the eta-product form, and generic extraction from the direct recurrence.
    """
    a = complex(a)
    gap = walk_p.x(0) - walk_p.x(-1)
    if abs(gap - 2.0 / a) > 1e-8 * max(1.0, abs(gap)):
        raise BreakdownError("primed walk violates x'_0 - x'_{-1} = 2/a",
                             where="expand")
    walk.ensure(-1, M + 2)
    walk_p.ensure(-1, M + 2)
    x, xp = walk.x, walk_p.x
    coeffs = [complex(c0)]
    for n in range(M):
        dxn = x(n + 1) - x(n)
        dxpn = xp(n) - xp(n - 1)
        if abs(1.0 - a * dxn / 2.0) < 1e-12:
            raise BreakdownError("1 - a dx/2 vanished", where="expand", index=n)
        ratio = ((x(n) - xp(-1)) * (1.0 + a * dxpn / 2.0) * (x(n + 1) - xp(n))) \
            / ((xp(n) - xp(-1)) * (1.0 - a * dxn / 2.0) * (x(n) - xp(n - 1)))
        coeffs.append(coeffs[-1] * ratio)
    # eta-product form of the Proposition
    eta_coeffs = [complex(c0)]
    eta_run = 1.0 + 0.0j
    for n in range(1, M + 1):
        eta = ((x(n - 1) - xp(-1)) * (1.0 + a * (xp(n - 1) - xp(n - 2)) / 2.0)) \
            / ((xp(n - 1) - xp(-1)) * (1.0 - a * (x(n) - x(n - 1)) / 2.0))
        eta_run *= eta
        eta_coeffs.append((x(n) - xp(n - 1)) / (x(0) - xp(-1)) * eta_run * c0)
    # generic extraction from the recurrence values
    fvals = [complex(c0)]
    for n in range(M):
        dx = x(n + 1) - x(n)
        fvals.append(fvals[-1] * (1.0 + a * dx / 2.0) / (1.0 - a * dx / 2.0))
    nodes = _walk_nodes(walk, M)
    poles = _walk_nodes(walk_p, M - 1)
    generic = coeffs_from_values(nodes, fvals, poles, cross_check=False,
                                 cancellation_guard=False)
    # the closed forms are stable at every order; value-extraction loses
    # digits at high order (near-coincident nodes on the quasi-periodic
    # lattice), so it is compared on the well-conditioned prefix only
    generic_upto = min(M, 10)
    for m in range(M + 1):
        ref = coeffs[m]
        others = [eta_coeffs[m]]
        if m <= generic_upto:
            others.append(generic.coeffs[m])
        for other in others:
            if abs(other - ref) > agree_tol * max(1.0, abs(ref)):
                raise BreakdownError(
                    f"exponential three-form disagreement at m={m}",
                    where="expand")
    exp = Expansion(nodes, poles, coeffs)
    resid = exp.interpolation_residual(fvals)
    if resid > INTERP_TOL:
        raise BreakdownError(f"exponential partial sums miss recurrence "
                             f"values ({resid:.3e})", where="expand")
    return exp


def solve_primed_seed_for_exponential(curve, a, x0_guess, branch="plus",
                                      tol=1e-10, max_iter=80):
    """Secant iteration on the primed seed x'_0 so that x'_0 - x'_{-1} = 2/a."""
    a = complex(a)

    def gap(x0):
        w = LatticeWalk(curve, x0, branch)
        return w.x(0) - w.x(-1) - 2.0 / a

    x_prev, x_cur = complex(x0_guess), complex(x0_guess) * 1.001 + 1e-3
    f_prev, f_cur = gap(x_prev), gap(x_cur)
    for _ in range(max_iter):
        if abs(f_cur) < tol:
            return x_cur
        denom = f_cur - f_prev
        if abs(denom) < 1e-300:
            break
        x_next = x_cur - f_cur * (x_cur - x_prev) / denom
        x_prev, f_prev, x_cur = x_cur, f_cur, x_next
        f_cur = gap(x_cur)
    raise BreakdownError("secant iteration for the exponential seed failed",
                         where="expand")


def rational_rhs_solve(curve, walk, walk_p, num: Poly, den: Poly, f0, M,
                       rel_tol=1e-7):
    """Solve D f (y) = R(y) = num(y)/den(y) by superposition.

    T(y) = (y - y'_{-1})(y - y'_0) R(y)/Y2(y) must decompose as
    u0 + u1 y + sum rho_k/(y - A_k) with simple poles A_k away from the
    zeros of Y2; the pieces are expanded by the shifted identity and
    Cauchy-kernel formulas in the y-basis, then mapped back through
    C_{m,0,0}.  The direct recurrence is the cross-check.
    """
    walk.ensure(-1, M + 2)
    walk_p.ensure(-1, M + 2)
    Y2 = curve.Y(2)
    ypm1, yp0 = walk_p.y(-1), walk_p.y(0)
    Tnum = Poly.from_roots([ypm1, yp0]) * num
    Tden = den * Y2
    # cancel shared roots, then demand simple poles
    poles, residues, upoly = _partial_fractions(Tnum, Tden)
    for A in poles:
        if abs(Y2(A)) < 1e-8 * max(Y2.norm(), 1.0) * max(1.0, abs(A)) ** 2:
            raise BreakdownError("R(y)/Y2(y) keeps a pole at a zero of Y2",
                                 where="expand")
    if upoly.degree > 2:
        raise BreakdownError("polynomial part of T has degree > 2 "
                             "(outside the supported class)", where="expand")
    ynodes = [walk.y(n) for n in range(M)]
    ypoles = [walk_p.y(n + 1) for n in range(M)]
    d = np.zeros(M + 1, dtype=complex)  # d[m] multiplies the m-th y-basis fn
    d[1] += upoly.coeff(0)
    # identity expansion of y in the shifted basis
    d[1] += upoly.coeff(1) * ynodes[0]
    for n in range(1, M):
        d[n + 1] += upoly.coeff(1) * (walk.y(n) - walk_p.y(n))
    if upoly.degree == 2:
        # the y^2 piece has no printed closed form; expand it generically
        qc = upoly.coeff(2)
        sq = coeffs_from_values(ynodes, [y * y for y in ynodes], ypoles,
                                cross_check=False, cancellation_guard=False)
        for n in range(M):
            d[n + 1] += qc * sq.coeffs[n]
    # Cauchy kernels
    for A, rho in zip(poles, residues):
        d[1] += rho / (ynodes[0] - A)
        for n in range(1, M):
            numk = np.prod([A - ypoles[i] for i in range(n - 1)]) if n > 1 else 1.0
            denk = np.prod([A - ynodes[i] for i in range(n + 1)])
            d[n + 1] += rho * (ypoles[n - 1] - ynodes[n]) * numk / denk
    coeffs = [complex(f0)]
    for m in range(1, M + 1):
        data = product_map(walk, walk_p, m, 0, 0)
        coeffs.append(d[m] / data.C)
    exp = Expansion(_walk_nodes(walk, M), _walk_nodes(walk_p, M - 1), coeffs)
    # direct recurrence cross-check
    R = lambda y: num(y) / den(y)
    fvals = [complex(f0)]
    for n in range(M):
        fvals.append(fvals[-1] + (walk.x(n + 1) - walk.x(n)) * R(walk.y(n)))
    resid = exp.interpolation_residual(fvals)
    if resid > rel_tol:
        raise BreakdownError(f"rational-rhs partial sums miss recurrence "
                             f"values ({resid:.3e})", where="expand")
    return exp


def _partial_fractions(num: Poly, den: Poly):
    """(poles, residues, polynomial part) of num/den with simple poles.

    Shared numerator/denominator roots are cancelled numerically; genuinely
    repeated poles raise (higher-order poles are out of scope).
    """
    q, r = num.divrem(den)
    upoly = q.trim()
    roots = list(den.roots())
    scale = max(1.0, max(abs(z) for z in roots) if roots else 1.0)
    # repeated-pole detection
    kept = []
    for z in roots:
        close = [w for w in kept if abs(w - z) < 1e-8 * scale]
        if close:
            if abs(r(z)) > 1e-8 * max(r.norm(), 1.0) * max(1.0, abs(z)) ** max(r.degree, 0):
                raise BreakdownError("repeated pole in R (out of scope)",
                                     where="expand")
            continue
        kept.append(complex(z))
    poles, residues = [], []
    dden = den.deriv()
    for z in kept:
        res = r(z) / dden(z)
        if abs(res) > 1e-12 * max(1.0, r.norm() / max(den.norm(), 1e-300)):
            poles.append(z)
            residues.append(complex(res))
    return poles, residues, upoly

"""Biorthogonal rational functions from a discrete bilinear form.

The Gram matrix of the simple-fraction families is LU-factorized without
pivoting (the triangular structure IS the construction; singularity is
reported, not repaired), numerators are extracted by clearing denominators
and normalized monic.  Complex weights are allowed throughout.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .algebra import Poly, divided_differences
from .errors import BreakdownError

PIVOT_TOL = 1e-12


@dataclass
class DiscreteForm:
    points: list
    weights: list

    def pair(self, f, g):
        return sum(wj * f(tj) * g(tj)
                   for tj, wj in zip(self.points, self.weights))

    def cauchy_transform(self, z):
        """f(z) = sum w_j / (t_j - z)."""
        return sum(wj / (tj - z) for tj, wj in zip(self.points, self.weights))

    def moment(self, fn):
        return sum(wj * fn(tj) for tj, wj in zip(self.points, self.weights))


@dataclass
class BiorthFamily:
    a_poles: list
    b_poles: list
    A_nums: list     # monic numerators of the A-family
    B_nums: list
    C_nums: list
    diag: list       # <A_n, B_n> values (before monic rescaling)

    def A_fn(self, n):
        num = self.A_nums[n]
        poles = self.a_poles[: n + 1]
        return lambda t: num(t) / np.prod([t - p for p in poles])

    def B_fn(self, n):
        num = self.B_nums[n]
        poles = self.b_poles[: n + 1]
        return lambda t: num(t) / np.prod([t - p for p in poles])


def _gram(form, a_poles, b_poles, M):
    G = np.zeros((M + 1, M + 1), dtype=complex)
    for r in range(M + 1):
        for s in range(M + 1):
            G[r, s] = form.pair(lambda t, a=a_poles[r]: 1.0 / (t - a),
                                lambda t, b=b_poles[s]: 1.0 / (t - b))
    return G


def _lu_unit(G):
    """Doolittle LU without pivoting: G = L D U, L unit-lower, U unit-upper.

    Raises with the level on a vanishing leading minor.
    """
    n = G.shape[0]
    L = np.eye(n, dtype=complex)
    U = np.eye(n, dtype=complex)
    D = np.zeros(n, dtype=complex)
    work = G.copy()
    scale = float(np.max(np.abs(G)))
    for k in range(n):
        piv = work[k, k]
        if abs(piv) < PIVOT_TOL * scale:
            raise BreakdownError(f"singular leading minor at level {k}",
                                 where="biorth", index=k)
        D[k] = piv
        L[k + 1:, k] = work[k + 1:, k] / piv
        U[k, k + 1:] = work[k, k + 1:] / piv
        work[k + 1:, k + 1:] -= np.outer(L[k + 1:, k], U[k, k + 1:]) * piv
    return L, D, U


def _clear_denominator(coeff_row, poles):
    """Numerator of sum_j coeff_j/(x - poles_j) over prod (x - poles)."""
    out = Poly(())
    n = len(coeff_row)
    for j in range(n):
        others = [poles[i] for i in range(n) if i != j]
        out = out + coeff_row[j] * Poly.from_roots(others)
    return out


def biorthogonalize(form: DiscreteForm, a_poles, b_poles, M):
    """BiorthFamily with <A_n, B_m> diagonal; numerators monic."""
    a_poles = [complex(v) for v in a_poles]
    b_poles = [complex(v) for v in b_poles]
    G = _gram(form, a_poles, b_poles, M)
    L, Dd, U = _lu_unit(G)
    Linv = np.linalg.inv(L)
    Uinv = np.linalg.inv(U)
    A_nums, B_nums, diag = [], [], []
    for n in range(M + 1):
        alpha = Linv[n, : n + 1]
        beta = Uinv[: n + 1, n]
        A_nums.append(_clear_denominator(alpha, a_poles[: n + 1]).monic())
        B_nums.append(_clear_denominator(beta, b_poles[: n + 1]).monic())
        diag.append(complex(Dd[n]))
    C_nums = [c_numerators(form, a_poles, b_poles, n) for n in range(M + 1)]
    return BiorthFamily(a_poles, b_poles, A_nums, B_nums, C_nums, diag)


def c_numerators(form, a_poles, b_poles, n):
    """Monic C_n of degree n orthogonal to lower degrees against
    d mu / prod (t - a_0..a_n)(t - b_0..b_n)."""
    def wfull(t):
        return 1.0 / (np.prod([t - a for a in a_poles[: n + 1]])
                      * np.prod([t - b for b in b_poles[: n + 1]]))

    if n == 0:
        return Poly.one()
    A = np.zeros((n, n), dtype=complex)
    rhs = np.zeros(n, dtype=complex)
    for r in range(n):
        for k in range(n):
            A[r, k] = form.moment(lambda t, k=k, r=r: wfull(t) * t ** (k + r))
        rhs[r] = -form.moment(lambda t, r=r: wfull(t) * t ** (n + r))
    try:
        sol = np.linalg.solve(A, rhs)
    except np.linalg.LinAlgError as exc:
        raise BreakdownError(f"C_n construction singular: {exc}",
                             where="biorth", index=n)
    return Poly(list(sol) + [1.0])


def orthogonality_matrix(form, family: BiorthFamily, M):
    """Direct re-summation of <A_n, B_m> (not reusing the LU internals)."""
    out = np.zeros((M + 1, M + 1), dtype=complex)
    for n in range(M + 1):
        fa = family.A_fn(n)
        for m in range(M + 1):
            fb = family.B_fn(m)
            out[n, m] = form.pair(fa, fb)
    return out


def cd_ladder_residual(family: BiorthFamily, n):
    """Christoffel-Darboux type identities, fitted up to one scalar:
    A_n ~ (C_n(b_n) A_{n+1} - A_{n+1}(b_n) C_n)/(t - b_n), and the C_n
    analogue at a_{n+1}."""
    bn = family.b_poles[n]
    An1, Cn = family.A_nums[n + 1], family.C_nums[n]
    num = Cn(bn) * An1 - An1(bn) * Cn
    quot = num.exact_div(Poly((-bn, 1.0)), rel_tol=1e-8, where="biorth")
    resid_a = _proportional_residual(quot, family.A_nums[n])
    an1 = family.a_poles[n + 1]
    Cn1 = family.C_nums[n + 1]
    num2 = An1(an1) * Cn1 - Cn1(an1) * An1
    quot2 = num2.exact_div(Poly((-an1, 1.0)), rel_tol=1e-8, where="biorth")
    resid_c = _proportional_residual(quot2, family.C_nums[n])
    return max(resid_a, resid_c)


def _proportional_residual(p: Poly, q: Poly):
    """min over scalars s of |p - s q| / |p| (least squares on coefficients)."""
    n = max(p.c.size, q.c.size)
    pc = np.zeros(n, dtype=complex)
    qc = np.zeros(n, dtype=complex)
    pc[: p.c.size] = p.c
    qc[: q.c.size] = q.c
    denom = np.vdot(qc, qc)
    if abs(denom) < 1e-300:
        raise BreakdownError("zero comparison polynomial", where="biorth")
    s = np.vdot(qc, pc) / denom
    return float(np.max(np.abs(pc - s * qc)) / max(np.max(np.abs(pc)), 1e-300))


def multipoint_pade_report(form: DiscreteForm, family: BiorthFamily, m):
    """Interpolation property of the denominators A_m (at a_0..a_m,
    b_0..b_{m-1}) and C_m (at a_0..a_m, b_0..b_m) against the Cauchy
    transform of the form.

    The Newton tail coefficients of A_m f (orders m+1..2m) must vanish;
    the degree-m head is the numerator Atilde_m.
    """
    out = {}
    for which, num, pts in (
        ("A", family.A_nums[m],
         list(family.a_poles[: m + 1]) + list(family.b_poles[:m])),
        ("C", family.C_nums[m],
         list(family.a_poles[: m + 1]) + list(family.b_poles[: m + 1])),
    ):
        for p in pts:
            for t in form.points:
                if abs(p - t) < 1e-10 * max(1.0, abs(t)):
                    raise BreakdownError("interpolation point on the support",
                                         where="biorth")
        vals = [num(z) * form.cauchy_transform(z) for z in pts]
        dd = divided_differences(pts, vals)
        head_deg = m if which == "A" else m + 1
        scale = max(1.0, float(np.max(np.abs(dd[: head_deg + 1]))))
        tail = float(np.max(np.abs(dd[head_deg + 1:]))) / scale
        out[which] = tail
    return out


def chain_r_coefficients(family: BiorthFamily, M):
    """Fitted r-coefficients of A_{m+1} = C_m + r_{2m}(x - b_m) A_m and
    C_{m+1} = A_{m+1} + r_{2m+1}(x - a_{m+1}) C_m, with the per-member
    scales propagated down the chain.

    Returns (r list, worst identity residual).
    """
    sA = [1.0 + 0.0j]   # scale of A_m relative to the chain normalization
    sC = [1.0 + 0.0j]
    rs = []
    worst = 0.0
    for m in range(M):
        # sC[m] C_m + r (x - b_m) sA[m] A_m = sA[m+1] A_{m+1}
        lhs_known = sC[m] * family.C_nums[m]
        shifted = Poly((-family.b_poles[m], 1.0)) * family.A_nums[m]
        # match the two leading coefficients to find (r sA[m], sA[m+1])
        target = family.A_nums[m + 1]
        r_scaled = lhs_known.coeff(m) + 0.0  # placeholder
        # leading coefficient: r sA[m] * 1 = sA_{m+1} * 1 (both monic deg m+1)
        # next coefficient fixes r
        sA_next_var = None
        # solve 2x2: [shifted, -target] coefficients at degrees m+1, m
        Amat = np.array([[shifted.coeff(m + 1), -target.coeff(m + 1)],
                         [shifted.coeff(m), -target.coeff(m)]], dtype=complex)
        bvec = np.array([-lhs_known.coeff(m + 1), -lhs_known.coeff(m)],
                        dtype=complex)
        sol = np.linalg.solve(Amat, bvec)
        r_eff, sA_next = complex(sol[0]), complex(sol[1])
        resid = (lhs_known + r_eff * shifted - sA_next * target).norm() \
            / max(1.0, abs(sA_next) * target.norm())
        worst = max(worst, resid)
        rs.append(r_eff / sA[m])
        sA.append(sA_next)
        # C_{m+1}: sA[m+1] A_{m+1} + r (x - a_{m+1}) sC[m] C_m = sC[m+1] C_{m+1}
        lhs_known = sA[m + 1] * family.A_nums[m + 1]
        shifted = Poly((-family.a_poles[m + 1], 1.0)) * family.C_nums[m]
        target = family.C_nums[m + 1]
        Amat = np.array([[shifted.coeff(m + 1), -target.coeff(m + 1)],
                         [shifted.coeff(m), -target.coeff(m)]], dtype=complex)
        bvec = np.array([-lhs_known.coeff(m + 1), -lhs_known.coeff(m)],
                        dtype=complex)
        sol = np.linalg.solve(Amat, bvec)
        r_eff, sC_next = complex(sol[0]), complex(sol[1])
        resid = (lhs_known + r_eff * shifted - sC_next * target).norm() \
            / max(1.0, abs(sC_next) * target.norm())
        worst = max(worst, resid)
        rs.append(r_eff / sC[m])
        sC.append(sC_next)
    return rs, worst
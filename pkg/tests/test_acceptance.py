"""Acceptance suite: one test per criterion, one printed line each.

Tolerances are pinned from the printed sources; nothing is deferred to
later calibration.
"""

import time
from fractions import Fraction

import numpy as np
import pytest

from ellgrid import biorth as bo
from ellgrid import contfrac as cf
from ellgrid import divdiff as dd
from ellgrid import elliptic as el
from ellgrid import expand as ex
from ellgrid import papertables as pt
from ellgrid import riccati as rc
from ellgrid import secondord as so
from ellgrid.algebra import Poly
from ellgrid.biquadratic import build_from_discriminant
from ellgrid.lattice import LatticeWalk


def _report(name, ok, detail=""):
    tag = "PASS" if ok else "FAIL"
    print(f"[{tag}] {name} {detail}")
    assert ok, f"{name}: {detail}"


def _sig_tol(want, digits=4):
    if want == 0.0:
        return 5.0 * 10.0 ** (-digits)
    return 5.0 * 10.0 ** (np.floor(np.log10(abs(want))) - digits + 1)


def test_c01_laboratory_reconstruction():
    t0 = time.perf_counter()
    curve = pt.lab_curve()
    X0, X1, X2, Y0, Y1, Y2, P, Q = curve.views()
    want = {
        "X0": [1.436, 0.2876, -10.43], "X1": [-0.6882, 27.49, -0.7333],
        "X2": [-22.0, 1.5, 1.0], "Y0": [1.436, -0.6882, -22.0],
        "Y1": [0.2876, 27.49, 1.5], "Y2": [-10.43, -0.7333, 1.0],
    }
    ok = True
    for name, wants in want.items():
        got = {"X0": X0, "X1": X1, "X2": X2,
               "Y0": Y0, "Y1": Y1, "Y2": Y2}[name]
        for k, w in enumerate(wants):
            ok &= abs(got.coeff(k).real - w) <= _sig_tol(w)
    target = pt.LAB_EPS * Poly.from_roots(pt.LAB_ZEROS)
    resid = (curve.discriminant_x() - target).norm() / target.norm()
    ok &= resid < 1e-9
    elapsed = time.perf_counter() - t0
    ok &= elapsed < 1.0
    _report("criterion 1: laboratory reconstruction", ok,
            f"(identity residual {resid:.1e}, {elapsed:.2f}s)")


def test_c02_lattice_tables():
    t0 = time.perf_counter()
    w, wp = pt.lab_walks()
    bad = 0
    for i, n in enumerate(pt.LATTICE_TABLE["n"]):
        for key, got in (("x", w.x(n)), ("y", w.y(n)),
                         ("xp", wp.x(n)), ("yp", wp.y(n))):
            want = pt.LATTICE_TABLE[key][i]
            if abs(got.real - want) > _sig_tol(want):
                bad += 1
    elapsed = time.perf_counter() - t0
    _report("criterion 2: lattice tables (both walks)",
            bad == 0 and elapsed < 1.0,
            f"({bad} mismatches, {elapsed:.2f}s)")


def test_c03_elliptic_profile():
    t0 = time.perf_counter()
    content, mismatches = pt.build_profile()
    curve = pt.lab_curve()
    w, _ = pt.lab_walks(curve)
    prof = el.profile_from_curve(curve, w, lo=-1, hi=10)
    _, _, spread = el.step_and_phase(prof, w, -1, 10)
    elapsed = time.perf_counter() - t0
    ok = not mismatches and spread < 1e-6 * abs(prof.h) and elapsed < 1.0
    _report("criterion 3: elliptic profile", ok,
            f"(mismatches {mismatches}, pair spread {spread:.1e}, "
            f"{elapsed:.2f}s)")


def test_c04_sn_cross_check():
    curve = pt.lab_curve()
    w, _ = pt.lab_walks(curve)
    prof = el.profile_from_curve(curve, w, lo=-1, hi=10)
    bad = 0
    for i, n in enumerate(pt.SN_TABLE["n"]):
        xi = el.sn(n * prof.h + prof.g, prof.k)
        if abs(xi.real - pt.SN_TABLE["xi"][i]) > 1e-3:
            bad += 1
        if abs(w.x(n).real - pt.SN_TABLE["x"][i]) > _sig_tol(
                pt.SN_TABLE["x"][i]):
            bad += 1
    nstar = ((-prof.K - prof.g) / prof.h).real
    ok = bad == 0 and abs(nstar - 2.114) <= 0.01
    _report("criterion 4: sn cross-check + extremum", ok,
            f"({bad} mismatches, extremum n = {nstar:.3f})")


def test_c05_cubic_addition_law():
    curve = pt.lab_curve()
    w, _ = pt.lab_walks(curve)
    P = curve.discriminant_x()
    pts = el.to_cubic(curve, w, -2.0, range(0, 7))
    ok = abs(pts[0][0].real - 0.5) < 1e-6
    ok &= abs(pts[0][1].real - 2.8151) < 5e-4
    ok &= abs(pts[1][0].real - 0.76657) < 5e-5
    ok &= abs(pts[1][1].real - 4.6456) < 5e-4
    star2, _ = el.addition_collinearity(pts, 2, P, -2.0)
    ok &= abs(star2[0].real - 0.00181) < 1e-3
    ok &= abs(star2[1].real - 6.4572) < 1e-3 * 6.4572 + 1e-3
    star1, _ = el.addition_collinearity(pts, 1, P, -2.0)
    ok &= abs(star1[0].real + 1.4126) < 1e-2 * 1.4126
    ok &= abs(star1[1].real - 56.345) < 1e-2 * 56.345
    _report("criterion 5: cubic addition law", ok,
            f"(stride2 {star2[0].real:.5f},{star2[1].real:.4f}; "
            f"stride1 {star1[0].real:.4f},{star1[1].real:.3f})")


def test_c06_theta_formula():
    curve = pt.lab_curve()
    w, _ = pt.lab_walks(curve)
    prof = el.profile_from_curve(curve, w, lo=-1, hi=10)
    C = el.theta_constant_C(prof)
    want = -6.55287 - 2.71261j
    ok = abs(C - want) < 1e-3 * abs(want)
    pairs = [(1, 0), (2, 0), (3, 1), (5, 2), (6, 4), (4, 0), (2, 1)]
    for n, m in pairs:
        Ce = el.theta_constant_empirical(prof, w, n, m)
        ok &= abs(Ce - C) < 1e-3 * abs(C)
        diff = el.lattice_difference_theta(prof, n, m, C)
        truth = w.x(n) - w.x(m)
        ok &= abs(diff - truth) < 1e-3 * max(1.0, abs(truth))
    _report("criterion 6: theta lattice-difference formula", ok,
            f"(C = {C.real:.5f}{C.imag:+.5f}i across {len(pairs)} pairs)")


def test_c07_table5():
    content, mismatches = pt.build_table5()
    _report("criterion 7: elliptic logarithm (Table 5)", not mismatches,
            f"({len(mismatches)} mismatches)")


def test_c08_table6():
    content, mismatches = pt.build_table6()
    _report("criterion 8: exponential-like (Table 6)", not mismatches,
            f"({len(mismatches)} mismatches)")


def test_c09_pell():
    P = pt.LAB_EPS * Poly.from_roots(pt.LAB_ZEROS)
    states = cf.sqrtP_run(P, pt.LAB_U, pt.LAB_V, 0.0, sign_u=-1, sign_v=1,
                          sign_x0=1, levels=4)
    w, _ = pt.lab_walks()
    ok = True
    worst = 0.0
    for m in (1, 2, 3):
        rep = cf.pell_check(states, m)
        worst = max(worst, rep["residual"])
        ok &= rep["residual"] < 1e-6
    for st in states:
        ok &= abs(st.x_m - w.x(st.m)) < 1e-6 * max(1.0, abs(st.x_m))
    _report("criterion 9: Pell identity + lattice coincidence", ok,
            f"(worst residual {worst:.1e})")


def test_c10_riccati_families():
    t0 = time.perf_counter()
    ok = True
    fam = rc.family("hermite")
    run = rc.run_ladder(fam.seed, fam.ctx, 9)
    ok &= all(complex(run.rs[m]) == complex(-m / 2.0) for m in range(1, 9))
    fam = rc.family("freud2")
    run = rc.run_ladder(fam.seed, fam.ctx, 10)
    rs = run.rs
    ok &= abs(rs[1] * (rs[1] + rs[2]) - 0.25) < 1e-9
    ok &= all(abs(rs[m] * (rs[m - 1] + rs[m] + rs[m + 1]) - m / 4.0) < 1e-9
              for m in range(2, 9))
    fam = rc.family("euler_exp")
    run = rc.run_ladder(fam.seed, fam.ctx, 8)
    ok &= all(abs(run.rs[j] - (-1.0) ** (j + 1)
                  / (2 * (j + 1) + 1 + (-1.0) ** (j + 1))) < 1e-12
              for j in range(8))
    fam = rc.family("hahn_orth", alpha=Fraction(3, 10), beta=Fraction(7, 10),
                    N=8, h=Fraction(1), exact=True)
    run = rc.run_ladder(fam.seed, fam.ctx, 9, check=False)
    ok &= all(abs(complex(run.rs[m]) - complex(fam.oracle_r(m)))
              <= 1e-9 * max(1.0, abs(complex(fam.oracle_r(m))))
              for m in range(1, 9))
    fam = rc.family("hahn_biorth", alpha=Fraction(35, 100),
                    beta=Fraction(85, 100), N=8, h=Fraction(1), exact=True)
    run = rc.run_ladder(fam.seed, fam.ctx, 9)
    ok &= all(abs(complex(run.rs[m]) - complex(fam.oracle_r(m)))
              <= 1e-9 * max(1.0, abs(complex(fam.oracle_r(m))))
              for m in range(1, 9))
    alpha, beta = 0.3, 0.7
    fam = rc.family("hahn_orth", alpha=alpha, beta=beta, N=1000, h=1e-3)
    run = rc.run_ladder(fam.seed, fam.ctx, 7, check=False)
    for mm in (1, 2, 3):
        lim = -mm * (mm + alpha) / ((2 * mm + alpha + beta)
                                    * (2 * mm + alpha + beta + 1))
        ok &= abs(run.rs[2 * mm] - lim) < 1e-2 * abs(lim)
    fam = rc.family("psi", s=1.0)
    run = rc.run_ladder(fam.seed, fam.ctx, 7)
    for m in range(2, 7):
        want = fam.oracle_coeffs(m)
        lev = run.levels[m]
        wn = max(p.norm() for p in want.values())
        gn = max(getattr(lev, k).norm() for k in want)
        for k, p in want.items():
            got = getattr(lev, k) / gn
            ref = p / wn
            ok &= min((got - ref).norm(), (got + ref).norm()) < 1e-9
    elapsed = time.perf_counter() - t0
    ok &= elapsed < 5.0
    _report("criterion 10: Riccati families", ok, f"({elapsed:.2f}s)")


def test_c11_thiele_pade():
    content, mm2 = pt.build_table2()
    content, mm_psi = pt.build_psi_convergents()
    M = 13
    ld = np.longdouble
    nodes = [ld(j + 1) for j in range(M + 1)]
    fv = [ld(0.0)]
    for j in range(1, M + 1):
        fv.append(fv[-1] + ld(1.0) / ld(j))
    fr = cf.thiele_build(nodes, fv)
    ok = not mm2 and not mm_psi
    worst = max(cf.casorati_residual(fr, m) for m in range(1, 6))
    ok &= worst < 1e-8
    _report("criterion 11: Thiele/Pade anchors", ok,
            f"(casorati worst {worst:.1e})")


def test_c12_biorthogonality():
    rng = np.random.default_rng(7)
    ptsv = list(rng.normal(size=8) + 1j * rng.normal(size=8) * 0.3)
    wts = list(rng.normal(size=8) + 1j * rng.normal(size=8) * 0.2)
    form = bo.DiscreteForm(ptsv, wts)
    a = [2.0 + 0.9 * r + 0.3j for r in range(5)]
    b = [-2.0 - 0.9 * s + 0.2j for s in range(5)]
    M = 3
    fam = bo.biorthogonalize(form, a, b, M)
    Omat = bo.orthogonality_matrix(form, fam, M)
    diag = max(abs(v) for v in np.diag(Omat))
    off = max(abs(Omat[i, j]) for i in range(M + 1) for j in range(M + 1)
              if i != j)
    ok = off < 1e-9 * diag
    cd = max(bo.cd_ladder_residual(fam, n) for n in (1, 2))
    ok &= cd < 1e-8
    pade = {}
    for m in (1, 2, 3):
        pade = bo.multipoint_pade_report(form, fam, m)
        ok &= pade["A"] < 1e-8 and pade["C"] < 1e-8
    _report("criterion 12: biorthogonality", ok,
            f"(offdiag/diag {off / diag:.1e}, cd {cd:.1e})")


def test_c13_second_order():
    curve = pt.lab_curve()
    w, wp = pt.lab_walks(curve)
    w.ensure(-2, 70)
    wp.ensure(-2, 40)
    ok = True
    worst_trunc = 0.0
    for m in (1, 2, 3, 4):
        op = so.build(curve, w, wp, Poly(()), 0.0,
                      mu_free_root=wp.x(m))
        lam_m, phi, resid = so.eigen_truncate(op, m)
        worst_trunc = max(worst_trunc, resid)
        ok &= resid < 1e-7
    op = so.build(curve, w, wp, Poly((0.3, 0.15)), 0.8, mu_free_root=2.2)
    _, duality = so.solve_series(op, 1.0, 8)
    ok &= duality < 1e-7
    nu0 = so.build(curve, w, wp, Poly(()), 0.0, mu_free_root=2.2)
    worst_pair = 0.0
    for r, s in [(1, 2), (1, 3), (2, 3)]:
        norm, _, _ = so.eigen_pairing(nu0, r, s, N=40)
        worst_pair = max(worst_pair, norm)
        ok &= norm < 1e-7
    # classical degenerations with closed-form ratio oracles
    mu = Poly.from_roots([0.0, 1.0])
    nud = Poly((0.7, -2.3))
    cs = so.taylor_2f1_coeffs(mu, nud, 1.1, 0.0, 12)
    mup, mupp, nup = mu.deriv()(0.0), mu.deriv().deriv()(0.0), nud.deriv()(0.0)
    for n in range(0, 10):
        want = (1.1 - n * nup - n * (n - 1) * mupp / 2.0) \
            / ((n + 1) * (n * mup + nud(0.0)))
        ok &= abs(cs[n + 1] / cs[n] - want) < 1e-10
    mu3, nu3, lam3, h3 = Poly((0.4, -0.9, 0.55)), Poly((0.3, 0.8)), 0.9, 0.21
    sing = mu3 - (h3 / 2.0) * nu3
    a3 = sorted(sing.roots(), key=abs)[0]
    cs3 = so.newton_3f2_coeffs(mu3, nu3, lam3, a3, h3, 12)
    mupp3, nup3 = mu3.deriv().deriv()(0.0), nu3.deriv()(0.0)
    quot = sing.exact_div(Poly((-a3, 1.0)))
    b3 = -quot.coeff(0) / quot.coeff(1)
    for n in range(0, 10):
        want = (lam3 - n * nup3 - n * (n - 1) * mupp3 / 2.0) \
            / ((n + 1) * (n * (a3 - b3 + n * h3) * mupp3 / 2.0
                          + nu3(a3 + n * h3)))
        ok &= abs(cs3[n + 1] / cs3[n] - want) < 1e-10
    _report("criterion 13: second-order operator", ok,
            f"(truncation worst {worst_trunc:.1e}, duality {duality:.1e}, "
            f"pairing worst {worst_pair:.1e})")


def test_c14_property_suites(lab_curve, lab_walk, lab_walk_primed,
                             lab_profile):
    ok = True
    worst_C = max(dd.product_map(lab_walk, lab_walk_primed, m, 0, 0).spread
                  for m in (1, 2, 3, 4))
    ok &= worst_C < 1e-7
    worst_Ca = max(dd.product_map_adjoint(lab_walk, lab_walk_primed,
                                          m, 0, 0)[2] for m in (1, 2, 3))
    ok &= worst_Ca < 1e-7
    # degree doubling
    num = Poly((0.4, -1.1, 0.2, 0.05))
    den = Poly.from_roots([5.5, -6.0, 7.5])
    f = dd.GridFunction.sample(lab_walk, lambda x: num(x) / den(x), -2, 26)
    Df = dd.D(f)
    ys = [lab_walk.y(n) for n in range(-1, 17)]
    vals = [Df[n] for n in range(-1, 17)]
    deg, resid = dd.rational_fit_degree(ys, vals, 6)
    ok &= deg is not None and deg <= 6 and resid < 1e-7
    # summation by parts
    fg = dd.GridFunction.sample(lab_walk, lambda x: np.exp(0.3 * x), -1, 10)
    gg = dd.GridFunction.sample(lab_walk, lambda y: 1.0 / (y - 4.0), -2, 10,
                                axis="y")
    sbp = dd.summation_by_parts(fg, gg, 8)
    ok &= sbp < 1e-10
    # factorF residuals
    X2, Y2 = lab_curve.X(2), lab_curve.Y(2)
    worst_f = 0.0
    for m in range(0, 5):
        for n in range(0, 5):
            xm, yn = lab_walk.x(m), lab_walk.y(n)
            scale = lab_curve.scale_at(xm, yn)
            lhs = lab_curve(xm, yn)
            f1 = Y2(yn) * (xm - lab_walk.x(n)) * (xm - lab_walk.x(n + 1))
            worst_f = max(worst_f, abs(lhs - f1) / scale)
    ok &= worst_f < 1e-8
    # Moebius invariance of the step
    new_curve = lab_curve.mobius_x(1.2, 0.3, 0.05)
    x0 = el.mobius_apply((1.2, 0.3, 0.05), 0.0)
    matched = False
    for branch in ("plus", "minus"):
        wn = LatticeWalk(new_curve, x0, branch)
        prof2 = el.profile_from_curve(new_curve, wn, lo=-1, hi=6)
        if abs(abs(prof2.h) - abs(lab_profile.h)) < 1e-8:
            matched = True
    ok &= matched
    _report("criterion 14: property suites", ok,
            f"(C spread {worst_C:.1e}, adjoint {worst_Ca:.1e}, "
            f"sbp {sbp:.1e}, factorF {worst_f:.1e})")

"""FastAPI compute service wrapping the core package.

Stateless JSON-in/JSON-out endpoints, one per experiment type.  Numerical
breakdowns surface as HTTP 400 with kind="breakdown" (the CLI maps them to
exit code 3); schema violations are FastAPI's 422 (exit code 2).
"""

from __future__ import annotations

import numpy as np
from fastapi import FastAPI, HTTPException

from .. import biorth as bo
from .. import contfrac as cf
from .. import divdiff as dd
from .. import elliptic as el
from .. import expand as ex
from .. import papertables as pt
from .. import riccati as rc
from .. import secondord as so
from ..algebra import Poly
from ..biquadratic import BiquadraticCurve, build_from_discriminant
from ..errors import BreakdownError
from ..lattice import LatticeWalk
from . import schemas as sc

app = FastAPI(title="ellgrid", version="0.1.0",
              description="difference calculus on elliptic lattices")


def _breakdown(exc: BreakdownError):
    return HTTPException(status_code=400, detail={
        "kind": "breakdown", "message": str(exc),
        "where": exc.where, "index": exc.index})


def _curve(spec: sc.CurveSpec):
    if (spec.c is None) == (spec.discriminant is None):
        raise HTTPException(status_code=400, detail={
            "kind": "config",
            "message": "give exactly one of c / discriminant"})
    if spec.c is not None:
        grid = np.array([[complex(*spec.c[i][j]) for j in range(3)]
                         for i in range(3)])
        return BiquadraticCurve(grid)
    d = spec.discriminant
    P = d.eps * Poly.from_roots(d.zeros)
    return build_from_discriminant(P, d.u, d.v, sign_u=d.sign_u,
                                   sign_v=d.sign_v, shift=d.shift)


def _walk(curve, spec: sc.WalkSpec):
    return LatticeWalk(curve, spec.x0, spec.branch)


def _poly_pairs(p: Poly):
    return [sc.pair(c) for c in p.c]


@app.get("/health", response_model=sc.HealthResponse)
def health():
    return sc.HealthResponse(status="ok", version=app.version)


@app.post("/curve/build", response_model=sc.CurveResponse)
def curve_build(req: sc.CurveRequest):
    try:
        curve = _curve(req.curve)
        P = curve.discriminant_x()
        resid = 0.0
        if req.curve.discriminant is not None:
            d = req.curve.discriminant
            target = d.eps * Poly.from_roots(d.zeros)
            resid = (P - target).norm() / max(target.norm(), 1e-300)
        return sc.CurveResponse(
            c=[[sc.pair(curve.c[i, j]) for j in range(3)] for i in range(3)],
            P=_poly_pairs(P.trim(1e-12)),
            Q=_poly_pairs(curve.discriminant_y().trim(1e-12)),
            identity_residual=float(resid))
    except BreakdownError as exc:
        raise _breakdown(exc)


@app.post("/lattice/walk", response_model=sc.LatticeResponse)
def lattice_walk(req: sc.LatticeRequest):
    try:
        curve = _curve(req.curve)
        w = _walk(curve, req.walk)
        ns = list(range(req.lo, req.hi + 1))
        return sc.LatticeResponse(
            n=ns,
            x=[sc.pair(w.x(n)) for n in ns],
            y=[sc.pair(w.y(n)) for n in ns])
    except BreakdownError as exc:
        raise _breakdown(exc)


@app.post("/elliptic/profile", response_model=sc.EllipticProfileResponse)
def elliptic_profile(req: sc.EllipticProfileRequest):
    try:
        curve = _curve(req.curve)
        w = _walk(curve, req.walk)
        prof = el.profile_from_curve(curve, w, lo=req.lo, hi=req.hi)
        C = el.theta_constant_C(prof)
        return sc.EllipticProfileResponse(
            lam=sc.pair(prof.lam), k=sc.pair(prof.k),
            mobius=[sc.pair(v) for v in prof.mobius],
            h=sc.pair(prof.h), g=sc.pair(prof.g), K=sc.pair(prof.K),
            Kprime=sc.pair(prof.Kprime), p=sc.pair(prof.p),
            n_period=sc.pair(prof.n_period), C_theta=sc.pair(C))
    except BreakdownError as exc:
        raise _breakdown(exc)


@app.post("/divdiff/check", response_model=sc.DivdiffCheckResponse)
def divdiff_check(req: sc.DivdiffCheckRequest):
    try:
        curve = _curve(req.curve)
        w = _walk(curve, req.walk)
        wp = _walk(curve, req.walk_primed)
        data = dd.product_map(w, wp, req.m, req.r, req.s)
        Cd, forms_d, spread_d, _ = dd.product_map_adjoint(w, wp, req.m,
                                                          req.r, req.s)
        return sc.DivdiffCheckResponse(
            C=sc.pair(data.C), C_forms=[sc.pair(f) for f in data.C_forms],
            spread=data.spread, rho=sc.pair(data.rho),
            adjoint_C=sc.pair(Cd), adjoint_spread=spread_d)
    except BreakdownError as exc:
        raise _breakdown(exc)


@app.post("/expand/solve", response_model=sc.ExpandResponse)
def expand_solve(req: sc.ExpandRequest):
    try:
        curve = _curve(req.curve)
        w = _walk(curve, req.walk)
        wp = _walk(curve, req.walk_primed)
        M = req.terms
        if req.kind == "psilog":
            exp = ex.elliptic_log_solve(curve, w, wp, req.f0, M)
            fv = ex._elliptic_log_recurrence(curve, w, wp.y(-1), req.f0, M)
        else:
            a = req.a if req.a is not None else 2.0 / (wp.x(0) - wp.x(-1))
            c0 = req.f0 if req.f0 else 1.0
            exp = ex.exponential_solve(curve, w, wp, a, c0, M)
            fv = [complex(c0)]
            for n in range(M):
                dx = w.x(n + 1) - w.x(n)
                fv.append(fv[-1] * (1.0 + a * dx / 2.0)
                          / (1.0 - a * dx / 2.0))
        sums = {f"{x:g}": [sc.pair(v) for v in exp.partial_sums(x)]
                for x in req.eval_points}
        ns = list(range(M + 1))
        return sc.ExpandResponse(
            n=ns, x=[sc.pair(w.x(n)) for n in ns],
            y=[sc.pair(w.y(n)) for n in ns],
            f=[sc.pair(v) for v in fv],
            partial_sums=sums,
            coeffs=[sc.pair(c) for c in exp.coeffs])
    except BreakdownError as exc:
        raise _breakdown(exc)


@app.post("/contfrac/thiele", response_model=sc.ThieleResponse)
def contfrac_thiele(req: sc.ThieleRequest):
    try:
        fr = cf.thiele_build(req.nodes, req.values, depth=req.depth)
        convs, casos = [], []
        for m in range(1, fr.depth() + 1):
            N, P = cf.convergents(fr, m)
            convs.append({"m": m, "num": [sc.pair(c) for c in N.c],
                          "den": [sc.pair(c) for c in P.c]})
            if m >= 1:
                casos.append(cf.casorati_residual(fr, m))
        return sc.ThieleResponse(r=[sc.pair(r) for r in fr.r],
                                 convergents=convs,
                                 casorati_residuals=casos)
    except BreakdownError as exc:
        raise _breakdown(exc)


@app.post("/contfrac/sqrtp", response_model=sc.SqrtPResponse)
def contfrac_sqrtp(req: sc.SqrtPRequest):
    try:
        P = req.eps * Poly.from_roots(req.zeros)
        states = cf.sqrtP_run(P, req.u, req.v, req.x0, req.sign_u,
                              req.sign_v, req.sign_x0, levels=req.levels)
        pell = []
        for m in range(1, req.levels + 1):
            rep = cf.pell_check(states, m)
            pell.append({"m": m, "residual": rep["residual"],
                         "constant": list(sc.pair(rep["constant"])),
                         "x_m": list(sc.pair(rep["x_m"]))})
        return sc.SqrtPResponse(
            x_m=[sc.pair(st.x_m) for st in states],
            delta=[sc.pair(st.delta) for st in states],
            pell=pell)
    except BreakdownError as exc:
        raise _breakdown(exc)


@app.post("/riccati/ladder", response_model=sc.RiccatiResponse)
def riccati_ladder(req: sc.RiccatiRequest):
    try:
        params = dict(req.params)
        if req.family in ("hahn_orth", "hahn_biorth"):
            params.setdefault("N", 8)
            params["N"] = int(params["N"])
        fam = rc.family(req.family, **params)
        run = rc.run_ladder(fam.seed, fam.ctx, req.levels,
                            check=not fam.ctx.at_infinity)
        out_levels = []
        for lev in run.levels:
            sing = None
            if lev.level > 0 and not fam.ctx.at_infinity:
                sing = tuple(float(v) for v in
                             rc.singularity_residuals(lev, fam.ctx))
            out_levels.append(sc.RiccatiLevel(
                level=lev.level,
                A=[sc.pair(c) for c in lev.A.c],
                B=[sc.pair(c) for c in lev.B.c],
                C=[sc.pair(c) for c in lev.C.c],
                D=[sc.pair(c) for c in lev.D.c],
                r=sc.pair(lev.r_prev) if lev.r_prev is not None else None,
                singularity_residuals=sing))
        oracle_err = None
        if fam.oracle_r is not None:
            errs = []
            offset = fam.seed.level
            for j, r in enumerate(run.rs):
                want = fam.oracle_r(offset + j)
                if want is None:
                    continue
                errs.append(abs(complex(r) - complex(want))
                            / max(1.0, abs(complex(want))))
            oracle_err = float(max(errs)) if errs else None
        return sc.RiccatiResponse(
            levels=out_levels, r=[sc.pair(r) for r in run.rs],
            oracle_max_err=oracle_err)
    except BreakdownError as exc:
        raise _breakdown(exc)


@app.post("/biorth/run", response_model=sc.BiorthResponse)
def biorth_run(req: sc.BiorthRequest):
    try:
        form = bo.DiscreteForm([complex(*p) for p in req.points],
                               [complex(*w) for w in req.weights])
        fam = bo.biorthogonalize(form, [complex(*p) for p in req.a_poles],
                                 [complex(*p) for p in req.b_poles],
                                 req.depth)
        Omat = bo.orthogonality_matrix(form, fam, req.depth)
        diag = max(abs(v) for v in np.diag(Omat))
        off = max((abs(Omat[i, j]) for i in range(req.depth + 1)
                   for j in range(req.depth + 1) if i != j), default=0.0)
        return sc.BiorthResponse(
            A_numerators=[[sc.pair(c) for c in p.c] for p in fam.A_nums],
            B_numerators=[[sc.pair(c) for c in p.c] for p in fam.B_nums],
            orthogonality_offdiag=float(off / diag))
    except BreakdownError as exc:
        raise _breakdown(exc)


@app.post("/secondord/run", response_model=sc.SecondOrdResponse)
def secondord_run(req: sc.SecondOrdRequest):
    try:
        curve = _curve(req.curve)
        w = _walk(curve, req.walk)
        wp = _walk(curve, req.walk_primed)
        w.ensure(-2, req.levels + 12)
        wp.ensure(-2, req.levels + 6)
        nu = Poly(req.nu) if req.nu else Poly(())
        op = so.build(curve, w, wp, nu, req.lam,
                      mu_free_root=req.mu_free_root)
        exp, worst = so.solve_series(op, 1.0, req.levels)
        zetas = [so.zeta_poly(op, m)(op.lam) for m in range(req.levels)]
        lam_m = None
        trunc_resid = None
        if req.truncate is not None:
            lam_val, _, resid = so.eigen_truncate(op, req.truncate)
            lam_m = sc.pair(lam_val)
            trunc_resid = float(resid)
        return sc.SecondOrdResponse(
            coeffs=[sc.pair(c) for c in exp.coeffs],
            zetas=[sc.pair(z) for z in zetas],
            duality_residual=float(worst),
            lam_m=lam_m, truncation_residual=trunc_resid)
    except BreakdownError as exc:
        raise _breakdown(exc)


@app.post("/paper-tables", response_model=sc.PaperTablesResponse)
def paper_tables():
    try:
        files, mismatches = pt.generate_all()
        return sc.PaperTablesResponse(
            files=files,
            mismatches=[[str(v) for v in mm] for mm in mismatches])
    except BreakdownError as exc:
        raise _breakdown(exc)

import numpy as np
import pytest

from ellgrid.biquadratic import euler_polynomial
from ellgrid.errors import BreakdownError, PoleError, INF_POINT
from ellgrid.lattice import (LatticeWalk, advance_sqrt, arithmetic_lattice,
                             chi_closed_form, chi_ratio, fixed_points,
                             geometric_lattice, quadratic_lattice, seed,
                             trigonometric_lattice)

LAB_X = {-1: 0.6614, 0: 0.0, 1: -0.6955, 2: -0.9968, 3: -0.8067,
         4: -0.1752, 5: 0.5380, 6: 0.9309, 7: 0.9843, 8: 0.7197,
         9: 0.0942, 10: -0.62568}
LAB_Y = {-1: 0.2403, 0: -0.2716, 1: -0.6220, 2: -0.6585, 3: -0.3760,
         4: 0.1274, 5: 0.5370, 6: 0.6923, 7: 0.6197, 8: 0.2975,
         9: -0.2107, 10: -0.59521}
LAB_XP = {-1: -10.370, 0: 3.0, 1: 1.6509, 2: 1.5098, 3: 1.9312, 4: 6.3650,
          5: -3.8128, 6: -2.0651, 7: -2.2477, 8: -6.7673, 9: 3.5103,
          10: 1.7110}
LAB_YP = {-1: 7.3839, 0: 1.4593, 1: 1.0820, 2: 1.1601, 3: 2.0697,
          4: -7.2209, 5: -1.5897, 6: -1.3180, 7: -1.9385, 8: 18.081,
          9: 1.5806, 10: 1.0967}


def test_seed_laboratory(lab_curve):
    ym1, y0 = seed(lab_curve, 0.0, "plus")
    assert abs(y0.real + 0.2716) < 5e-5
    assert abs(ym1.real - 0.2403) < 5e-5


def test_seed_arithmetic():
    curve = arithmetic_lattice(0.7).curve
    roots = seed(curve, 0.0, "plus")
    assert sorted(r.real for r in roots) == pytest.approx([0.0, 0.7])


def test_seed_residual_random(lab_curve):
    rng = np.random.default_rng(3)
    for _ in range(5):
        x0 = rng.uniform(-0.9, 0.9)
        for root in seed(lab_curve, x0, "plus"):
            assert abs(lab_curve(x0, root)) < 1e-9 * lab_curve.scale_at(x0, root)


def _printed_tol(want):
    if want == 0.0:
        return 5e-4
    return 5.0 * 10.0 ** (np.floor(np.log10(abs(want))) - 3)


def test_walk_tables(lab_walk, lab_walk_primed):
    for n, want in LAB_X.items():
        assert abs(lab_walk.x(n).real - want) < _printed_tol(want), n
    for n, want in LAB_Y.items():
        assert abs(lab_walk.y(n).real - want) < _printed_tol(want), n
    for n, want in LAB_XP.items():
        assert abs(lab_walk_primed.x(n).real - want) < _printed_tol(want), n
    for n, want in LAB_YP.items():
        assert abs(lab_walk_primed.y(n).real - want) < _printed_tol(want), n


def test_walk_residuals(lab_walk):
    assert lab_walk.residual_check(-2, 12) < 1e-10


def test_arithmetic_exact():
    spec = arithmetic_lattice(1.0)
    w = spec.walk()
    for n in range(-5, 9):
        assert abs(w.x(n) - n) < 1e-12


def test_branch_swap(lab_curve):
    plus = LatticeWalk(lab_curve, 0.3, "plus")
    minus = LatticeWalk(lab_curve, 0.3, "minus")
    for n in range(-4, 5):
        assert abs(minus.x(n) - plus.x(-n)) < 1e-10
        assert abs(minus.y(n) - plus.y(-n - 1)) < 1e-10


def test_advance_sqrt_cross(lab_curve, lab_walk):
    e = euler_polynomial(lab_curve)
    for n in range(0, 6):
        got = advance_sqrt(lab_walk, n, e)
        assert abs(got - lab_walk.x(n + 1)) < 1e-7 * max(1.0, abs(got))


def test_advance_sqrt_geometric():
    spec = geometric_lattice(1.7, 0.3, 1.1)
    w = spec.walk()
    e = euler_polynomial(spec.curve)
    for n in range(0, 5):
        got = advance_sqrt(w, n, e)
        want = spec.closed_form(n + 1)
        assert abs(got - want) < 1e-8 * max(1.0, abs(want))


def test_advance_sqrt_mirror(lab_curve):
    # at a zero of P the two determinations coincide (the walk bounces):
    # E(x*, z) = 0 has a double z-root at the common value R(x*)
    e = euler_polynomial(lab_curve)
    from ellgrid.lattice import sqrt_step_functions
    num_sum, den, sigma = sqrt_step_functions(e, lab_curve.discriminant_x())
    x = 1.0  # a zero of P
    R = -num_sum(x) / (2.0 * den(x))
    ee = e.e
    a2 = ee[0, 2] + ee[1, 2] * x + ee[2, 2] * x * x
    a1 = ee[0, 1] + ee[1, 1] * x + ee[2, 1] * x * x
    a0 = ee[0, 0] + ee[1, 0] * x + ee[2, 0] * x * x
    disc = a1 * a1 - 4.0 * a2 * a0
    assert abs(disc) < 1e-8 * max(abs(a1) ** 2, 1.0)
    assert abs(R - (-a1 / (2.0 * a2))) < 1e-8 * max(1.0, abs(R))


def test_fixed_points_geometric():
    spec = geometric_lattice(2.0, 0.0, 1.0)
    pts = fixed_points(spec.curve)
    kinds = {}
    for x, kind in pts:
        key = "inf" if x is INF_POINT else round(x.real, 6)
        kinds[key] = kind
    assert kinds.get(0.0) == "true_fixed"
    assert kinds.get("inf") == "true_fixed"


def test_fixed_points_laboratory(lab_curve):
    pts = fixed_points(lab_curve)
    finite = [(x, k) for x, k in pts if x is not INF_POINT]
    assert len(finite) == 4
    assert all(k == "mirror" for _, k in finite)
    # mirror points sit where the x-pair collapses: x* = -Y1(y*)/(2 Y2(y*))
    # over the four zeros y* of Q
    Y1, Y2 = lab_curve.Y(1), lab_curve.Y(2)
    want = sorted((-Y1(y) / (2.0 * Y2(y))).real
                  for y in lab_curve.discriminant_y().roots())
    got = sorted(x.real for x, _ in finite)
    assert np.allclose(got, want, atol=1e-8)


def test_fixed_points_arithmetic():
    pts = fixed_points(arithmetic_lattice(1.0).curve)
    assert len(pts) == 1
    assert pts[0][0] is INF_POINT and pts[0][1] == "true_fixed"


def test_chi_laboratory(lab_curve, lab_walk):
    e = euler_polynomial(lab_curve)
    closed = chi_closed_form(lab_walk, e)
    for n in range(1, 6):
        direct = chi_ratio(lab_walk, n)
        assert abs(direct - closed(n)) < 1e-7 * max(1.0, abs(direct))


def test_chi_arithmetic():
    w = arithmetic_lattice(0.8).walk()
    for n in range(0, 5):
        assert abs(chi_ratio(w, n) - 2.0) < 1e-12


def test_chi_geometric_constant():
    spec = geometric_lattice(1.6, 0.2, 1.3)
    w = spec.walk()
    vals = [chi_ratio(w, n) for n in range(1, 6)]
    assert max(abs(v - vals[0]) for v in vals) < 1e-9 * abs(vals[0])


def test_quadratic_exercise():
    # x_n = (n + c)^2 - 1/4 with c = sqrt(x_0 + 1/4)
    x0 = 0.84
    c = np.sqrt(x0 + 0.25)
    spec = quadratic_lattice(1.0, 2.0 * c, c * c - 0.25)
    assert abs(spec.closed_form(0) - x0) < 1e-12
    spec.verify(0, 8, rel_tol=1e-9)


def test_special_lattices_verify():
    arithmetic_lattice(0.45, 0.2).verify()
    geometric_lattice(1.35, -0.4, 0.8).verify()
    quadratic_lattice(0.7, 0.3, 1.2).verify()
    trigonometric_lattice(0.35, 0.27, 1.2, 0.1, 0.9, -0.2).verify()


def test_seed_pole_error(lab_curve):
    # seeding on a vertical asymptote: X2(u) = 0 leaves a single y-root
    with pytest.raises(PoleError):
        seed(lab_curve, -5.5, "plus")


def test_large_excursions_survive(lab_walk_primed):
    # the primed walk passes through x'_4 = 6.3650 and x'_8 = -6.7673
    # without tripping the pole guard
    assert abs(lab_walk_primed.x(4).real - 6.3650) < 5e-4
    assert abs(lab_walk_primed.x(8).real + 6.7673) < 5e-4

import numpy as np
import pytest

from ellgrid.algebra import Poly
from ellgrid.biquadratic import build_from_discriminant
from ellgrid.lattice import LatticeWalk
from ellgrid import elliptic as el


@pytest.fixture(scope="session")
def lab_curve():
    P = 42.26667 * Poly.from_roots([-2.0, -1.0, 1.0, 1.5])
    return build_from_discriminant(P, -5.5, 4.0, sign_u=-1, sign_v=+1,
                                   shift=-0.7333)


@pytest.fixture(scope="session")
def lab_P(lab_curve):
    return lab_curve.discriminant_x()


@pytest.fixture(scope="session")
def lab_walk(lab_curve):
    w = LatticeWalk(lab_curve, 0.0, "plus")
    w.ensure(-3, 80)
    return w


@pytest.fixture(scope="session")
def lab_walk_primed(lab_curve):
    w = LatticeWalk(lab_curve, 3.0, "plus")
    w.ensure(-3, 40)
    return w


@pytest.fixture(scope="session")
def lab_profile(lab_curve, lab_walk):
    return el.profile_from_curve(lab_curve, lab_walk, lo=-1, hi=10)


def rel_err(got, want):
    got, want = complex(got), complex(want)
    return abs(got - want) / max(1.0, abs(want))

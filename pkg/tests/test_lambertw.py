import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.special import lambertw as scipy_lambertw

from lpwan_lifetime.errors import DomainError
from lpwan_lifetime.lambertw import BRANCH_POINT, lambert_w0, lambert_w0_iterations

from conftest import bisect_root


def test_exact_points():
    assert lambert_w0(0.0) == 0.0
    assert lambert_w0(math.e) == pytest.approx(1.0, rel=1e-15)
    assert lambert_w0(-1 / math.e) == pytest.approx(-1.0, abs=1e-12)


def test_omega_constant_against_bisection():
    omega = bisect_root(lambda w: w * math.exp(w) - 1.0, 0.0, 1.0)
    assert abs(lambert_w0(1.0) - omega) <= 1e-12
    assert lambert_w0(1.0) == pytest.approx(0.567143290409784, abs=1e-15)


def test_domain():
    with pytest.raises(DomainError):
        lambert_w0(-0.4)
    with pytest.raises(DomainError):
        lambert_w0(float("nan"))
    # slack at the branch point
    assert lambert_w0(BRANCH_POINT - 5e-16) == pytest.approx(-1.0, abs=1e-6)


@pytest.mark.parametrize("z", [-0.367879, -0.3, -0.1, -1e-10, 1e-300, 1e-8, 0.5, 2.0, 10.0,
                               1e3, 1e6, 1e100, 1e300])
def test_matches_scipy(z):
    assert lambert_w0(z) == pytest.approx(scipy_lambertw(z).real, rel=1e-13)


@given(st.floats(BRANCH_POINT + 1e-12, 1e12))
def test_inverse_identity(z):
    w, iterations = lambert_w0_iterations(z)
    assert w >= -1
    assert abs(w * math.exp(w) - z) <= 1e-12 * max(1.0, abs(z))
    assert iterations <= 10


def test_strictly_increasing():
    zs = np.concatenate([BRANCH_POINT + np.logspace(-9, -0.5, 500), np.logspace(-6, 6, 500)])
    ws = [lambert_w0(float(z)) for z in np.sort(zs)]
    assert all(b > a for a, b in zip(ws, ws[1:]))


@given(st.floats(0, 1e10))
def test_bounded_by_log1p(z):
    assert lambert_w0(z) <= math.log1p(z) * (1 + 1e-15)

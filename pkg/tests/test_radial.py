import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from robin_spectra.model import Potential
from robin_spectra.radial import (RadialGrid, bessel_j0, bessel_j1, bessel_robin_root, j0_first_zero,
                                  radial_lambda1)

from conftest import disk, solved

# frozen from scipy.special (j0, j1, jn_zeros) with brentq root finding
ROBIN_DISK = {0.25: 0.47003032167820386, 1.0: 1.5769927308086074, 4.0: 3.6407646728458944,
              16.0: 5.107970496310647, 32.0: 5.433408553426137}
J01 = 2.4048255576957724
# unit 3-ball, p=2: u = sin(s r)/r with s cot s = 1 - beta
ROBIN_BALL3 = {0.5: 1.358532876461639, 2.0: 4.115858365694522}

GRID = RadialGrid.graded(1.0, 2, 10_000)


def test_bessel_values():
    assert bessel_j0(1.0) == pytest.approx(0.7651976865579665, abs=1e-15)
    assert bessel_j1(1.0) == pytest.approx(0.44005058574493355, abs=1e-15)
    assert bessel_j0(10.0) == pytest.approx(-0.24593576445134832, abs=1e-13)
    assert bessel_j1(10.0) == pytest.approx(0.04347274616886141, abs=1e-13)
    assert bessel_j1(-1.0) == pytest.approx(-0.44005058574493355, abs=1e-15)
    assert np.allclose(bessel_j0(np.array([0.0, 1.0])), [1.0, 0.7651976865579665], atol=1e-15)


@settings(max_examples=50, deadline=None)
@given(st.floats(0.0, 12.0))
def test_bessel_wronskian_like_identity(x):
    # J0' = -J1 checked by central differences
    h = 1e-5
    d = (bessel_j0(x + h) - bessel_j0(x - h)) / (2 * h)
    assert d == pytest.approx(-bessel_j1(x), abs=1e-9)


def test_first_zero():
    assert j0_first_zero() == pytest.approx(J01, rel=1e-14)


@pytest.mark.parametrize("beta", sorted(ROBIN_DISK))
def test_robin_root(beta):
    assert bessel_robin_root(beta) == pytest.approx(ROBIN_DISK[beta], rel=1e-12)


def test_robin_root_limits():
    assert bessel_robin_root(1e-8) < 1e-7
    assert bessel_robin_root(1e8) == pytest.approx(J01 ** 2, rel=1e-6)
    with pytest.raises(ValueError):
        bessel_robin_root(0.0)


@pytest.mark.parametrize("beta", [0.25, 1.0, 4.0, 16.0])
def test_radial_matches_bessel_oracle(beta):
    r = radial_lambda1(2.0, beta, None, GRID)
    assert r.converged
    assert r.lambda_ == pytest.approx(ROBIN_DISK[beta], rel=1e-6)


@pytest.mark.parametrize("beta", sorted(ROBIN_BALL3))
def test_radial_three_ball(beta):
    r = radial_lambda1(2.0, beta, None, RadialGrid.graded(1.0, 3, 10_000))
    assert r.lambda_ == pytest.approx(ROBIN_BALL3[beta], rel=1e-6)


def test_dirichlet_limit():
    assert radial_lambda1(2.0, 1e6, None, GRID).lambda_ == pytest.approx(J01 ** 2, abs=1e-3)


def test_constant_potential_shift():
    a = radial_lambda1(2.5, 1.0, None, GRID).lambda_
    b = radial_lambda1(2.5, 1.0, Potential.constant(2.0), GRID).lambda_
    assert b - a == pytest.approx(2.0, abs=1e-9)


@pytest.mark.parametrize("p", [1.6, 2.0, 3.0])
def test_monotone_in_beta_and_potential(p):
    grid = RadialGrid.graded(1.0, 2, 2000)
    lams = [radial_lambda1(p, b, None, grid).lambda_ for b in (0.5, 1.0, 2.0, 4.0)]
    assert all(b > a for a, b in zip(lams, lams[1:]))
    low = radial_lambda1(p, 1.0, Potential.radial_poly([0.0, 0.0, 1.0]), grid).lambda_
    high = radial_lambda1(p, 1.0, Potential.radial_poly([0.5, 0.0, 1.0]), grid).lambda_
    assert lams[1] <= low <= high


@pytest.mark.parametrize("p,n", [(2.0, 2), (2.5, 2), (3.0, 3)])
def test_scaling_identity_on_rescaled_grid(p, n):
    grid = RadialGrid.graded(1.0, n, 2000)
    base = radial_lambda1(p, 1.0, None, grid).lambda_
    big = radial_lambda1(p, 1.0 / 2 ** (p - 1), None, grid.scaled(2.0)).lambda_
    assert 2 ** p * big == pytest.approx(base, rel=1e-10)


def test_matches_disk_fem_for_p25_quadratic_potential():
    V = Potential.radial_poly([0.0, 0.0, 1.0])
    ref = radial_lambda1(2.5, 1.0, V, GRID).lambda_
    _, r = solved(disk(0.05), p=2.5, V=V, key="r2")
    assert r.lambda_ == pytest.approx(ref, rel=1e-2)


def test_non_radial_potential_rejected():
    with pytest.raises(ValueError, match="radial"):
        radial_lambda1(2.0, 1.0, Potential.expression("x1"), GRID)


def test_grid_validation():
    with pytest.raises(ValueError):
        RadialGrid(1.0, 2, np.array([0.0, 0.5, 0.4, 1.0]))
    with pytest.raises(ValueError):
        RadialGrid(1.0, 1, np.linspace(0, 1, 5))
    g = RadialGrid.uniform(2.0, 3, 11)
    assert g.weights.sum() == pytest.approx(8.0 / 3.0, rel=2e-2)
    assert math.isclose(g.nodes[-1], 2.0)

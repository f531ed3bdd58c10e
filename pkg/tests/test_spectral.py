import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import special as sp

from varineq.errors import InvalidArgumentError
from varineq.functionals import boundary_prefactor, boundary_term_L
from varineq.profiles import ExtremalParams, GeometryContext, extremal_u
from varineq.seeded import Lcg64, seeded_profiles
from varineq.spectral import (BesselOrder, ZeroTable, bessel_j, bessel_zero, eigen_ode_residual, eigenbasis,
                              eigenfunction, expand_radial, gram_matrix)
from varineq.transforms import v_to_u


# the ascending series loses a few 1e-13 to cancellation just below its switch-over at x = 12
BESSEL_ABS = 1e-11


@settings(max_examples=200, deadline=None)
@given(st.floats(0.0, 20.0), st.floats(0.0, 200.0))
def test_bessel_against_mpmath(m, x):
    # mpmath rather than scipy: scipy's jv returns 0 for subnormal x
    ref = float(mpmath.besselj(mpmath.mpf(m), mpmath.mpf(x)))
    assert abs(bessel_j(m, x) - ref) <= BESSEL_ABS


@pytest.mark.parametrize("m", [0.0, 0.5, 1.0, math.sqrt(3.0), 2.5, 7.3, 20.0])
def test_bessel_vectorised_against_scipy(m):
    x = np.linspace(0.0, 200.0, 2001)
    assert np.max(np.abs(bessel_j(m, x) - sp.jv(m, x))) < BESSEL_ABS


def test_half_integer_order_closed_form():
    x = np.linspace(0.1, 150.0, 300)
    assert np.allclose(bessel_j(0.5, x), np.sqrt(2 / (np.pi * x)) * np.sin(x), rtol=0, atol=BESSEL_ABS)


def test_bessel_small_argument_leading_term():
    m = 0.03125
    x = 1e-300
    assert bessel_j(m, x) == pytest.approx((x / 2) ** m / math.gamma(m + 1), rel=1e-14)
    assert bessel_j(0.0, 0.0) == 1.0


@pytest.mark.parametrize("m,x", [(-0.1, 1.0), (20.5, 1.0), (1.0, -1.0), (1.0, 201.0), (1.0, math.nan)])
def test_bessel_domain(m, x):
    with pytest.raises(InvalidArgumentError):
        bessel_j(m, x)


@pytest.mark.parametrize("m", [0, 1, 2, 5])
def test_integer_order_zeros_against_scipy(m):
    ref = sp.jn_zeros(m, 10)
    ours = [bessel_zero(m, n) for n in range(1, 11)]
    assert np.max(np.abs(np.array(ours) - ref)) < 1e-10


@pytest.mark.parametrize("m", [0.5, math.sqrt(3.0), math.sqrt(8.0), 3.7])
def test_real_order_zeros_against_mpmath(m):
    for n in (1, 2, 5):
        ref = float(mpmath.besseljzero(mpmath.mpf(m), n))
        assert bessel_zero(m, n) == pytest.approx(ref, abs=1e-10)


def test_first_zeros_frozen():
    assert bessel_zero(0.0, 1) == pytest.approx(2.404825557695773, abs=1e-10)
    assert bessel_zero(1.0, 1) == pytest.approx(3.8317059702075125, abs=1e-10)


@pytest.mark.parametrize("m,n", [(-1.0, 1), (21.0, 1), (0.0, 0), (0.0, 51), (0.0, 1.5)])
def test_zero_domain(m, n):
    with pytest.raises(InvalidArgumentError):
        bessel_zero(m, n)


def test_zero_table_roundtrip():
    table = ZeroTable.build([0.0, 1.0], 3)
    assert table.zero(1.0, 2) == bessel_zero(1.0, 2)
    lines = table.to_csv().splitlines()
    assert lines[0] == "m,n,z"
    assert len(lines) == 7
    # misses fall back to a fresh search
    assert table.zero(2.0, 1) == bessel_zero(2.0, 1)


@pytest.mark.parametrize("k,N,m2", [(0, 3, 0), (1, 3, 2), (2, 3, 6), (1, 4, 3), (3, 5, 18)])
def test_bessel_order(k, N, m2):
    order = BesselOrder(k, N)
    assert order.c_k == m2
    assert order.m == pytest.approx(math.sqrt(m2), rel=1e-15)


@pytest.mark.parametrize("k,N", [(-1, 3), (1.5, 3), (0, 2)])
def test_bessel_order_validation(k, N):
    with pytest.raises(InvalidArgumentError):
        BesselOrder(k, N)


@pytest.mark.parametrize("k", [0, 1, 2])
@pytest.mark.parametrize("N", [3, 4])
def test_gram_offdiagonal(k, N):
    G = gram_matrix(GeometryContext(N), k, 8)
    d = np.sqrt(np.diag(G))
    assert np.max(np.abs(G / np.outer(d, d) - np.eye(8))) < 1e-8


def test_gram_diagonal_closed_form(g3):
    # int_0^1 r J_m(z r)^2 dr = J_{m+1}(z)^2 / 2
    G = gram_matrix(g3, 0, 6)
    for n in range(1, 7):
        z = bessel_zero(0.0, n)
        assert G[n - 1, n - 1] == pytest.approx(0.5 * sp.jv(1, z) ** 2, rel=1e-12)


def test_gram_size_validation(g3):
    with pytest.raises(InvalidArgumentError):
        gram_matrix(g3, 0, 21)


@pytest.mark.parametrize("N", [3, 4, 5])
def test_eigen_ode_residual(N):
    g = GeometryContext(N, 1.5)
    worst = max(eigen_ode_residual(eigenfunction(k, n, N, g.R), g) for k in (0, 1, 2) for n in (1, 2, 3))
    assert worst < 1e-6


def test_eigenfunction_vanishes_at_boundary(g3):
    for e in eigenbasis(g3, 1, 5):
        assert abs(float(e.radial_part(np.array([g3.R]))[0])) < 1e-12


def test_radial_eigenfunctions_have_maximal_singularity(g3):
    # r^a e_{0,n} -> J_0(0) = 1 at the origin; k >= 1 terms vanish there
    r = np.array([1e-10])
    for e in eigenbasis(g3, 0, 4):
        assert float((r ** g3.a * e.radial_part(r))[0]) == pytest.approx(1.0, rel=1e-9)
    for e in eigenbasis(g3, 1, 3):
        assert abs(float((r ** g3.a * e.radial_part(r))[0])) < 1e-8


def test_expansion_reconstructs_extremal(g3):
    u = extremal_u(ExtremalParams(), g3)
    exp_ = expand_radial(u, g3, 20)
    rel = math.sqrt(exp_.residuals[-1] / exp_.norm_sq)
    assert rel < 1e-2
    assert all(b <= a * (1 + 1e-12) for a, b in zip(exp_.residuals, exp_.residuals[1:]))


def test_expansion_of_a_single_eigenfunction(g3):
    e = eigenfunction(0, 3, 3)
    exp_ = expand_radial(e.as_profile(), g3, 6)
    target = np.zeros(6)
    target[2] = 1.0
    assert np.allclose(exp_.coefficients, target, atol=1e-10)
    assert exp_.boundary_limit() == pytest.approx(1.0, abs=1e-10)


def test_boundary_functional_of_bounded_profiles_decays(g3):
    # bounded u has L(u) = 0, yet each partial sum carries a maximal singularity;
    # its coefficient sum must still fall off as terms are added
    for p in seeded_profiles(g3.R, 3, Lcg64(4), powers=(1,)):
        exp_ = expand_radial(p, g3, 20)
        sums = [abs(exp_.boundary_limit(c)) for c in (5, 10, 20)]
        assert sums[2] < sums[0]
        assert sums[2] < 0.05 * float(np.max(np.abs(p.value(np.linspace(0, 1, 101)))))


def test_boundary_functional_of_singular_profile_converges(g3):
    # u = r^-a p with p(0) != 0 and smooth: the series limit moves toward p(0)
    p = seeded_profiles(g3.R, 1, Lcg64(7), powers=(0,))[0]
    exp_ = expand_radial(v_to_u(p, g3), g3, 20)
    target = float(p.value(np.array([0.0]))[0])
    errs = [abs(exp_.boundary_limit(c) - target) for c in (5, 10, 20)]
    assert errs[2] < errs[1] < errs[0]


def test_boundary_term_consistency(g3):
    # series estimate of L(u) against the direct limit, within 2% at 20 terms
    u = extremal_u(ExtremalParams(), g3)
    exp_ = expand_radial(u, g3, 20)
    L_series = boundary_prefactor(g3) * exp_.boundary_limit()
    assert L_series == pytest.approx(boundary_term_L(u, g3), rel=0.02)


def test_expansion_size_validation(g3):
    with pytest.raises(InvalidArgumentError):
        expand_radial(extremal_u(ExtremalParams(), g3), g3, 51)

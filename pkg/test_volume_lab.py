"""
Tests for the angle-gap region, its closed-form volume and the Monte Carlo check
"""
import numpy as np
import pytest

from config.settings import settings
from src.geometry.cartan import CartanCoords, angle_of, recompose, rotation, translation
from src.geometry.group_element import GroupElement, S, T
from src.theory.kernel import f_xi_antiderivative, f_xi_values
from src.utils.exceptions import RegionError
from src.utils.helpers import circle_distance
from src.volumes.monte_carlo import ball_volume, check_volume, mc_volume
from src.volumes.region import (
    F_M,
    J_length,
    RegionSpec,
    interval_endpoints,
    main_term,
    region_contains,
    region_volume_quad,
    region_contains_direct,
    tphi_conditions,
    xy_conditions,
)


def _length(pieces):
    return sum(hi - lo for lo, hi in pieces)


def test_region_spec_derived_quantities():
    spec = RegionSpec(T, 100.0, 1.0)
    assert spec.A == pytest.approx(1.5)
    assert spec.B == pytest.approx(np.sqrt(1.25))
    assert spec.C == pytest.approx(1.0)
    assert spec.ell == pytest.approx(np.arccosh(1.5))
    assert spec.with_xi(2.0).xi == 2.0 and spec.with_Q(10.0).Q == 10.0


def test_region_spec_validation():
    with pytest.raises(RegionError):
        RegionSpec(S, 10.0, 1.0)
    with pytest.raises(RegionError):
        RegionSpec(GroupElement.identity(), 10.0, 1.0)
    with pytest.raises(RegionError):
        RegionSpec(T, 0.0, 1.0)
    with pytest.raises(RegionError):
        RegionSpec(T, 10.0, -0.5)


def test_worked_interval_example():
    intervals = interval_endpoints(RegionSpec(T, 100.0, 1.05))
    assert intervals.case_tag == "C<xi<=B"
    assert intervals.lambda_plus == pytest.approx(-0.54014, abs=1e-4)
    assert intervals.lambda_minus == pytest.approx(-0.86690, abs=1e-4)


@pytest.mark.parametrize("xi", [0.3, 1.0, 1.05])
def test_endpoint_identities(xi):
    spec = RegionSpec(T, 100.0, xi)
    A, B = spec.A, spec.B
    intervals = interval_endpoints(spec)
    for lam in (intervals.lambda_minus, intervals.lambda_plus):
        quadratic = B * B * (xi * xi + 1) * lam * lam + 2 * A * B * xi * xi * lam + A * A * xi * xi - B * B
        assert abs(quadratic) <= 1e-10
        # Where the lower bound of J reaches 1
        assert B * np.sqrt(1 - lam * lam) == pytest.approx(xi * (A + B * lam), rel=1e-10)
    assert B * np.sqrt(1 - intervals.alpha ** 2) == pytest.approx(xi, rel=1e-10)
    knee = (1 - A) / B
    assert A + B * knee == pytest.approx(1.0, rel=1e-12)


def test_double_root_at_xi_equal_B():
    spec = RegionSpec(T, 100.0, 1.0)
    spec = spec.with_xi(spec.B)
    intervals = interval_endpoints(spec)
    assert intervals.lambda_minus == pytest.approx(-spec.B / spec.A, rel=1e-10)
    assert intervals.lambda_plus == pytest.approx(-spec.B / spec.A, rel=1e-10)
    assert intervals.alpha == pytest.approx(0.0, abs=1e-7)


def test_lambda_plus_is_knee_at_xi_equal_C():
    M = translation(1.7)
    spec = RegionSpec(M, 100.0, 1.0)
    spec = spec.with_xi(spec.C)
    intervals = interval_endpoints(spec)
    assert intervals.lambda_plus == pytest.approx((1 - spec.A) / spec.B, rel=1e-10)


def test_large_xi_case_has_no_gap():
    intervals = interval_endpoints(RegionSpec(T, 100.0, 2.0))
    assert intervals.case_tag == "B<xi"
    assert intervals.lambda_minus is None and intervals.alpha is None
    assert intervals.i3() == ()
    assert _length(intervals.I1) + _length(intervals.I2) == pytest.approx(2.0)


@pytest.mark.parametrize("xi", [0.3, 1.05, 2.0])
def test_interval_pieces_partition_and_match_length(xi):
    spec = RegionSpec(T, 100.0, xi)
    intervals = interval_endpoints(spec)
    total = _length(intervals.I1) + _length(intervals.I2) + _length(intervals.i3())
    assert total == pytest.approx(2.0)
    A, B = spec.A, spec.B
    for lo, hi in intervals.I1:
        y = 0.5 * (lo + hi)
        expected = 1 - B * np.sqrt(1 - y * y) / (xi * (A + B * y))
        assert J_length(spec, y) == pytest.approx(expected)
    for lo, hi in intervals.I2:
        y = 0.5 * (lo + hi)
        expected = 1 / (A + B * y) - B * np.sqrt(1 - y * y) / (xi * (A + B * y))
        assert J_length(spec, y) == pytest.approx(expected)
    for lo, hi in intervals.i3():
        assert J_length(spec, 0.5 * (lo + hi)) == 0.0


MATRICES = {
    "T": T,
    "far": rotation(0.4) @ translation(2.3) @ rotation(-1.1),
    "near": translation(0.2),
}


@pytest.mark.parametrize("name", sorted(MATRICES))
@pytest.mark.parametrize("xi", [0.1, 0.5, 1.0, 1.05, 2.0, 6.0])
def test_F_M_equals_kernel_antiderivative(name, xi):
    spec = RegionSpec(MATRICES[name], 100.0, xi)
    assert F_M(spec) == pytest.approx(f_xi_antiderivative(xi, spec.ell), rel=1e-8)


def test_F_M_derivative_is_kernel():
    spec = RegionSpec(T, 100.0, 1.0)
    h = 1e-5
    for xi in (0.5, 1.05, 2.0):
        fd = (F_M(spec.with_xi(xi + h)) - F_M(spec.with_xi(xi - h))) / (2 * h)
        assert fd == pytest.approx(f_xi_values(xi, spec.ell), rel=1e-6)


def test_F_M_is_monotone_and_vanishes_at_zero():
    spec = RegionSpec(T, 100.0, 1.0)
    values = [F_M(spec.with_xi(xi)) for xi in np.linspace(0.0, 5.0, 26)]
    assert values[0] == 0.0
    assert np.all(np.diff(values) > 0)
    assert main_term(spec) == pytest.approx(1e4 * F_M(spec))


def test_closed_form_membership_matches_direct(random_element):
    spec = RegionSpec(T, 10.0, 10.0)
    window = 2 * spec.xi / spec.Q ** 2
    hits = 0
    for _ in range(2000):
        g, _ = random_element(0.05, 3.0)
        gm = g @ spec.M.as_float()
        if abs(g.norm_sq - 100.0) < 1e-9 or abs(gm.norm_sq - 100.0) < 1e-9:
            continue
        if gm.norm_sq - 2.0 < 1e-9:
            continue
        gap = circle_distance(angle_of(g).theta, angle_of(gm).theta)
        if abs(gap - window) < 1e-9:
            continue
        direct = region_contains_direct(spec, g)
        assert region_contains(spec, g) == direct
        hits += direct
    assert hits > 50


def test_lattice_membership_uses_exact_elements(psl2z_ball):
    spec = RegionSpec(T, 20.0, 40.0)
    hits = 0
    for g in psl2z_ball.restrict(20.0).elements:
        # Integral norms can sit exactly on the boundary or in K
        if g.norm_sq == 2 or (g @ spec.M).norm_sq in (2, 400):
            continue
        direct = region_contains_direct(spec, g)
        assert region_contains(spec, g) == direct
        hits += direct
    assert hits > 0


def test_xy_conditions_agree_with_exact_angle(rng):
    spec = RegionSpec(T, 10.0, 5.0)
    t = rng.uniform(spec.ell, np.arccosh(60.0), 50_000)
    phi = rng.uniform(-np.pi, np.pi, 50_000)
    exact = tphi_conditions(spec, t, phi)
    assert exact.any() and not exact.all()
    np.testing.assert_array_equal(xy_conditions(spec, t, phi), exact)


def test_ball_volume():
    assert ball_volume(np.sqrt(2.0)) == pytest.approx(0.0, abs=1e-12)
    assert ball_volume(10.0) == pytest.approx(2 * np.pi * 49)


def test_monte_carlo_is_deterministic(monkeypatch, four_workers):
    monkeypatch.setattr(settings, "MC_SHARD_SIZE", 5_000)
    spec = RegionSpec(T, 30.0, 1.0)
    serial = mc_volume(spec, 23_000, seed=7, n_jobs=1)
    threaded = mc_volume(spec, 23_000, seed=7, n_jobs=3)
    assert serial == threaded
    assert serial.hits > 0


def test_monte_carlo_seeds_agree_within_error():
    spec = RegionSpec(T, 30.0, 1.0)
    first = mc_volume(spec, 100_000, seed=1, n_jobs=1)
    second = mc_volume(spec, 100_000, seed=2, n_jobs=1)
    assert first.mean != second.mean
    assert abs(first.mean - second.mean) <= 6 * np.hypot(first.stderr, second.stderr)


def test_monte_carlo_validation():
    spec = RegionSpec(T, 30.0, 1.0)
    with pytest.raises(RegionError):
        mc_volume(spec, 1, seed=0)
    assert mc_volume(spec.with_Q(1.0), 100, seed=0).mean == 0.0


def test_volume_check_against_main_term():
    spec = RegionSpec(T, 100.0, 1.0)
    check = check_volume(spec, 200_000, seed=12345, slack=5.0, n_jobs=1)
    assert check.closed_form == pytest.approx(4000.0, rel=0.05)
    assert check.passed
    assert check.abs_gap == pytest.approx(abs(check.estimate.mean - check.closed_form))


def test_empty_region_at_zero_xi():
    check = check_volume(RegionSpec(T, 50.0, 0.0), 20_000, seed=3, slack=5.0, n_jobs=1)
    assert check.closed_form == 0.0
    assert check.estimate.hits == 0
    assert check.passed


def test_membership_of_rotated_inputs():
    spec = RegionSpec(T, 10.0, 10.0)
    g = recompose(CartanCoords(theta=0.3, t=2.0, phi=-spec.m))
    # phi + m = 0 puts gM on the geodesic of g
    assert region_contains(spec, g)


def _derivative_pairs():
    """Five xi per element: two with xi < C, one between C and B, two above B"""
    pairs = []
    for name, M in (("T", T), ("a_1.5", translation(1.5)), ("far", MATRICES["far"]),
                    ("a_3", translation(3.0))):
        spec = RegionSpec(M, 100.0, 1.0)
        B, C = spec.B, spec.C
        for xi in (0.5 * C, C - 0.05, 0.5 * (B + C), B + 0.05, B + 1.0):
            pairs.append(pytest.param(M, xi, id=f"{name}-xi{xi:.4g}"))
    return pairs


@pytest.mark.parametrize("M, xi", _derivative_pairs())
def test_F_M_derivative_in_every_case(M, xi):
    spec = RegionSpec(M, 100.0, xi)
    assert min(abs(xi - spec.B), abs(xi - spec.C)) >= 0.05 - 1e-12
    h = 1e-4

    def F(x):
        return F_M(spec.with_xi(x))

    five_point = (-F(xi + 2 * h) + 8 * F(xi + h) - 8 * F(xi - h) + F(xi - 2 * h)) / (12 * h)
    kernel = f_xi_values(xi, spec.ell)
    assert abs(five_point - kernel) <= 1e-6 * kernel


def test_quadrature_volume_agrees_with_monte_carlo():
    spec = RegionSpec(T, 50.0, 1.0)
    quad = region_volume_quad(spec)
    estimate = mc_volume(spec, 1_000_000, seed=12345, n_jobs=1)
    assert abs(estimate.mean - quad) <= 5.0 * estimate.stderr
    assert region_volume_quad(spec.with_xi(0.0)) == 0.0
    assert np.isnan(region_volume_quad(RegionSpec(T, 2.0, 5.0)))


@pytest.mark.parametrize("M", [T, translation(1.5)])
def test_quadrature_gap_to_main_term_shrinks_with_Q(M):
    gaps = []
    for Q in (50.0, 100.0, 200.0):
        spec = RegionSpec(M, Q, 1.0)
        closed = main_term(spec)
        gaps.append(abs(region_volume_quad(spec) - closed) / closed)
    assert gaps[0] < 0.01
    assert gaps[0] > gaps[1] > gaps[2]

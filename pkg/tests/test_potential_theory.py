"""Tests for logarithmic potentials, disk covers, and zero-counting bounds."""

import math

import numpy as np
import pytest

from fuplab.potential_theory import (
    AnalyticFromZeros,
    CartanDSet,
    DiskCover,
    PointMasses,
    TwoVarPolynomial,
    build_cartan2,
    cartan_disks,
    cartan_level_constant,
    log_potential,
    trace_measure,
    verify_riesz_bounds,
)


def seeded_masses(seed: int, n: int = 12) -> PointMasses:
    rng = np.random.default_rng(seed)
    pts = rng.uniform(-1.0, 1.0, size=(n, 2))
    points = pts[:, 0] + 1j * pts[:, 1]
    w = rng.uniform(0.2, 1.0, size=n)
    return PointMasses(points, w / w.sum())


def seeded_function(seed: int) -> AnalyticFromZeros:
    rng = np.random.default_rng(seed)
    n = int(rng.integers(3, 9))
    zeros = 0.55 * (rng.uniform(-1, 1, n) + 1j * rng.uniform(-1, 1, n))
    leading = float(rng.uniform(0.5, 2.0))
    return AnalyticFromZeros(zeros, np.array([], dtype=complex), leading)


def seeded_polynomial(seed: int) -> TwoVarPolynomial:
    rng = np.random.default_rng(seed)
    deg = int(rng.integers(2, 5))
    coeffs = rng.standard_normal((deg + 1, deg + 1)) + 1j * rng.standard_normal(
        (deg + 1, deg + 1)
    )
    coeffs[0, 0] += 0.5
    return TwoVarPolynomial(coeffs)


class TestLogPotential:
    def test_single_mass_closed_form(self):
        m = PointMasses(np.array([0.0 + 0.0j]), np.array([1.0]))
        for z in (2.0 + 0j, 0.5j, -3.0 + 4.0j):
            assert log_potential(z, m) == pytest.approx(math.log(abs(z)), rel=1e-12)

    def test_weighted_sum(self):
        m = PointMasses(np.array([1.0 + 0j, -1.0 + 0j]), np.array([0.5, 0.5]))
        z = 0.3 + 0.7j
        want = 0.5 * math.log(abs(z - 1)) + 0.5 * math.log(abs(z + 1))
        assert log_potential(z, m) == pytest.approx(want, rel=1e-12)

    def test_array_input(self):
        m = seeded_masses(0)
        zs = np.array([2.0 + 2.0j, -1.5 + 0.2j])
        out = log_potential(zs, m)
        assert out.shape == (2,)
        assert out[0] == pytest.approx(log_potential(zs[0], m))


class TestCartanDisks:
    @pytest.mark.parametrize("H", [0.1, 0.01])
    def test_bound_outside_cover(self, H):
        for seed in range(3):
            m = seeded_masses(seed)
            cover = cartan_disks(m, H)
            assert isinstance(cover, DiskCover)
            assert cover.radius_sum <= 5.0 * H + 1e-12
            bound = float(np.sum(m.weights)) * math.log(H / math.e) - 1e-12
            rng = np.random.default_rng(10_000 + seed)
            pts = rng.uniform(-2.0, 2.0, size=(4000, 2))
            probes = pts[:, 0] + 1j * pts[:, 1]
            outside = ~cover.contains(probes)
            vals = log_potential(probes[outside], m)
            assert np.all(vals >= bound)

    def test_contains_and_scaled(self):
        cover = DiskCover(
            np.array([0.0 + 0j, 2.0 + 0j]), np.array([1.0, 0.5]), 5.0, 1.0
        )
        pts = np.array([0.5 + 0j, 2.4 + 0j, 2.6 + 0j, -3.0 + 0j])
        assert list(cover.contains(pts)) == [True, True, False, False]
        # scaling is a homothety of the plane: centers and radii both scale
        doubled = cover.scaled(2.0)
        assert doubled.radius_sum == pytest.approx(2.0 * cover.radius_sum)
        assert bool(doubled.contains(np.array([4.5 + 0j]))[0])
        assert not bool(doubled.contains(np.array([2.9 + 0j]))[0])


class TestRieszBounds:
    def test_seeded_suite_all_pass(self):
        for seed in (100, 101, 102):
            F = seeded_function(seed)
            rep = verify_riesz_bounds(F, rho=0.6, r=0.8, r1=0.7)
            assert rep.all_ok, (seed, rep)
            assert rep.mass_measured <= rep.mass_bound
            assert rep.deviation_measured <= rep.deviation_bound
            assert rep.c_measured >= rep.c_bound

    def test_radius_ordering_enforced(self):
        F = seeded_function(100)
        with pytest.raises(ValueError):
            verify_riesz_bounds(F, rho=0.6, r=0.8, r1=0.9)  # r1 must sit inside
        with pytest.raises(ValueError):
            verify_riesz_bounds(F, rho=0.8, r=0.6, r1=0.7)

    def test_mass_counts_zeros_in_disk(self):
        F = seeded_function(101)
        # the measured Riesz mass in the r-disk is the number of zeros there
        # (each zero of an analytic function carries unit mass)
        rep = verify_riesz_bounds(F, rho=0.6, r=0.8, r1=0.7)
        assert rep.mass_measured == pytest.approx(len(F.zeros_in_disk(0.8)))

    def test_log_abs_matches_direct_formula(self):
        F = seeded_function(102)
        z = np.array([0.3 + 0.1j, -0.2 + 0.6j])
        direct = sum(np.log(np.abs(z - z0)) for z0 in F.zeros) + math.log(F.leading)
        assert F.log_abs(z) == pytest.approx(direct, rel=1e-12)


class TestCartanTwoVariables:
    def test_level_constant_formula(self):
        for delta, H in ((0.25, 0.05), (0.1, 0.01)):
            want = 2.0 * delta**-3 * math.log(2.0 / delta) + delta**-2 * math.log(
                2.0 * math.e / H
            )
            assert cartan_level_constant(delta, H) == pytest.approx(want, rel=1e-12)

    def test_trace_measure_bounded(self):
        H = 0.05
        traces = []
        for seed in (200, 201, 202):
            cset = build_cartan2(seeded_polynomial(seed), H, rho=0.6, r=0.8)
            assert isinstance(cset, CartanDSet)
            t = trace_measure(cset)
            assert 0.0 <= t <= 40.0 * H
            traces.append(t)
        # the suite must exercise nontrivial covers, not just empty ones
        assert max(traces) > 0.0

    def test_excluded_points_inside_first_level(self):
        cset = build_cartan2(seeded_polynomial(200), 0.05, rho=0.6, r=0.8)
        first = cset.first
        if first.radii.size:
            z1 = complex(first.centers[0] + 0.5 * first.radii[0])
            inside = np.array([z1])
            w = np.array([0.0 + 0.0j])
            assert bool(cset.excluded(inside, w)[0])

    def test_second_level_cached(self):
        cset = build_cartan2(seeded_polynomial(201), 0.05, rho=0.6, r=0.8)
        z = 0.1 + 0.05j
        a = cset.second_level(z)
        b = cset.second_level(z)
        assert a is b

    def test_lower_bound_holds_off_the_cover(self):
        cset = build_cartan2(seeded_polynomial(202), 0.05, rho=0.6, r=0.8)
        poly = cset.family
        rng = np.random.default_rng(42)
        zw = rng.uniform(-0.4, 0.4, size=(500, 4))
        z = zw[:, 0] + 1j * zw[:, 1]
        w = zw[:, 2] + 1j * zw[:, 3]
        keep = ~cset.excluded(z, w)
        vals = poly.log_abs(z[keep], w[keep])
        assert np.all(vals >= cset.lower_bound - 1e-9)

"""Tests for the elliptic-integral rectangle map and its small-aspect limits."""

import math

import mpmath as mp
import pytest
from hypothesis import given, strategies as st

from fuplab.conformal import (
    AsymptoticsReport,
    ConformalRectangleMap,
    arcsn,
    asymptotics_report,
    elliptic_H,
    elliptic_L,
    phi_moebius,
    solve_k_for_q,
)

# Frozen oracle values, computed with 60-digit mpmath AGM/elliptic routines
# (mp.ellipk at dps=60) independently of the implementation under test.
ORACLE_L_HALF = 1.6857503548125960429
ORACLE_H_HALF = 2.1565156474996432354
ORACLE_H_001 = 5.9915893405069964024
ORACLE_ARCSN_I_03 = 0.86982854974091009j  # arcsn(i) at modulus 0.3, dps=50
ORACLE_K = {
    # q -> modulus solving L(k)/H(k) = q, bisected at dps=50
    0.1: 6.028069101559710828825e-7,
    0.2: 0.001552811879661263224942,
    1.0: 0.7071067811865475244008,
}

# Relative deviations of the numerically extracted rates from their
# closed-form small-aspect limits; frozen from the first verified run as a
# regression guard (the acceptance bound itself is much looser).
FROZEN_REL_DEV = {
    0.3: (2.643e-4, 4.676e-1, 1.177e-1),
    0.2: (1.407e-6, 2.610e-1, 2.562e-2),
    0.1: (7.525e-11, 3.902e-2, 4.037e-4),
}


class TestEllipticIntegrals:
    def test_frozen_values(self):
        assert elliptic_L(0.5) == pytest.approx(ORACLE_L_HALF, rel=1e-13)
        assert elliptic_H(0.5) == pytest.approx(ORACLE_H_HALF, rel=1e-13)
        assert elliptic_H(0.01) == pytest.approx(ORACLE_H_001, rel=1e-13)

    def test_complementary_symmetry(self):
        # L at modulus k equals H at the complementary modulus
        for k in (0.1, 0.5, 0.9):
            kp = math.sqrt(1.0 - k * k)
            assert elliptic_L(k) == pytest.approx(elliptic_H(kp), rel=1e-12)

    def test_monotonicity(self):
        ks = [0.05, 0.2, 0.5, 0.8, 0.95]
        Ls = [elliptic_L(k) for k in ks]
        Hs = [elliptic_H(k) for k in ks]
        assert Ls == sorted(Ls)
        assert Hs == sorted(Hs, reverse=True)

    @given(st.floats(0.01, 0.99))
    def test_agrees_with_mpmath(self, k):
        # mpmath's ellipk takes the parameter m = k^2
        assert elliptic_L(k) == pytest.approx(float(mp.ellipk(k * k)), rel=1e-11)


class TestModulusSolver:
    def test_frozen_values(self):
        for q, k_expect in ORACLE_K.items():
            assert solve_k_for_q(q) == pytest.approx(k_expect, rel=1e-9)

    def test_defining_ratio(self):
        for q in (0.05, 0.15, 0.3):
            k = solve_k_for_q(q)
            assert elliptic_L(k) / elliptic_H(k) == pytest.approx(q, rel=1e-9)

    def test_small_q_matches_exponential_seed(self):
        # k(q) ~ 4 exp(-pi/(2q)) as q -> 0
        q = 0.05
        assert solve_k_for_q(q) == pytest.approx(
            4.0 * math.exp(-math.pi / (2 * q)), rel=1e-2
        )


class TestArcsn:
    def test_frozen_imaginary_axis_value(self):
        got = arcsn(1j, 0.3)
        assert got.real == pytest.approx(0.0, abs=1e-12)
        assert got.imag == pytest.approx(ORACLE_ARCSN_I_03.imag, rel=1e-11)

    def test_zero_and_oddness_on_real_axis(self):
        assert arcsn(0.0, 0.4) == pytest.approx(0.0, abs=1e-14)
        # the branch lives on the closed upper half plane, so oddness can
        # only be observed along the real axis
        assert arcsn(-0.4, 0.4) == pytest.approx(-arcsn(0.4, 0.4), rel=1e-10)

    def test_endpoint_is_quarter_period(self):
        k = 0.6
        assert arcsn(1.0, k).real == pytest.approx(elliptic_L(k), rel=1e-10)

    def test_round_trip_through_sn(self):
        k = 0.35
        for z in (0.4, 0.2 + 0.5j, 0.9j):
            u = arcsn(z, k)
            back = complex(mp.ellipfun("sn", mp.mpc(u), k=mp.mpf(k)))
            assert back == pytest.approx(z, rel=1e-9, abs=1e-9)


class TestRectangleMap:
    def test_normalization_corners(self):
        m = ConformalRectangleMap.from_q(0.2)
        assert m.phi_q(-1.0) == pytest.approx(0.0, abs=1e-8)
        assert m.phi_q(1.0) == pytest.approx(1.0, rel=1e-9)
        assert m.phi_q(1j) == pytest.approx(0.2j, rel=1e-7)
        assert m.phi_q(-1j) == pytest.approx(-0.2j, rel=1e-7)

    def test_interior_maps_into_rectangle(self):
        m = ConformalRectangleMap.from_q(0.25)
        for w in (0.0, 0.5, -0.3 + 0.4j, 0.1 - 0.7j):
            assert m.in_rectangle(m.phi_q(w), tol=1e-9)

    def test_derivative_matches_difference_quotient(self):
        m = ConformalRectangleMap.from_q(0.25)
        w, h = 0.2 + 0.1j, 1e-6
        numeric = (m.phi_q(w + h) - m.phi_q(w - h)) / (2 * h)
        assert m.derivative(w) == pytest.approx(numeric, rel=1e-6)

    def test_outside_disk_rejected(self):
        m = ConformalRectangleMap.from_q(0.25)
        with pytest.raises(ValueError):
            m.phi_q(1.5 + 0.2j)

    def test_moebius_disk_to_half_plane(self):
        assert phi_moebius(0.0) == pytest.approx(1j)
        assert phi_moebius(-1.0) == pytest.approx(0.0, abs=1e-14)
        # boundary goes to the real axis
        w = complex(math.cos(0.7), math.sin(0.7))
        assert phi_moebius(w).imag == pytest.approx(0.0, abs=1e-12)


class TestAsymptotics:
    def test_rejects_out_of_range_aspect(self):
        with pytest.raises(ValueError):
            asymptotics_report(0.31)
        with pytest.raises(ValueError):
            asymptotics_report(0.0)

    def test_frozen_relative_deviations(self):
        for q, (dev_t, dev_d1, dev_d2) in FROZEN_REL_DEV.items():
            rep = asymptotics_report(q)
            assert isinstance(rep, AsymptoticsReport)
            assert rep.rel_dev_theta == pytest.approx(dev_t, rel=1e-2)
            assert rep.rel_dev_delta1 == pytest.approx(dev_d1, rel=1e-2)
            assert rep.rel_dev_delta2 == pytest.approx(dev_d2, rel=1e-2)
            assert rep.rel_devs() == (
                rep.rel_dev_theta,
                rep.rel_dev_delta1,
                rep.rel_dev_delta2,
            )

    def test_two_angle_predictions_agree_at_small_aspect(self):
        # theta = 2k + O(k^3): at q = 0.1 the leading-order prediction and
        # the exact extracted angle coincide to high accuracy
        rep = asymptotics_report(0.1)
        assert rep.theta_num == pytest.approx(rep.theta_pred_2k, rel=1e-8)
        assert rep.fitted_c > 0

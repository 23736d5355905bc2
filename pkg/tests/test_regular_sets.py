"""Tests for digit-expansion Cantor sets, regularity and porosity checks."""

import json
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from fuplab.regular_sets import (
    CantorSpec,
    build_cantor,
    check_porosity,
    check_regularity,
    find_empty_subcube,
    gridset_from_json,
    gridset_to_json,
    merged_intervals,
    natural_measure,
    scale_shift,
    thicken,
)

MID_THIRD_DELTA = math.log(2.0) / math.log(3.0)


def mid_third(depth: int, dimension: int = 1):
    return build_cantor(CantorSpec(3, (0, 2), depth=depth, dimension=dimension))


# ---------------------------------------------------------------------------
# construction
# ---------------------------------------------------------------------------


class TestConstruction:
    def test_spec_validation_rejects_bad_inputs(self):
        with pytest.raises(ValueError):
            build_cantor(CantorSpec(1, (0,), depth=1))  # base too small
        with pytest.raises(ValueError):
            build_cantor(CantorSpec(3, (), depth=1))  # empty alphabet
        with pytest.raises(ValueError):
            build_cantor(CantorSpec(3, (0, 3), depth=1))  # digit out of range
        with pytest.raises(ValueError):
            build_cantor(CantorSpec(3, (0, 2), depth=-1))  # negative depth
        with pytest.raises(ValueError):
            build_cantor(CantorSpec(3, (0, 2), depth=1, dimension=3))
        with pytest.raises(ValueError):
            build_cantor(CantorSpec(3, (0, 2), depth=1, extent=(1.0, 0.0)))

    def test_depth_zero_is_the_whole_extent(self):
        g = mid_third(0)
        assert np.allclose(merged_intervals(g), [[0.0, 1.0]])

    def test_depth_one_intervals(self):
        # removing the middle third of [0,1] leaves [0,1/3] and [2/3,1]
        g = mid_third(1)
        assert np.allclose(merged_intervals(g), [[0.0, 1 / 3], [2 / 3, 1.0]])

    def test_cube_count_is_alphabet_size_to_the_depth(self):
        for k in range(6):
            assert len(mid_third(k).cubes) == 2**k
        g2 = mid_third(2, dimension=2)
        assert len(g2.cubes) == (2**2) ** 2
        assert g2.dimension == 2

    def test_membership_2d(self):
        g2 = mid_third(2, dimension=2)
        pts = np.array([[0.1, 0.1], [0.5, 0.5], [0.1, 0.5]])
        assert list(g2.contains_points(pts)) == [True, False, False]

    def test_max_cubes_guard(self):
        with pytest.raises(ValueError):
            build_cantor(CantorSpec(3, (0, 2), depth=12), max_cubes=100)

    @given(
        base=st.integers(2, 5),
        depth=st.integers(0, 3),
        data=st.data(),
    )
    def test_cube_count_property(self, base, depth, data):
        alphabet = data.draw(
            st.sets(st.integers(0, base - 1), min_size=1, max_size=base)
        )
        g = build_cantor(CantorSpec(base, tuple(alphabet), depth=depth))
        assert len(g.cubes) == len(alphabet) ** depth
        assert g.resolution == pytest.approx(base ** (-depth))


# ---------------------------------------------------------------------------
# natural measure
# ---------------------------------------------------------------------------


class TestNaturalMeasure:
    def test_total_mass_is_one(self):
        for depth, dim in [(4, 1), (2, 2)]:
            mu = natural_measure(CantorSpec(3, (0, 2), depth=depth, dimension=dim))
            assert mu.total_mass() == pytest.approx(1.0, rel=1e-12)

    def test_box_masses_split_evenly(self):
        # the self-similar measure gives each surviving child equal weight
        mu = natural_measure(CantorSpec(3, (0, 2), depth=3))
        assert mu.box_mass(np.array([0.0]), 1 / 3) == pytest.approx(0.5, rel=1e-12)
        assert mu.box_mass(np.array([0.0]), 1 / 9) == pytest.approx(0.25, rel=1e-12)
        assert mu.box_mass(np.array([1 / 3]), 1 / 3) == pytest.approx(0.0, abs=1e-12)


# ---------------------------------------------------------------------------
# regularity
# ---------------------------------------------------------------------------


class TestRegularity:
    def test_mid_third_is_regular_at_its_dimension(self):
        k = 6
        spec = CantorSpec(3, (0, 2), depth=k)
        g = build_cantor(spec)
        mu = natural_measure(spec)
        rep = check_regularity(
            g, mu, MID_THIRD_DELTA, 3.0**-k, 1.0, requested_cr=8.0
        )
        assert rep.passed
        assert max(rep.constant_upper, rep.constant_lower) <= 8.0
        assert min(rep.constant_upper, rep.constant_lower) >= 1.0 - 1e-12
        assert rep.scales_tested == (pytest.approx(3.0**-k), pytest.approx(1.0))

    def test_wrong_exponent_constant_grows_with_depth(self):
        # at exponent 0.9 the window mass ratio r^-0.9 * r^(log2/log3) blows
        # up as the scale range widens: the sweep constant between depths 3
        # and 6 must grow by at least 3^(3*(0.9 - log2/log3))
        consts = {}
        for k in (3, 6):
            spec = CantorSpec(3, (0, 2), depth=k)
            rep = check_regularity(
                build_cantor(spec), natural_measure(spec), 0.9, 3.0**-k, 1.0
            )
            consts[k] = max(rep.constant_upper, rep.constant_lower)
        growth = 3.0 ** (3 * (0.9 - MID_THIRD_DELTA))
        assert consts[6] >= consts[3] * growth * 0.999
        # any budget met at depth 3 is escalated past eventually; depth 6
        # already exceeds the depth-3 constant
        spec6 = CantorSpec(3, (0, 2), depth=6)
        rep6 = check_regularity(
            build_cantor(spec6),
            natural_measure(spec6),
            0.9,
            3.0**-6,
            1.0,
            requested_cr=consts[3],
        )
        assert not rep6.passed

    def test_scaling_preserves_constants_within_factor_two(self):
        k = 5
        spec = CantorSpec(3, (0, 2), depth=k)
        g = build_cantor(spec)
        mu = natural_measure(spec)
        base = check_regularity(g, mu, MID_THIRD_DELTA, 3.0**-k, 1.0)
        c0 = max(base.constant_upper, base.constant_lower)
        for lam in (1 / 3, 3.0):
            gs = scale_shift(g, lam, 0.25)
            mus = natural_measure(
                CantorSpec(
                    3, (0, 2), depth=k, extent=(0.25, 0.25 + lam)
                )
            )
            rep = check_regularity(
                gs, mus, MID_THIRD_DELTA, lam * 3.0**-k, lam * 1.0
            )
            c1 = max(rep.constant_upper, rep.constant_lower)
            assert c1 <= 2.0 * c0
            assert c0 <= 2.0 * c1


# ---------------------------------------------------------------------------
# porosity
# ---------------------------------------------------------------------------


class TestPorosity:
    def test_mid_third_is_porous_at_every_admissible_depth(self):
        g = mid_third(6)
        rep = check_porosity(g, 3, range(6))
        assert rep.failures == ()
        assert rep.cubes_checked > 0

    def test_full_cube_fails_at_depth_zero(self):
        g = build_cantor(CantorSpec(3, (0, 1, 2), depth=2))
        rep = check_porosity(g, 3, [0])
        assert rep.failures != ()

    def test_find_empty_subcube(self):
        g = mid_third(1)
        assert find_empty_subcube(g, np.array([0.0]), 1.0, 3) == (1,)
        full = build_cantor(CantorSpec(3, (0, 1, 2), depth=1))
        assert find_empty_subcube(full, np.array([0.0]), 1.0, 3) is None

    def test_scale_below_three_is_rejected(self):
        with pytest.raises(ValueError):
            check_porosity(mid_third(2), 2, [0])

    @given(
        base=st.integers(3, 4),
        depth=st.integers(1, 3),
        data=st.data(),
    )
    def test_missing_digit_implies_porosity(self, base, depth, data):
        alphabet = data.draw(
            st.sets(st.integers(0, base - 1), min_size=1, max_size=base - 1)
        )
        g = build_cantor(CantorSpec(base, tuple(alphabet), depth=depth))
        rep = check_porosity(g, base, range(depth))
        assert rep.failures == ()


# ---------------------------------------------------------------------------
# transforms and serialization
# ---------------------------------------------------------------------------


class TestTransforms:
    def test_scale_shift_is_exact_affine(self):
        g = mid_third(2)
        gs = scale_shift(g, 2.0, -1.0)
        assert gs.extent == ((-1.0, 1.0),)
        assert np.allclose(merged_intervals(gs), 2.0 * merged_intervals(g) - 1.0)
        assert gs.resolution == pytest.approx(2.0 / 9.0)
        # cube pattern is untouched
        assert gs.cubes == g.cubes

    def test_scale_shift_2d_vector_shift(self):
        g = mid_third(1, dimension=2)
        gs = scale_shift(g, 3.0, (1.0, -2.0))
        assert gs.extent == ((1.0, 4.0), (-2.0, 1.0))
        assert gs.cubes == g.cubes

    def test_thicken_contains_original_and_rounds_outward(self):
        g = mid_third(4)
        r = 1 / 81.0
        th = thicken(g, r)
        orig = merged_intervals(g)
        fat = merged_intervals(th)
        # every original interval lies inside some thickened one
        for lo, hi in orig:
            assert any(flo <= lo + 1e-12 and hi - 1e-12 <= fhi for flo, fhi in fat)
        # thickening is by whole cubes and at least the requested radius
        assert fat[0][0] == pytest.approx(-(math.ceil(r / g.resolution)) * g.resolution)

    def test_json_round_trip(self):
        g = mid_third(3)
        blob = gridset_to_json(g)
        json.loads(blob)  # valid JSON
        back = gridset_from_json(blob)
        assert back.dimension == g.dimension
        assert back.resolution == pytest.approx(g.resolution)
        assert back.extent == g.extent
        assert back.cubes == g.cubes

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from millstab import (
    CuttingCoefficients,
    Direction,
    DomainError,
    ImmersionWindow,
    averaged_coefficients,
    chip_thickness,
    directional_coefficients,
    engagement,
    immersion_window,
    rotation_matrix,
    tooth_angle,
)
TABLE_COEFFS = CuttingCoefficients(838.7e6, 384.6e6, 19.59e3, 21.18e3)

angles = st.floats(min_value=-50.0, max_value=50.0, allow_nan=False)


class TestImmersionWindow:
    def test_up_half_immersion(self):
        w = immersion_window(Direction.UP, 0.5, 1.0)
        assert w.start_angle == 0.0
        assert w.exit_angle == pytest.approx(math.pi / 2)

    def test_down_full_immersion(self):
        w = immersion_window(Direction.DOWN, 1.0, 1.0)
        assert w.start_angle == pytest.approx(0.0)
        assert w.exit_angle == pytest.approx(math.pi)

    def test_down_low_immersion(self):
        w = immersion_window(Direction.DOWN, 0.1, 1.0)
        assert w.start_angle == pytest.approx(math.acos(-0.8))
        assert w.exit_angle == pytest.approx(math.pi)

    def test_out_of_range_radial_depth(self):
        with pytest.raises(DomainError):
            immersion_window(Direction.UP, 1.5, 1.0)
        with pytest.raises(DomainError):
            immersion_window(Direction.DOWN, -0.1, 1.0)


class TestToothAngle:
    def test_first_tooth_is_spindle_angle(self):
        assert tooth_angle(0.0, 1, 2) == 0.0

    def test_second_of_two_teeth(self):
        assert tooth_angle(0.0, 2, 2) == pytest.approx(math.pi)

    def test_four_teeth_spacing(self):
        assert tooth_angle(math.pi / 4, 2, 4) == pytest.approx(3 * math.pi / 4)

    def test_index_out_of_range(self):
        with pytest.raises(DomainError):
            tooth_angle(0.0, 0, 2)
        with pytest.raises(DomainError):
            tooth_angle(0.0, 3, 2)


class TestEngagement:
    def test_inside_window(self):
        assert engagement(math.pi / 4, ImmersionWindow(0.0, math.pi / 2)) == 1

    def test_outside_window(self):
        assert engagement(3 * math.pi / 4, ImmersionWindow(0.0, math.pi / 2)) == 0

    def test_bounds_inclusive(self):
        w = ImmersionWindow(0.3, 1.2)
        assert engagement(0.3, w) == 1
        assert engagement(1.2, w) == 1

    @given(angle=angles, shifts=st.integers(min_value=-3, max_value=3))
    def test_idempotent_under_full_turns(self, angle, shifts):
        w = ImmersionWindow(0.4, 2.0)
        assert engagement(angle, w) == engagement(angle + shifts * 2 * math.pi, w)


class TestRotationMatrix:
    def test_zero_angle(self):
        assert np.allclose(rotation_matrix(0.0), [[-1.0, 0.0], [0.0, -1.0]])

    def test_quarter_turn(self):
        assert np.allclose(rotation_matrix(math.pi / 2), [[0.0, -1.0], [1.0, 0.0]], atol=1e-15)

    @given(angle=angles)
    @settings(max_examples=1000)
    def test_orthogonal_unit_determinant(self, angle):
        R = rotation_matrix(angle)
        assert np.max(np.abs(R @ R.T - np.eye(2))) < 1e-12
        assert abs(np.linalg.det(R) - 1.0) < 1e-12


class TestChipThickness:
    def test_feed_fully_seen_at_quarter_turn(self):
        assert chip_thickness(math.pi / 2, [2e-4, 0.0], [0, 0], [0, 0]) == pytest.approx(2e-4)

    def test_feed_invisible_at_zero_angle(self):
        assert chip_thickness(0.0, [2e-4, 0.0], [0, 0], [0, 0]) == pytest.approx(0.0, abs=1e-18)

    @given(angle=angles, vx=st.floats(-1e-4, 1e-4), vy=st.floats(-1e-4, 1e-4))
    def test_equal_vibrations_cancel(self, angle, vx, vy):
        static = chip_thickness(angle, [2e-4, 1e-5], [0, 0], [0, 0])
        moved = chip_thickness(angle, [2e-4, 1e-5], [vx, vy], [vx, vy])
        assert moved == pytest.approx(static, abs=1e-16)


class TestDirectionalCoefficients:
    def test_all_teeth_out_of_cut(self):
        w = ImmersionWindow(1.0, 1.2)
        r, s = directional_coefficients(2.0, TABLE_COEFFS, w, 2)
        assert np.all(r == 0.0)
        assert np.all(s == 0.0)

    def test_single_tooth_at_quarter_turn(self):
        # full-immersion up-milling, two teeth: only tooth 1 is in cut at
        # theta = pi/2, where sin(2 phi) = 0 and cos(2 phi) = -1
        w = immersion_window(Direction.UP, 1.0, 1.0)
        r, s = directional_coefficients(math.pi / 2, TABLE_COEFFS, w, 2)
        assert np.allclose(r, [-21.18e3, 19.59e3])
        assert np.allclose(s, [[384.6e6, 0.0], [-838.7e6, 0.0]], atol=1e-4)

    @given(angle=angles)
    def test_tooth_passing_periodicity(self, angle):
        w = immersion_window(Direction.DOWN, 0.3, 1.0)
        scale = 1e-6  # coefficients are ~1e8, compare relative
        for teeth in (2, 3):
            r1, s1 = directional_coefficients(angle, TABLE_COEFFS, w, teeth)
            r2, s2 = directional_coefficients(angle + 2 * math.pi / teeth, TABLE_COEFFS, w, teeth)
            assert np.max(np.abs(r1 - r2)) * scale < 1e-12 * 1e3
            assert np.max(np.abs(s1 - s2)) * scale < 1e-12 * 1e6


def per_tooth_force(theta, coeffs, window, teeth, ap, feed, vib, vib_delayed):
    """Brute-force assembly: rotate each tooth's local force to Cartesian."""
    from millstab.cutting_force import rotation_matrix as R

    total = np.zeros(2)
    kc = np.array([coeffs.tangential_cutting, coeffs.normal_cutting])
    ke = np.array([coeffs.tangential_edge, coeffs.normal_edge])
    for j in range(1, teeth + 1):
        phi = tooth_angle(theta, j, teeth)
        g = engagement(phi, window)
        h = chip_thickness(phi, feed, vib, vib_delayed)
        total += R(phi) @ (ap * g * (kc * h + ke))
    return total


@given(
    theta=angles,
    vib=st.tuples(st.floats(-1e-4, 1e-4), st.floats(-1e-4, 1e-4)),
    vib_d=st.tuples(st.floats(-1e-4, 1e-4), st.floats(-1e-4, 1e-4)),
    teeth=st.integers(min_value=1, max_value=5),
    ratio=st.floats(min_value=0.05, max_value=1.0),
    ap=st.floats(min_value=1e-4, max_value=5e-3),
)
@settings(max_examples=150, deadline=None)
def test_summed_coefficients_match_per_tooth_assembly(theta, vib, vib_d, teeth, ratio, ap):
    window = immersion_window(Direction.DOWN, ratio, 1.0)
    feed = np.array([2e-4, 5e-5])
    vib = np.array(vib)
    vib_d = np.array(vib_d)
    brute = per_tooth_force(theta, TABLE_COEFFS, window, teeth, ap, feed, vib, vib_d)
    r, s = directional_coefficients(theta, TABLE_COEFFS, window, teeth)
    compact = ap * (r - s @ (feed + vib - vib_d))
    scale = max(1.0, np.max(np.abs(brute)))
    assert np.max(np.abs(brute - compact)) / scale < 1e-10


class TestAveragedCoefficients:
    def test_out_of_cut_interval_is_zero(self):
        w = immersion_window(Direction.DOWN, 0.1, 1.0)  # cut spans [2.498, pi]
        coeffs = averaged_coefficients(TABLE_COEFFS, w, 1, steps=16)
        # first intervals of the revolution are pure air cutting
        assert np.all(coeffs.edge_terms[0] == 0.0)
        assert np.all(coeffs.directional_terms[0] == 0.0)

    def test_constant_integrand_reproduced(self):
        # four teeth at full immersion: the engaged pairs sit a quarter turn
        # apart, so their double-angle sums cancel and S is constant
        w = ImmersionWindow(0.0, math.pi)
        coeffs = averaged_coefficients(TABLE_COEFFS, w, 4, steps=8)
        kct, kcn = TABLE_COEFFS.tangential_cutting, TABLE_COEFFS.normal_cutting
        expected = np.array([[kcn, kct], [-kct, kcn]])
        for k in range(8):
            assert np.allclose(coeffs.directional_terms[k], expected, rtol=1e-12)

    @pytest.mark.parametrize("ratio,direction", [(0.5, Direction.DOWN), (0.1, Direction.DOWN), (1.0, Direction.UP)])
    def test_against_refined_quadrature(self, ratio, direction):
        w = immersion_window(direction, ratio, 1.0)
        steps = 100
        coarse = averaged_coefficients(TABLE_COEFFS, w, 2, steps=steps, panels_per_interval=32)
        fine = averaged_coefficients(TABLE_COEFFS, w, 2, steps=steps, panels_per_interval=3200)
        scale_r = np.max(np.abs(fine.edge_terms))
        scale_s = np.max(np.abs(fine.directional_terms))
        assert np.max(np.abs(coarse.edge_terms - fine.edge_terms)) / scale_r < 1e-6
        assert np.max(np.abs(coarse.directional_terms - fine.directional_terms)) / scale_s < 1e-6

    def test_large_steps_converge_to_pointwise_values(self):
        w = immersion_window(Direction.DOWN, 0.5, 1.0)
        steps = 1000
        coeffs = averaged_coefficients(TABLE_COEFFS, w, 2, steps=steps)
        dtheta = coeffs.step_angle
        period = math.pi  # the sums repeat with the tooth-passing angle
        scale_s = np.max(np.abs(coeffs.directional_terms))
        switches = (0.0, math.pi / 2)  # entry/exit angles modulo the period

        def near_switch(theta):
            for s in switches:
                d = (theta - s) % period
                if min(d, period - d) < dtheta:
                    return True
            return False

        checked = 0
        for k in range(0, steps, 37):
            theta = k * dtheta
            if near_switch(theta):
                continue
            r_pt, s_pt = directional_coefficients(theta, TABLE_COEFFS, w, 2)
            assert np.max(np.abs(coeffs.directional_terms[k] - s_pt)) / scale_s < 1e-4
            checked += 1
        assert checked > 10

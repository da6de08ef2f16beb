import math

import numpy as np
import pytest

from qexlab import geometry as geo
from qexlab import oracle
from qexlab.rng import Stream


class TestRadii:
    def test_admissible_example(self):
        rd = geo.validate_radii([0.1, 0.2], 0.05, 3)
        assert rd.admissible
        # 0.1 >= sqrt(0.05) * 0.2 ~ 0.0447
        assert rd.r[0] >= math.sqrt(rd.rho) * rd.r[-1]

    def test_nondegeneracy_rejection(self):
        # 0.01 < sqrt(0.04) * 0.5; this tuple also breaks rho <= r_1, and
        # both violations are reported in check order
        rd = geo.validate_radii([0.01, 0.5], 0.04, 3)
        assert not rd.admissible
        assert geo.COND_NONDEG in rd.violations
        rd2 = geo.validate_radii([0.05, 0.5], 0.04, 3)
        assert rd2.violations == (geo.COND_NONDEG,)

    def test_ball_always_admissible(self):
        for d in (2, 3, 4):
            for rho in (0.9, 0.5, 0.1, 2.0 ** -10):
                assert geo.ball_radii(rho, d).admissible

    def test_knapp_always_admissible(self):
        for d in (2, 3, 4):
            for rho in (0.9, 0.5, 0.1, 2.0 ** -10):
                assert geo.knapp_radii(rho, d).admissible

    def test_rejects_bad_entries(self):
        with pytest.raises(geo.RadiiValidationError):
            geo.validate_radii([0.1, float("nan")], 0.05, 3)
        with pytest.raises(geo.RadiiValidationError):
            geo.validate_radii([0.1, -0.2], 0.05, 3)
        with pytest.raises(geo.RadiiValidationError):
            geo.validate_radii([0.1], 0.05, 3)  # wrong length
        with pytest.raises(geo.RadiiValidationError):
            geo.validate_radii([0.5], 0.25, 1)

    def test_strict_raises_on_violation(self):
        with pytest.raises(geo.RadiiValidationError):
            geo.strict_radii([0.01, 0.5], 0.04, 3)

    def test_relaxed_records_violation(self):
        rd = geo.relaxed_radii([0.01, 0.5], 0.04, 3)
        assert not rd.admissible and geo.COND_NONDEG in rd.violations

    def test_monotonicity_checked(self):
        rd = geo.validate_radii([0.3, 0.2], 0.05, 3)
        assert geo.COND_MONOTONE in rd.violations

    def test_split_index(self):
        rd = geo.strict_radii([2.0 ** -5, 2.0 ** -3], 2.0 ** -8, 3)
        assert rd.split_index() == 1
        assert geo.ball_radii(0.01, 3).split_index() == 2
        assert geo.strict_radii([0.3, 0.4], 0.01, 3).split_index() == 0


class TestSpherePair:
    def test_pole_points(self):
        rd = geo.strict_radii([0.1, 0.2], 0.05, 3)
        E, F = geo.make_sphere_pair(rd)
        assert E.contains_point([0.0, 0.0, 0.0])
        assert F.contains_point([0.0, 0.0, -1.0])

    def test_plane_membership_example(self):
        rd = geo.strict_radii([0.25], 1.0 / 16.0, 2)
        E, _ = geo.make_sphere_pair(rd)
        # dist((0.2, 0.98), S^1) ~ 2e-4 < 1/16
        assert E.contains_point([0.2, -0.02])
        assert not E.contains_point([0.26, -0.02])
        assert not E.contains_point([0.2, -0.2])

    def test_members_inside_bounding_box(self):
        rd = geo.strict_radii([0.1, 0.25], 2.0 ** -5, 3)
        for region in geo.make_sphere_pair(rd):
            lo, hi = region.bounding_box()
            pts = geo.sample_members(region, 10 ** 4, Stream(5, region.kind))
            assert np.all(pts >= lo) and np.all(pts <= hi)

    def test_framed_members_inside_box(self):
        rd = geo.strict_radii([0.25], 2.0 ** -5, 2)
        frame = geo.random_frame(2, Stream(17, "f"), 0)
        E, F = geo.make_sphere_pair(rd, frame)
        for region in (E, F):
            lo, hi = region.bounding_box()
            pts = geo.sample_members(region, 10 ** 4, Stream(5, region.kind))
            assert np.all(pts >= lo) and np.all(pts <= hi)

    def test_knapp_box_inclusion(self):
        # points of the slab box, shrunk by 1/4, land inside the cap
        for d in (2, 3):
            rho = 2.0 ** -6
            E, _ = geo.special_pair("knapp", rho, d)
            u = Stream(3, "box").uniforms(0, 2000, d)
            pts = np.empty((2000, d))
            pts[:, :-1] = (2.0 * u[:, :-1] - 1.0) * math.sqrt(rho) / 4.0
            pts[:, -1] = (2.0 * u[:, -1] - 1.0) * rho / 4.0
            assert np.all(E.contains(pts))

    def test_special_pair_validation(self):
        with pytest.raises(geo.GeometryError):
            geo.special_pair("ball", 1.5, 2)
        with pytest.raises(geo.GeometryError):
            geo.special_pair("cube", 0.1, 2)


class TestParabPair:
    def test_center_membership(self):
        rd = geo.relaxed_radii([1.0, 1.0], 0.1, 3)
        E, F = geo.make_parab_pair(rd)
        assert E.contains_point([0.0, 0.0, 0.0])
        assert F.contains_point([0.0, 0.0, 0.0])

    def test_vertical_inequality_example(self):
        rd = geo.relaxed_radii([1.0, 1.0], 0.1, 3)
        E, _ = geo.make_parab_pair(rd)
        # |x_3 - |x'|^2| = 0.05 < 0.1
        assert E.contains_point([0.5, 0.5, 0.45])
        assert not E.contains_point([0.5, 0.5, 0.25])

    def test_degenerate_radii_fine_for_paraboloid(self):
        rho = 2.0 ** -6
        rd = geo.relaxed_radii([rho ** 0.9, rho ** 0.1], rho, 3)
        assert not rd.admissible  # sphere admissibility fails
        E, F = geo.make_parab_pair(rd)  # paraboloid accepts any radii
        assert E.contains_point([0.0, 0.0, 0.0])
        assert F.contains_point([0.0, 0.0, 0.0])

    def test_anchor_must_sit_on_surface(self):
        rd = geo.relaxed_radii([0.5], 0.1, 2)
        with pytest.raises(geo.GeometryError):
            geo.make_parab_pair(rd, x0=np.array([0.3, 0.2]), y0=np.zeros(2))
        # (0.3, 0.09) sits on the surface up to the 1e-9 tolerance
        ok = geo.make_parab_pair(rd, x0=np.array([0.3, 0.09 + 1e-10]),
                                 y0=np.zeros(2))
        assert ok[0].contains_point([0.3, 0.09])

    def test_anchored_membership(self):
        rd = geo.relaxed_radii([0.5], 0.1, 2)
        x0 = np.array([0.4, 0.16])
        E, F = geo.make_parab_pair(rd, x0=x0, y0=np.zeros(2))
        assert E.contains_point(x0)
        assert F.contains_point([0.0, 0.0])

    def test_members_inside_bounding_box(self):
        rd = geo.relaxed_radii([0.3, 0.7], 0.05, 3)
        E, F = geo.make_parab_pair(rd, x0=np.array([0.5, 0.0, 0.25]))
        for region in (E, F):
            lo, hi = region.bounding_box()
            pts = geo.sample_members(region, 10 ** 4, Stream(5, region.kind))
            assert np.all(pts >= lo) and np.all(pts <= hi)


class TestMeasure:
    def test_unit_box_exact(self):
        for d in (2, 3):
            box = geo.Box(np.zeros(d), np.ones(d))
            est = geo.measure(box, 50000, 3)
            assert est.value == 1.0
            assert est.std_error == 0.0

    def test_plane_cap_against_quadrature(self):
        rd = geo.strict_radii([0.25], 1.0 / 16.0, 2)
        E, F = geo.make_sphere_pair(rd)
        est = geo.measure(E, 4 * 10 ** 5, 7)
        ref = oracle.measure_e_quad(0.25, 1.0 / 16.0)
        assert abs(est.value - ref) <= 4.0 * est.std_error
        # within factor [1/4, 4] of the 2r * 2rho box law
        law = (2 * 0.25) * (2.0 / 16.0)
        assert law / 4.0 <= est.value <= 4.0 * law
        est_f = geo.measure(F, 4 * 10 ** 5, 8)
        ref_f = oracle.measure_f_quad(0.25, 1.0 / 16.0)
        assert abs(est_f.value - ref_f) <= 4.0 * est_f.std_error

    def test_measure_law_window(self):
        # measured volume within [1/8, 8] of 2^d rho prod r_i
        for d, r in ((2, [2.0 ** -3]), (3, [2.0 ** -4, 2.0 ** -2])):
            rho = 2.0 ** -5
            rd = geo.strict_radii(r, rho, d)
            E, F = geo.make_sphere_pair(rd)
            me = geo.measure(E, 3 * 10 ** 5, 11).value
            law_e = 2.0 ** d * rho * float(np.prod(r))
            assert law_e / 8.0 <= me <= 8.0 * law_e
            mf = geo.measure(F, 3 * 10 ** 5, 12).value
            law_f = 2.0 ** d * rho * float(np.prod([rho / ri for ri in r]))
            assert law_f / 8.0 <= mf <= 8.0 * law_f

    def test_rigid_motion_invariance(self):
        rd = geo.strict_radii([0.25], 2.0 ** -5, 2)
        E, _ = geo.make_sphere_pair(rd)
        ref = geo.measure(E, 2 * 10 ** 5, 5)
        for i in range(20):
            frame = geo.random_frame(2, Stream(99, "inv"), i)
            est = geo.measure(geo.FramedRegion(E, frame), 2 * 10 ** 5, 5 + i)
            tol = 3.0 * math.hypot(ref.std_error, est.std_error)
            assert abs(est.value - ref.value) <= tol

    def test_worker_bit_identity(self):
        rd = geo.strict_radii([0.1, 0.2], 0.05, 3)
        E, _ = geo.make_sphere_pair(rd)
        a = geo.measure(E, 3 * 10 ** 5, 42, workers=1)
        b = geo.measure(E, 3 * 10 ** 5, 42, workers=4)
        assert (a.value, a.std_error) == (b.value, b.std_error)

    def test_empty_intersection_zero(self):
        a = geo.Box(np.zeros(2), np.ones(2))
        b = geo.Box(np.array([2.0, 2.0]), np.array([3.0, 3.0]))
        est = geo.measure(geo.IntersectRegion(a, b), 1000, 1)
        assert est.value == 0.0 and est.std_error == 0.0

    def test_rejects_bad_n(self):
        with pytest.raises(geo.GeometryError):
            geo.measure(geo.Box(np.zeros(2), np.ones(2)), 0, 1)


class TestFrame:
    def test_orthogonality_guard(self):
        with pytest.raises(geo.GeometryError):
            geo.Frame(np.array([[1.0, 0.1], [0.0, 1.0]]), np.zeros(2))

    def test_compose_and_inverse(self):
        s = Stream(21, "fr")
        f1 = geo.random_frame(3, s, 0)
        f2 = geo.random_frame(3, s, 1)
        x = np.array([[0.1, -0.2, 0.3]])
        combined = f1.compose(f2)
        assert np.allclose(combined.apply(x), f1.apply(f2.apply(x)))
        assert np.allclose(f1.inverse().apply(f1.apply(x)), x)

    def test_compose_reorthonormalizes(self):
        frame = geo.Frame(np.eye(2), np.zeros(2))
        for i in range(200):
            frame = frame.compose(geo.random_frame(2, Stream(1, "d"), i))
        drift = np.max(np.abs(frame.rotation.T @ frame.rotation - np.eye(2)))
        assert drift <= 1e-10

    def test_rotation_to_pole(self):
        v = np.array([0.3, -0.4, math.sqrt(1 - 0.25)])
        R = geo.rotation_to_pole(v)
        assert np.allclose(R @ v, [0, 0, 1.0], atol=1e-12)
        assert np.allclose(R.T @ R, np.eye(3), atol=1e-12)
        # mirror image: the pole maps to the reflected point
        assert np.allclose(R @ np.array([0, 0, 1.0]),
                           np.array([-0.3, 0.4, v[2]]), atol=1e-12)


class TestSerialization:
    def test_simple_roundtrip(self):
        rd = geo.strict_radii([0.25], 2.0 ** -5, 2)
        E, F = geo.make_sphere_pair(rd)
        for region in (E, F):
            text = geo.region_to_record(region)
            back = geo.region_from_record(text)
            assert geo.region_to_record(back) == text

    def test_framed_roundtrip_membership(self):
        rd = geo.strict_radii([0.1, 0.2], 0.05, 3)
        frame = geo.random_frame(3, Stream(31, "ser"), 0)
        E, _ = geo.make_sphere_pair(rd, frame)
        back = geo.region_from_record(geo.region_to_record(E))
        pts = geo.sample_box(*E.bounding_box(), Stream(4, "p"), 0, 5000)
        assert np.array_equal(E.contains(pts), back.contains(pts))

    def test_17_digit_fidelity(self):
        lo = np.array([1.0 / 3.0, -2.0 / 7.0])
        hi = np.array([math.pi / 3.0, math.e])
        box = geo.Box(lo, hi)
        back = geo.region_from_record(geo.region_to_record(box))
        assert np.array_equal(back.lo, lo) and np.array_equal(back.hi, hi)

    def test_parab_and_intersect_roundtrip(self):
        rd = geo.relaxed_radii([0.3, 0.7], 0.05, 3)
        E, F = geo.make_parab_pair(rd, x0=np.array([0.5, 0.0, 0.25]))
        region = geo.IntersectRegion(E, geo.Box(np.zeros(3), np.ones(3)))
        back = geo.region_from_record(geo.region_to_record(region))
        assert geo.region_to_record(back) == geo.region_to_record(region)

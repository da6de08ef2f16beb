import math

import numpy as np
import pytest

from qexlab import geometry as geo
from qexlab import oracle
from qexlab import surface_ops as sfc
from qexlab.rng import Stream


class TestSphereSample:
    def test_unit_norm(self):
        for d in (2, 3, 5):
            w = sfc.sphere_sample(d, Stream(1, "s"), 0, 1000)
            assert np.max(np.abs(np.linalg.norm(w, axis=1) - 1.0)) <= 1e-14

    def test_mean_cancels_in_plane(self):
        w = sfc.sphere_sample(2, Stream(2, "s"), 0, 10 ** 5)
        assert np.linalg.norm(w.mean(axis=0)) <= 0.02

    def test_archimedes_cap_law(self):
        # fraction with w_3 > 1 - h equals h / 2
        w = sfc.sphere_sample(3, Stream(3, "s"), 0, 2 * 10 ** 5)
        for h in (0.1, 0.4):
            frac = float(np.mean(w[:, 2] > 1.0 - h))
            tol = 3.0 * math.sqrt(h / 2 * (1 - h / 2) / w.shape[0])
            assert abs(frac - h / 2) <= tol

    def test_seed_reproducibility(self):
        a = sfc.sphere_sample(3, Stream(9, "s"), 0, 64)
        b = sfc.sphere_sample(3, Stream(9, "s"), 0, 64)
        assert np.array_equal(a, b)

    def test_area_closed_forms(self):
        assert sfc.sphere_area(2) == pytest.approx(2 * math.pi)
        assert sfc.sphere_area(3) == pytest.approx(4 * math.pi)
        assert sfc.sphere_area(4) == pytest.approx(2 * math.pi ** 2)


class TestCapSampling:
    def test_cap_area_matches_arc(self):
        assert sfc.cap_area(2, 0.1) == pytest.approx(oracle.cap_arc_length(0.1))
        psi = 2 * math.asin(0.15)
        assert sfc.cap_area(3, 0.3) == pytest.approx(2 * math.pi * (1 - math.cos(psi)))
        assert sfc.cap_area(3, 2.5) == sfc.sphere_area(3)

    def test_samples_stay_in_cap(self):
        for d in (2, 3):
            center = np.zeros(d)
            center[0] = 1.0
            w = sfc.cap_sample(d, center, 0.3, Stream(4, "c"), 0, 5000)
            assert np.max(np.linalg.norm(w - center, axis=1)) <= 0.3 + 1e-12
            assert np.max(np.abs(np.linalg.norm(w, axis=1) - 1.0)) <= 1e-12

    def test_per_sample_centers(self):
        g = Stream(5, "ctr").normals(0, 500, 3)
        centers = g / np.linalg.norm(g, axis=1, keepdims=True)
        w = sfc.cap_sample_centers(3, centers, 0.2, Stream(6, "w"), 0, 500)
        assert np.max(np.linalg.norm(w - centers, axis=1)) <= 0.2 + 1e-12

    def test_default_aperture(self):
        rd = geo.knapp_radii(0.01, 3)
        assert sfc.default_cap_aperture(rd) == pytest.approx(0.4)
        assert sfc.default_cap_aperture(geo.ball_radii(0.3, 2)) == 2.0


class TestTIndicator:
    def test_empty_fiber(self):
        ball = geo.Box(np.array([-0.1, -0.1]), np.array([0.1, 0.1]))
        est = sfc.t_indicator_at(np.zeros(2), ball, mode="mc", n=4096, seed=1)
        assert est.value == 0.0

    def test_cap_arclength_value(self):
        # fiber of the origin through a small ball at -e_2: a circular cap
        ball = geo.Box(np.array([-0.05, -1.05]), np.array([0.05, -0.95]))
        est = sfc.t_indicator_at(np.zeros(2), ball, mode="mc", n=1 << 18,
                                 seed=2)
        # the fiber is the arc |w_1| <= 0.05 at the north pole, of length
        # exactly 2 arcsin(0.05) (the vertical box constraint is inactive)
        exact = 2.0 * math.asin(0.05)
        assert abs(est.value - exact) <= 4.0 * est.std_error

    def test_graph_matches_mc(self):
        E, _ = geo.special_pair("knapp", 2.0 ** -5, 2)
        x = np.array([0.0, 1.0])
        mc = sfc.t_indicator_at(x, E, mode="mc", n=1 << 17, seed=3, cap="auto")
        gq = sfc.t_indicator_at(x, E, mode="graph", step=1e-3)
        assert abs(mc.value - gq.value) <= 3.0 * mc.std_error
        assert gq.std_error == 0.0 and gq.method == "graph_quadrature"

    def test_graph_rejects_bad_step(self):
        E, _ = geo.special_pair("ball", 0.1, 2)
        with pytest.raises(sfc.EstimatorError):
            sfc.t_indicator_at(np.zeros(2), E, mode="graph", step=0.0)

    def test_unknown_mode(self):
        E, _ = geo.special_pair("ball", 0.1, 2)
        with pytest.raises(sfc.EstimatorError):
            sfc.t_indicator_at(np.zeros(2), E, mode="exact")


class TestBilinearForm:
    def test_far_separation_is_zero(self):
        a = geo.Box(np.zeros(2), 0.1 * np.ones(2))
        b = geo.Box(np.array([5.0, 5.0]), np.array([5.1, 5.1]))
        est = sfc.bilinear_form(a, b, 10 ** 4, 1, cap=None)
        assert est.value == 0.0

    def test_same_small_ball_is_zero(self):
        ball = geo.Box(-0.1 * np.ones(2), 0.1 * np.ones(2))
        est = sfc.bilinear_form(ball, ball, 10 ** 4, 1, cap=None)
        assert est.value == 0.0

    def test_matches_quadrature_oracle(self):
        rd = geo.strict_radii([0.25], 1.0 / 16.0, 2)
        E, F = geo.make_sphere_pair(rd)
        ref = oracle.t_form_quad(0.25, 1.0 / 16.0)
        for cap in (None, "auto"):
            est = sfc.bilinear_form(E, F, 4 * 10 ** 5, 11, cap=cap)
            assert abs(est.value - ref) <= 3.0 * est.std_error

    def test_adjoint_agreement(self):
        rd = geo.strict_radii([0.25], 2.0 ** -5, 2)
        E, F = geo.make_sphere_pair(rd)
        a = sfc.bilinear_form(E, F, 3 * 10 ** 5, 5, side="f")
        b = sfc.bilinear_form(E, F, 3 * 10 ** 5, 6, side="e")
        assert abs(a.value - b.value) <= 3.0 * math.hypot(a.std_error, b.std_error)

    def test_unbiased_over_seeds(self):
        rd = geo.strict_radii([0.25], 2.0 ** -4, 2)
        E, F = geo.make_sphere_pair(rd)
        ref = oracle.t_form_quad(0.25, 2.0 ** -4)
        n = 1 << 12
        vals, ses = [], []
        for seed in range(200):
            est = sfc.bilinear_form(E, F, n, seed)
            vals.append(est.value)
            ses.append(est.std_error)
        pooled = math.sqrt(np.mean(np.square(ses)) / len(vals))
        assert abs(np.mean(vals) - ref) <= 3.0 * pooled

    def test_worker_bit_identity(self):
        rd = geo.strict_radii([0.25], 2.0 ** -5, 2)
        E, F = geo.make_sphere_pair(rd)
        a = sfc.bilinear_form(E, F, 2 * 10 ** 5, 7, workers=1)
        b = sfc.bilinear_form(E, F, 2 * 10 ** 5, 7, workers=3)
        assert (a.value, a.std_error) == (b.value, b.std_error)

    def test_rejects_bad_args(self):
        box = geo.Box(np.zeros(2), np.ones(2))
        with pytest.raises(sfc.EstimatorError):
            sfc.bilinear_form(box, box, 0, 1)
        with pytest.raises(sfc.EstimatorError):
            sfc.bilinear_form(box, box, 10, 1, side="x")


class TestQexReport:
    def test_exponents(self):
        for d, expo in ((2, 2.0 / 3.0), (3, 3.0 / 4.0)):
            E, F = geo.special_pair("knapp", 2.0 ** -4, d)
            rep = sfc.qex_report(E, F, 2 * 10 ** 5, 9)
            implied = rep.t_value.value / (
                rep.meas_e.value ** expo * rep.meas_f.value ** expo)
            assert rep.ratio == pytest.approx(implied, rel=1e-12)

    def test_alpha_beta_consistency(self):
        E, F = geo.special_pair("ball", 2.0 ** -4, 2)
        rep = sfc.qex_report(E, F, 10 ** 5, 10)
        assert rep.alpha * rep.meas_e.value == pytest.approx(
            rep.t_value.value, rel=1e-12)
        assert rep.beta * rep.meas_f.value == pytest.approx(
            rep.t_value.value, rel=1e-12)

    def test_frame_invariance(self):
        rd = geo.strict_radii([0.25], 2.0 ** -5, 2)
        E0, F0 = geo.make_sphere_pair(rd)
        ref = sfc.qex_report(E0, F0, 2 * 10 ** 5, 11)
        frame = geo.random_frame(2, Stream(12, "fi"), 0)
        E, F = geo.make_sphere_pair(rd, frame)
        rep = sfc.qex_report(E, F, 2 * 10 ** 5, 13)
        # the ratio is rigid-motion invariant up to estimator noise
        assert abs(rep.ratio - ref.ratio) / ref.ratio <= 0.1

    def test_degenerate_flag(self):
        a = geo.Box(np.zeros(2), 0.1 * np.ones(2))
        b = geo.Box(np.array([5.0, 5.0]), np.array([5.1, 5.1]))
        rep = sfc.qex_report(a, b, 10 ** 4, 1)
        assert rep.degenerate and math.isnan(rep.ratio)

    def test_parab_dispatch(self):
        rd = geo.relaxed_radii([0.2, 0.2], 0.02, 3)
        EP, FP = geo.make_parab_pair(rd)
        rep = sfc.qex_report(EP, FP, 10 ** 5, 3)
        assert rep.t_value.method == "mc_parab"
        assert rep.ratio > 0

    def test_ball_family_ratio_flat(self):
        vals = []
        for m in (3, 5, 7):
            E, F = geo.special_pair("ball", 2.0 ** -m, 2)
            vals.append(sfc.qex_report(E, F, 3 * 10 ** 5, 21).ratio)
        assert max(vals) / min(vals) <= 2.0


class TestRhoDLowerCheck:
    def test_ball_and_knapp_pass(self):
        for d, c0 in ((2, 3.5), (3, 13.0)):
            for kind in ("ball", "knapp"):
                rd = (geo.ball_radii if kind == "ball" else geo.knapp_radii)(
                    2.0 ** -5, d)
                est, rho_d, ok = sfc.rho_d_lower_check(rd, 3 * 10 ** 5, 31, c0)
                assert ok, f"{kind} d={d}: {est.value} vs {c0 * rho_d}"

    def test_degenerate_decays(self):
        # T / rho^d of the degenerate family falls with rho while the
        # admissible one stays level
        vals = []
        for m in (4, 7):
            rho = 2.0 ** -m
            rd = geo.relaxed_radii([rho ** 0.9, rho ** 0.1], rho, 3)
            est, rho_d, _ = sfc.rho_d_lower_check(rd, 5 * 10 ** 5, 33, 0.0)
            vals.append(est.value / rho_d)
        assert vals[1] < vals[0]


class TestParabForm:
    def test_exact_t_box_support(self):
        rd = geo.relaxed_radii([0.25], 0.02, 2)
        EP, FP = geo.make_parab_pair(rd)
        est = sfc.bilinear_form_parab(EP, FP, 2 * 10 ** 5, 3)
        assert est.value > 0
        # anchored pair: support box follows the anchors
        x0 = np.array([0.5, 0.25])
        EP2, FP2 = geo.make_parab_pair(rd, x0=x0)
        est2 = sfc.bilinear_form_parab(EP2, FP2, 2 * 10 ** 5, 3)
        assert abs(est2.value - est.value) <= 3 * math.hypot(
            est.std_error, est2.std_error)

    def test_type_check(self):
        box = geo.Box(np.zeros(2), np.ones(2))
        with pytest.raises(sfc.EstimatorError):
            sfc.bilinear_form_parab(box, box, 10, 1)

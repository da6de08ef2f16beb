import math

import numpy as np
import pytest

from qexlab import decomposition as dec
from qexlab import geometry as geo
from qexlab.constants import Constants

CONSTS = Constants()
RD2 = geo.strict_radii([0.25], 2.0 ** -6, 2)


class TestSelectLambda:
    def test_own_measures_give_half(self):
        _, me, mf = dec.select_lambda(1.0, 1.0, RD2, 10 ** 5, 3)
        lam, _, _ = dec.select_lambda(me, mf, RD2, 10 ** 5, 3)
        assert lam == 0.5

    def test_e_constraint_binds(self):
        _, me, mf = dec.select_lambda(1.0, 1.0, RD2, 10 ** 5, 3)
        lam, _, _ = dec.select_lambda(me / 2 ** RD2.d, mf, RD2, 10 ** 5, 3)
        assert lam == 0.5
        lam2, _, _ = dec.select_lambda(me / 2 ** (2 * RD2.d), mf, RD2,
                                       10 ** 5, 3)
        assert lam2 == 0.25

    def test_mixed_binding_constraint(self):
        _, me, mf = dec.select_lambda(1.0, 1.0, RD2, 10 ** 5, 3)
        # F constraint is linear in lambda, so it binds at lambda = 1/8
        lam, _, _ = dec.select_lambda(me, mf / 5.0, RD2, 10 ** 5, 3)
        assert lam == 0.125

    def test_tiny_targets_error(self):
        with pytest.raises(dec.DecompositionError):
            dec.select_lambda(1e-200, 1e-200, RD2, 10 ** 4, 3, max_m=10)

    def test_positive_targets_required(self):
        with pytest.raises(dec.DecompositionError):
            dec.select_lambda(0.0, 1.0, RD2, 10 ** 4, 3)


class TestPartition:
    def test_dyadic_guard(self):
        with pytest.raises(dec.DecompositionError):
            dec.partition(RD2, 0.3)

    def test_piece_count_bound(self):
        for lam in (0.5, 0.25):
            pieces = dec.partition(RD2, lam)
            bound = (2 / lam + 1) * math.ceil(2 / lam) ** (RD2.d - 1)
            assert len(pieces) <= bound
        rd3 = geo.strict_radii([2.0 ** -4, 2.0 ** -3], 2.0 ** -7, 3)
        pieces3 = dec.partition(rd3, 0.5)
        bound3 = (2 / 0.5 + 1) * math.ceil(2 / 0.5) ** 2
        assert len(pieces3) <= bound3

    def test_central_piece_contains_origin(self):
        pieces = dec.partition(RD2, 0.25)
        central = [p for p in pieces if p.i == 0]
        hits = 0
        for piece in central:
            e_piece, _ = dec.piece_regions(RD2, 0.25, piece)
            if e_piece.contains_point(np.zeros(2)):
                hits += 1
        assert hits >= 1

    def test_coverage_full(self):
        for lam in (0.5, 0.25):
            cov, _ = dec.coverage_check(RD2, lam, 10 ** 4, 11)
            assert cov == 1.0

    def test_coverage_d3(self):
        rd3 = geo.strict_radii([2.0 ** -4, 2.0 ** -3], 2.0 ** -7, 3)
        cov, _ = dec.coverage_check(rd3, 0.5, 10 ** 4, 13)
        assert cov == 1.0

    def test_pieces_stay_near_cap(self):
        worst = dec.piece_containment_check(
            RD2, 0.25, 1000, 17, thickness_c=4.0,
            horizontal_slack=CONSTS.piece_horizontal_slack)
        assert worst == 1.0

    def test_frames_are_rigid(self):
        for piece in dec.partition(RD2, 0.5):
            R = piece.frame.rotation
            assert np.max(np.abs(R.T @ R - np.eye(2))) <= 1e-12


class TestCompatibility:
    def test_identity_at_lambda_one_definition(self):
        # c_big large enough keeps every incidence: estimates coincide
        res = dec.compatibility_check(RD2, 0.25, CONSTS.c_big, 2 * 10 ** 5, 7)
        assert res.passed
        assert res.t_full.value == pytest.approx(res.t_small.value, rel=1e-12)

    def test_negative_control_fails(self):
        res = dec.compatibility_check(RD2, 0.25, 1.0, 4 * 10 ** 5, 7)
        assert not res.passed
        assert res.t_small.value < res.t_full.value

    def test_d3(self):
        rd3 = geo.strict_radii([2.0 ** -4, 2.0 ** -3], 2.0 ** -7, 3)
        res = dec.compatibility_check(rd3, 0.25, CONSTS.c_big, 4 * 10 ** 5, 9)
        assert res.passed

    def test_lambda_one_exact_identity(self):
        # at lambda = 1 the compat cut keeps all of F, so the two
        # estimates coincide by definition
        res = dec.compatibility_check(RD2, 1.0, CONSTS.c_big, 10 ** 5, 11)
        assert res.t_full.value == res.t_small.value


class TestDelta2:
    def test_bounded_across_lambda(self):
        for lam in (1.0, 0.5, 0.25, 0.125):
            res = dec.delta2_bound_check(RD2, lam, 10 ** 4, 13)
            assert res.max_ratio <= CONSTS.delta2_max_ratio
            assert res.n_solved > 0

    def test_d3_bounded(self):
        rd3 = geo.strict_radii([0.25, 0.25], 2.0 ** -6, 3)
        res = dec.delta2_bound_check(rd3, 0.25, 10 ** 4, 13)
        assert res.max_ratio <= CONSTS.delta2_max_ratio

    def test_regime_guard(self):
        thin = geo.strict_radii([2.0 ** -4, 2.0 ** -3], 2.0 ** -7, 3)
        with pytest.raises(dec.DecompositionError):
            dec.delta2_bound_check(thin, 0.5, 100, 1, width_c=16.0)

    def test_skipped_samples_counted(self):
        res = dec.delta2_bound_check(RD2, 0.5, 5000, 19)
        assert res.n_solved + res.n_skipped == 5000


class TestPigeonhole:
    def test_basic_pair_contract(self):
        E, F = geo.make_sphere_pair(RD2)
        rep = dec.pigeonhole_best(E, F, RD2, 0.5, CONSTS.c_big, 10 ** 5, 21)
        assert rep.passed
        share = rep.total.value / len(rep.pieces)
        assert rep.best.t >= share - 3.0 * math.hypot(
            rep.best.se, rep.total.std_error / len(rep.pieces))
        # the checkable subadditivity direction
        assert rep.sum_pieces >= rep.total.value - 3.0 * rep.total.std_error

    def test_single_piece_is_total(self):
        # lambda = 1/2 with a one-piece partition is not constructible, so
        # emulate: the best of a one-element list is the total of itself
        E, F = geo.make_sphere_pair(RD2)
        rep = dec.pigeonhole_best(E, F, RD2, 0.5, CONSTS.c_big, 4 * 10 ** 4, 23)
        best_again = max(rep.pieces, key=lambda p: p.t)
        assert best_again == rep.best

    def test_selected_piece_measures_bounded(self):
        # the winning piece is no bigger than the sets it came from
        E, F = geo.make_sphere_pair(RD2)
        rep = dec.pigeonhole_best(E, F, RD2, 0.5, CONSTS.c_big, 4 * 10 ** 4, 29)
        piece = next(p for p in dec.partition(RD2, 0.5)
                     if (p.i, p.j) == (rep.best.i, rep.best.j))
        e_piece, f_piece = dec.piece_regions(RD2, 0.5, piece)
        me = geo.measure(geo.IntersectRegion(E, e_piece), 10 ** 5, 31)
        me_full = geo.measure(E, 10 ** 5, 32)
        assert me.value <= me_full.value + 3.0 * math.hypot(
            me.std_error, me_full.std_error)

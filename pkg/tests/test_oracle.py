import math

import pytest

from qexlab import oracle


def test_measure_quadrature_matches_thin_cap_law():
    # thin caps: area ~ 2r * 2rho with the curvature correction staying small
    r, rho = 0.25, 1.0 / 16.0
    area = oracle.measure_e_quad(r, rho)
    law = (2 * r) * (2 * rho)
    assert law / 4 <= area <= 4 * law


def test_measure_self_convergence():
    a = oracle.measure_e_quad(0.25, 2.0 ** -6, n=1 << 12)
    b = oracle.measure_e_quad(0.25, 2.0 ** -6, n=1 << 16)
    assert abs(a - b) / b <= 1e-4
    af = oracle.measure_f_quad(0.25, 2.0 ** -6, n=1 << 12)
    bf = oracle.measure_f_quad(0.25, 2.0 ** -6, n=1 << 16)
    assert abs(af - bf) / bf <= 1e-4


def test_t_form_self_convergence():
    coarse = oracle.t_form_quad(0.25, 1.0 / 16.0, n_angle=1 << 10,
                                n_abscissa=1 << 10)
    fine = oracle.t_form_quad(0.25, 1.0 / 16.0, n_angle=1 << 13,
                              n_abscissa=1 << 13)
    assert abs(coarse - fine) / fine <= 2e-3


def test_t_form_positive_and_scales():
    t1 = oracle.t_form_quad(0.25, 2.0 ** -5)
    t2 = oracle.t_form_quad(0.25, 2.0 ** -6)
    assert t1 > t2 > 0.0
    # thickness halves twice: roughly a factor four in the form
    assert 2.0 <= t1 / t2 <= 8.0


def test_cap_arc_length():
    assert oracle.cap_arc_length(2.0) == pytest.approx(2 * math.pi)
    assert oracle.cap_arc_length(0.1) == pytest.approx(4 * math.asin(0.05))

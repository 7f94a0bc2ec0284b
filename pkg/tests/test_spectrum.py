import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import models
from fractal_spectra import spectrum
from fractal_spectra.errors import DomainError, InvalidModelError, MalformedIntervalError
from fractal_spectra.ifs_core import IFSModel

LOG3 = math.log(3.0)
S = math.log(2.0) / LOG3


def cantor_beta(q, p=(0.3, 0.7)):
    return math.log(sum(x**q for x in p)) / LOG3


def test_beta_equal_ratio_closed_form(cantor):
    for q in (-5.0, -1.0, 0.0, 0.5, 2.0, 5.0):
        assert spectrum.beta(cantor, q) == pytest.approx(cantor_beta(q), abs=1e-12)
    assert spectrum.beta(cantor, 2.0) == pytest.approx(math.log(0.58) / LOG3, abs=1e-12)


def test_beta_flat_model(flat):
    assert spectrum.beta(flat, 2.0) == pytest.approx(-S, abs=1e-12)
    qs = np.linspace(-5, 5, 41)
    assert np.max(np.abs(spectrum.beta_many(flat, qs) - S * (1 - qs))) <= 1e-10


def test_alpha_examples(cantor, flat):
    a1 = (0.3 * math.log(0.3) + 0.7 * math.log(0.7)) / math.log(1 / 3)
    a0 = (math.log(0.3) + math.log(0.7)) / (2 * math.log(1 / 3))
    assert spectrum.alpha(cantor, 1.0) == pytest.approx(a1, abs=1e-12)
    assert a1 == pytest.approx(0.556034, abs=2e-6)
    assert spectrum.alpha(cantor, 0.0) == pytest.approx(a0, abs=1e-12)
    for q in (-3.0, 0.0, 4.0):
        assert spectrum.alpha(flat, q) == pytest.approx(S, abs=1e-12)


def test_alpha_is_minus_beta_derivative(cantor, uneven):
    h = 1e-5
    for m in (cantor, uneven):
        for q in (-2.0, 0.0, 1.0, 3.0):
            fd = -(spectrum.beta(m, q + h) - spectrum.beta(m, q - h)) / (2 * h)
            assert spectrum.alpha(m, q) == pytest.approx(fd, abs=1e-6)


def test_alpha_range_examples(cantor, flat, uneven):
    assert spectrum.alpha_range(cantor) == pytest.approx(
        (math.log(0.7) / math.log(1 / 3), math.log(0.3) / math.log(1 / 3)), abs=1e-12
    )
    assert spectrum.alpha_range(flat) == pytest.approx((S, S), abs=1e-12)
    assert spectrum.alpha_range(uneven) == pytest.approx((0.321928, 1.160964), abs=1e-6)


def test_dimension(cantor, uneven):
    assert spectrum.dimension(cantor) == pytest.approx(S, abs=1e-12)
    # 0.25^s + 0.5^s = 1 -> x^2 + x = 1 with x = 2^-s
    x = (math.sqrt(5) - 1) / 2
    assert spectrum.dimension(uneven) == pytest.approx(-math.log2(x), abs=1e-12)


def brute_legendre(model, a, qs=np.linspace(-60, 60, 240001)):
    return float(np.min(a * qs + spectrum.beta_many(model, qs)))


def test_legendre_examples(cantor, flat):
    a0 = spectrum.alpha(cantor, 0.0)
    lv = spectrum.legendre(cantor, a0)
    assert lv.fstar == pytest.approx(S, abs=1e-10)
    assert lv.q_at == pytest.approx(0.0, abs=1e-8)
    a1 = spectrum.alpha(cantor, 1.0)
    f, q = spectrum.legendre(cantor, a1)
    assert f == pytest.approx(a1, abs=1e-10)
    assert q == pytest.approx(1.0, abs=1e-8)
    assert spectrum.legendre(flat, S).fstar == pytest.approx(S, abs=1e-12)


def test_legendre_against_brute_minimum(uneven):
    lo, hi = spectrum.alpha_range(uneven)
    for a in np.linspace(lo + 0.05, hi - 0.05, 7):
        assert spectrum.legendre(uneven, a).fstar == pytest.approx(brute_legendre(uneven, a), abs=1e-6)


def test_legendre_endpoint_is_flagged(cantor):
    lo, hi = spectrum.alpha_range(cantor)
    for a, q in ((lo, spectrum.Q_CAP_LEGENDRE), (hi, -spectrum.Q_CAP_LEGENDRE)):
        lv = spectrum.legendre(cantor, a)
        assert lv.approximate
        assert lv.q_at == q
        assert -1e-12 <= lv.fstar < 1e-6


def test_legendre_outside_range(cantor):
    with pytest.raises(DomainError):
        spectrum.legendre(cantor, 0.1)


def test_invalid_model_is_rejected():
    bad = IFSModel.from_lists([0.6, 0.6], [0, 0.4], [0.5, 0.5])
    with pytest.raises(InvalidModelError):
        spectrum.legendre(bad, 0.5)


def test_dims_empty_interval(cantor):
    rep = spectrum.divergence_dimensions(cantor, (0.1, 0.2))
    assert rep.classification == "empty"
    assert rep.clipped is None


def test_dims_singleton(cantor):
    a1 = spectrum.alpha(cantor, 1.0)
    rep = spectrum.divergence_dimensions(cantor, a1)
    assert rep.classification == "valid"
    for v in (rep.dim_P_equal, rep.dim_P_subset, rep.dim_H_equal, rep.dim_H_subset):
        assert v == pytest.approx(a1, abs=1e-9)


def test_dims_interval_left_of_peak(cantor):
    rep = spectrum.divergence_dimensions(cantor, (0.4, 0.6))
    assert rep.dim_P_equal == pytest.approx(spectrum.legendre(cantor, 0.6).fstar, abs=1e-9)
    assert rep.dim_H_equal == pytest.approx(spectrum.legendre(cantor, 0.4).fstar, abs=1e-9)
    assert rep.dim_H_subset == rep.dim_P_equal


def test_dims_interval_around_peak(cantor):
    rep = spectrum.divergence_dimensions(cantor, (0.6, 0.9))
    assert rep.dim_P_equal == pytest.approx(S, abs=1e-9)
    f = spectrum.legendre_many(cantor, [0.6, 0.9])[0]
    assert rep.dim_H_equal == pytest.approx(min(f), abs=1e-12)


def test_dims_clipping(cantor):
    lo, hi = spectrum.alpha_range(cantor)
    wide = spectrum.divergence_dimensions(cantor, (0.0, 2.0))
    exact = spectrum.divergence_dimensions(cantor, (lo, hi))
    assert wide.classification == "empty"
    assert wide.clipped == pytest.approx((lo, hi))
    assert wide.dim_P_subset == pytest.approx(exact.dim_P_subset, abs=1e-12)
    assert wide.dim_H_subset == pytest.approx(exact.dim_H_subset, abs=1e-12)
    assert exact.dim_P_equal == pytest.approx(S, abs=1e-9)


def test_as_interval_forms():
    assert spectrum.as_interval(0.5) == (0.5, 0.5)
    assert spectrum.as_interval([0.5]) == (0.5, 0.5)
    assert spectrum.as_interval((0.4, 0.6)) == (0.4, 0.6)
    with pytest.raises(MalformedIntervalError):
        spectrum.as_interval((0.6, 0.4))
    with pytest.raises(MalformedIntervalError):
        spectrum.as_interval((0.1, 0.2, 0.3))


def test_table_flat(flat):
    t = spectrum.spectrum_table(flat, -2, 2, 5)
    assert t.columns()["beta"] == pytest.approx(np.array([3, 2, 1, 0, -1]) * S, abs=1e-10)


def test_table_cantor(cantor):
    t = spectrum.spectrum_table(cantor, 0, 2, 3)
    assert t.columns()["beta"] == pytest.approx([S, 0.0, math.log(0.58) / LOG3], abs=1e-10)
    assert t.fingerprint == cantor.fingerprint()


def test_table_domain(cantor):
    with pytest.raises(DomainError):
        spectrum.spectrum_table(cantor, 1, 1, 5)


qs = st.floats(-6.0, 6.0)


@settings(max_examples=60, deadline=None)
@given(models(), qs)
def test_pressure_equation_holds(model, q):
    b = spectrum.beta(model, q)
    assert abs(math.fsum(model.p**q * model.ratios**b) - 1.0) <= 1e-10


@settings(max_examples=60, deadline=None)
@given(models())
def test_beta_anchors(model):
    assert abs(spectrum.beta(model, 1.0)) <= 1e-10
    assert spectrum.beta(model, 0.0) == pytest.approx(spectrum.dimension(model), abs=1e-10)


@settings(max_examples=60, deadline=None)
@given(models(), qs, qs)
def test_beta_decreasing_and_convex(model, q1, q2):
    if abs(q1 - q2) < 1e-6:
        return
    q1, q2 = sorted((q1, q2))
    b1, bm, b2 = spectrum.beta_many(model, [q1, 0.5 * (q1 + q2), q2])
    assert b2 <= b1 + 1e-12
    assert bm <= 0.5 * (b1 + b2) + 1e-9


@settings(max_examples=40, deadline=None)
@given(models(), st.floats(-4.0, 4.0))
def test_legendre_at_alpha_of_q(model, q):
    if spectrum.is_degenerate(model):
        return
    a = spectrum.alpha(model, q)
    lv = spectrum.legendre(model, a)
    assert lv.fstar == pytest.approx(a * q + spectrum.beta(model, q), abs=1e-8)


@settings(max_examples=40, deadline=None)
@given(models())
def test_fstar_bounds(model):
    lo, hi = spectrum.alpha_range(model)
    alphas = np.linspace(lo, hi, 33)
    f = spectrum.legendre_many(model, alphas)[0]
    s = spectrum.dimension(model)
    assert np.all(f <= s + 1e-10)
    assert np.all(f <= alphas + 1e-10)
    assert np.all(f >= -1e-10)
    # concavity on the grid
    assert np.all(f[1:-1] + 1e-9 >= 0.5 * (f[:-2] + f[2:]))

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from isoarea.ambient import canonical_plane, haar_unitary, make_rng, symplectic_form
from isoarea.mobius import (
    BAND_UPPER_AREA,
    BandSpec,
    CurvePair,
    band_area_bound_integrand,
    band_from_curves,
    band_from_spec,
    circle_band,
    complex_band,
    noncomplex_band,
    noncomplex_metric_E,
)
from isoarea.surface import QuadratureSpec, area, first_fundamental_form, isotropy_residual

# frozen oracle: 3 pi^2 / (2 sqrt 2) evaluated in 50-digit arithmetic
BAND_AREA_ORACLE = 10.468296299458319


def test_band_area_constant():
    assert BAND_UPPER_AREA == pytest.approx(BAND_AREA_ORACLE, abs=1e-14)
    assert area(complex_band()) == pytest.approx(BAND_AREA_ORACLE, abs=1e-8)


def test_complex_band_metric(rng):
    t = rng.uniform(0, 2 * np.pi, 200)
    s = rng.uniform(0, np.pi / 2, 200)
    E, F, G = first_fundamental_form(complex_band(), t, s)
    np.testing.assert_allclose(E, 1 + np.sin(s) ** 2, atol=1e-13)
    np.testing.assert_allclose(F, 0.0, atol=1e-13)
    np.testing.assert_allclose(G, E / 2, atol=1e-13)


def test_complex_band_boundary_and_core():
    band = complex_band()
    t = np.linspace(0, 2 * np.pi, 9)
    np.testing.assert_allclose(band(t, 0 * t), np.stack([np.cos(t), np.sin(t), 0 * t, 0 * t], -1), atol=1e-15)
    # top edge is the core circle, traversed twice
    top = band(t, np.full_like(t, np.pi / 2))
    np.testing.assert_allclose(np.linalg.norm(top, axis=-1), 1 / np.sqrt(2), atol=1e-15)


def test_complex_band_in_higher_dimension():
    band = complex_band(3)
    assert band.n == 3
    assert area(band) == pytest.approx(BAND_AREA_ORACLE, abs=1e-8)
    with pytest.raises(ValueError):
        complex_band(1)


@pytest.mark.parametrize("a", [0.0, 0.3, 0.75, 0.99])
def test_noncomplex_band_metric_and_isotropy(a, rng):
    band = noncomplex_band(a)
    t = rng.uniform(0, 2 * np.pi, 100)
    s = rng.uniform(0, np.pi / 2, 100)
    E, _, _ = first_fundamental_form(band, t, s)
    np.testing.assert_allclose(E, noncomplex_metric_E(a, t, s), atol=1e-12)
    assert isotropy_residual(band) < 1e-12
    assert isotropy_residual(band, numeric=True) < 1e-7


@settings(max_examples=25, deadline=None)
@given(a=st.floats(0.0, 0.995))
def test_noncomplex_band_strictly_smaller(a):
    val = area(noncomplex_band(a))
    assert val < BAND_UPPER_AREA
    # the pointwise bound E / sqrt 2 >= sqrt(EG - F^2) integrates to the complex value
    quad = QuadratureSpec(64, 64)
    T, S, W = quad.nodes((0, 2 * np.pi, 0, np.pi / 2))
    bound = band_area_bound_integrand(a, T, S)
    E, F, G = first_fundamental_form(noncomplex_band(a), T, S)
    assert np.all(bound >= np.sqrt(np.maximum(E * G - F * F, 0)) - 1e-12)
    assert np.sum(W * bound) == pytest.approx(BAND_UPPER_AREA, abs=1e-8)


def test_bound_integrand_domain():
    with pytest.raises(ValueError):
        band_area_bound_integrand(1.0, 0.0, 0.0)


@settings(max_examples=10, deadline=None)
@given(seed=st.integers(0, 10**6), r=st.floats(0.1, 10.0))
def test_circle_band_isotropic_under_unitaries(seed, r):
    R = haar_unitary(2, make_rng(seed))
    I = np.eye(4)
    band = circle_band(*(R @ I[k] for k in range(4)), radius=r, center=np.ones(4))
    assert isotropy_residual(band) < 1e-10 * max(1.0, r * r)
    assert area(band) == pytest.approx(r * r * BAND_AREA_ORACLE, rel=1e-10)


def _pair_for(P, Pp):
    e1, e2, f1, f2 = P.e1, P.e2, Pp.e1, Pp.e2
    return CurvePair(
        alpha=lambda t: np.multiply.outer(np.cos(t), e1) + np.multiply.outer(np.sin(t), e2),
        beta=lambda t: (np.multiply.outer(np.cos(2 * t), f1) + np.multiply.outer(np.sin(2 * t), f2)) / np.sqrt(2),
    )


def test_band_from_curves_matches_closed_form():
    P, Pp = canonical_plane(0.4)
    band = band_from_curves(_pair_for(P, Pp), P, Pp)
    assert band.identification == "mobius"
    assert area(band) == pytest.approx(area(noncomplex_band(0.4)), rel=1e-9)


def test_band_from_curves_rejects_bad_input():
    P, Pp = canonical_plane(0.4)
    with pytest.raises(ValueError, match="omega-orthogonal"):
        band_from_curves(_pair_for(P, P), P, P)
    pair = _pair_for(P, Pp)
    wrong_scale = CurvePair(pair.alpha, lambda t: np.sqrt(2) * pair.beta(t))
    with pytest.raises(ValueError, match="compatible"):
        band_from_curves(wrong_scale, P, Pp)
    with pytest.raises(ValueError, match="leaves its plane"):
        band_from_curves(pair, Pp, P)
    one_turn = CurvePair(pair.alpha, lambda t: np.multiply.outer(np.cos(t), Pp.e1)
                         + np.multiply.outer(np.sin(t), Pp.e2))
    with pytest.raises(ValueError, match="half-period"):
        band_from_curves(one_turn, P, Pp)


def test_band_spec():
    assert area(band_from_spec(BandSpec())) == pytest.approx(BAND_AREA_ORACLE, abs=1e-8)
    assert band_from_spec(BandSpec(variant="noncomplex", a=0.5)).name.startswith("noncomplex")
    with pytest.raises(ValueError):
        BandSpec(variant="other")
    with pytest.raises(ValueError):
        BandSpec(variant="noncomplex", a=1.0)


def test_partner_omega_matches():
    P, Pp = canonical_plane(0.6)
    assert symplectic_form(P.e1, P.e2) == pytest.approx(symplectic_form(Pp.e1, Pp.e2))

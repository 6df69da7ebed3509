import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from pcompact import catalog, prefactor as pf
from pcompact.catalog import ClassicalScheme
from pcompact.errors import FactorizationError, SingularSystemError
from tables import (
    B,
    BETA,
    PC4_BETA1_CLOSED_FORM,
    SPECTRAL_LIKE_A,
    SPECTRAL_LIKE_ALPHA,
    SPECTRAL_LIKE_B,
    SPECTRAL_LIKE_BETA,
)

LABELS = list(BETA)


def spectral_like():
    return ClassicalScheme(4, 2, 3, SPECTRAL_LIKE_ALPHA, SPECTRAL_LIKE_A, "SPECTRAL")


@pytest.mark.parametrize("label", LABELS)
def test_weights_match_published_tables(label):
    p = pf.builtin_prefactored(label)
    tol = 1e-8 if label == "PC4" else 5e-12
    np.testing.assert_allclose(p.beta, BETA[label], rtol=0, atol=tol)
    np.testing.assert_allclose(p.b, B[label], rtol=0, atol=5e-12)


def test_pc4_matches_closed_form():
    p = pf.builtin_prefactored("PC4")
    assert p.beta[0] == pytest.approx(PC4_BETA1_CLOSED_FORM, abs=1e-15)
    assert p.b == (pytest.approx(1.0, abs=1e-15),)
    # the tabulated value differs from the closed form in the ninth decimal
    assert abs(BETA["PC4"][0] - PC4_BETA1_CLOSED_FORM) > 1e-9


def test_pc6_closed_form():
    p = pf.builtin_prefactored("PC6")
    assert p.beta[0] == pytest.approx((5 - math.sqrt(5)) / 10, abs=1e-15)


def test_spectral_like_scheme():
    p = pf.prefactor(spectral_like())
    np.testing.assert_allclose(p.beta, SPECTRAL_LIKE_BETA, atol=1e-12)
    np.testing.assert_allclose(p.b, SPECTRAL_LIKE_B, atol=1e-12)
    assert p.label == "PC-SPECTRAL"
    assert p.decay_rate == pytest.approx(0.708, abs=1e-3)


@pytest.mark.parametrize("label", LABELS)
def test_periodic_operator_identity(label):
    c = catalog.builtin(label[1:])
    p = pf.prefactor(c)
    r = pf.verify_factorization(c, p, 64)
    assert r.ok
    assert r.b_transpose_exact and r.c_transpose_exact
    assert r.operator_residual <= 1e-10
    assert r.autocorrelation_residual <= 1e-14
    assert r.explicit_residual <= 1e-13
    # circulant matrices commute
    assert r.commutator <= 1e-14


@pytest.mark.parametrize("label", LABELS)
def test_sweeps_are_stable(label):
    p = pf.builtin_prefactored(label)
    assert p.beta0 > 0
    assert 0 <= p.decay_rate < 1


def test_quarter_band_is_degenerate():
    # g = 1/4 puts a double root at z = -1
    with pytest.raises(FactorizationError):
        pf.spectral_factor([0.25])


@pytest.mark.parametrize("label", ["PC4", "PC6"])
def test_contraction_ratio_bounds_decay_for_single_band(label):
    p = pf.builtin_prefactored(label)
    assert p.contraction_ratio == pytest.approx(p.decay_rate, rel=1e-12)


def test_contraction_ratio_exceeds_one_for_wide_schemes():
    # sum|beta|/beta0 is only a sufficient bound; the wide schemes break it
    # while their sweeps still decay.
    for label in ("PC12", "PC14", "PC16"):
        p = pf.builtin_prefactored(label)
        assert p.contraction_ratio > 1.0 > p.decay_rate


def test_factor_implicit_empty():
    fac = pf.spectral_factor([0.0])
    assert fac.beta_tilde == (1.0, 0.0)


def test_unit_circle_root_rejected():
    # (1 - 2g) + 2g cos z vanishes at z = pi/2 for g = 1/2
    with pytest.raises(FactorizationError):
        pf.spectral_factor([0.5])


def test_narrow_explicit_stencil_rejected():
    with pytest.raises(SingularSystemError):
        pf.solve_explicit((0.35, 0.02), (0.7,))


def test_explicit_system_shape():
    m = pf.explicit_system((0.6, 0.3, 0.1), 2)
    assert m.shape == (2, 2)


def test_text_roundtrip(tmp_path):
    ps = [pf.builtin_prefactored(l) for l in LABELS] + [pf.prefactor(spectral_like())]
    path = tmp_path / "pc.txt"
    pf.save(ps, path)
    back = pf.load(path)
    assert [p.label for p in back] == [p.label for p in ps]
    assert back == ps


def test_builtin_accepts_both_forms():
    assert pf.builtin_prefactored("c8") == pf.builtin_prefactored("PC8")


def test_weight_count_checked():
    with pytest.raises(ValueError):
        pf.PrefactoredScheme(4, 1, 1, (0.2, 0.1), (1.0,))


@settings(max_examples=30, deadline=None)
@given(g=st.one_of(st.just(0.0), st.floats(1e-200, 0.2499)))
def test_tridiagonal_factor_property(g):
    # (1-2g) + g(z + 1/z) = beta0^2 + beta1^2 + beta0 beta1 (z + 1/z)
    (b1,) = pf.factor_implicit([g])
    b0 = 1 - b1
    assert b0 * b1 == pytest.approx(g, abs=1e-14)
    assert 0 <= b1 <= b0

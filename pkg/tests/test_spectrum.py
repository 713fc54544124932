import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.integrate import quad

from nearfield_polar.channel import Scenario
from nearfield_polar.geometry import PhysicalConstants, UePosition, UlaGeometry
from nearfield_polar.spectrum import (BetaSums, NormalizedAperture, SpectrumResult,
                                      beta_diagonal, beta_sums, closed_form_eigenvalues,
                                      exact_gramian, far_field_probe, integral_beta_approx, zeta)

from conftest import C22, C32, C33

GAIN = PhysicalConstants().gain


def brute_betas(M, dt, D):
    """Term-by-term sums with plain Python floats."""
    out = [0.0] * 5
    for m in range(-M, M + 1):
        r2 = D * D + (m * dt) ** 2
        out[0] += 1 / r2 ** 2
        out[1] += m * m / r2 ** 2
        out[2] += 1 / r2
        out[3] += 1 / r2 ** 3
        out[4] += m * m / r2 ** 3
    return out


def test_single_element_betas():
    b = beta_sums(UlaGeometry(0, 0.7), UePosition(2.0))
    assert b.as_array() == pytest.approx([1 / 16, 0, 1 / 4, 1 / 64, 0])


def test_three_element_beta0():
    assert beta_sums(UlaGeometry(1, 1.0), UePosition(1.0)).beta0 == pytest.approx(1.5, rel=1e-15)


@given(M=st.integers(0, 60), dt=st.floats(0, 2), D=st.floats(0.2, 50))
def test_beta_sums_match_brute_force_and_identities(M, dt, D):
    b = beta_sums(UlaGeometry(M, dt), UePosition(D))
    np.testing.assert_allclose(b.as_array(), brute_betas(M, dt, D), rtol=1e-12)
    assert b.beta2 == pytest.approx(D * D * b.beta0 + dt * dt * b.beta1, rel=1e-12)
    assert b.beta0 == pytest.approx(D * D * b.beta3 + dt * dt * b.beta4, rel=1e-12)
    if M >= 1 and dt > 0:
        assert np.all(b.as_array() > 0)


def test_normalized_aperture():
    a = NormalizedAperture.from_geometry(UlaGeometry(15, 0.3), UePosition(5.0))
    assert a.epsilon == pytest.approx(0.9)
    assert a.epsilon == pytest.approx(15 / a.omega)
    assert a.zeta == pytest.approx(math.atan(0.9) / 0.9)


def test_zeta_limit():
    assert zeta(0.0) == 1.0
    for e in (1e-6, 1e-5, 2e-4):
        assert zeta(e) == pytest.approx(math.atan(e) / e, rel=1e-13)


def test_spectrum_result_sorts_and_clips():
    s = SpectrumResult([1.0, 3.0, -1e-20], "exact-sum")
    np.testing.assert_array_equal(s.eigenvalues, [3.0, 1.0, 0.0])
    assert len(s) == 3 and s[0] == 3.0


def test_zero_spacing_spectrum(constants):
    M, D = 7, 4.0
    spec = exact_gramian(Scenario(UlaGeometry(M, 0.0), UePosition(D), constants, C33))
    n = 2 * M + 1
    np.testing.assert_allclose(spec.eigenvalues, GAIN * np.array([n / D ** 2, n / D ** 2, 0]),
                               rtol=1e-12, atol=1e-14)
    assert spec.eigenvalues[2] == 0.0


@pytest.mark.parametrize("M,dt,D", [(3, 0.5, 5.0), (15, 0.3, 5.0), (40, 0.1, 2.0)])
def test_2x2_spectrum_is_beta2_and_D4_beta3(constants, M, dt, D):
    sc = Scenario(UlaGeometry(M, dt), UePosition(D), constants, C22)
    spec = exact_gramian(sc)
    b = beta_sums(sc.geometry, sc.ue)
    np.testing.assert_allclose(spec.slots, GAIN * np.array([b.beta2, D ** 4 * b.beta3]),
                               rtol=1e-12)
    # D^2*beta0 (the 3x3 middle entry) is a different quantity once dt > 0
    assert abs(spec.slots[1] - GAIN * D * D * b.beta0) > 1e-3 * spec.slots[1]


@pytest.mark.parametrize("cfg", [C33, C32, C22])
def test_exact_matches_beta_diagonal(constants, cfg):
    M, dt, D = 15, 0.3, 5.0
    sc = Scenario(UlaGeometry(M, dt), UePosition(D), constants, cfg)
    diag = beta_diagonal(cfg, beta_sums(sc.geometry, sc.ue), D, dt, constants)
    spec = exact_gramian(sc)
    np.testing.assert_allclose(spec.eigenvalues, np.sort(diag)[::-1], rtol=1e-12)


def test_3x2_third_slot_is_beta4_not_beta3(constants):
    M, dt, D = 15, 0.3, 5.0
    sc = Scenario(UlaGeometry(M, dt), UePosition(D), constants, C32)
    b = beta_sums(sc.geometry, sc.ue)
    slots = exact_gramian(sc).slots
    assert slots[2] == pytest.approx(beta_diagonal(C32, b, D, dt, constants, "beta4")[2], rel=1e-12)
    assert slots[2] != pytest.approx(beta_diagonal(C32, b, D, dt, constants, "beta3")[2], rel=0.5)


def test_closed_form_at_zero_aperture(constants):
    M, D = 10, 5.0
    s = closed_form_eigenvalues(C33, M, 0.0, constants, D)
    np.testing.assert_allclose(s.eigenvalues, GAIN * np.array([2 * M, 2 * M, 0]) / D ** 2)


def test_closed_form_ratio_at_unit_aperture(constants):
    s = closed_form_eigenvalues(C33, 10, 1.0, constants, 5.0)
    assert s[1] / s[0] == pytest.approx((math.pi + 2) / (2 * math.pi), rel=1e-14)


def test_closed_form_product_gives_alpha(constants):
    eps, M, D = 0.9058, 20, 5.0
    s = closed_form_eigenvalues(C33, M, eps, constants, D)
    # sum of log2(rho*lam/3) minus the C0 term leaves log2 of this product
    alpha = math.log2(np.prod(s.eigenvalues) / (GAIN * M / D ** 2) ** 3)
    assert alpha == pytest.approx(-0.7794, abs=1e-3)


def test_closed_form_lengths(constants):
    assert [len(closed_form_eigenvalues(c, 5, 0.5, constants, 5.0)) for c in (C33, C32, C22)] \
        == [3, 3, 2]


@given(eps=st.floats(0, 20), M=st.integers(1, 1000))
def test_closed_form_relations(eps, M):
    c = PhysicalConstants()
    s33, s32, s22 = (closed_form_eigenvalues(cfg, M, eps, c, 5.0) for cfg in (C33, C32, C22))
    # l1 shared by all configs, l2 shared by 3x2 and 2x2
    assert s33.slots[0] == s32.slots[0] == s22.slots[0]
    assert s32.slots[1] == s22.slots[1]
    assert s33.slots[1] >= s32.slots[1] * (1 - 1e-12)
    assert s33.slots[0] == pytest.approx(s33.slots[1] + s33.slots[2], rel=1e-12)


def test_closed_form_monotonicity(constants):
    eps = np.linspace(0, 10, 2001)
    vals = np.array([closed_form_eigenvalues(C33, 10, e, constants, 5.0).slots for e in eps])
    assert np.all(np.diff(vals[:, 0]) <= 0)
    assert np.all(np.diff(vals[:, 1]) <= 0)
    k = int(np.argmax(vals[:, 2]))
    assert 0 < k < len(eps) - 1
    v32 = np.array([closed_form_eigenvalues(C32, 10, e, constants, 5.0).slots[2] for e in eps])
    assert 0 < int(np.argmax(v32)) < len(eps) - 1


def _quad_betas(M, dt, D):
    f = [lambda m: 1 / (D * D + (m * dt) ** 2) ** 2,
         lambda m: m * m / (D * D + (m * dt) ** 2) ** 2,
         lambda m: 1 / (D * D + (m * dt) ** 2),
         lambda m: 1 / (D * D + (m * dt) ** 2) ** 3,
         lambda m: m * m / (D * D + (m * dt) ** 2) ** 3]
    return np.array([quad(g, -M, M, epsabs=0, epsrel=1e-13)[0] for g in f])


@pytest.mark.parametrize("M,dt,D", [(15, 0.3, 5.0), (100, 0.05, 3.0), (7, 2.0, 1.0)])
def test_integral_approx_matches_quadrature(M, dt, D):
    approx = integral_beta_approx(D / dt, M, D)
    np.testing.assert_allclose(approx.as_array(), _quad_betas(M, dt, D), rtol=1e-10)


def test_integral_approx_infinite_array_limit():
    w, D = 3.0, 2.0
    b = integral_beta_approx(w, 10 ** 9, D)
    assert b.beta0 == pytest.approx(w / D ** 4 * math.pi / 2, rel=1e-8)


def test_integral_approx_large_array_accuracy():
    M, dt, D = 500, 0.01, 5.0
    exact = beta_sums(UlaGeometry(M, dt), UePosition(D)).as_array()
    approx = integral_beta_approx(D / dt, M, D).as_array()
    assert np.max(np.abs(approx - exact) / exact) < 0.01


def test_integral_approx_error_halves_with_M():
    D, eps = 5.0, 1.0
    errs = []
    for M in (25, 50, 100, 200, 400):
        dt = eps * D / M
        exact = beta_sums(UlaGeometry(M, dt), UePosition(D)).as_array()
        approx = integral_beta_approx(D / dt, M, D).as_array()
        errs.append(np.max(np.abs(approx - exact) / exact))
    ratios = np.array(errs[1:]) / np.array(errs[:-1])
    np.testing.assert_allclose(ratios, 0.5, atol=0.03)


def test_lemma2_third_eigenvalue_is_integral_of_beta4(constants):
    for M, eps, D in [(15, 0.5, 5.0), (100, 0.7144, 5.0), (40, 2.0, 3.0)]:
        dt = eps * D / M
        b = integral_beta_approx(D / dt, M, D)
        closed = closed_form_eigenvalues(C32, M, eps, constants, D).slots
        assert closed[2] == pytest.approx(GAIN * D * D * dt * dt * b.beta4, rel=1e-12)
        assert closed[1] == pytest.approx(GAIN * D ** 4 * b.beta3, rel=1e-12)
        assert closed[0] == pytest.approx(GAIN * b.beta2, rel=1e-12)


def test_closed_form_converges_to_exact(constants):
    for cfg in (C33, C32, C22):
        for eps in (0.25, 0.5, 1.0, 2.0):
            errs = []
            for M in (15, 50, 150, 500):
                sc = Scenario(UlaGeometry.from_epsilon(M, eps, 5.0), UePosition(5.0), constants, cfg)
                ex = exact_gramian(sc).eigenvalues
                cf = closed_form_eigenvalues(cfg, M, eps, constants, 5.0).eigenvalues
                errs.append(np.max(np.abs(ex - cf) / ex))
            assert all(b < a for a, b in zip(errs, errs[1:]))
            assert errs[-1] < 0.01


def test_far_field_probe(constants):
    assert far_field_probe(C22, UlaGeometry(15, 0.5), constants, [5, 50]) == [(5.0, 0.0), (50.0, 0.0)]
    probe = far_field_probe(C33, UlaGeometry(15, 0.5), constants, [5, 20, 100, 500, 5000])
    ratios = [r for _, r in probe]
    assert all(b < a for a, b in zip(ratios, ratios[1:]))
    assert ratios[-1] < 1e-6
    # closed form: epsilon -> 0 as D grows at fixed aperture
    lam3 = [closed_form_eigenvalues(C33, 15, 7.5 / D, constants, D).slots[2]
            / closed_form_eigenvalues(C33, 15, 7.5 / D, constants, D).slots[1]
            for D in (5, 50, 500)]
    assert lam3[2] < lam3[1] < lam3[0]
    assert lam3[2] < 1e-3

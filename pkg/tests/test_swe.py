import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.special import lpmv

from superdirective.beamform import directivity_quotient, optimal_beamformer
from superdirective.errors import NumericalError
from superdirective.fieldmodel import (ElementFieldSet, ElementModel, build_field_matrix, distort,
                                       linear_array, make_angular_grid, synth_element_fields)
from superdirective.swe import (build_pattern_matrix, default_truncation, directivity_from_modes,
                                extract_coefficients, mode_from_index, mode_index, mode_table,
                                normalized_legendre, normalized_legendre_terms, num_modes,
                                pattern_function, save_coefficients_csv)


def pbar_oracle(n, m, x):
    """Normalized Legendre from scipy's unnormalized lpmv, Condon-Shortley phase removed."""
    norm = math.sqrt((2 * n + 1) / 2 * math.factorial(n - m) / math.factorial(n + m))
    return (-1) ** m * norm * lpmv(m, n, x)


@pytest.fixture(scope="module")
def single_element_sets(grid_2deg):
    geom = linear_array(1, 0.1, 1.6e9)
    return {kind: synth_element_fields(geom, ElementModel(kind), grid_2deg)
            for kind in ("isotropic", "hertzian-dipole", "half-wave-dipole")}


# ---------------------------------------------------------------- indexing


def test_mode_counts():
    assert num_modes(1) == 6
    assert num_modes(3) == 30
    assert len(mode_table(4)) == num_modes(4)


@given(st.integers(1, 30).flatmap(lambda n: st.tuples(st.sampled_from([1, 2]), st.just(n), st.integers(-n, n))))
def test_mode_index_bijection(smn):
    s, n, m = smn
    t = mode_index(s, n, m)
    assert 0 <= t < num_modes(n)
    assert mode_from_index(t) == (s, n, m)


def test_mode_index_dense():
    N = 6
    ts = sorted(mode_index(s, n, m) for n in range(1, N + 1) for m in range(-n, n + 1) for s in (1, 2))
    assert ts == list(range(num_modes(N)))


def test_mode_index_rejects_invalid():
    for bad in ((3, 1, 0), (1, 0, 0), (1, 2, 3)):
        with pytest.raises(ValueError):
            mode_index(*bad)


# ---------------------------------------------------------------- Legendre


def test_legendre_matches_scipy():
    theta = np.linspace(0.05, np.pi - 0.05, 37)
    P, dP, mPs = normalized_legendre(12, theta)
    x = np.cos(theta)
    for n in range(13):
        for m in range(n + 1):
            np.testing.assert_allclose(P[n, m], pbar_oracle(n, m, x), atol=1e-12, err_msg=f"{n},{m}")
            np.testing.assert_allclose(mPs[n, m], m * pbar_oracle(n, m, x) / np.sin(theta), atol=1e-11)


def test_legendre_derivative_finite_difference():
    theta = np.linspace(0.2, np.pi - 0.2, 11)
    h = 1e-6
    _, dP, _ = normalized_legendre(8, theta)
    Pp, _, _ = normalized_legendre(8, theta + h)
    Pm, _, _ = normalized_legendre(8, theta - h)
    np.testing.assert_allclose(dP, (Pp - Pm) / (2 * h), atol=1e-7)


def test_legendre_normalization_and_orthogonality():
    g = make_angular_grid(64, 4)
    P, _, _ = normalized_legendre(6, g.theta_rad)
    w = g.weights_sr[:: g.q] / (2 * np.pi / g.q)  # sin(theta) dtheta weights
    for n in range(1, 7):
        for m in range(n + 1):
            assert P[n, m] ** 2 @ w == pytest.approx(1.0, abs=1e-12)
    assert abs((P[2, 0] * P[1, 0]) @ w) < 1e-9


def test_legendre_examples():
    p, dp, mps = normalized_legendre_terms(1, 0, np.pi / 2)
    assert p == pytest.approx(0.0, abs=1e-15)
    assert abs(dp) == pytest.approx(math.sqrt(1.5))
    assert mps == 0.0
    p, dp, mps = normalized_legendre_terms(1, 1, np.pi / 2)
    assert p == pytest.approx(math.sqrt(3) / 2)
    assert dp == pytest.approx(0.0, abs=1e-15)
    p, dp, mps = normalized_legendre_terms(2, -1, 1.0)
    assert mps == pytest.approx(-pbar_oracle(2, 1, math.cos(1.0)) / math.sin(1.0))


def test_legendre_rejects_poles():
    with pytest.raises(ValueError):
        normalized_legendre(3, np.array([0.0, 1.0]))


# ---------------------------------------------------------------- pattern functions


def test_pattern_function_structure():
    theta = np.linspace(0.1, np.pi - 0.1, 41)
    kt, kp = pattern_function(2, 1, 0, theta, 0.3)
    assert np.all(kp == 0)
    assert np.argmax(np.abs(kt)) == 20  # theta = pi/2
    kt, kp = pattern_function(1, 1, 0, theta, 0.3)
    assert np.all(kt == 0)


def test_pattern_function_unit_norm(grid_1deg):
    g = grid_1deg
    for s, n, m in ((1, 1, 1), (2, 2, -1), (1, 3, 0), (2, 4, 4)):
        kt, kp = pattern_function(s, n, m, g.point_theta, g.point_phi)
        assert g.integrate(np.abs(kt) ** 2 + np.abs(kp) ** 2) == pytest.approx(4 * np.pi, rel=1e-10)


def test_pattern_matrix_orthonormal(grid_1deg):
    K = build_pattern_matrix(grid_1deg, 4).K
    assert K.shape == (2 * grid_1deg.size, num_modes(4))
    gram = K.conj().T @ K
    np.testing.assert_allclose(np.diag(gram).real, 1.0, atol=1e-3)
    assert np.abs(gram - np.diag(np.diag(gram))).max() < 1e-3
    pair = gram[mode_index(1, 1, 1), mode_index(2, 1, 1)]
    assert abs(pair) < 1e-3


def test_pattern_matrix_memory_guard():
    g = make_angular_grid(180, 360)
    with pytest.raises(MemoryError, match="cap"):
        build_pattern_matrix(g, 40)
    with pytest.raises(ValueError):
        build_pattern_matrix(g, 0)


# ---------------------------------------------------------------- coefficients


def test_dipole_is_one_mode(single_element_sets):
    fset = single_element_sets["hertzian-dipole"]
    kmat = build_pattern_matrix(fset.grid, 1)
    coeffs = extract_coefficients(fset, kmat)
    assert coeffs.residuals[0] < 1e-6
    power = np.abs(coeffs.Q[0]) ** 2
    assert np.argmax(power) == mode_index(2, 1, 0)
    assert power[mode_index(2, 1, 0)] / power.sum() > 1 - 1e-12


def test_dipole_directivity_from_modes(single_element_sets):
    fset = single_element_sets["hertzian-dipole"]
    coeffs = extract_coefficients(fset, build_pattern_matrix(fset.grid, 1))
    assert directivity_from_modes(coeffs, [1.0], (np.pi / 2, 0.0)) == pytest.approx(1.5, abs=1e-3)


def test_isotropic_only_m_zero(single_element_sets):
    fset = single_element_sets["isotropic"]
    coeffs = extract_coefficients(fset, build_pattern_matrix(fset.grid, 6))
    m = mode_table(6)[:, 2]
    assert np.abs(coeffs.Q[0, m != 0]).max() < 1e-10
    assert np.abs(coeffs.Q[0, m == 0]).max() > 0.1


def test_isotropic_mode_directivity_converges_slowly(single_element_sets):
    """A constant theta-polarized field is not band-limited in vector modes: the mode-path
    directivity approaches 1 only as N grows (1.5 at N=1, about 1.05 at N=10)."""
    fset = single_element_sets["isotropic"]
    err = []
    for N in (2, 6, 12):
        coeffs = extract_coefficients(fset, build_pattern_matrix(fset.grid, N))
        err.append(abs(directivity_from_modes(coeffs, [1.0], (np.pi / 2, 0.0)) - 1.0))
    assert err[0] > err[1] > err[2]
    assert err[2] < 0.1


def test_zero_field_zero_coefficients(grid_coarse):
    fset = ElementFieldSet(grid_coarse, np.zeros((2, grid_coarse.size, 2)), 1e9)
    coeffs = extract_coefficients(fset, build_pattern_matrix(grid_coarse, 3))
    assert np.all(coeffs.Q == 0)
    assert np.all(coeffs.residuals == 0)
    with pytest.raises(NumericalError, match="zero radiated power"):
        directivity_from_modes(coeffs, [1.0, 1.0], (1.0, 1.0))


@pytest.fixture(scope="module")
def array_modes(grid_2deg):
    geom = linear_array(4, 0.1, 1.6e9)
    fset = distort(synth_element_fields(geom, ElementModel("half-wave-dipole"), grid_2deg), 0.05, 4)
    N = default_truncation(geom)
    coeffs = extract_coefficients(fset, build_pattern_matrix(grid_2deg, N))
    return fset, coeffs


def test_default_truncation():
    geom = linear_array(4, 0.1, 1.6e9)
    assert default_truncation(geom) == math.ceil(geom.wavenumber * geom.enclosing_radius) + 10 == 11


def test_parseval(array_modes):
    fset, coeffs = array_modes
    w = fset.grid.weights_sr
    e_norm = np.einsum("ipc,p->i", np.abs(fset.fields) ** 2, w)
    q_norm = np.sum(np.abs(coeffs.Q) ** 2, axis=1)
    np.testing.assert_allclose(q_norm, e_norm, rtol=2e-6)


def test_residual_monotone_in_truncation(array_modes):
    fset, _ = array_modes
    res = [extract_coefficients(fset, build_pattern_matrix(fset.grid, N)).residuals for N in (3, 4, 5, 6)]
    for a, b in zip(res, res[1:]):
        assert np.all(b <= a + 1e-15)


def test_two_path_agreement(array_modes):
    fset, coeffs = array_modes
    d = (np.pi / 2, 0.0)
    assert coeffs.residuals.max() < 1e-3
    A = build_field_matrix(fset, d)
    b = optimal_beamformer(A).b
    # the half-wave pattern needs many modes, so compare at the achieved residual
    assert directivity_from_modes(coeffs, b, d) == pytest.approx(directivity_quotient(b, A), rel=1e-3)


@given(st.complex_numbers(min_magnitude=1e-3, max_magnitude=1e3, allow_nan=False, allow_infinity=False))
def test_mode_directivity_scale_invariant(alpha):
    geom = linear_array(2, 0.2, 1e9)
    g = make_angular_grid(12, 24)
    fset = synth_element_fields(geom, ElementModel("hertzian-dipole"), g)
    coeffs = extract_coefficients(fset, build_pattern_matrix(g, 3))
    b = np.array([1.0, -0.7 + 0.2j])
    d = (1.1, 0.3)
    assert directivity_from_modes(coeffs, alpha * b, d) == pytest.approx(directivity_from_modes(coeffs, b, d), rel=1e-12)


def test_coefficient_csv(tmp_path, grid_coarse):
    fset = synth_element_fields(linear_array(2, 0.2, 1e9), ElementModel("hertzian-dipole"), grid_coarse)
    coeffs = extract_coefficients(fset, build_pattern_matrix(grid_coarse, 2))
    lines = save_coefficients_csv(coeffs, tmp_path / "q.csv").read_text().splitlines()
    assert lines[0].startswith("re_0,im_0,re_1,im_1")
    assert len(lines) == 3
    first = [float(v) for v in lines[1].split(",")]
    np.testing.assert_array_equal(first[0::2] + 1j * np.array(first[1::2]), coeffs.Q[0])

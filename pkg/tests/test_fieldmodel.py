import json
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from superdirective.errors import FieldFormatError
from superdirective.fieldmodel import (SPEED_OF_LIGHT, ElementFieldSet, ElementModel, build_field_matrix,
                                       distort, linear_array, load_field_set, make_angular_grid,
                                       random_distortion, save_field_set, synth_element_fields)

FOUR_PI = 4.0 * np.pi


def sinc(x):
    return np.sinc(x / np.pi)


# ---------------------------------------------------------------- grid


@pytest.mark.parametrize("l,q", [(180, 360), (90, 180), (7, 9), (2, 4)])
def test_grid_weights_sum_to_sphere(l, q):
    g = make_angular_grid(l, q)
    assert abs(g.weights_sr.sum() - FOUR_PI) <= 1e-9 * FOUR_PI


def test_grid_nodes():
    g = make_angular_grid(6, 8)
    np.testing.assert_allclose(g.theta_rad, (np.arange(6) + 0.5) * np.pi / 6)
    np.testing.assert_allclose(g.phi_rad, np.arange(8) * np.pi / 4)
    assert np.all((g.theta_rad > 0) & (g.theta_rad < np.pi))
    # theta-major: theta changes slowest
    assert g.point_theta[0] == g.point_theta[7] != g.point_theta[8]


def test_midpoint_rule_literal_weights():
    g = make_angular_grid(2, 4, rule="midpoint")
    assert g.size == 8
    theta = np.array([np.pi / 4, 3 * np.pi / 4])
    expected = np.repeat(np.sin(theta) * (np.pi / 2) * (np.pi / 2), 4)
    np.testing.assert_allclose(g.weights_sr, expected, rtol=0, atol=1e-15)


def test_fejer_integrates_low_degree_exactly():
    g = make_angular_grid(10, 8)
    # int cos^4 over the sphere = 4 pi / 5
    assert g.integrate(np.cos(g.point_theta) ** 4) == pytest.approx(FOUR_PI / 5, rel=1e-13)


@pytest.mark.parametrize("l,q", [(1, 8), (4, 3), (0, 0)])
def test_grid_rejects_coarse(l, q):
    with pytest.raises(ValueError):
        make_angular_grid(l, q)


# ---------------------------------------------------------------- geometry


def test_linear_array_spacing_and_centering():
    geom = linear_array(4, 0.1, 1.6e9)
    lam = SPEED_OF_LIGHT / 1.6e9
    np.testing.assert_allclose(np.diff(geom.positions_m[:, 0]), 0.1 * lam)
    np.testing.assert_allclose(geom.positions_m.mean(axis=0), 0.0, atol=1e-15)
    assert geom.wavenumber == pytest.approx(2 * np.pi / lam)
    assert geom.enclosing_radius == pytest.approx(0.15 * lam)


def test_linear_array_rejects_zero_spacing():
    with pytest.raises(ValueError, match="spacing must be positive"):
        linear_array(3, 0.0, 1e9)


def test_element_axis_must_be_unit():
    with pytest.raises(ValueError):
        ElementModel("hertzian-dipole", (0.0, 0.0, 1.1))
    with pytest.raises(ValueError):
        ElementModel("loop")


# ---------------------------------------------------------------- synthesis


def test_single_isotropic_at_origin(grid_coarse):
    geom = linear_array(1, 0.1, 1e9)
    fset = synth_element_fields(geom, ElementModel("isotropic"), grid_coarse)
    assert np.all(fset.fields[..., 0] == 1.0)
    assert np.all(fset.fields[..., 1] == 0.0)


def test_hertzian_dipole_pattern(grid_coarse):
    geom = linear_array(1, 0.1, 1e9)
    fset = synth_element_fields(geom, ElementModel("hertzian-dipole"), grid_coarse)
    np.testing.assert_allclose(np.abs(fset.fields[0, :, 0]), np.sin(grid_coarse.point_theta), atol=1e-15)
    assert np.all(fset.fields[0, :, 1] == 0)


def test_half_wave_dipole_pattern(grid_coarse):
    geom = linear_array(1, 0.1, 1e9)
    fset = synth_element_fields(geom, ElementModel("half-wave-dipole"), grid_coarse)
    t = grid_coarse.point_theta
    np.testing.assert_allclose(np.abs(fset.fields[0, :, 0]), np.cos(np.pi / 2 * np.cos(t)) / np.sin(t), atol=1e-14)


def test_tilted_dipole_field_is_transverse():
    # axis along x: field magnitude = sin of angle to x
    g = make_angular_grid(12, 16)
    geom = linear_array(1, 0.1, 1e9)
    fset = synth_element_fields(geom, ElementModel("hertzian-dipole", (1.0, 0.0, 0.0)), g)
    mag = np.linalg.norm(fset.fields[0], axis=-1)
    cosg = np.sin(g.point_theta) * np.cos(g.point_phi)
    np.testing.assert_allclose(mag, np.sqrt(1 - cosg**2), atol=1e-14)


def test_endfire_phase_difference():
    d = 0.1
    geom = linear_array(2, d, 1e9)
    fset = synth_element_fields(geom, ElementModel("isotropic"), make_angular_grid(4, 8))
    e = fset.at(np.pi / 2, 0.0)[:, 0]
    assert np.angle(e[1] / e[0]) == pytest.approx(2 * np.pi * d)


def test_distortion_unit_rms():
    dist = random_distortion(5, level=0.05, seed=3)
    g = make_angular_grid(20, 40)
    g_vals = (dist.factor(g.point_theta, g.point_phi) - 1.0) / 0.05
    rms = np.sqrt(g.integrate(np.abs(g_vals) ** 2) / FOUR_PI)
    np.testing.assert_allclose(rms, 1.0, rtol=1e-12)


def test_distort_is_seeded(dipole_pair):
    _, _, fset = dipole_pair
    a, b = distort(fset, 0.05, 7), distort(fset, 0.05, 7)
    np.testing.assert_array_equal(a.fields, b.fields)
    assert not np.allclose(a.fields, distort(fset, 0.05, 8).fields)
    with pytest.raises(ValueError):
        distort(a, 0.05, 1)


# ---------------------------------------------------------------- field matrix


def test_row_layout_interleaves_components(grid_coarse):
    geom = linear_array(2, 0.3, 1e9)
    fset = synth_element_fields(geom, ElementModel("hertzian-dipole", (1.0, 0.0, 0.0)), grid_coarse)
    A = build_field_matrix(fset, (np.pi / 2, 0.0))
    w = np.sqrt(grid_coarse.weights_sr)
    p = 5
    np.testing.assert_allclose(A.E[2 * p], w[p] * fset.fields[:, p, 0])
    np.testing.assert_allclose(A.E[2 * p + 1], w[p] * fset.fields[:, p, 1])


def test_isotropic_steering_unit_magnitude(grid_coarse):
    geom = linear_array(3, 0.25, 1e9)
    fset = synth_element_fields(geom, ElementModel("isotropic"), grid_coarse)
    A = build_field_matrix(fset, (1.0, 2.0))
    np.testing.assert_allclose(np.abs(A.E0), 1.0)


def test_isotropic_gram_is_sinc(grid_1deg):
    d = 0.1
    geom = linear_array(2, d, 1.6e9)
    A = build_field_matrix(synth_element_fields(geom, ElementModel("isotropic"), grid_1deg), (np.pi / 2, 0))
    G = A.gram
    assert abs(G[0, 1] / G[0, 0] - sinc(2 * np.pi * d)) < 1e-3
    np.testing.assert_allclose(np.abs(G - G.conj().T).max(), 0, atol=1e-12)


@pytest.mark.parametrize("M", [2, 4, 6])
def test_half_wave_spacing_gram_is_diagonal(M, grid_1deg):
    geom = linear_array(M, 0.5, 1.6e9)
    A = build_field_matrix(synth_element_fields(geom, ElementModel("isotropic"), grid_1deg), (np.pi / 2, 0))
    np.testing.assert_allclose(A.gram, FOUR_PI * np.eye(M), atol=0.01 * FOUR_PI)


def test_gram_convergence_under_midpoint_rule():
    # second-order plain rule; the default Fejer rule is already at round-off
    d = 0.3
    geom = linear_array(2, d, 1e9)
    exact = FOUR_PI * sinc(2 * np.pi * d)
    err = {}
    for l, rule in ((180, "midpoint"), (360, "midpoint"), (180, "fejer")):
        g = make_angular_grid(l, 2 * l, rule)
        A = build_field_matrix(synth_element_fields(geom, ElementModel("isotropic"), g), (np.pi / 2, 0))
        err[l, rule] = abs(A.gram[0, 1] - exact)
    assert err[360, "midpoint"] <= err[180, "midpoint"] / 3.9
    assert err[180, "fejer"] < 1e-12


def test_phi_polarization_rejected_at_pole(dipole_pair):
    _, _, fset = dipole_pair
    with pytest.raises(ValueError):
        build_field_matrix(fset, (0.0, 0.0), "phi")
    with pytest.raises(ValueError):
        build_field_matrix(fset, (4.0, 0.0))


@given(st.lists(st.complex_numbers(max_magnitude=10, allow_nan=False, allow_infinity=False), min_size=3, max_size=3))
def test_power_matches_weighted_sum(coeffs):
    b = np.array(coeffs)
    g = make_angular_grid(16, 32)
    geom = linear_array(3, 0.15, 1e9)
    fset = distort(synth_element_fields(geom, ElementModel("hertzian-dipole", (0.0, 0.6, 0.8)), g), 0.1, 2)
    A = build_field_matrix(fset, (1.2, 0.4))
    tot = np.einsum("i,ipc->pc", b, fset.fields)
    direct = g.integrate(np.sum(np.abs(tot) ** 2, axis=-1))
    assert A.power(b) >= 0
    assert A.power(b) == pytest.approx(direct, rel=1e-10, abs=1e-12)


# ---------------------------------------------------------------- persistence


def test_save_load_round_trip_exact(tmp_path, grid_coarse):
    geom = linear_array(2, 0.2, 1.6e9)
    fset = distort(synth_element_fields(geom, ElementModel("half-wave-dipole"), grid_coarse), 0.05, 1)
    save_field_set(fset, tmp_path)
    back = load_field_set(tmp_path)
    np.testing.assert_array_equal(back.fields, fset.fields)
    assert back.frequency_hz == fset.frequency_hz
    manifest = json.loads((tmp_path / "manifest.json").read_text())
    assert manifest == {"frequency_hz": 1.6e9, "grid": "midpoint-theta-major", "l": 24, "num_elements": 2, "q": 48}
    raw = (tmp_path / "element_000.csv").read_bytes()
    assert raw.startswith(b"theta_deg,phi_deg,re_etheta,im_etheta,re_ephi,im_ephi\n")
    assert b"\r" not in raw


def test_loaded_set_uses_nearest_sample(tmp_path):
    g = make_angular_grid(18, 36)
    fset = synth_element_fields(linear_array(2, 0.2, 1e9), ElementModel("isotropic"), g)
    save_field_set(fset, tmp_path)
    back = load_field_set(tmp_path)
    p = 4 * 36 + 7
    np.testing.assert_array_equal(back.at(g.point_theta[p] + 0.01, g.point_phi[p] - 0.01), fset.fields[:, p])


@pytest.fixture
def saved(tmp_path):
    g = make_angular_grid(4, 8)
    fset = synth_element_fields(linear_array(2, 0.2, 1e9), ElementModel("isotropic"), g)
    save_field_set(fset, tmp_path)
    return tmp_path


def _edit(path, fn):
    lines = path.read_text().splitlines()
    path.write_text("\n".join(fn(lines)) + "\n")


def test_missing_row(saved):
    _edit(saved / "element_001.csv", lambda ls: ls[:-1])
    with pytest.raises(FieldFormatError, match="row count mismatch"):
        load_field_set(saved)


def test_extra_row(saved):
    _edit(saved / "element_000.csv", lambda ls: ls + [ls[-1]])
    with pytest.raises(FieldFormatError, match="row count mismatch") as exc:
        load_field_set(saved)
    assert exc.value.line == 34


def test_element_count_mismatch(saved):
    m = json.loads((saved / "manifest.json").read_text())
    m["num_elements"] = 3
    (saved / "manifest.json").write_text(json.dumps(m))
    with pytest.raises(FieldFormatError, match="element count mismatch"):
        load_field_set(saved)


def test_malformed_header(saved):
    _edit(saved / "element_000.csv", lambda ls: ["theta,phi"] + ls[1:])
    with pytest.raises(FieldFormatError, match="malformed header") as exc:
        load_field_set(saved)
    assert exc.value.line == 1


@pytest.mark.parametrize("bad,msg", [("nan", "non-finite"), ("inf", "non-finite"), ("x1", "non-numeric")])
def test_bad_value_names_line(saved, bad, msg):
    def corrupt(ls):
        cols = ls[5].split(",")
        cols[3] = bad
        ls[5] = ",".join(cols)
        return ls
    _edit(saved / "element_000.csv", corrupt)
    with pytest.raises(FieldFormatError, match=msg) as exc:
        load_field_set(saved)
    assert exc.value.line == 6
    assert ":6:" in str(exc.value)


def test_manifest_missing_key(saved):
    m = json.loads((saved / "manifest.json").read_text())
    del m["q"]
    (saved / "manifest.json").write_text(json.dumps(m))
    with pytest.raises(FieldFormatError, match="'q'"):
        load_field_set(saved)


def test_field_set_shape_validation(grid_coarse):
    with pytest.raises(ValueError):
        ElementFieldSet(grid_coarse, np.zeros((2, 5, 2)), 1e9)
    bad = np.zeros((1, grid_coarse.size, 2), complex)
    bad[0, 0, 0] = math.nan
    with pytest.raises(ValueError):
        ElementFieldSet(grid_coarse, bad, 1e9)

"""Steering vectors, constrained weights, power correction, normalization.

The minimum-norm weights are checked against a dense pseudo-inverse
oracle: w = C (C^H C)^(-1) f computed independently of the production
least-squares path.
"""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nullsim.beamforming import (
    SPEED_OF_LIGHT_MPS,
    ArrayGeometry,
    BsConfig,
    DegenerateConstraintsError,
    build_weight_matrix,
    floor_power_report,
    lcmv_weights,
    normalize,
    power_correct,
    steering_vector,
)
from nullsim.phy_grid import LteGrid, WifiGrid, build_rb_sc_map


def half_wave_geometry(k):
    # spacing chosen so d/lambda is exactly 0.5
    f = 2.412e9
    return ArrayGeometry(k_antennas=k, spacing_m=0.5 * SPEED_OF_LIGHT_MPS / f, carrier_freq_hz=f)


def pinv_oracle(geom, beam_deg, null_degs):
    cols = [steering_vector(geom, beam_deg)]
    cols += [steering_vector(geom, a) for a in null_degs]
    c = np.column_stack(cols)
    f = np.zeros(c.shape[1], dtype=complex)
    f[0] = 1.0
    return c @ np.linalg.inv(c.conj().T @ c) @ f


def draw_separated_angles(rng, count, min_sin_gap=0.05):
    """Random angles whose sines are pairwise separated (full-rank constraints)."""
    while True:
        angles = rng.uniform(-90.0, 90.0, size=count)
        sins = np.sin(np.radians(angles))
        if count == 1 or np.min(np.diff(np.sort(sins))) >= min_sin_gap:
            return angles


# ---------------------------------------------------------------------------
# steering


def test_broadside_steering_is_all_ones(geom8):
    assert np.allclose(steering_vector(geom8, 0.0), np.ones(8))


def test_half_wave_endfire_alternates_sign():
    a = steering_vector(half_wave_geometry(2), 90.0)
    assert np.allclose(a, [1.0, -1.0], atol=1e-12)


def test_default_spacing_ratio():
    # 0.0718 m at 2.412 GHz, frozen to 7 decimals
    assert ArrayGeometry().spacing_wavelengths == pytest.approx(0.5776716, abs=1e-7)


@settings(max_examples=60, deadline=None)
@given(
    theta=st.floats(min_value=-90.0, max_value=90.0),
    k=st.integers(min_value=2, max_value=10),
)
def test_steering_reference_element_and_modulus(theta, k):
    a = steering_vector(ArrayGeometry(k_antennas=k), theta)
    assert a[0] == 1.0 + 0j
    assert np.allclose(np.abs(a), 1.0)


def test_steering_angle_out_of_range(geom4):
    with pytest.raises(ValueError):
        steering_vector(geom4, 90.5)


def test_geometry_validation():
    with pytest.raises(ValueError):
        ArrayGeometry(k_antennas=1)
    with pytest.raises(ValueError):
        ArrayGeometry(spacing_m=0.0)
    with pytest.raises(ValueError):
        BsConfig(tx_power=0.0)


# ---------------------------------------------------------------------------
# constrained weights


def test_beam_only_weights_are_matched_filter(geom8):
    w = lcmv_weights(geom8, 33.0, [])
    assert np.allclose(w, steering_vector(geom8, 33.0) / 8)


def test_two_antenna_broadside_beam_endfire_null():
    w = lcmv_weights(half_wave_geometry(2), 0.0, [90.0])
    assert np.allclose(w, [0.5, 0.5], atol=1e-12)


def test_constraints_hold_on_random_draws(rng):
    geom = ArrayGeometry(k_antennas=8)
    for _ in range(50):
        angles = draw_separated_angles(rng, 5)
        beam, nulls = angles[0], angles[1:]
        w = lcmv_weights(geom, beam, nulls)
        assert abs(np.vdot(w, steering_vector(geom, beam)) - 1.0) < 1e-10
        for a in nulls:
            assert abs(np.vdot(w, steering_vector(geom, a))) < 1e-10


def test_minimum_norm_matches_pinv_oracle(rng):
    for k in (2, 4, 8):
        geom = ArrayGeometry(k_antennas=k)
        for _ in range(25):
            angles = draw_separated_angles(rng, min(k - 1, 4))
            w = lcmv_weights(geom, angles[0], angles[1:])
            assert np.allclose(w, pinv_oracle(geom, angles[0], angles[1:]), atol=1e-8)


def test_null_on_beam_is_degenerate(geom4):
    with pytest.raises(DegenerateConstraintsError):
        lcmv_weights(geom4, 10.0, [10.0])


def test_nearly_coincident_nulls_are_degenerate(geom4):
    with pytest.raises(DegenerateConstraintsError):
        lcmv_weights(geom4, 0.0, [30.0, 30.0 + 1e-10])


def test_too_many_constraints_rejected():
    geom = half_wave_geometry(2)
    with pytest.raises(ValueError):
        lcmv_weights(geom, 0.0, [30.0, -30.0])


# ---------------------------------------------------------------------------
# normalize


def test_normalize_examples():
    assert np.allclose(normalize(np.array([3.0, 4.0j])), [0.6, 0.8j])
    unit = np.array([1.0 + 0j, 0.0])
    assert np.allclose(normalize(unit), unit)


def test_normalize_zero_vector():
    with pytest.raises(ValueError):
        normalize(np.zeros(4, dtype=complex))


@settings(max_examples=40, deadline=None)
@given(st.lists(st.floats(min_value=-5, max_value=5), min_size=2, max_size=6))
def test_normalize_idempotent(values):
    v = np.array(values, dtype=complex)
    if np.linalg.norm(v) < 1e-6:
        v[0] += 1.0
    once = normalize(v)
    assert np.linalg.norm(once) == pytest.approx(1.0, abs=1e-9)
    assert np.allclose(normalize(once), once)


# ---------------------------------------------------------------------------
# power correction


def flat_report(k, n_sc, value=1.0):
    return np.full((k, n_sc), value)


def test_equal_path_powers_leave_weights_unchanged(rb_map):
    w = np.array([1 + 1j, 2.0, 0.5j, -1.0])
    out = power_correct(w, flat_report(4, 64), rb_map, 10)
    assert np.allclose(out, w)


def test_power_correction_ratio(rb_map):
    report = flat_report(2, 64)
    s = rb_map[7]
    report[0, s], report[1, s] = 4.0, 1.0
    out = power_correct(np.array([1.0 + 0j, 1.0]), report, rb_map, 7)
    assert out[0] == pytest.approx(1.0)
    assert out[1] == pytest.approx(2.0)


@settings(max_examples=30, deadline=None)
@given(scale=st.floats(min_value=1e-3, max_value=1e3))
def test_correction_invariant_to_global_report_scale(scale):
    rb_map = build_rb_sc_map(LteGrid(), WifiGrid())
    rng = np.random.default_rng(5)
    report = rng.uniform(0.1, 10.0, size=(4, 64))
    w = rng.standard_normal(4) + 1j * rng.standard_normal(4)
    assert np.allclose(
        power_correct(w, report, rb_map, 33),
        power_correct(w, scale * report, rb_map, 33),
    )


def test_report_flooring():
    report = np.zeros((2, 4))
    floored = floor_power_report(report)
    assert np.all(floored > 0)
    with pytest.raises(ValueError):
        floor_power_report(np.array([[-1.0, 1.0]]))
    with pytest.raises(ValueError):
        floor_power_report(np.ones(4))


def test_correction_shape_errors(rb_map):
    with pytest.raises(ValueError):
        power_correct(np.ones(3, dtype=complex), flat_report(4, 64), rb_map, 0)
    with pytest.raises(IndexError):
        power_correct(np.ones(4, dtype=complex), flat_report(4, 2), rb_map, 99)


# ---------------------------------------------------------------------------
# weight matrix


def test_matrix_without_report_replicates_one_column(geom4, lte):
    m = build_weight_matrix(geom4, 12.0, (t := (-40.0, 55.0)), lte.n_rrb)
    expected = np.conj(normalize(lcmv_weights(geom4, 12.0, t)))
    assert m.shape == (4, 100)
    assert np.allclose(m, expected[:, None])


def test_matrix_with_flat_report_equals_no_report(geom4, lte, rb_map):
    plain = build_weight_matrix(geom4, 5.0, (30.0,), lte.n_rrb)
    corrected = build_weight_matrix(
        geom4, 5.0, (30.0,), lte.n_rrb, report=flat_report(4, 64, 2.5), rb_sc_map=rb_map
    )
    assert np.allclose(plain, corrected)


def test_all_columns_unit_norm(geom8, lte, rb_map, rng):
    report = rng.uniform(0.2, 5.0, size=(8, 64))
    m = build_weight_matrix(geom8, -17.0, (42.0,), lte.n_rrb, report=report, rb_sc_map=rb_map)
    assert np.allclose(np.linalg.norm(m, axis=0), 1.0, atol=1e-9)


def test_selective_report_changes_columns_at_map_boundaries():
    # two subcarriers: lower-half blocks map to sc 0, upper half to sc 1
    lte, wifi = LteGrid(), WifiGrid(n_sc=2)
    rb_map = build_rb_sc_map(lte, wifi)
    geom = ArrayGeometry(k_antennas=4)
    report = np.array([[1.0, 1.0], [1.0, 4.0], [1.0, 1.0], [1.0, 1.0]])
    m = build_weight_matrix(geom, 0.0, (50.0,), lte.n_rrb, report=report, rb_sc_map=rb_map)
    boundary = rb_map.rb_to_sc.index(1)
    left, right = m[:, boundary - 1], m[:, boundary]
    assert np.allclose(m[:, : boundary], left[:, None])
    assert np.allclose(m[:, boundary :], right[:, None])
    assert not np.allclose(left, right)


def test_matrix_argument_validation(geom4, lte, rb_map):
    with pytest.raises(ValueError):
        build_weight_matrix(geom4, 0.0, (), 0)
    with pytest.raises(ValueError):
        build_weight_matrix(geom4, 0.0, (), lte.n_rrb, report=flat_report(4, 64))
    with pytest.raises(ValueError):
        build_weight_matrix(geom4, 0.0, (), lte.n_rrb, rb_sc_map=rb_map)

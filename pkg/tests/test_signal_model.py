import numpy as np
import numpy.testing as npt
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from jointdoa.signal_model import (ArrayGeometry, CsiMatrix, NoiseSpec, PathSet,
                                   SubcarrierGrid, add_noise, delay_vector,
                                   steering_derivative, steering_vector, synthesize_csi)

angles = st.floats(-10.0, 10.0, allow_nan=False)
delays = st.floats(0.0, 3e-6, allow_nan=False)


@st.composite
def geometries(draw):
    M = draw(st.integers(1, 12))
    coords = draw(st.lists(st.floats(-3, 3, allow_nan=False), min_size=2 * M, max_size=2 * M))
    return ArrayGeometry(np.reshape(coords, (M, 2)))


def test_uca_first_sensor_at_zero_azimuth():
    a = steering_vector(ArrayGeometry.uca(16, 1.5), 0.0)
    assert a[0] == pytest.approx(-1.0, abs=1e-12)


def test_single_sensor_at_origin():
    geom = ArrayGeometry(np.zeros((1, 2)))
    npt.assert_allclose(steering_vector(geom, 1.234), [1.0])
    npt.assert_allclose(steering_derivative(geom, 1.234), [0.0])


def test_uca_layout():
    geom = ArrayGeometry.uca(4, 2.0)
    npt.assert_allclose(geom.positions, [[2, 0], [0, 2], [-2, 0], [0, -2]], atol=1e-12)


def test_steering_matrix_columns_match_vectors(uca16):
    th = np.array([0.1, 2.0, 5.5])
    A = steering_vector(uca16, th)
    for i, t in enumerate(th):
        npt.assert_allclose(A[:, i], steering_vector(uca16, t))


@given(geometries(), angles)
def test_steering_unit_modulus(geom, theta):
    npt.assert_allclose(np.abs(steering_vector(geom, theta)), 1.0, rtol=1e-12)


@given(angles)
def test_steering_periodic(theta):
    geom = ArrayGeometry.uca(16, 1.5)
    npt.assert_allclose(steering_derivative(geom, theta),
                        steering_derivative(geom, theta + 2 * np.pi), atol=1e-9)
    npt.assert_allclose(steering_vector(geom, theta),
                        steering_vector(geom, theta + 2 * np.pi), atol=1e-9)


def test_derivative_matches_finite_difference_uca16():
    geom, theta, h = ArrayGeometry.uca(16, 1.5), 0.5, 1e-6
    fd = (steering_vector(geom, theta + h) - steering_vector(geom, theta - h)) / (2 * h)
    npt.assert_allclose(steering_derivative(geom, theta), fd, rtol=0, atol=1e-6)


def test_derivative_matches_finite_difference_random():
    rng = np.random.default_rng(11)
    h = 1e-6
    for _ in range(100):
        M = rng.integers(1, 17)
        geom = ArrayGeometry(rng.uniform(-2, 2, (M, 2)))
        theta = rng.uniform(0, 2 * np.pi)
        fd = (steering_vector(geom, theta + h) - steering_vector(geom, theta - h)) / (2 * h)
        npt.assert_allclose(steering_derivative(geom, theta), fd, rtol=0, atol=1e-6)


def test_grid_frequencies_centred():
    grid = SubcarrierGrid(5e9, 1e3, 4)
    npt.assert_allclose(grid.omega, 2 * np.pi * 1e3 * np.array([-1.5, -0.5, 0.5, 1.5]))


def test_wifi_grid_layout(wifi):
    assert wifi.K == 114 and wifi.total_bins == 128
    npt.assert_allclose(np.sort(wifi.omega), -np.sort(wifi.omega)[::-1])
    assert wifi.tau_max == pytest.approx(3.2e-6)


@pytest.mark.parametrize("bins", [[3, 2], [0, 200], [], [-1, 2]])
def test_grid_rejects_bad_bins(bins):
    with pytest.raises(ValueError):
        SubcarrierGrid(5e9, 1e3, 8, np.array(bins))


def test_grid_rejects_nonpositive_spacing():
    with pytest.raises(ValueError):
        SubcarrierGrid(5e9, 0.0, 8)


def test_delay_vector_zero_delay(wifi):
    npt.assert_array_equal(delay_vector(wifi, 0.0), np.ones(wifi.K))


@given(delays)
def test_delay_vector_unit_modulus_and_conjugate_pairs(tau):
    grid = SubcarrierGrid.wifi_ht40()
    t = delay_vector(grid, tau)
    npt.assert_allclose(np.abs(t), 1.0, rtol=1e-12)
    # active bins are symmetric about the centre, so bin i pairs with K-1-i
    npt.assert_allclose(t, np.conj(t[::-1]), atol=1e-9)


def test_pathset_validation():
    with pytest.raises(ValueError):
        PathSet([], [], [])
    with pytest.raises(ValueError):
        PathSet([0.1], [-1e-9], [1.0])
    with pytest.raises(ValueError):
        PathSet([0.1, 0.2], [0.0], [1.0])
    assert PathSet([-0.5], [0.0], [1.0]).theta[0] == pytest.approx(2 * np.pi - 0.5)


def test_synth_single_path_is_steering_vector(uca16, wifi):
    csi = synthesize_csi(uca16, wifi, None, PathSet([0.7], [0.0], [1.0]))
    npt.assert_allclose(csi.data, np.repeat(steering_vector(uca16, 0.7)[:, None], wifi.K, 1))


def test_synth_zero_gains(uca16, wifi):
    csi = synthesize_csi(uca16, wifi, None, PathSet([0.7, 1.0], [1e-8, 2e-8], [0, 0]))
    assert not np.any(csi.data)


def test_synth_same_angle_two_delays(uca16, wifi):
    b1, b2, t1, t2 = 0.5 + 0.2j, -0.3j, 20e-9, 70e-9
    csi = synthesize_csi(uca16, wifi, None, PathSet([1.1, 1.1], [t1, t2], [b1, b2]))
    expected = np.outer(steering_vector(uca16, 1.1),
                        b1 * delay_vector(wifi, t1) + b2 * delay_vector(wifi, t2))
    npt.assert_allclose(csi.data, expected, atol=1e-12)


def test_synth_uses_spectrum(uca16, wifi):
    rng = np.random.default_rng(0)
    S = rng.standard_normal(wifi.K) + 1j * rng.standard_normal(wifi.K)
    p = PathSet([0.4], [3e-8], [1.0])
    npt.assert_allclose(synthesize_csi(uca16, wifi, S, p).data,
                        synthesize_csi(uca16, wifi, None, p).data * S)


@settings(max_examples=30)
@given(st.lists(st.tuples(angles, delays, st.complex_numbers(max_magnitude=3)),
                min_size=1, max_size=3),
       st.lists(st.tuples(angles, delays, st.complex_numbers(max_magnitude=3)),
                min_size=1, max_size=3))
def test_synth_linear_in_paths(first, second):
    geom, grid = ArrayGeometry.uca(8, 1.0), SubcarrierGrid(5e9, 312.5e3, 32)
    p1, p2 = PathSet.from_records(first), PathSet.from_records(second)
    both = PathSet.from_records(first + second)
    lhs = synthesize_csi(geom, grid, None, both).data
    rhs = synthesize_csi(geom, grid, None, p1).data + synthesize_csi(geom, grid, None, p2).data
    npt.assert_allclose(lhs, rhs, atol=1e-9)


def test_csi_shape_checked(uca16, wifi):
    with pytest.raises(ValueError):
        CsiMatrix(np.zeros((15, wifi.K)), uca16, wifi)


def test_noise_spec_requires_one_form():
    with pytest.raises(ValueError):
        NoiseSpec()
    with pytest.raises(ValueError):
        NoiseSpec(sigma2=1.0, snr_db=3.0)
    with pytest.raises(ValueError):
        NoiseSpec(sigma2=-1.0)


def test_snr_conversion_exact(uca16, wifi, two_paths):
    clean = synthesize_csi(uca16, wifi, None, two_paths)
    power = np.mean(np.abs(clean.data) ** 2)
    assert NoiseSpec(snr_db=10.0).variance(clean) == pytest.approx(power / 10.0, rel=1e-14)
    assert NoiseSpec(sigma2=0.25).variance(clean) == 0.25


def test_add_noise_zero_variance_is_identity(uca16, wifi, two_paths):
    clean = synthesize_csi(uca16, wifi, None, two_paths)
    npt.assert_array_equal(add_noise(clean, NoiseSpec(sigma2=0.0), 1).data, clean.data)


def test_add_noise_deterministic(uca16, wifi, two_paths):
    clean = synthesize_csi(uca16, wifi, None, two_paths)
    a = add_noise(clean, NoiseSpec(snr_db=5.0), 42).data
    b = add_noise(clean, NoiseSpec(snr_db=5.0), 42).data
    npt.assert_array_equal(a, b)
    assert not np.array_equal(a, add_noise(clean, NoiseSpec(snr_db=5.0), 43).data)


def test_add_noise_variance(uca16, wifi):
    zero = CsiMatrix(np.zeros((16, wifi.K)), uca16, wifi)
    w = add_noise(zero, NoiseSpec(sigma2=1.0), 2024).data
    assert abs(np.mean(np.abs(w) ** 2) - 1.0) < 0.05
    # circular: real and imaginary parts each carry half the variance
    assert abs(np.var(w.real) - 0.5) < 0.05 and abs(np.var(w.imag) - 0.5) < 0.05

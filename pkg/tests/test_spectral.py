import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fastboltz.spectral import (band_modes, extract_band, forward_transform,
                                insert_band, inverse_transform)
from fastboltz.velocity import VelocityGrid


@pytest.fixture(scope="module")
def g16():
    return VelocityGrid(2, 16, 8.0)


def test_constant_field_single_mode(g16):
    spec = forward_transform(np.full(g16.shape, 3.5), g16)
    assert spec[0, 0] == pytest.approx(3.5)
    spec[0, 0] = 0.0
    assert np.abs(spec).max() <= 1e-14


def test_single_cosine_two_modes(g16):
    v = np.broadcast_to(g16.component(0), g16.shape)
    spec = forward_transform(np.cos(np.pi * v / g16.L), g16)
    assert spec[1, 0] == pytest.approx(0.5, abs=1e-13)
    assert spec[-1, 0] == pytest.approx(0.5, abs=1e-13)
    spec[1, 0] = spec[-1, 0] = 0.0
    assert np.abs(spec).max() <= 1e-13


def test_round_trip_on_band_limited_data(g16):
    rng = np.random.default_rng(2)
    f = inverse_transform(forward_transform(
        rng.normal(size=g16.shape), g16), g16)
    f2 = inverse_transform(forward_transform(f, g16), g16)
    assert np.abs(f - f2).max() <= 1e-12


def test_zero_mode_is_normalized_mass(g16):
    rng = np.random.default_rng(3)
    f = rng.uniform(0.1, 1.0, size=g16.shape)
    spec = forward_transform(f, g16)
    assert spec[0, 0].real * (2 * g16.L) ** 2 == pytest.approx(g16.mass(f))
    assert abs(spec[0, 0].imag) <= 1e-15


@settings(max_examples=20, deadline=None)
@given(seed=st.integers(0, 10**6))
def test_hermitian_symmetry_of_real_data(seed):
    g = VelocityGrid(2, 8, 8.0)
    f = np.random.default_rng(seed).normal(size=g.shape)
    spec = forward_transform(f, g)
    n = g.n
    for k1 in range(-3, 4):
        for k2 in range(-3, 4):
            assert spec[k1 % n, k2 % n] == pytest.approx(
                np.conj(spec[-k1 % n, -k2 % n]), abs=1e-12)


def test_band_extraction_round_trip(g16):
    rng = np.random.default_rng(4)
    spec = forward_transform(rng.normal(size=g16.shape), g16)
    coeffs = extract_band(spec, g16)
    assert coeffs.shape == (15 * 15,)
    back = insert_band(coeffs, g16)
    assert np.abs(back - spec).max() == 0.0


def test_band_modes_cover_expected_range(g16):
    modes = band_modes(g16)
    assert modes.shape == (225, 2)
    assert modes.min() == -7 and modes.max() == 7

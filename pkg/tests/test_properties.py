"""Property-based checks of conversions and quadrature helpers."""
import math

import numpy as np
from hypothesis import given, settings, strategies as st

from thomsonwp.radiation import linear_band_weights
from thomsonwp.units import (AngularSpectralGrid, Direction, UnitSystem, a0_from_intensity,
                             intensity_from_a0)

finite = dict(allow_nan=False, allow_infinity=False)


@given(st.floats(1e10, 1e24), st.floats(100, 1e4))
def test_intensity_round_trip(i, lam):
    assert math.isclose(intensity_from_a0(a0_from_intensity(i, lam), lam), i, rel_tol=1e-12)


@given(st.floats(1e10, 1e22), st.floats(1.01, 100))
def test_a0_scales_as_sqrt_intensity(i, k):
    assert math.isclose(a0_from_intensity(k * i, 800) / a0_from_intensity(i, 800), math.sqrt(k),
                        rel_tol=1e-12)


@given(st.floats(200, 5000), st.floats(1e-3, 1e3))
def test_unit_round_trips(lam, x):
    u = UnitSystem(lam)
    assert math.isclose(u.time_to_si(u.time_to_norm(x)), x, rel_tol=1e-13)
    assert math.isclose(u.norm_to_fs(u.fs_to_norm(x)), x, rel_tol=1e-13)
    assert math.isclose(u.wavelength_nm_to_omega(u.omega_to_wavelength_nm(x)), x, rel_tol=1e-13)


@given(st.floats(0, math.pi), st.floats(0, 2 * math.pi, exclude_max=True))
def test_unit_vectors_are_normalized(th, ph):
    v = Direction(th, ph).unit_vector()
    assert math.isclose(v @ v, 1.0, rel_tol=1e-14)


@settings(max_examples=60)
@given(st.lists(st.floats(0, 10, **finite), min_size=2, max_size=30, unique=True),
       st.floats(0, 1), st.floats(0, 1), st.floats(0, 1))
def test_band_weights_are_additive(xs, u, v, s):
    x = np.sort(np.array(xs))
    if np.any(np.diff(x) <= 1e-9):
        return
    lo = x[0] + min(u, v) * (x[-1] - x[0])
    hi = x[0] + max(u, v) * (x[-1] - x[0])
    mid = lo + s * (hi - lo)
    w = linear_band_weights(x, lo, hi)
    np.testing.assert_allclose(w, linear_band_weights(x, lo, mid) + linear_band_weights(x, mid, hi),
                               atol=1e-12 * (x[-1] - x[0] + 1))
    assert math.isclose(w.sum(), hi - lo, rel_tol=1e-9, abs_tol=1e-12)
    assert np.all(w >= -1e-15)


@settings(max_examples=25)
@given(st.integers(1, 40), st.integers(1, 40))
def test_sphere_weights_sum_to_4pi(nt, nphi):
    g = AngularSpectralGrid.sphere(nt, nphi, 3)
    assert math.isclose(g.solid_angle_weights.sum(), 4 * math.pi, rel_tol=1e-12)

"""The compiled kernels and their pure-Python twins must agree."""
import math

import numpy as np
import pytest

from thomsonwp import _backend
from thomsonwp.dynamics import ElectronState, push_trajectory
from thomsonwp.laser import MODEL_CODES, BeamConfig
from thomsonwp.radiation import amplitudes
from thomsonwp.units import AngularSpectralGrid

cython = pytest.mark.skipif(_backend.NAME != "cython", reason="compiled kernels not built")


@cython
@pytest.mark.parametrize("model", ["plane_infinite", "plane_pulsed", "focused_pulsed"])
def test_field_kernels_agree(model, rng):
    b = BeamConfig(model=model, peak_intensity_W_cm2=5e18)
    params = b.kernel_params()
    for _ in range(50):
        x, y, z, t = rng.uniform(-30, 30, 4)
        e1, b1 = _backend.get("cython").field_at(MODEL_CODES[model], params, x, y, z, t)
        e2, b2 = _backend.get("python").field_at(MODEL_CODES[model], params, x, y, z, t)
        np.testing.assert_allclose(e1, e2, rtol=1e-13, atol=1e-15)
        np.testing.assert_allclose(b1, b2, rtol=1e-13, atol=1e-15)


@cython
def test_pusher_agrees():
    b = BeamConfig(model="focused_pulsed", peak_intensity_W_cm2=1e19, fwhm_fs=5)
    init = ElectronState(np.array([0.0, 1.0, 0.5]), np.zeros(3), -2 * b.fwhm)
    dt = 2 * math.pi / 200
    t1 = push_trajectory(b, init, 2 * b.fwhm, dt, backend="cython")
    t2 = push_trajectory(b, init, 2 * b.fwhm, dt, backend="python")
    np.testing.assert_allclose(t1.r, t2.r, rtol=1e-11, atol=1e-11)
    np.testing.assert_allclose(t1.p, t2.p, rtol=1e-11, atol=1e-11)


@cython
def test_farfield_agrees():
    from thomsonwp.radiation import oscillator_trajectory
    tr = oscillator_trajectory(beta0=0.3, tau=6.0)
    g = AngularSpectralGrid.sphere(5, 4, 33, omega_min=0.05, omega_max=4.0)
    nv = g.unit_vectors().reshape(-1, 3)
    a1 = amplitudes(tr, nv, g.omegas, backend="cython", threads=1)
    a2 = amplitudes(tr, nv, g.omegas, backend="python", threads=1)
    scale = np.abs(a1).max()
    assert np.abs(a1 - a2).max() < 1e-10 * scale
    # non-uniform frequencies take the direct-phasor path in both
    om = np.array([1e-6, 0.3, 0.31, 2.0])
    a1 = amplitudes(tr, nv, om, backend="cython", threads=1)
    a2 = amplitudes(tr, nv, om, backend="python", threads=1)
    assert np.abs(a1 - a2).max() < 1e-10 * np.abs(a1).max()


def test_unknown_backend():
    with pytest.raises(ValueError):
        _backend.get("fortran")

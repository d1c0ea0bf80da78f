"""Driving laser fields: infinite plane wave, pulsed plane wave, focused pulsed Gaussian beam.

All beams propagate along +x and are polarized along z.  Positions and times are
normalized (1/k0, 1/omega0); fields are in units of a0.  The carrier is written
as Re[... exp(-i(eta + carrier_phase))] with the retarded phase eta = t - x, so
``carrier_phase = 0`` puts a cosine crest at the envelope peak (x = 0, t = 0).
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError
from .units import UnitSystem, a0_from_intensity

MODELS = ("plane_infinite", "plane_pulsed", "focused_pulsed")
MODEL_CODES = {name: i for i, name in enumerate(MODELS)}


@dataclass(frozen=True)
class BeamConfig:
    model: str = "focused_pulsed"
    wavelength_nm: float = 800.0
    peak_intensity_W_cm2: float = 1e19
    fwhm_fs: float = 35.0
    waist_over_lambda: float = 3.0
    carrier_phase: float = 0.0

    def __post_init__(self):
        if self.model not in MODELS:
            raise ConfigError(f"unknown beam model {self.model!r}; expected one of {MODELS}",
                              key="beam.model")
        if not self.wavelength_nm > 0:
            raise ConfigError("wavelength_nm must be positive", key="beam.wavelength_nm")
        if not self.peak_intensity_W_cm2 > 0:
            raise ConfigError("peak_intensity_W_cm2 must be positive",
                              key="beam.peak_intensity_W_cm2")
        if self.model != "plane_infinite" and not self.fwhm_fs > 0:
            raise ConfigError("fwhm_fs must be positive for pulsed models", key="beam.fwhm_fs")
        if self.model == "focused_pulsed" and not self.waist_over_lambda >= 1.0:
            raise ConfigError(
                f"waist_over_lambda={self.waist_over_lambda} < 1: first-order focal corrections"
                " are not valid for such tight focusing", key="beam.waist_over_lambda")

    @property
    def units(self) -> UnitSystem:
        return UnitSystem(self.wavelength_nm)

    @property
    def a0(self) -> float:
        return a0_from_intensity(self.peak_intensity_W_cm2, self.wavelength_nm)

    @property
    def pulsed(self) -> bool:
        return self.model != "plane_infinite"

    @property
    def fwhm(self) -> float:
        """Intensity FWHM in normalized time; inf for the infinite plane wave."""
        if not self.pulsed:
            return math.inf
        return self.units.fs_to_norm(self.fwhm_fs)

    @property
    def waist(self) -> float:
        """Waist w0 in units of 1/k0."""
        return 2.0 * math.pi * self.waist_over_lambda

    @property
    def rayleigh_range(self) -> float:
        """x_R = pi w0^2 / lambda, i.e. w0^2/2 in units of 1/k0."""
        return 0.5 * self.waist**2

    def kernel_params(self) -> np.ndarray:
        """Packed parameters for the compiled pusher: a0, 1/tau^2, w0, x_R, carrier phase."""
        inv_tau2 = 0.0 if not self.pulsed else 2.0 * math.log(2.0) / self.fwhm**2
        w0 = self.waist if self.model == "focused_pulsed" else 0.0
        xr = self.rayleigh_range if self.model == "focused_pulsed" else 0.0
        return np.array([self.a0, inv_tau2, w0, xr, self.carrier_phase], dtype=float)

    def envelope(self, eta):
        """Field-amplitude envelope g(eta); g^2 has intensity FWHM equal to ``fwhm``."""
        if not self.pulsed:
            return np.ones_like(np.asarray(eta, dtype=float))
        return np.exp(-2.0 * math.log(2.0) * np.asarray(eta, dtype=float) ** 2 / self.fwhm**2)


@dataclass(frozen=True)
class FieldSample:
    e_field: np.ndarray
    b_field: np.ndarray


def _spatial_mode(config: BeamConfig, x, y, z):
    """Complex paraxial mode u and its transverse log-derivatives for the focused beam."""
    w0 = config.waist
    xi = x / config.rayleigh_range
    q = 1.0 / (1.0 + 1j * xi)
    rho2 = y * y + z * z
    u = q * np.exp(-rho2 * q / w0**2)
    # d(ln u)/dz and d(ln u)/dy
    kz = -2.0 * z * q / w0**2
    ky = -2.0 * y * q / w0**2
    return u, ky, kz


def fields(config: BeamConfig, x, y, z, t):
    """Vectorized E and B; returns two arrays of shape broadcast(x, y, z, t) + (3,)."""
    x, y, z, t = np.broadcast_arrays(*(np.asarray(v, dtype=float) for v in (x, y, z, t)))
    a0 = config.a0
    eta = t - x
    env = a0 * config.envelope(eta)
    zero = np.zeros_like(eta)
    if config.model == "focused_pulsed":
        u, ky, kz = _spatial_mode(config, x, y, z)
        c = env * u * np.exp(-1j * (eta + config.carrier_phase))
        ez = c.real
        ex = (1j * kz * c).real
        bx = (-1j * ky * c).real
        e = np.stack([ex, zero, ez], axis=-1)
        b = np.stack([bx, -ez, zero], axis=-1)
    else:
        ez = env * np.cos(eta + config.carrier_phase)
        e = np.stack([zero, zero, ez], axis=-1)
        b = np.stack([zero, -ez, zero], axis=-1)
    return e, b


def evaluate_field(config: BeamConfig, position, time: float) -> FieldSample:
    """E and B (units of a0) at a normalized position and time."""
    x, y, z = np.asarray(position, dtype=float)
    e, b = fields(config, x, y, z, time)
    return FieldSample(e, b)


def vector_potential(config: BeamConfig, eta):
    """Normalized vector potential a(eta) = -int E_z d(eta) for the plane-wave models.

    With this sign an electron starting at rest where a = 0 has p_z = a(eta).
    Exact for the infinite wave; for pulses it is obtained by quadrature.
    """
    eta = np.asarray(eta, dtype=float)
    a0 = config.a0
    if config.model == "plane_infinite":
        return -a0 * np.sin(eta + config.carrier_phase)
    if config.model != "plane_pulsed":
        raise ConfigError("vector_potential is defined for plane-wave models only", key="beam.model")
    from scipy.integrate import quad

    lo = -12.0 * config.fwhm
    out = np.empty(eta.shape)
    for idx, val in np.ndenumerate(eta):
        f = lambda s: a0 * float(config.envelope(s)) * math.cos(s + config.carrier_phase)
        out[idx] = -quad(f, lo, float(val), limit=2000, epsabs=1e-13, epsrel=1e-12)[0]
    return out


def local_intensity(config: BeamConfig, position, time) -> float:
    """Cycle-averaged intensity (W/cm^2) from the envelope amplitude at a point."""
    x, y, z = (np.asarray(v, dtype=float) for v in np.asarray(position, dtype=float).T)
    eta = np.asarray(time, dtype=float) - x
    g2 = config.envelope(eta) ** 2
    if config.model == "focused_pulsed":
        xi = x / config.rayleigh_range
        w2 = config.waist**2 * (1.0 + xi * xi)
        profile = np.exp(-2.0 * (y * y + z * z) / w2) / (1.0 + xi * xi)
    else:
        profile = 1.0
    val = config.peak_intensity_W_cm2 * profile * g2
    return float(val) if np.ndim(val) == 0 else val

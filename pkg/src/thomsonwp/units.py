"""Unit system, geometric conventions and angular/spectral quadrature grids.

Internally everything is normalized to the laser: time in 1/omega0, length in
1/k0 = lambda/2pi, momentum in m_e c, fields in units of m_e c omega0 / e so
that the peak field equals the dimensionless amplitude a0.  Energies leave the
package in eV.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import constants as sc

from .errors import DomainError

C = sc.c
M_E = sc.m_e
Q_E = sc.e
HBAR = sc.hbar
EPS0 = sc.epsilon_0
ALPHA = sc.fine_structure
#: reduced Compton wavelength hbar/(m_e c) in metres
LAMBDA_C_BAR = HBAR / (M_E * C)
#: classical electron radius in metres
R_E = sc.physical_constants["classical electron radius"][0]
SIGMA_THOMSON = 8.0 * math.pi / 3.0 * R_E**2


@dataclass(frozen=True)
class UnitSystem:
    """Scales derived from the reference laser wavelength."""

    wavelength_nm: float = 800.0

    def __post_init__(self):
        if not self.wavelength_nm > 0:
            raise DomainError(f"wavelength_nm must be positive, got {self.wavelength_nm}")

    @property
    def wavelength_m(self) -> float:
        return self.wavelength_nm * 1e-9

    @property
    def omega0(self) -> float:
        """Laser angular frequency in rad/s."""
        return 2.0 * math.pi * C / self.wavelength_m

    @property
    def time_unit_s(self) -> float:
        return 1.0 / self.omega0

    @property
    def length_unit_m(self) -> float:
        return self.wavelength_m / (2.0 * math.pi)

    @property
    def period_s(self) -> float:
        return 2.0 * math.pi / self.omega0

    @property
    def field_unit_V_m(self) -> float:
        return M_E * C * self.omega0 / Q_E

    @property
    def hbar_omega0_eV(self) -> float:
        return HBAR * self.omega0 / Q_E

    @property
    def energy_unit_eV(self) -> float:
        """Radiated-energy unit e^2 omega0 / c (Gaussian) = alpha hbar omega0, in eV."""
        return ALPHA * self.hbar_omega0_eV

    @property
    def hbar_normalized(self) -> float:
        """hbar in units of (m_e c) * (1/k0): the dimensionless ratio k0 * lambdabar_C."""
        return LAMBDA_C_BAR / self.length_unit_m

    def time_to_norm(self, t_s):
        return t_s / self.time_unit_s

    def time_to_si(self, t):
        return t * self.time_unit_s

    def fs_to_norm(self, t_fs):
        return t_fs * 1e-15 / self.time_unit_s

    def norm_to_fs(self, t):
        return t * self.time_unit_s * 1e15

    def length_to_norm(self, x_m):
        return x_m / self.length_unit_m

    def length_to_si(self, x):
        return x * self.length_unit_m

    def omega_to_wavelength_nm(self, omega):
        """Wavelength (nm) of radiation at normalized frequency omega/omega0."""
        return self.wavelength_nm / omega

    def wavelength_nm_to_omega(self, lam_nm):
        return self.wavelength_nm / lam_nm


def a0_from_intensity(intensity_W_cm2: float, wavelength_nm: float) -> float:
    """Peak normalized amplitude a0 = e E0/(m_e c omega0) of a linearly polarized wave.

    Uses I = eps0 c E0^2 / 2.  ``intensity_W_cm2`` may be zero (returns 0) so
    that the map is continuous at the origin; negative values are rejected.
    """
    if wavelength_nm <= 0:
        raise DomainError(f"wavelength_nm must be positive, got {wavelength_nm}")
    if intensity_W_cm2 < 0:
        raise DomainError(f"intensity must be non-negative, got {intensity_W_cm2}")
    units = UnitSystem(wavelength_nm)
    e0 = math.sqrt(2.0 * intensity_W_cm2 * 1e4 / (EPS0 * C))
    return e0 / units.field_unit_V_m


def intensity_from_a0(a0: float, wavelength_nm: float) -> float:
    """Inverse of :func:`a0_from_intensity`, in W/cm^2."""
    units = UnitSystem(wavelength_nm)
    e0 = a0 * units.field_unit_V_m
    return 0.5 * EPS0 * C * e0**2 * 1e-4


@dataclass(frozen=True)
class Direction:
    """Observation direction. theta is measured from +z, phi from +x in the x-y plane."""

    theta: float
    phi: float = 0.0

    def __post_init__(self):
        if not (0.0 <= self.theta <= math.pi):
            raise DomainError(f"theta must lie in [0, pi], got {self.theta}")
        if not (0.0 <= self.phi < 2.0 * math.pi):
            raise DomainError(f"phi must lie in [0, 2pi), got {self.phi}")

    @classmethod
    def wrap(cls, theta: float, phi: float) -> "Direction":
        return cls(theta, phi % (2.0 * math.pi))

    def unit_vector(self) -> np.ndarray:
        return direction_to_unit_vector(self)


FORWARD = Direction(math.pi / 2, 0.0)
PERPENDICULAR_Y = Direction(math.pi / 2, math.pi / 2)
Z_POLE = Direction(0.0, 0.0)


def direction_to_unit_vector(d: Direction) -> np.ndarray:
    st = math.sin(d.theta)
    return np.array([st * math.cos(d.phi), st * math.sin(d.phi), math.cos(d.theta)])


def unit_vectors(thetas, phis) -> np.ndarray:
    """Unit vectors for the outer product of ``thetas`` and ``phis``; shape (nt, np, 3)."""
    th = np.asarray(thetas, dtype=float)[:, None]
    ph = np.asarray(phis, dtype=float)[None, :]
    st = np.sin(th)
    return np.stack(
        np.broadcast_arrays(st * np.cos(ph), st * np.sin(ph), np.cos(th)), axis=-1
    )


def _trapezoid_weights(x: np.ndarray) -> np.ndarray:
    w = np.zeros_like(x)
    if x.size > 1:
        dx = np.diff(x)
        w[:-1] += 0.5 * dx
        w[1:] += 0.5 * dx
    return w


@dataclass(frozen=True, eq=False)
class AngularSpectralGrid:
    """Observation directions (outer product thetas x phis) and frequencies in omega/omega0.

    Grids built with :meth:`sphere` carry a solid-angle quadrature (Gauss-Legendre
    in cos(theta), periodic trapezoid in phi) whose weights sum to 4 pi.  Grids
    built with :meth:`points` only sample selected directions and cannot be
    integrated over the sphere.
    """

    thetas: np.ndarray
    phis: np.ndarray
    omegas: np.ndarray
    solid_angle_weights: np.ndarray | None = None
    omega_weights: np.ndarray = field(init=False)

    def __post_init__(self):
        for name in ("thetas", "phis", "omegas"):
            arr = np.array(getattr(self, name), dtype=float).ravel()
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        om = self.omegas
        if om.size == 0 or np.any(om <= 0) or np.any(np.diff(om) <= 0):
            raise DomainError("omegas must be non-empty, positive and strictly increasing")
        if self.thetas.size == 0 or self.phis.size == 0:
            raise DomainError("grid needs at least one theta and one phi")
        if self.solid_angle_weights is not None:
            w = np.array(self.solid_angle_weights, dtype=float)
            if w.shape != (self.thetas.size, self.phis.size):
                raise DomainError("solid_angle_weights shape must be (n_theta, n_phi)")
            if abs(w.sum() - 4 * math.pi) > 1e-10 * 4 * math.pi:
                raise DomainError("solid-angle weights must sum to 4 pi")
            w.setflags(write=False)
            object.__setattr__(self, "solid_angle_weights", w)
        ow = _trapezoid_weights(om)
        ow.setflags(write=False)
        object.__setattr__(self, "omega_weights", ow)

    @classmethod
    def sphere(cls, n_theta=64, n_phi=64, n_omega=512, omega_min=0.05, omega_max=10.0,
               omegas=None) -> "AngularSpectralGrid":
        x, wx = np.polynomial.legendre.leggauss(n_theta)
        # descending cos(theta) -> ascending theta
        thetas = np.arccos(x[::-1])
        wx = wx[::-1]
        phis = 2 * math.pi * np.arange(n_phi) / n_phi
        wphi = np.full(n_phi, 2 * math.pi / n_phi)
        if omegas is None:
            omegas = np.linspace(omega_min, omega_max, n_omega)
        return cls(thetas, phis, omegas, np.outer(wx, wphi))

    @classmethod
    def points(cls, thetas, phis, omegas) -> "AngularSpectralGrid":
        return cls(thetas, phis, omegas, None)

    @property
    def shape(self) -> tuple[int, int, int]:
        return (self.thetas.size, self.phis.size, self.omegas.size)

    @property
    def is_sphere(self) -> bool:
        return self.solid_angle_weights is not None

    @property
    def omega_uniform(self) -> bool:
        d = np.diff(self.omegas)
        return d.size == 0 or bool(np.all(np.abs(d - d[0]) <= 1e-12 * max(1.0, abs(d[0]))))

    def unit_vectors(self) -> np.ndarray:
        return unit_vectors(self.thetas, self.phis)

    def describe(self) -> dict:
        return {
            "n_theta": int(self.thetas.size),
            "n_phi": int(self.phis.size),
            "n_omega": int(self.omegas.size),
            "omega_min": float(self.omegas[0]),
            "omega_max": float(self.omegas[-1]),
            "sphere": self.is_sphere,
        }

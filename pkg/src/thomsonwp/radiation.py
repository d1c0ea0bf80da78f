"""Classical far-field radiation of a trajectory.

Spectral-angular energy

    d2e/dOmega domega = (alpha hbar omega0 / 4 pi^2) omega^2 |A(n, omega)|^2,
    A(n, omega) = int n x (n x beta) exp(i omega (t - n.r)) dt,

with omega in units of omega0 and the result in eV per steradian per unit
omega/omega0.  The relativistic Larmor formula gives an independent total.
"""
from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import _backend
from .dynamics import PERIOD, Trajectory
from .errors import DomainError, EndpointArtifactError
from .units import AngularSpectralGrid, Direction, UnitSystem, direction_to_unit_vector

#: |d beta/dt| below which an endpoint counts as field-free
ENDPOINT_TOL = 1e-8
WINDOWS = ("none", "hann")


def default_threads() -> int:
    return os.cpu_count() or 1


def _check_endpoints(traj: Trajectory, window: str):
    if window != "none":
        return
    end = float(np.linalg.norm(traj.beta_dot[-1]))
    if end >= ENDPOINT_TOL:
        raise EndpointArtifactError(
            f"|d beta/dt| = {end:.3g} at the final sample; extend the trajectory past the pulse"
            " or request a window")
    born = traj.birth_time is not None and traj.birth_time == traj.t[0]
    start = float(np.linalg.norm(traj.beta_dot[0]))
    if not born and start >= ENDPOINT_TOL:
        raise EndpointArtifactError(
            f"|d beta/dt| = {start:.3g} at the first sample and the electron was not born there")


def _resample(traj: Trajectory, samples_per_period: float):
    n = len(traj)
    stride = max(1, int(math.floor(PERIOD / samples_per_period / traj.dt + 1e-9)))
    idx = np.arange(0, n, stride)
    if idx[-1] != n - 1:
        idx = np.append(idx, n - 1)
    return idx


def amplitudes(traj: Trajectory, nvecs, omegas, *, window: str = "none",
               samples_per_period: float = 64, threads: int | None = None,
               backend: str | None = None) -> np.ndarray:
    """Complex far-field amplitudes, shape (D, M, 3), for unit vectors ``nvecs`` (D, 3).

    Directions are split into chunks evaluated in parallel; each direction is
    computed independently so the result does not depend on ``threads``.
    """
    if window not in WINDOWS:
        raise DomainError(f"window must be one of {WINDOWS}")
    _check_endpoints(traj, window)
    nvecs = np.ascontiguousarray(np.asarray(nvecs, dtype=float).reshape(-1, 3))
    omegas = np.ascontiguousarray(np.asarray(omegas, dtype=float).ravel())
    if omegas.size == 0 or np.any(omegas <= 0):
        raise DomainError("frequencies must be positive")
    idx = _resample(traj, samples_per_period)
    t = np.ascontiguousarray(traj.t[idx])
    r = np.ascontiguousarray(traj.r[idx])
    beta = traj.beta[idx]
    if window == "hann":
        span = traj.t[-1] - traj.t[0]
        beta = beta * (np.sin(math.pi * (t - traj.t[0]) / span) ** 2)[:, None]
    beta = np.ascontiguousarray(beta)
    d = np.diff(omegas)
    uniform = d.size == 0 or bool(np.all(np.abs(d - d[0]) <= 1e-12 * max(1.0, abs(d[0]))))
    kern = _backend.get(backend)
    out = np.zeros((nvecs.shape[0], omegas.size, 3), dtype=complex)
    boundary = window == "none"

    def work(lo, hi):
        view = out[lo:hi].view(float).reshape(hi - lo, omegas.size, 3, 2)
        kern.farfield(t, r, beta, np.ascontiguousarray(nvecs[lo:hi]), omegas, uniform,
                      boundary, view)

    threads = threads or default_threads()
    nd = nvecs.shape[0]
    chunk = max(1, min(64, -(-nd // (4 * threads))))
    bounds = [(lo, min(lo + chunk, nd)) for lo in range(0, nd, chunk)]
    if threads == 1 or len(bounds) == 1:
        for lo, hi in bounds:
            work(lo, hi)
    else:
        with ThreadPoolExecutor(threads) as pool:
            list(pool.map(lambda b: work(*b), bounds))
    return out


def farfield_amplitude(traj: Trajectory, direction: Direction, omega, **kw) -> np.ndarray:
    """A(n, omega) for one direction; complex 3-vector, or (M, 3) for an array of omegas."""
    n = direction_to_unit_vector(direction)
    scalar = np.ndim(omega) == 0
    a = amplitudes(traj, n[None, :], np.atleast_1d(omega), **kw)[0]
    return a[0] if scalar else a


def spectral_prefactor(units: UnitSystem, omegas) -> np.ndarray:
    """Factor turning |A|^2 into eV / sr / (omega/omega0)."""
    return units.energy_unit_eV / (4.0 * math.pi**2) * np.asarray(omegas) ** 2


@dataclass(frozen=True, eq=False)
class RadiationMap:
    """d2e/dOmega domega (eV/sr per unit omega/omega0) on an (theta, phi, omega) grid."""

    grid: AngularSpectralGrid
    values: np.ndarray
    wavelength_nm: float = 800.0
    observation_radius_um: float = 100.0
    manifest: dict = field(default_factory=dict)

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.shape != self.grid.shape:
            raise DomainError(f"values shape {v.shape} does not match grid {self.grid.shape}")
        if not np.all(np.isfinite(v)) or np.any(v < 0):
            raise DomainError("radiation map values must be finite and non-negative")
        object.__setattr__(self, "values", v)

    @property
    def units(self) -> UnitSystem:
        return UnitSystem(self.wavelength_nm)

    def angular_distribution(self) -> np.ndarray:
        """de/dOmega (eV/sr) per direction, integrated over the frequency grid."""
        return self.values @ self.grid.omega_weights

    def fluence_at_radius(self) -> np.ndarray:
        """de/dA (eV/um^2) per direction at the presentation radius."""
        return self.angular_distribution() / self.observation_radius_um**2

    def spectrum(self) -> "EmissionSpectrum":
        """Solid-angle integrated spectrum de/domega."""
        if not self.grid.is_sphere:
            raise DomainError("solid-angle integration needs a full-sphere grid")
        vals = np.einsum("tp,tpm->m", self.grid.solid_angle_weights, self.values)
        return EmissionSpectrum(self.grid.omegas, vals, self.wavelength_nm,
                                manifest=dict(self.manifest))

    def direction_spectrum(self, i_theta: int, i_phi: int) -> "EmissionSpectrum":
        return EmissionSpectrum(self.grid.omegas, self.values[i_theta, i_phi], self.wavelength_nm,
                                direction=(float(self.grid.thetas[i_theta]),
                                           float(self.grid.phis[i_phi])),
                                manifest=dict(self.manifest))


@dataclass(frozen=True, eq=False)
class EmissionSpectrum:
    """Spectral energy de/domega (eV per unit omega/omega0).

    ``direction`` is None for a solid-angle integrated spectrum, otherwise the
    (theta, phi) it belongs to, in which case values are per steradian.
    """

    omegas: np.ndarray
    values: np.ndarray
    wavelength_nm: float = 800.0
    direction: tuple | None = None
    manifest: dict = field(default_factory=dict)

    def __post_init__(self):
        om = np.asarray(self.omegas, dtype=float)
        v = np.asarray(self.values, dtype=float)
        if om.shape != v.shape or om.ndim != 1:
            raise DomainError("omegas and values must be 1-D arrays of equal length")
        if np.any(np.diff(om) <= 0):
            raise DomainError("omegas must be strictly increasing")
        if np.any(v < 0):
            raise DomainError("spectral values must be non-negative")
        object.__setattr__(self, "omegas", om)
        object.__setattr__(self, "values", v)

    @property
    def per_direction(self) -> bool:
        return self.direction is not None

    def total(self) -> float:
        return _integrate_linear(self.omegas, self.values, self.omegas[0], self.omegas[-1])

    def peak_omega(self) -> float:
        return float(self.omegas[int(np.argmax(self.values))])

    def peak_wavelength_nm(self) -> float:
        return self.wavelength_nm / self.peak_omega()


def linear_band_weights(x, lo, hi) -> np.ndarray:
    """Weights w with sum(w * y) = integral over [lo, hi] of the piecewise-linear interpolant of y."""
    x = np.asarray(x, dtype=float)
    w = np.zeros_like(x)
    if hi <= lo or x.size < 2:
        return w
    x0, x1 = x[:-1], x[1:]
    a = np.clip(lo, x0, x1)
    b = np.clip(hi, x0, x1)
    h = x1 - x0
    w[:-1] += ((x1 - a) ** 2 - (x1 - b) ** 2) / (2 * h)
    w[1:] += ((b - x0) ** 2 - (a - x0) ** 2) / (2 * h)
    return w


def _integrate_linear(x, y, lo, hi) -> float:
    return float(np.dot(linear_band_weights(x, lo, hi), y))


def _band_omegas(omegas, wavelength_nm, lambda_min_nm, lambda_max_nm):
    if lambda_min_nm > lambda_max_nm:
        raise DomainError("lambda_min_nm must not exceed lambda_max_nm")
    if lambda_min_nm <= 0:
        raise DomainError("wavelengths must be positive")
    w_lo = wavelength_nm / lambda_max_nm
    w_hi = wavelength_nm / lambda_min_nm
    tol = 1e-12 * omegas[-1]
    if w_lo < omegas[0] - tol or w_hi > omegas[-1] + tol:
        raise DomainError(
            f"band {lambda_min_nm:g}-{lambda_max_nm:g} nm lies outside the grid's spectral range "
            f"{wavelength_nm / omegas[-1]:.4g}-{wavelength_nm / omegas[0]:.4g} nm")
    return min(max(w_lo, omegas[0]), omegas[-1]), min(max(w_hi, omegas[0]), omegas[-1])


def _as_spectrum(obj) -> EmissionSpectrum:
    if isinstance(obj, RadiationMap):
        return obj.spectrum()
    if isinstance(obj, EmissionSpectrum):
        return obj
    raise TypeError("expected a RadiationMap or EmissionSpectrum")


def total_energy(obj) -> float:
    """Energy (eV) over the whole grid: all solid angle and all grid frequencies."""
    sp = _as_spectrum(obj)
    return sp.total()


def band_omega_weights(omegas, wavelength_nm, lambda_min_nm, lambda_max_nm) -> np.ndarray:
    """Frequency weights selecting the band [lambda_min_nm, lambda_max_nm] on ``omegas``."""
    omegas = np.asarray(omegas, dtype=float)
    lo, hi = _band_omegas(omegas, wavelength_nm, lambda_min_nm, lambda_max_nm)
    return linear_band_weights(omegas, lo, hi)


def angular_band_energy(rmap: RadiationMap, lambda_min_nm=None, lambda_max_nm=None) -> np.ndarray:
    """de/dOmega (eV/sr) per grid direction restricted to a band (whole grid if no band)."""
    om = rmap.grid.omegas
    if lambda_min_nm is None and lambda_max_nm is None:
        w = rmap.grid.omega_weights
    else:
        w = band_omega_weights(om, rmap.wavelength_nm, lambda_min_nm, lambda_max_nm)
    return rmap.values @ w


def band_energy(obj, lambda_min_nm: float, lambda_max_nm: float) -> float:
    """Energy (eV) radiated at wavelengths in [lambda_min_nm, lambda_max_nm].

    Bins cut by the band edges are weighted by the overlapping fraction of the
    piecewise-linear spectrum.
    """
    sp = _as_spectrum(obj)
    lo, hi = _band_omegas(sp.omegas, sp.wavelength_nm, lambda_min_nm, lambda_max_nm)
    return _integrate_linear(sp.omegas, sp.values, lo, hi)


def photon_count_estimate(obj, lambda_min_nm: float | None = None,
                          lambda_max_nm: float | None = None,
                          collection_efficiency: float = 1.0) -> float:
    """Expected photon number: integral of (de/domega) / (hbar omega), times the efficiency."""
    sp = _as_spectrum(obj)
    if not 0.0 <= collection_efficiency <= 1.0:
        raise DomainError("collection_efficiency must lie in [0, 1]")
    om = sp.omegas
    if lambda_min_nm is None and lambda_max_nm is None:
        lo, hi = om[0], om[-1]
    else:
        lo, hi = _band_omegas(om, sp.wavelength_nm,
                              lambda_min_nm if lambda_min_nm is not None
                              else sp.wavelength_nm / om[-1],
                              lambda_max_nm if lambda_max_nm is not None
                              else sp.wavelength_nm / om[0])
    photon_eV = UnitSystem(sp.wavelength_nm).hbar_omega0_eV * om
    n = _integrate_linear(om, sp.values / photon_eV, lo, hi)
    return collection_efficiency * n


def radiation_map(traj: Trajectory, grid: AngularSpectralGrid, *, wavelength_nm: float = 800.0,
                  window: str = "none", samples_per_period: float = 64,
                  observation_radius_um: float = 100.0, threads: int | None = None,
                  backend: str | None = None) -> RadiationMap:
    """Fill ``grid`` with d2e/dOmega domega for one trajectory."""
    nv = grid.unit_vectors().reshape(-1, 3)
    amp = amplitudes(traj, nv, grid.omegas, window=window,
                     samples_per_period=samples_per_period, threads=threads, backend=backend)
    return map_from_amplitudes(amp, grid, wavelength_nm, observation_radius_um,
                               manifest={"window": window,
                                         "samples_per_period": samples_per_period,
                                         "grid": grid.describe()})


def intensity_from_amplitudes(amp: np.ndarray, omegas, units: UnitSystem) -> np.ndarray:
    """|A|^2 (D, M, 3) complex -> d2e/dOmega domega (D, M)."""
    a2 = (amp.real**2 + amp.imag**2).sum(axis=-1)
    return a2 * spectral_prefactor(units, omegas)[None, :]


def map_from_amplitudes(amp, grid, wavelength_nm=800.0, observation_radius_um=100.0,
                        manifest=None) -> RadiationMap:
    vals = intensity_from_amplitudes(amp, grid.omegas, UnitSystem(wavelength_nm))
    return RadiationMap(grid, vals.reshape(grid.shape), wavelength_nm, observation_radius_um,
                        dict(manifest or {}))


def larmor_power(traj: Trajectory) -> np.ndarray:
    """Relativistic Larmor power (2/3) gamma^6 [bdot^2 - (beta x bdot)^2], normalized units."""
    b, bd = traj.beta, traj.beta_dot
    g2 = 1.0 / (1.0 - np.einsum("ij,ij->i", b, b))
    cross = np.cross(b, bd)
    return (2.0 / 3.0) * g2**3 * (np.einsum("ij,ij->i", bd, bd) - np.einsum("ij,ij->i", cross, cross))


def larmor_total(traj: Trajectory, wavelength_nm: float = 800.0) -> float:
    """Time-integrated Larmor energy in eV (independent of the spectral route)."""
    units = UnitSystem(wavelength_nm)
    return float(np.trapz(larmor_power(traj), traj.t)) * units.energy_unit_eV


def oscillator_trajectory(beta0: float = 1e-4, tau: float = 40.0, span: float = 8.0,
                          dt: float = PERIOD / 200.0) -> Trajectory:
    """Analytic dipole oscillator beta_z = beta0 exp(-t^2/2tau^2) cos t on [-span tau, span tau]."""
    from scipy.integrate import cumulative_trapezoid

    n = int(math.ceil(2 * span * tau / dt)) + 1
    t = np.linspace(-span * tau, span * tau, n)
    g = np.exp(-t**2 / (2 * tau**2))
    beta = np.zeros((n, 3))
    bdot = np.zeros((n, 3))
    beta[:, 2] = beta0 * g * np.cos(t)
    bdot[:, 2] = -beta0 * g * (np.sin(t) + t * np.cos(t) / tau**2)
    r = np.zeros((n, 3))
    r[:, 2] = cumulative_trapezoid(beta[:, 2], t, initial=0.0)
    return Trajectory.from_arrays(t, r, beta, bdot, metadata={"kind": "oscillator"})


def write_map_csv(rmap: RadiationMap, path, comments=()):
    """CSV with columns theta_rad, phi_rad, omega_over_omega0, d2e_dOmega_domega_eV."""
    g = rmap.grid
    th, ph, om = np.meshgrid(g.thetas, g.phis, g.omegas, indexing="ij")
    data = np.column_stack([th.ravel(), ph.ravel(), om.ravel(), rmap.values.ravel()])
    header = [f"# {c}" for c in comments]
    header.append("# units: angles in rad, frequency in omega/omega0, energy density in eV/sr"
                  f" per unit omega/omega0; laser wavelength {rmap.wavelength_nm:g} nm")
    with open(path, "w", newline="\n") as fh:
        fh.write("\n".join(header) + "\n")
        fh.write("theta_rad,phi_rad,omega_over_omega0,d2e_dOmega_domega_eV\n")
        np.savetxt(fh, data, fmt="%.12e", delimiter=",")

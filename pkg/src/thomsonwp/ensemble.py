"""Emission of a single-electron wave packet as a phase-space ensemble.

Each Wigner sample (r, p) is pushed as a classical point electron and its
complex far-field amplitude computed.  The quantum (incoherent) prediction
averages |A|^2; the semiclassical extended-charge prediction squares the
averaged amplitude.  Reductions run in sample order so results do not
depend on the thread count.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .dynamics import PERIOD, ElectronConfig, ElectronState, end_time, push_trajectory
from .errors import ConfigError, DomainError, NegativeWignerError, ThomsonError
from .extended import GaussianCloud, direction_ratio
from .laser import BeamConfig
from .radiation import (RadiationMap, EmissionSpectrum, amplitudes, angular_band_energy,
                        band_omega_weights, default_threads, intensity_from_amplitudes,
                        map_from_amplitudes)
from .units import C, AngularSpectralGrid, Direction, UnitSystem
from .wigner import EvolvedState, GaussianWavePacket, momentum_density

N_GROUPS = 16  # jackknife groups for the coherent estimators
BATCH = 64


@dataclass(frozen=True)
class PhaseSpaceSample:
    position: np.ndarray  # m
    momentum: np.ndarray  # m_e c
    weight: float = 1.0

    def __post_init__(self):
        if not self.weight > 0:
            raise DomainError("sample weight must be > 0")


def sample_phase_space(state, n: int, seed: int) -> list[PhaseSpaceSample]:
    """n independent draws from a non-negative (Gaussian) Wigner function."""
    if n < 1:
        raise DomainError("n must be >= 1")
    base, t = state, 0.0
    if isinstance(state, EvolvedState):
        base, t = state.initial, state.time
    if not isinstance(base, GaussianWavePacket):
        if getattr(base, "is_gaussian", False):
            base = base.components[0][1]
        else:
            raise NegativeWignerError(
                "cannot sample: Wigner function is negative in some phase-space region")
    rng = np.random.default_rng(seed)
    r = base.center_r + base.sigma_r * rng.standard_normal((n, 3))
    p = base.center_p + base.sigma_p * rng.standard_normal((n, 3))
    if t:
        r = r + p * C * t
    return [PhaseSpaceSample(r[i], p[i]) for i in range(n)]


@dataclass(frozen=True)
class EnsembleSettings:
    """Numerical settings shared by every ensemble member."""

    start_fwhm: float = 4.0
    electron: ElectronConfig = field(default_factory=lambda: ElectronConfig(
        birth_mode="explicit_time", dt_over_period=1.0 / 200.0, end_fwhm=4.0))
    samples_per_period: float = 64.0
    bands_nm: tuple = ()
    backend: str | None = None


def _sample_state(beam: BeamConfig, settings: EnsembleSettings, position_m, momentum):
    """Start an electron far ahead of the pulse, at the same retarded phase for every sample."""
    if not beam.pulsed:
        raise ConfigError("ensemble emission needs a pulsed beam", key="beam.model")
    units = beam.units
    r = units.length_to_norm(np.asarray(position_m, dtype=float))
    t0 = r[0] - settings.start_fwhm * beam.fwhm
    return ElectronState(r, np.asarray(momentum, dtype=float), t0)


def sample_amplitude(beam, grid, settings, position_m, momentum):
    """Complex amplitudes (D, M, 3) of one member."""
    init = _sample_state(beam, settings, position_m, momentum)
    t_end, eta_stop = end_time(beam, settings.electron, init)
    traj = push_trajectory(beam, init, t_end, settings.electron.dt_over_period * PERIOD,
                           eta_stop=eta_stop, backend=settings.backend)
    return amplitudes(traj, grid.unit_vectors().reshape(-1, 3), grid.omegas,
                      samples_per_period=settings.samples_per_period, threads=1,
                      backend=settings.backend)


@dataclass(eq=False)
class BandStats:
    """Per-direction band energies (eV/sr) with Monte Carlo standard errors."""

    incoherent: np.ndarray
    incoherent_se: np.ndarray
    coherent: np.ndarray
    coherent_se: np.ndarray
    coherent_unbiased: np.ndarray
    coherent_unbiased_se: np.ndarray

    def as_dict(self) -> dict:
        return {k: np.asarray(v).tolist() for k, v in self.__dict__.items()}


@dataclass(eq=False)
class EnsembleResult:
    incoherent_map: RadiationMap
    coherent_map: RadiationMap
    n_samples: int
    seed: int | None
    bands: dict  # name -> BandStats
    manifest: dict = field(default_factory=dict)


def _band_name(band) -> str:
    return "all" if band is None else f"{band[0]:g}-{band[1]:g}nm"


def ensemble_radiation(samples, beam: BeamConfig, grid: AngularSpectralGrid, *,
                       settings: EnsembleSettings | None = None, seed: int | None = None,
                       threads: int | None = None) -> EnsembleResult:
    """Incoherent and coherent maps of an ensemble on a shared grid."""
    settings = settings or EnsembleSettings()
    samples = list(samples)
    n = len(samples)
    if n == 0:
        raise DomainError("need at least one sample")
    units = UnitSystem(beam.wavelength_nm)
    shape = (grid.thetas.size * grid.phis.size, grid.omegas.size, 3)
    bands = [None, *[tuple(b) for b in settings.bands_nm]]
    bw = [grid.omega_weights if b is None
          else band_omega_weights(grid.omegas, units.wavelength_nm, *b) for b in bands]
    pref = intensity_from_amplitudes(np.ones((1, grid.omegas.size, 1)), grid.omegas, units)[0]
    groups = min(N_GROUPS, n)
    gsum = np.zeros((groups,) + shape, dtype=complex)  # sum w a per group
    gabs = np.zeros((groups,) + shape[:2])  # sum w^2 |a|^2 per group
    gw = np.zeros(groups)
    gw2 = np.zeros(groups)
    inc = np.zeros(shape[:2])  # sum w |a|^2
    per_sample = np.zeros((n, len(bands), shape[0]))  # |a|^2 band energy per sample
    weights = np.array([s.weight for s in samples])
    threads = threads or default_threads()

    def one(i):
        s = samples[i]
        try:
            return sample_amplitude(beam, grid, settings, s.position, s.momentum)
        except ThomsonError as exc:
            exc.args = (f"sample {i}: {exc.args[0] if exc.args else exc}",) + exc.args[1:]
            exc.sample_index = i
            raise

    pool = ThreadPoolExecutor(threads) if threads > 1 else None
    try:
        for lo in range(0, n, BATCH):
            idx = range(lo, min(lo + BATCH, n))
            amps = list(pool.map(one, idx)) if pool else [one(i) for i in idx]
            for i, a in zip(idx, amps):
                g = i * groups // n
                w = weights[i]
                a2 = (a.real**2 + a.imag**2).sum(axis=-1)
                gsum[g] += w * a
                gabs[g] += w * w * a2
                gw[g] += w
                gw2[g] += w * w
                inc += w * a2
                e = a2 * pref
                for k, wk in enumerate(bw):
                    per_sample[i, k] = e @ wk
    finally:
        if pool:
            pool.shutdown()

    wsum = weights.sum()
    inc_vals = inc / wsum * pref
    mean_a = gsum.sum(axis=0) / wsum
    coh_vals = (mean_a.real**2 + mean_a.imag**2).sum(axis=-1) * pref
    meta = {"n_samples": n, "seed": seed, "grid": grid.describe(),
            "samples_per_period": settings.samples_per_period,
            "start_fwhm": settings.start_fwhm}
    inc_map = RadiationMap(grid, inc_vals.reshape(grid.shape), beam.wavelength_nm, manifest=meta)
    coh_map = RadiationMap(grid, coh_vals.reshape(grid.shape), beam.wavelength_nm, manifest=meta)

    def coherent_estimates(S, Q, W, W2):
        biased = ((S.real**2 + S.imag**2).sum(-1) / W**2) * pref
        denom = W**2 - W2
        if denom <= 0:
            unb = np.full(biased.shape, np.nan)
        else:
            unb = ((S.real**2 + S.imag**2).sum(-1) - Q) / denom * pref
        return biased, unb

    out = {}
    S_all, Q_all, W_all, W2_all = gsum.sum(0), gabs.sum(0), gw.sum(), gw2.sum()
    full_b, full_u = coherent_estimates(S_all, Q_all, W_all, W2_all)
    jk_b, jk_u = [], []
    if groups > 1:
        for g in range(groups):
            b, u = coherent_estimates(S_all - gsum[g], Q_all - gabs[g], W_all - gw[g],
                                      W2_all - gw2[g])
            jk_b.append(b)
            jk_u.append(u)
    for k, band in enumerate(bands):
        wk = bw[k]
        e = per_sample[:, k, :]
        wn = weights / wsum
        inc_band = wn @ e
        if n > 1:
            var = (wn[:, None] * (e - inc_band) ** 2).sum(0) * n / (n - 1)
            inc_se = np.sqrt(var / n)
        else:
            inc_se = np.zeros_like(inc_band)
        cb, cu = full_b @ wk, full_u @ wk

        def jk_se(vals):
            if groups < 2:
                return np.zeros_like(cb)
            arr = np.array([v @ wk for v in vals])
            return np.sqrt((groups - 1) / groups * ((arr - arr.mean(0)) ** 2).sum(0))

        tshape = (grid.thetas.size, grid.phis.size)
        out[_band_name(band)] = BandStats(
            inc_band.reshape(tshape), inc_se.reshape(tshape), cb.reshape(tshape),
            jk_se(jk_b).reshape(tshape), cu.reshape(tshape), jk_se(jk_u).reshape(tshape))
    return EnsembleResult(inc_map, coh_map, n, seed, out, meta)


@dataclass(frozen=True)
class MomentumDensity:
    """Quadrature nodes (K, 3) in m_e c with weights = |alpha(p)|^2 times the cell measure."""

    momenta: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        p = np.atleast_2d(np.asarray(self.momenta, dtype=float))
        w = np.asarray(self.weights, dtype=float).ravel()
        if p.shape != (w.size, 3):
            raise DomainError("momenta must be (K, 3) with one weight per node")
        if np.any(w < 0):
            raise DomainError("density weights must be non-negative")
        object.__setattr__(self, "momenta", p)
        object.__setattr__(self, "weights", w)

    @classmethod
    def delta(cls, momentum=(0.0, 0.0, 0.0)):
        return cls(np.asarray(momentum, dtype=float)[None, :], np.ones(1))

    @classmethod
    def from_state(cls, state, n_per_axis: int = 9, axes=(0, 1, 2)):
        """Gauss-Hermite product grid for the momentum density of a Gaussian packet."""
        base = state.initial if isinstance(state, EvolvedState) else state
        if not isinstance(base, GaussianWavePacket):
            raise DomainError("from_state needs a single Gaussian packet")
        x, w = np.polynomial.hermite.hermgauss(n_per_axis)
        nodes, weights = [], []
        for ax in range(3):
            if ax in axes:
                nodes.append(base.center_p[ax] + math.sqrt(2) * base.sigma_p[ax] * x)
                weights.append(w / math.sqrt(math.pi))
            else:
                nodes.append(np.array([base.center_p[ax]]))
                weights.append(np.ones(1))
        P = np.stack(np.meshgrid(*nodes, indexing="ij"), -1).reshape(-1, 3)
        W = np.einsum("i,j,k->ijk", *weights).ravel()
        return cls(P, W)

    @classmethod
    def from_grid(cls, state, grid_1d):
        """Midpoint-rule product grid with |alpha(p)|^2 evaluated in closed form."""
        g = [np.asarray(v, dtype=float) for v in grid_1d]
        P = np.stack(np.meshgrid(*g, indexing="ij"), -1).reshape(-1, 3)
        widths = [np.gradient(v) if v.size > 1 else np.ones(1) for v in g]
        meas = np.einsum("i,j,k->ijk", *widths).ravel()
        return cls(P, momentum_density(state, P) * meas)


def single_electron_spectrum(beam: BeamConfig, grid: AngularSpectralGrid, momentum=(0, 0, 0), *,
                             settings: EnsembleSettings | None = None) -> EmissionSpectrum:
    """Spectrum of one electron starting at the origin ahead of the pulse with ``momentum``."""
    settings = settings or EnsembleSettings()
    amp = sample_amplitude(beam, grid, settings, np.zeros(3), momentum)
    return _spectrum_of(map_from_amplitudes(amp, grid, beam.wavelength_nm))


def _spectrum_of(rmap: RadiationMap) -> EmissionSpectrum:
    g = rmap.grid
    if g.is_sphere:
        return rmap.spectrum()
    if g.thetas.size * g.phis.size == 1:
        return rmap.direction_spectrum(0, 0)
    raise DomainError("need a full-sphere grid or a single observation direction")


def plane_wave_reduction(density: MomentumDensity, beam: BeamConfig, grid: AngularSpectralGrid,
                         *, settings: EnsembleSettings | None = None, threads: int | None = None,
                         norm_tol: float = 1e-6) -> EmissionSpectrum:
    """Incoherent superposition sum_p |alpha(p)|^2 e(p) over a momentum quadrature."""
    if beam.model == "focused_pulsed":
        raise ConfigError("the plane-wave reduction needs a plane-wave beam", key="beam.model")
    total = density.weights.sum()
    if abs(total - 1.0) > norm_tol:
        raise DomainError(f"momentum density integrates to {total:.8g}, not 1")
    settings = settings or EnsembleSettings()
    threads = threads or default_threads()

    def one(k):
        return single_electron_spectrum(beam, grid, density.momenta[k], settings=settings)

    idx = range(len(density.weights))
    if threads > 1:
        with ThreadPoolExecutor(threads) as pool:
            specs = list(pool.map(one, idx))
    else:
        specs = [one(k) for k in idx]
    vals = np.zeros_like(specs[0].values)
    for w, s in zip(density.weights, specs):
        vals = vals + w * s.values
    return EmissionSpectrum(specs[0].omegas, vals, beam.wavelength_nm, specs[0].direction,
                            {"n_momenta": len(specs)})


COMPARISON_DIRECTIONS = {
    "forward": Direction(math.pi / 2, 0.0),
    "oblique_45": Direction(math.pi / 2, math.pi / 4),
    "perpendicular_y": Direction(math.pi / 2, math.pi / 2),
    "backward": Direction(math.pi / 2, math.pi),
}


def comparison_grid(omega_min=0.85, omega_max=1.15, n_omega=121) -> AngularSpectralGrid:
    """Equatorial comparison directions with a band around the laser frequency."""
    phis = [d.phi for d in COMPARISON_DIRECTIONS.values()]
    return AngularSpectralGrid.points([math.pi / 2], phis,
                                      np.linspace(omega_min, omega_max, n_omega))


@dataclass
class ComparisonReport:
    sigma_r_m: float
    directions: list
    point: np.ndarray  # point-electron emission per direction (eV/sr)
    incoherent: np.ndarray
    incoherent_se: np.ndarray
    coherent: np.ndarray
    coherent_se: np.ndarray
    coherent_unbiased: np.ndarray
    coherent_unbiased_se: np.ndarray
    analytic_ratio: np.ndarray  # Gaussian-cloud form factor with r0 = sqrt(2) sigma_r
    n_samples: int
    seed: int | None
    result: EnsembleResult | None = None

    def ratio_table(self) -> list[dict]:
        f = self.directions.index("forward") if "forward" in self.directions else 0
        rows = []
        for i, name in enumerate(self.directions):
            rows.append({
                "direction": name,
                "point_eV_sr": float(self.point[i]),
                "incoherent_eV_sr": float(self.incoherent[i]),
                "incoherent_se": float(self.incoherent_se[i]),
                "coherent_eV_sr": float(self.coherent[i]),
                "coherent_se": float(self.coherent_se[i]),
                "coherent_unbiased_eV_sr": float(self.coherent_unbiased[i]),
                "coherent_unbiased_se": float(self.coherent_unbiased_se[i]),
                "incoherent_over_point": float(self.incoherent[i] / self.point[i]),
                "coherent_over_forward": float(self.coherent[i] / self.coherent[f]),
                "coherent_unbiased_over_forward": float(self.coherent_unbiased[i]
                                                        / self.coherent_unbiased[f]),
                "analytic_ratio": float(self.analytic_ratio[i]),
            })
        return rows

    def as_dict(self) -> dict:
        return {"sigma_r_m": self.sigma_r_m, "n_samples": self.n_samples, "seed": self.seed,
                "table": self.ratio_table()}


def compare_models(state, beam: BeamConfig, n: int, seed: int, *, grid=None,
                   settings: EnsembleSettings | None = None,
                   threads: int | None = None) -> ComparisonReport:
    """Quantum-incoherent, semiclassical-coherent and closed-form emission side by side."""
    if beam.model == "focused_pulsed" or beam.a0 > 0.1:
        raise DomainError("comparison needs a low-intensity plane wave (a0 <= 0.1)")
    grid = grid or comparison_grid()
    if grid.is_sphere:
        raise DomainError("comparison uses a points grid of equatorial directions")
    samples = sample_phase_space(state, n, seed)
    res = ensemble_radiation(samples, beam, grid, settings=settings, seed=seed, threads=threads)
    point = angular_band_energy(map_from_amplitudes(
        sample_amplitude(beam, grid, settings or EnsembleSettings(), np.zeros(3),
                         np.asarray(getattr(state, "center_p", np.zeros(3)))),
        grid, beam.wavelength_nm)).ravel()
    names = []
    for th in grid.thetas:
        for ph in grid.phis:
            match = [k for k, d in COMPARISON_DIRECTIONS.items()
                     if math.isclose(d.theta, th) and math.isclose(d.phi, ph)]
            names.append(match[0] if match else f"theta{th:.4g}_phi{ph:.4g}")
    base = state.initial if isinstance(state, EvolvedState) else state
    sigma = float(np.mean(base.sigma_r))
    cloud = GaussianCloud(math.sqrt(2.0) * sigma / (beam.wavelength_nm * 1e-9), 2 * math.pi)
    dirs = [Direction(float(th), float(ph)) for th in grid.thetas for ph in grid.phis]
    analytic = np.array([direction_ratio(cloud, d) for d in dirs])
    b = res.bands["all"]
    return ComparisonReport(sigma, names, point, b.incoherent.ravel(), b.incoherent_se.ravel(),
                            b.coherent.ravel(), b.coherent_se.ravel(),
                            b.coherent_unbiased.ravel(), b.coherent_unbiased_se.ravel(),
                            analytic, n, seed, res)

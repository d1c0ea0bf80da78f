"""End-to-end acceptance checks, one test per criterion, each at its stated tolerance."""
import json
import math
import time
from importlib import resources

import numpy as np
import pytest

from oracles import (infinite_wave_potential, plane_wave_momentum, side_on_fundamental,
                     thomson_energy_eV, gaussian_alpha_closed, wigner_q_integral)
from thomsonwp.cli import EXIT_OK, run
from thomsonwp.dynamics import PERIOD, ElectronState, push_trajectory
from thomsonwp.ensemble import EnsembleSettings, _sample_state, single_electron_spectrum
from thomsonwp.dynamics import end_time
from thomsonwp.extended import GaussianCloud, cloud_intensity, cloud_total_efficiency
from thomsonwp.laser import BeamConfig
from thomsonwp.radiation import (larmor_total, oscillator_trajectory, radiation_map,
                                 total_energy)
from thomsonwp.units import (C, LAMBDA_C_BAR, FORWARD, PERPENDICULAR_Y, AngularSpectralGrid,
                             Direction, intensity_from_a0)
from thomsonwp.wigner import (GaussianWavePacket, MomentumSuperposition, PhaseSpaceBox,
                              free_evolve, marginal_position, negativity_report, spread_width,
                              wigner_eval)

pytestmark = pytest.mark.acceptance
CONFIGS = resources.files("thomsonwp") / "configs"
LAM = 800e-9


def cfg(name):
    return str(CONFIGS / name)


def plane(model, a0, **kw):
    return BeamConfig(model=model, peak_intensity_W_cm2=intensity_from_a0(a0, 800), **kw)


def pulse_trajectory(a0, fwhm_fs, dt_over_period=1e-3):
    """Electron at rest far ahead of a plane-wave pulse, followed until the pulse has passed."""
    beam = plane("plane_pulsed", a0, fwhm_fs=fwhm_fs)
    st = EnsembleSettings()
    init = _sample_state(beam, st, np.zeros(3), np.zeros(3))
    t_end, eta_stop = end_time(beam, st.electron, init)
    return beam, push_trajectory(beam, init, t_end, dt_over_period * PERIOD, eta_stop=eta_stop)


class CliRuns:
    """Shipped-config CLI runs, made once per session and shared between criteria."""

    def __init__(self, root):
        self.root = root
        self.dirs = {}
        self.seconds = {}

    def get(self, sub, name, threads, overrides=()):
        key = (sub, name, threads, tuple(overrides))
        if key not in self.dirs:
            out = self.root / f"{name.split('.')[0]}_{sub}_t{threads}_{len(self.dirs)}"
            t0 = time.perf_counter()
            code = run(sub, cfg(name), list(overrides), out=str(out), threads=threads)
            self.seconds[key] = time.perf_counter() - t0
            assert code == EXIT_OK, f"{sub} {name} exited with {code}"
            self.dirs[key] = out
        return self.dirs[key]


@pytest.fixture(scope="session")
def cli(tmp_path_factory):
    return CliRuns(tmp_path_factory.mktemp("acceptance"))


def test_criterion_01_cloud_closed_form(criterion, rng):
    t0 = time.perf_counter()
    theta = np.arccos(rng.uniform(-1, 1, 1000))
    phi = rng.uniform(0, 2 * math.pi, 1000)
    r0 = rng.uniform(0, 3, 1000)
    worst = 0.0
    for th, ph, r in zip(theta, phi, r0):
        got = cloud_intensity(GaussianCloud.from_wavelength(r), Direction(th, ph))
        ref = math.sin(th) ** 2 * math.exp(-(2 * math.pi * r) ** 2
                                           * (1 - math.sin(th) * math.cos(ph)))
        if ref > 0:
            worst = max(worst, abs(got - ref) / ref)
        else:
            assert got == 0.0
    fwd = {cloud_intensity(GaussianCloud.from_wavelength(r), FORWARD) for r in r0}
    dt = time.perf_counter() - t0
    criterion(f"max rel err {worst:.2e} (tol 1e-12); forward values {sorted(fwd)}; {dt:.2f} s")
    assert worst < 1e-12
    assert fwd == {1.0}
    assert dt < 1.0


def test_criterion_02_efficiency_shape(criterion):
    t0 = time.perf_counter()
    perp = cloud_intensity(GaussianCloud.from_wavelength(1.0), PERPENDICULAR_Y)
    r0 = np.linspace(0, 2, 81)
    tot = np.array([cloud_total_efficiency(GaussianCloud.from_wavelength(r)) for r in r0])
    dt = time.perf_counter() - t0
    criterion(f"perp(r0=lambda) = {perp:.3e} (e^-4pi^2 = {math.exp(-4 * math.pi**2):.3e});"
              f" total {tot[0]:.3f} -> {tot[-1]:.4f}, strictly decreasing"
              f" {bool(np.all(np.diff(tot) < 0))}; {dt:.2f} s")
    assert perp < 1e-15
    assert perp == pytest.approx(math.exp(-4 * math.pi**2), rel=1e-12)
    assert np.all(np.diff(tot) < 0)
    assert dt < 10


def test_criterion_03_focused_totals(criterion, cli):
    out = cli.get("radiate", "fig3.cfg", 1)
    tot = json.loads((out / "totals.json").read_text())
    secs = cli.seconds[("radiate", "fig3.cfg", 1, ())]
    frac = tot["band_850_950_fraction"]
    criterion(f"total {tot['total_eV']:.4f} eV (0.24 eV x/÷ 3), 850-950 nm "
              f"{tot['band_850_950_eV']:.4f} eV = {100 * frac:.1f}% (20 +/- 10 %); {secs:.0f} s")
    assert 0.24 / 3 <= tot["total_eV"] <= 0.24 * 3
    assert 0.10 <= frac <= 0.30
    assert secs < 300


def test_criterion_04_photon_statistics(criterion, cli):
    tot = json.loads((cli.get("radiate", "fig3.cfg", 1) / "totals.json").read_text())
    n = tot["band_850_950_photons_collected"]
    criterion(f"{n:.3e} photons/shot in 850-950 nm at 10% collection"
              f" (1 per {1 / n:.0f} shots); bracket [1e-3, 1e-2]")
    assert 1e-3 <= n <= 1e-2


def test_criterion_05_spectral_vs_larmor(criterion, cli):
    t0 = time.perf_counter()
    osc = oscillator_trajectory()
    g = AngularSpectralGrid.sphere(16, 16, 401, 0.5, 1.5)
    ra = total_energy(radiation_map(osc, g)) / larmor_total(osc)
    _, tr = pulse_trajectory(1.0, 20.0)
    g = AngularSpectralGrid.sphere(24, 24, 600, 0.01, 6.0)
    rb = total_energy(radiation_map(tr, g)) / larmor_total(tr)
    tot = json.loads((cli.get("radiate", "fig3.cfg", 1) / "totals.json").read_text())
    rc = tot["total_eV"] / tot["larmor_eV"]
    dt = time.perf_counter() - t0
    criterion(f"spectral/Larmor: dipole {ra:.5f}, a0=1 pulse {rb:.4f}, focused {rc:.4f}"
              f" (tol 5%); {dt:.0f} s excluding the shared focused run")
    for r in (ra, rb, rc):
        assert abs(r - 1) < 0.05
    assert dt < 300


def test_criterion_06_plane_wave_invariants(criterion):
    t0 = time.perf_counter()
    a0 = 1.0
    beam = plane("plane_infinite", a0)
    tr = push_trajectory(beam, ElectronState(np.zeros(3), np.zeros(3), 0.0), 100 * PERIOD,
                         PERIOD / 1000)
    inv = tr.gamma - tr.p[:, 0]
    a = infinite_wave_potential(a0, tr.eta)
    p_ref, _ = plane_wave_momentum(a)
    e_inv = np.max(np.abs(inv - 1.0))
    e_pz = np.max(np.abs(tr.p[:, 2] - p_ref[:, 2]))
    dt = time.perf_counter() - t0
    criterion(f"max |gamma - p_x - 1| = {e_inv:.2e}, max |p_z - a| = {e_pz:.2e} over 100 cycles"
              f" (tol 1e-6); {dt:.2f} s")
    assert e_inv < 1e-6 and e_pz < 1e-6
    assert dt < 10


def test_criterion_07_thomson_limit(criterion):
    t0 = time.perf_counter()
    I = intensity_from_a0(0.01, 800)
    beam = BeamConfig(model="plane_pulsed", peak_intensity_W_cm2=I, fwhm_fs=35)
    g = AngularSpectralGrid.sphere(16, 16, 161, 0.6, 1.4)
    got = single_electron_spectrum(beam, g).total()
    ref = thomson_energy_eV(I, 35)
    dt = time.perf_counter() - t0
    criterion(f"scattered {got:.5e} eV vs sigma_T x fluence {ref:.5e} eV"
              f" (ratio {got / ref:.4f}, tol 2%); {dt:.1f} s")
    assert got == pytest.approx(ref, rel=0.02)
    assert dt < 30


def test_criterion_08_red_shift(criterion):
    t0 = time.perf_counter()
    a0 = 2.15
    _, tr = pulse_trajectory(a0, 35.0)
    g = AngularSpectralGrid.points([math.pi / 2], [math.pi / 2], np.linspace(0.2, 1.5, 1301))
    spectrum = radiation_map(tr, g).direction_spectrum(0, 0)
    peak = spectrum.peak_omega()
    oracle = side_on_fundamental(a0)
    dt = time.perf_counter() - t0
    criterion(f"side-on peak {800 / peak:.0f} nm (omega {peak:.4f}); drift Doppler oracle"
              f" {oracle:.4f} ({800 / oracle:.0f} nm), deviation {abs(peak / oracle - 1):.1%}"
              f" (tol 10%); {dt:.1f} s")
    assert 800 / peak > 800
    assert abs(peak / oracle - 1) < 0.10
    assert dt < 60


def test_criterion_09_wigner_suite(criterion, rng):
    t0 = time.perf_counter()
    hb, s = LAMBDA_C_BAR, 1e-10
    sp_ = hb / (2 * s)
    comps = [(1.0 + 0j, 0.0, -5 * sp_), (0.8 * np.exp(1.1j), 0.2 * s, 5 * sp_)]
    state = MomentumSuperposition(tuple(
        (c, GaussianWavePacket(center_r=[0, 0, a], center_p=[0, 0, b], sigma_r=s))
        for c, a, b in comps))
    alpha = gaussian_alpha_closed([(c, a, b) for (c, _), (_, a, b)
                                   in zip(state.components, comps)], s, hb)
    scale = 1 / (math.pi * hb)
    worst = 0.0
    for _ in range(50):
        z, pz = rng.uniform(-3 * s, 3 * s), rng.uniform(-8 * sp_, 8 * sp_)
        r, p = np.array([0, 0, z]), np.array([0, 0, pz])
        got = wigner_eval(state, r, p) / scale**2
        ref = wigner_q_integral(alpha, z, pz, hb, q_max=40 * sp_)
        worst = max(worst, abs(got - ref) / scale)
    # normalization of a Gaussian packet, per axis by Gauss-Legendre in (z, pz)
    g = GaussianWavePacket(sigma_r=s, center_p=[0, 0, 1e-3])
    x, w = np.polynomial.legendre.leggauss(200)
    Z, P = np.meshgrid(12 * s * x, 1e-3 + 12 * sp_ * x, indexing="ij")
    rr = np.zeros(Z.shape + (3,))
    pp = np.zeros(Z.shape + (3,))
    rr[..., 2], pp[..., 2] = Z, P
    pp[..., 2] = P
    norm = 144 * s * sp_ * np.einsum("i,j,ij->", w, w, wigner_eval(g, rr, pp) / scale**2)
    two = MomentumSuperposition.two_momenta(GaussianWavePacket(sigma_r=s), [0, 0, 20 * sp_])
    neg = negativity_report(two, PhaseSpaceBox.around(two), 12)
    t = 507.02e-15
    sig = float(spread_width(s, t))
    ev = free_evolve(g, t)
    zc = 1e-3 * C * t
    xq, wq = np.polynomial.legendre.leggauss(400)
    zz = zc + 10 * sig * xq
    rz = np.zeros((zz.size, 3))
    rz[:, 2] = zz
    dens = marginal_position(ev, rz) * 2 * math.pi * sig**2
    mass = 10 * sig * wq @ dens
    sig_grid = math.sqrt(10 * sig * wq @ (dens * (zz - zc) ** 2) / mass)
    tau = hb * C * t / (2 * s * s)
    analytic = s * math.sqrt(1 + tau**2)
    dt = time.perf_counter() - t0
    criterion(f"q-integral max err {worst:.1e}, norm-1 {norm - 1:.1e}, negative fraction"
              f" {neg.negative_fraction:.3f}, sigma(507 fs) {sig_grid:.5e} m ="
              f" {sig_grid / LAM:.4f} lambda (rel dev {abs(sig_grid / analytic - 1):.1e}); {dt:.1f} s")
    assert worst < 1e-6
    assert abs(norm - 1) < 1e-6
    assert neg.negative_fraction > 0
    assert abs(sig_grid / analytic - 1) < 1e-6 and abs(sig / analytic - 1) < 1e-12
    assert 0.25 <= sig_grid / LAM <= 0.5
    assert dt < 60


def test_criterion_10_model_contrast(criterion, cli):
    out = cli.get("compare", "compare.cfg", 1)
    rep = json.loads((out / "compare_report.json").read_text())
    rows = {r["direction"]: r for r in rep["table"]}
    f, y = rows["forward"], rows["perpendicular_y"]
    ratio = y["coherent_eV_sr"] / f["coherent_eV_sr"]
    se_ratio = y["coherent_se"] / f["coherent_eV_sr"]
    target = math.exp(-math.pi**2)
    inc_dev = abs(y["incoherent_eV_sr"] - y["point_eV_sr"])
    secs = cli.seconds[("compare", "compare.cfg", 1, ())]
    criterion(f"coherent perp/forward {ratio:.2e} +/- {se_ratio:.1e} vs e^-pi^2 {target:.2e}"
              f" ({abs(ratio - target) / se_ratio:.2f} SE); incoherent/point"
              f" {y['incoherent_over_point']:.9f} ({inc_dev / y['incoherent_se']:.2f} SE);"
              f" n={rep['n_samples']}; {secs:.0f} s")
    assert rep["n_samples"] == 4096
    assert abs(ratio - target) <= 3 * se_ratio
    assert inc_dev <= 3 * y["incoherent_se"]
    assert secs < 300


def _csvs(path):
    return {p.name: p.read_bytes() for p in sorted(path.glob("*.csv"))}


def test_criterion_11_determinism(criterion, cli):
    checked = []
    for sub, name in (("thomson-scan", "fig2.cfg"), ("wigner", "spreading.cfg"),
                      ("compare", "compare.cfg"), ("radiate", "fig3.cfg")):
        a = _csvs(cli.get(sub, name, 1))
        b = _csvs(cli.get(sub, name, 2))
        assert a and a.keys() == b.keys()
        for k in a:
            assert a[k] == b[k], f"{name}/{k} differs between --threads 1 and 2"
        checked += [f"{name}:{k}" for k in a]
    criterion(f"{len(checked)} CSVs byte-identical between --threads 1 and --threads 2")

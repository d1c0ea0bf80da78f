import math

import numpy as np
import pytest

from oracles import gaussian_alpha_1d, gaussian_alpha_closed, wigner_q_integral
from thomsonwp.errors import CoverageError, DomainError
from thomsonwp.units import C, LAMBDA_C_BAR
from thomsonwp.wigner import (GaussianWavePacket, MomentumSuperposition, PhaseSpaceBox, box_mass,
                              free_evolve, marginal_momentum, marginal_position,
                              momentum_density, negativity_report, position_density,
                              spread_width, wigner_eval)

HB = LAMBDA_C_BAR
S = 1e-10
SP = HB / (2 * S)


def packet(**kw):
    kw.setdefault("sigma_r", S)
    return GaussianWavePacket(**kw)


def superposition(k=10.0, phase=0.0):
    return MomentumSuperposition.two_momenta(packet(), [0, 0, 2 * k * SP], phase)


def axis_point(z, pz):
    r = np.zeros(3)
    p = np.zeros(3)
    r[2], p[2] = z, pz
    return r, p


def test_gaussian_peak_and_positivity(rng):
    g = packet(center_r=[1e-10, 0, -2e-10], center_p=[0, 1e-3, 0])
    peak = wigner_eval(g, g.center_r, g.center_p)
    assert peak == pytest.approx(1 / (math.pi * HB) ** 3, rel=1e-12)
    r = g.center_r + rng.normal(size=(200, 3)) * 3 * S
    p = g.center_p + rng.normal(size=(200, 3)) * 3 * SP
    vals = wigner_eval(g, r, p)
    assert np.all(vals >= 0) and np.all(vals <= peak)


def test_validation():
    with pytest.raises(DomainError):
        packet(sigma_r=0.0)
    with pytest.raises(DomainError):
        packet(center_r=[1, 2])
    with pytest.raises(DomainError):
        MomentumSuperposition(((1.0, packet()),))
    with pytest.raises(DomainError):
        MomentumSuperposition(((1.0, packet()), (1.0, packet(sigma_r=2e-10))))
    with pytest.raises(DomainError):
        free_evolve(packet(), -1.0)


def test_superposition_normalized_and_negative():
    sp = superposition(10.0)
    assert sp.norm() == pytest.approx(1.0, rel=1e-12)
    # midpoint momentum, r where the cross-term cosine is -1: db z / hbar = pi
    z = math.pi * HB / (20 * SP)
    r, p = axis_point(z, 0.0)
    assert wigner_eval(sp, r, p) < 0
    r0, _ = axis_point(0.0, 0.0)
    assert wigner_eval(sp, r0, p) > 0


def test_closed_form_against_q_integral(rng):
    """1-D reduction: single axis with several components, random points, oracle from alpha(p)."""
    comps = [(1.0 + 0.0j, 0.0, -6 * SP), (0.7 * np.exp(0.4j), 0.3 * S, 5 * SP),
             (0.2j, -0.5 * S, 0.5 * SP)]
    sp = MomentumSuperposition(tuple(
        (c, packet(center_r=[0, 0, a], center_p=[0, 0, b])) for c, a, b in comps))
    normed = [(c, a, b) for (c, _), (_, a, b) in zip(sp.components, comps)]
    alpha = gaussian_alpha_closed(normed, S, HB)
    # the closed-form alpha itself is checked against the Fourier integral of psi
    alpha_num, _, _ = gaussian_alpha_1d(normed, S, HB)
    pt = np.linspace(-10 * SP, 10 * SP, 7)
    np.testing.assert_allclose(alpha(pt), alpha_num(pt), rtol=1e-9, atol=1e-9 * np.abs(alpha(0.0)))
    # the transverse axes carry a plain Gaussian factor: divide it out at the center
    transverse = (1 / (math.pi * HB)) ** 2
    worst = 0.0
    for _ in range(50):
        z = rng.uniform(-3 * S, 3 * S)
        pz = rng.uniform(-9 * SP, 9 * SP)
        r, p = axis_point(z, pz)
        got = wigner_eval(sp, r, p) / transverse
        ref = wigner_q_integral(alpha, z, pz, HB, q_max=40 * SP)
        scale = 1 / (math.pi * HB)
        worst = max(worst, abs(got - ref) / scale)
    assert worst < 1e-6


def test_normalization_by_quadrature():
    for state in (packet(center_p=[0, 0, 1e-3]), superposition(4.0, phase=0.9)):
        # per-axis 2-D Gauss-Legendre over +/- 12 widths, combined as a 6-D product
        x, w = np.polynomial.legendre.leggauss(200)
        zs = 12 * S * x
        ps = 12 * SP * x + 0.0
        ps_wide = 20 * SP * x
        Z, P = np.meshgrid(zs, ps_wide, indexing="ij")
        r = np.zeros(Z.shape + (3,))
        p = np.zeros(Z.shape + (3,))
        r[..., 2] = Z
        p[..., 2] = P
        if isinstance(state, GaussianWavePacket):
            p[..., 2] += state.center_p[2]
        vals = wigner_eval(state, r, p) / (1 / (math.pi * HB)) ** 2
        total = (12 * S) * (20 * SP) * np.einsum("i,j,ij->", w, w, vals)
        assert total == pytest.approx(1.0, abs=1e-6)
        del ps


def test_marginals_gaussian():
    g = packet(center_p=[0, 0, 2e-3])
    r = np.zeros((5, 3))
    r[:, 2] = np.linspace(-2 * S, 2 * S, 5)
    ref = (2 * math.pi * S**2) ** -1.5 * np.exp(-r[:, 2] ** 2 / (2 * S**2))
    np.testing.assert_allclose(marginal_position(g, r), ref, rtol=1e-10)
    np.testing.assert_allclose(position_density(g, r), ref, rtol=1e-12)
    p = np.tile(g.center_p, (5, 1))
    p[:, 0] = np.linspace(-2 * SP, 2 * SP, 5)
    refp = (2 * math.pi * SP**2) ** -1.5 * np.exp(-p[:, 0] ** 2 / (2 * SP**2))
    np.testing.assert_allclose(marginal_momentum(g, p), refp, rtol=1e-10)
    np.testing.assert_allclose(momentum_density(g, p), refp, rtol=1e-12)
    assert g.sigma_p[0] == pytest.approx(HB / (2 * S))


def test_superposition_fringes():
    k = 10.0
    sp = superposition(k)
    dp = 2 * k * SP
    period = 2 * math.pi * HB / dp
    z = np.linspace(-1.5 * S, 1.5 * S, 301)
    r = np.zeros((z.size, 3))
    r[:, 2] = z
    m = marginal_position(sp, r)
    np.testing.assert_allclose(m, position_density(sp, r), rtol=1e-8,
                               atol=1e-10 * m.max())
    # analytic |psi|^2 = env (1 + cos(dp z / hbar)) / norm: fringe spacing
    mins = z[1:-1][(m[1:-1] < m[:-2]) & (m[1:-1] < m[2:])]
    assert np.diff(mins).mean() == pytest.approx(period, rel=1e-2)


def test_free_evolution():
    g = packet(center_p=[0, 0, 1e-3])
    assert wigner_eval(free_evolve(g, 0.0), g.center_r, g.center_p) == wigner_eval(
        g, g.center_r, g.center_p)
    t = 507e-15
    ev = free_evolve(g, t)
    tau = HB * C * t / (2 * S * S)
    assert ev.sigma_r[0] == pytest.approx(S * math.sqrt(1 + tau**2), rel=1e-12)
    assert free_evolve(ev, 1e-15).time == pytest.approx(t + 1e-15)
    # momentum marginal invariant
    p = np.tile(g.center_p, (4, 1))
    p[:, 2] += np.linspace(-SP, SP, 4)
    np.testing.assert_allclose(marginal_momentum(ev, p), marginal_momentum(g, p), rtol=1e-8)
    # grid-transported position marginal has the analytic width
    sig = ev.sigma_r[2]
    zc = g.center_p[2] * C * t
    x, wq = np.polynomial.legendre.leggauss(400)
    z = zc + 10 * sig * x
    r = np.zeros((z.size, 3))
    r[:, 2] = z
    dens = marginal_position(ev, r) * (2 * math.pi * sig**2)  # undo the x and y factors
    mass = 10 * sig * wq @ dens
    var = 10 * sig * wq @ (dens * (z - zc) ** 2) / mass
    assert mass == pytest.approx(1.0, abs=1e-10)
    assert math.sqrt(var) == pytest.approx(sig, rel=1e-8)
    with pytest.raises(DomainError):
        free_evolve(superposition(), t).sigma_r


def test_spreading_scale():
    t = 190 * 800e-9 / C
    s = spread_width(1e-10, t)
    assert t * 1e15 == pytest.approx(507, abs=0.1)
    assert HB * C * t / (2e-20) == pytest.approx(2.9e3, rel=0.02)
    assert s == pytest.approx(0.29e-6, rel=0.02)
    assert 0.25 < s / 800e-9 < 0.5


def test_negativity():
    g = packet()
    rep = negativity_report(g, PhaseSpaceBox.around(g), 8)
    assert rep.min_value >= 0 and rep.negative_fraction == 0
    sp = superposition(10.0)
    rep = negativity_report(sp, PhaseSpaceBox.around(sp), 10)
    assert rep.negative_fraction > 0 and rep.min_value < 0
    same = MomentumSuperposition(((1.0, packet()), (0.5j, packet())))
    assert same.is_gaussian
    rep = negativity_report(same, PhaseSpaceBox.around(same), 8)
    assert rep.negative_fraction == 0
    tiny = PhaseSpaceBox([-S] * 3, [S] * 3, [-SP] * 3, [SP] * 3)
    with pytest.raises(CoverageError):
        negativity_report(g, tiny, 4)


def test_box_mass():
    g = packet()
    assert box_mass(g, PhaseSpaceBox.around(g)) == pytest.approx(1.0, abs=1e-7)
    one_sigma = PhaseSpaceBox([-S] * 3, [S] * 3, [-10 * SP] * 3, [10 * SP] * 3)
    assert box_mass(g, one_sigma) == pytest.approx(math.erf(1 / math.sqrt(2)) ** 3, rel=1e-9)
    sp = superposition(6.0, 0.3)
    assert box_mass(sp, PhaseSpaceBox.around(sp)) == pytest.approx(1.0, abs=1e-6)
    ev = free_evolve(sp, 1e-15)
    assert box_mass(ev, PhaseSpaceBox.around(ev)) == pytest.approx(1.0, abs=1e-5)

"""Wigner functions of Gaussian wave packets and of momentum superpositions.

Positions are in metres and momenta in m_e c, so hbar is the reduced Compton
wavelength.  Every state factorizes per Cartesian axis; a superposition
sum_k c_k phi_k has Wigner function sum_jk conj(c_j) c_k W_jk with

    W_jk(x, p) = (1/pi hbar) exp(-X^2/2s^2 - 2 s^2 (p - b)^2 / hbar^2)
                 * exp(i (db X - p da) / hbar)

per axis, where X = x - mean(a), b = mean(b), da = a_k - a_j, db = b_k - b_j,
and phi_k = (2 pi s^2)^(-1/4) exp(-(x - a_k)^2 / 4s^2 + i b_k (x - a_k) / hbar).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import wofz

from .errors import CoverageError, DomainError
from .units import C, LAMBDA_C_BAR

HBAR = LAMBDA_C_BAR  # hbar in (m) x (m_e c)
N_QUAD = 512
SPAN = 14.0  # quadrature half-width in standard deviations
COVERAGE = 0.99


def _vec3(v, name):
    a = np.asarray(v, dtype=float)
    if a.ndim == 0:
        a = np.full(3, float(a))
    if a.shape != (3,) or not np.all(np.isfinite(a)):
        raise DomainError(f"{name} must be a finite 3-vector")
    return a


@dataclass(frozen=True, eq=False)
class GaussianWavePacket:
    """Minimum-uncertainty Gaussian; sigma_p = hbar / (2 sigma_r) per axis."""

    center_r: np.ndarray = field(default_factory=lambda: np.zeros(3))
    center_p: np.ndarray = field(default_factory=lambda: np.zeros(3))
    sigma_r: np.ndarray = 1e-10

    def __post_init__(self):
        object.__setattr__(self, "center_r", _vec3(self.center_r, "center_r"))
        object.__setattr__(self, "center_p", _vec3(self.center_p, "center_p"))
        s = _vec3(self.sigma_r, "sigma_r")
        if np.any(s <= 0):
            raise DomainError("sigma_r must be > 0 on every axis")
        object.__setattr__(self, "sigma_r", s)

    @property
    def sigma_p(self) -> np.ndarray:
        return HBAR / (2.0 * self.sigma_r)

    @property
    def components(self):
        return ((1.0 + 0j, self),)

    @property
    def time(self) -> float:
        return 0.0

    @property
    def is_gaussian(self) -> bool:
        return True


def _overlap(pj: GaussianWavePacket, pk: GaussianWavePacket) -> complex:
    s = pj.sigma_r
    da = pk.center_r - pj.center_r
    db = pk.center_p - pj.center_p
    bm = 0.5 * (pk.center_p + pj.center_p)
    expo = -da**2 / (8 * s**2) - s**2 * db**2 / (2 * HBAR**2) - 1j * bm * da / HBAR
    return complex(np.exp(expo.sum()))


@dataclass(frozen=True, eq=False)
class MomentumSuperposition:
    """sum_k c_k |phi_k> with shared widths; amplitudes are renormalized on construction."""

    components: tuple

    def __post_init__(self):
        comps = tuple((complex(c), p) for c, p in self.components)
        if len(comps) < 2:
            raise DomainError("a superposition needs at least two components")
        s0 = comps[0][1].sigma_r
        for _, p in comps:
            if not isinstance(p, GaussianWavePacket):
                raise DomainError("components must be GaussianWavePacket instances")
            if not np.allclose(p.sigma_r, s0, rtol=1e-12, atol=0):
                raise DomainError("all components must share sigma_r")
        norm = sum((cj.conjugate() * ck * _overlap(pj, pk)).real
                   for cj, pj in comps for ck, pk in comps)
        if norm <= 0:
            raise DomainError("superposition has zero norm")
        scale = 1.0 / math.sqrt(norm)
        object.__setattr__(self, "components", tuple((c * scale, p) for c, p in comps))

    @classmethod
    def two_momenta(cls, base: GaussianWavePacket, delta_p, phase: float = 0.0,
                    weights=(1.0, 1.0)):
        """Equal-position packets at momenta center_p -/+ delta_p/2."""
        dp = _vec3(delta_p, "delta_p")
        p1 = GaussianWavePacket(base.center_r, base.center_p - dp / 2, base.sigma_r)
        p2 = GaussianWavePacket(base.center_r, base.center_p + dp / 2, base.sigma_r)
        return cls(((weights[0], p1), (weights[1] * complex(math.cos(phase), math.sin(phase)), p2)))

    @property
    def sigma_r(self) -> np.ndarray:
        return self.components[0][1].sigma_r

    @property
    def sigma_p(self) -> np.ndarray:
        return HBAR / (2.0 * self.sigma_r)

    @property
    def time(self) -> float:
        return 0.0

    @property
    def is_gaussian(self) -> bool:
        p0 = self.components[0][1]
        return all(np.array_equal(p.center_r, p0.center_r) and np.array_equal(p.center_p, p0.center_p)
                   for _, p in self.components)

    def norm(self) -> float:
        return sum((cj.conjugate() * ck * _overlap(pj, pk)).real
                   for cj, pj in self.components for ck, pk in self.components)


@dataclass(frozen=True, eq=False)
class EvolvedState:
    """A state after free nonrelativistic flight for ``time`` seconds."""

    initial: object
    time: float

    @property
    def components(self):
        return self.initial.components

    @property
    def is_gaussian(self) -> bool:
        return self.initial.is_gaussian

    @property
    def sigma_r(self) -> np.ndarray:
        """Position width at ``time``: sigma0 sqrt(1 + (hbar t / 2 m sigma0^2)^2)."""
        if not isinstance(self.initial, GaussianWavePacket):
            raise DomainError("the spreading law applies to single Gaussian packets")
        return spread_width(self.initial.sigma_r, self.time)

    @property
    def sigma_p(self) -> np.ndarray:
        return self.initial.sigma_p


def spread_width(sigma0, t_s: float):
    """sigma(t) for a free minimum-uncertainty packet (sigma0 in m, t in s)."""
    s0 = np.asarray(sigma0, dtype=float)
    tau = HBAR * C * t_s / (2.0 * s0**2)  # hbar t / (2 m sigma0^2)
    return s0 * np.sqrt(1.0 + tau**2)


def free_evolve(state, t_s: float):
    """Ballistic transport rho(r, p; t) = rho(r - (p/m) t, p; 0)."""
    if not (math.isfinite(t_s) and t_s >= 0):
        raise DomainError("evolution time must be finite and >= 0")
    if isinstance(state, EvolvedState):
        return EvolvedState(state.initial, state.time + t_s)
    return EvolvedState(state, t_s)


def _terms(state):
    comps = state.components
    for cj, pj in comps:
        for ck, pk in comps:
            yield cj.conjugate() * ck, pj, pk


def _axis_params(pj, pk, ax):
    s = pj.sigma_r[ax]
    xm = 0.5 * (pj.center_r[ax] + pk.center_r[ax])
    bm = 0.5 * (pj.center_p[ax] + pk.center_p[ax])
    da = pk.center_r[ax] - pj.center_r[ax]
    db = pk.center_p[ax] - pj.center_p[ax]
    return s, xm, bm, da, db


def _w_axis(pj, pk, ax, x, p, t):
    s, xm, bm, da, db = _axis_params(pj, pk, ax)
    X = x - p * C * t - xm
    return (1.0 / (math.pi * HBAR)) * np.exp(
        -X**2 / (2 * s * s) - 2 * s * s * (p - bm) ** 2 / HBAR**2
        + 1j * (db * X - p * da) / HBAR)


def wigner_eval(state, r, p) -> np.ndarray:
    """rho_w(r, p); r and p broadcast with a trailing axis of length 3."""
    r = np.asarray(r, dtype=float)
    p = np.asarray(p, dtype=float)
    t = state.time
    total = 0.0
    for c, pj, pk in _terms(state):
        term = c
        for ax in range(3):
            term = term * _w_axis(pj, pk, ax, r[..., ax], p[..., ax], t)
        total = total + term
    return np.real(total)


def _gl(center, sigma, n=N_QUAD):
    x, w = np.polynomial.legendre.leggauss(n)
    half = SPAN * np.asarray(sigma)[..., None]
    return np.asarray(center)[..., None] + half * x, half * w


def _marginal_axis_r(pj, pk, ax, x, t):
    s, xm, bm, _, _ = _axis_params(pj, pk, ax)
    a1 = 4 * s * s / HBAR**2
    a2 = (C * t / s) ** 2
    center = (a1 * bm + (C * t / (s * s)) * (x - xm)) / (a1 + a2)
    nodes, w = _gl(center, np.full_like(center, 1.0 / math.sqrt(a1 + a2)))
    vals = _w_axis(pj, pk, ax, x[..., None], nodes, t)
    return np.sum(vals * w, axis=-1)


def _marginal_axis_p(pj, pk, ax, p, t):
    s, xm, _, _, _ = _axis_params(pj, pk, ax)
    nodes, w = _gl(xm + p * C * t, np.full_like(p, s))
    vals = _w_axis(pj, pk, ax, nodes, p[..., None], t)
    return np.sum(vals * w, axis=-1)


def _marginal(state, q, axis_fn):
    q = np.asarray(q, dtype=float)
    total = 0.0
    for c, pj, pk in _terms(state):
        term = c
        for ax in range(3):
            term = term * axis_fn(pj, pk, ax, q[..., ax], state.time)
        total = total + term
    return np.real(total)


def marginal_position(state, r) -> np.ndarray:
    """Position density: rho_w integrated over momentum by Gauss-Legendre quadrature."""
    return _marginal(state, r, _marginal_axis_r)


def marginal_momentum(state, p) -> np.ndarray:
    """Momentum density: rho_w integrated over position by Gauss-Legendre quadrature."""
    return _marginal(state, p, _marginal_axis_p)


def _psi(state, r):
    r = np.asarray(r, dtype=float)
    total = 0.0
    for c, pk in state.components:
        s = pk.sigma_r
        d = r - pk.center_r
        expo = -d**2 / (4 * s**2) + 1j * pk.center_p * d / HBAR
        total = total + c * np.prod((2 * math.pi * s**2) ** -0.25 * np.exp(expo), axis=-1)
    return total


def _alpha(state, p):
    p = np.asarray(p, dtype=float)
    total = 0.0
    for c, pk in state.components:
        s = pk.sigma_r
        expo = -1j * p * pk.center_r / HBAR - s**2 * (p - pk.center_p) ** 2 / HBAR**2
        total = total + c * np.prod((2 * s**2 / (math.pi * HBAR**2)) ** 0.25 * np.exp(expo), axis=-1)
    return total


def position_density(state, r) -> np.ndarray:
    """|psi(r)|^2 at the initial time (closed form)."""
    return np.abs(_psi(state, r)) ** 2


def momentum_density(state, p) -> np.ndarray:
    """|alpha(p)|^2 (closed form; invariant under free flight)."""
    return np.abs(_alpha(state, p)) ** 2


def momentum_amplitude_1d(state, ax: int, p):
    """alpha restricted to one axis for single-axis oracles; other axes integrated out."""
    p = np.asarray(p, dtype=float)
    total = 0.0
    for c, pk in state.components:
        s = pk.sigma_r[ax]
        total = total + c * (2 * s * s / (math.pi * HBAR**2)) ** 0.25 * np.exp(
            -1j * p * pk.center_r[ax] / HBAR - s * s * (p - pk.center_p[ax]) ** 2 / HBAR**2)
    return total


@dataclass(frozen=True)
class PhaseSpaceBox:
    r_min: np.ndarray
    r_max: np.ndarray
    p_min: np.ndarray
    p_max: np.ndarray

    def __post_init__(self):
        for name in ("r_min", "r_max", "p_min", "p_max"):
            object.__setattr__(self, name, _vec3(getattr(self, name), name))
        if np.any(self.r_max <= self.r_min) or np.any(self.p_max <= self.p_min):
            raise DomainError("box upper bounds must exceed lower bounds")

    @classmethod
    def around(cls, state, n_sigma: float = 6.0):
        """Box spanning every component's center +/- n_sigma widths."""
        comps = [p for _, p in state.components]
        rs = np.array([p.center_r for p in comps])
        ps = np.array([p.center_p for p in comps])
        sr = comps[0].sigma_r
        sp = comps[0].sigma_p
        t = state.time
        if t:
            sr = spread_width(sr, t)
            rs = np.concatenate([rs, rs + ps * C * t])
        return cls(rs.min(0) - n_sigma * sr, rs.max(0) + n_sigma * sr,
                   ps.min(0) - n_sigma * sp, ps.max(0) + n_sigma * sp)


def _x_integral(u1, u2, s, db):
    """int_{u1}^{u2} exp(-u^2/2s^2 + i db u / hbar) du, overflow-free via the Faddeeva function."""
    beta = db * s * s / HBAR

    def half(u):
        # exp(-s^2 db^2 / 2 hbar^2) erf((u - i beta) / (sqrt2 s)); erf is odd, so reflect u < 0
        sign = np.where(u >= 0, 1.0, -1.0)
        ua = np.abs(u)
        b = sign * beta
        iz = (1j * ua + b) / (math.sqrt(2) * s)
        e = np.exp(-(s * db) ** 2 / (2 * HBAR**2)) - np.exp(-ua**2 / (2 * s * s) + 1j * ua * b / (s * s)) * wofz(iz)
        return sign * e

    return s * math.sqrt(math.pi / 2) * (half(u2) - half(u1))


def _axis_mass(pj, pk, ax, lo_r, hi_r, lo_p, hi_p, t):
    s, xm, bm, da, db = _axis_params(pj, pk, ax)
    sp = HBAR / (2 * s)
    a, b = max(lo_p, bm - SPAN * sp), min(hi_p, bm + SPAN * sp)
    if b <= a:
        return 0.0
    x, w = np.polynomial.legendre.leggauss(N_QUAD)
    p = 0.5 * (a + b) + 0.5 * (b - a) * x
    w = 0.5 * (b - a) * w
    shift = p * C * t + xm
    inner = _x_integral(lo_r - shift, hi_r - shift, s, db)
    vals = (1.0 / (math.pi * HBAR)) * np.exp(-2 * s * s * (p - bm) ** 2 / HBAR**2
                                             - 1j * p * da / HBAR) * inner
    return np.sum(vals * w)


def box_mass(state, box: PhaseSpaceBox) -> float:
    """Integral of rho_w over the box (cross terms included)."""
    total = 0.0
    for c, pj, pk in _terms(state):
        term = c
        for ax in range(3):
            term = term * _axis_mass(pj, pk, ax, box.r_min[ax], box.r_max[ax],
                                     box.p_min[ax], box.p_max[ax], state.time)
        total = total + term
    return float(np.real(total))


@dataclass(frozen=True)
class NegativityReport:
    min_value: float
    negative_fraction: float
    mass_in_box: float
    resolution: tuple

    def as_dict(self) -> dict:
        return {"min_value": self.min_value, "negative_fraction": self.negative_fraction,
                "mass_in_box": self.mass_in_box, "resolution": list(self.resolution)}


def negativity_report(state, box: PhaseSpaceBox, resolution=16) -> NegativityReport:
    """Scan rho_w at the cell centers of a regular 6-D grid over ``box``.

    ``resolution`` is one count for all six dimensions or a 6-tuple ordered
    (x, y, z, px, py, pz).
    """
    res = tuple(int(v) for v in np.broadcast_to(np.asarray(resolution), (6,)))
    if min(res) < 1:
        raise DomainError("resolution must be >= 1")
    mass = box_mass(state, box)
    if mass < COVERAGE:
        raise CoverageError(f"box holds only {mass:.4f} of the state's mass (need {COVERAGE})")

    def centers(lo, hi, n):
        return lo + (np.arange(n) + 0.5) * (hi - lo) / n

    t = state.time
    # per-axis (x, p) tables of every term, then a chunked outer-product sum
    tables = []
    for c, pj, pk in _terms(state):
        per_axis = []
        for ax in range(3):
            x = centers(box.r_min[ax], box.r_max[ax], res[ax])
            p = centers(box.p_min[ax], box.p_max[ax], res[3 + ax])
            per_axis.append(_w_axis(pj, pk, ax, x[:, None], p[None, :], t))
        tables.append((c, per_axis))
    vmin = math.inf
    neg = 0
    for i in range(res[0]):
        block = 0.0
        for c, (wx, wy, wz) in tables:
            # axes: (px, y, py, z, pz)
            block = block + c * np.einsum("a,bc,de->abcde", wx[i], wy, wz)
        block = np.real(block)
        vmin = min(vmin, float(block.min()))
        neg += int(np.count_nonzero(block < 0))
    return NegativityReport(vmin, neg / float(np.prod(res)), mass, res)

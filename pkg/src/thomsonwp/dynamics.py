"""Relativistic point-electron dynamics in the laser field (normalized units, charge -e)."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import _backend
from .errors import ConfigError, DomainError, NoCrossingError, PropagationError
from .laser import MODEL_CODES, BeamConfig, fields, local_intensity

PERIOD = 2.0 * math.pi
#: largest allowed step: one two-hundredth of a laser period
MAX_DT = PERIOD / 200.0


@dataclass(frozen=True)
class ElectronState:
    position: np.ndarray
    momentum: np.ndarray
    time: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "position", np.asarray(self.position, dtype=float).reshape(3))
        object.__setattr__(self, "momentum", np.asarray(self.momentum, dtype=float).reshape(3))

    @property
    def gamma(self) -> float:
        return math.sqrt(1.0 + float(self.momentum @ self.momentum))


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Uniformly sampled electron history.

    Arrays: ``t`` (N,), ``r``, ``p``, ``beta``, ``beta_dot`` (N, 3).  ``birth_time``
    is set when the electron was created at ``t[0]`` (at rest or with the given
    momentum), i.e. it did not exist before the first sample.
    """

    t: np.ndarray
    r: np.ndarray
    p: np.ndarray
    beta: np.ndarray
    beta_dot: np.ndarray
    birth_time: float | None = None
    metadata: dict = field(default_factory=dict)

    def __len__(self):
        return self.t.size

    @property
    def dt(self) -> float:
        return float(self.t[1] - self.t[0])

    @property
    def gamma(self) -> np.ndarray:
        return np.sqrt(1.0 + np.einsum("ij,ij->i", self.p, self.p))

    @property
    def eta(self) -> np.ndarray:
        """Retarded laser phase t - x along the path."""
        return self.t - self.r[:, 0]

    def state(self, i: int) -> ElectronState:
        return ElectronState(self.r[i], self.p[i], float(self.t[i]))

    @classmethod
    def from_arrays(cls, t, r, beta, beta_dot=None, birth_time=None, metadata=None):
        """Build from kinematics alone (analytic test trajectories); p = gamma beta."""
        t = np.asarray(t, dtype=float)
        beta = np.asarray(beta, dtype=float)
        g = 1.0 / np.sqrt(1.0 - np.einsum("ij,ij->i", beta, beta))
        if beta_dot is None:
            beta_dot = np.gradient(beta, t, axis=0, edge_order=2)
        return cls(t, np.asarray(r, dtype=float), beta * g[:, None], beta,
                   np.asarray(beta_dot, dtype=float), birth_time, dict(metadata or {}))


def force_and_acceleration(config: BeamConfig | None, r, p, t):
    """Lorentz force -(E + beta x B) and d(beta)/dt at samples (vectorized)."""
    p = np.asarray(p, dtype=float)
    g = np.sqrt(1.0 + np.einsum("...i,...i->...", p, p))
    beta = p / g[..., None]
    if config is None:
        zero = np.zeros_like(p)
        return zero, zero
    r = np.asarray(r, dtype=float)
    e, b = fields(config, r[..., 0], r[..., 1], r[..., 2], t)
    force = -(e + np.cross(beta, b))
    bdot = (force - beta * np.einsum("...i,...i->...", beta, force)[..., None]) / g[..., None]
    return force, bdot


def find_birth_time(config: BeamConfig, birth_position, threshold_W_cm2: float) -> float:
    """Earliest time on the rising edge at which the local intensity reaches the threshold.

    Bisection to 1e-6 of a laser period.  Raises NoCrossingError when the
    threshold is not strictly below the largest intensity seen at that point.
    """
    pos = np.asarray(birth_position, dtype=float).reshape(3)
    if not threshold_W_cm2 > 0:
        raise DomainError("threshold must be positive")
    if not config.pulsed:
        raise NoCrossingError("an infinite plane wave has no rising edge")
    t_peak = float(pos[0])
    i_max = local_intensity(config, pos, t_peak)
    if threshold_W_cm2 >= i_max:
        raise NoCrossingError(
            f"threshold {threshold_W_cm2:g} W/cm^2 is not below the local peak {i_max:g} W/cm^2")
    lo, hi = t_peak - 12.0 * config.fwhm, t_peak
    # intensity(lo) is ~exp(-576 ln 2) below peak: safely under any positive threshold
    tol = 1e-6 * PERIOD
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if local_intensity(config, pos, mid) >= threshold_W_cm2:
            hi = mid
        else:
            lo = mid
    return hi


def push_trajectory(config: BeamConfig | None, initial: ElectronState, t_end: float,
                    dt: float, *, eta_stop: float | None = None, born: bool = False,
                    backend: str | None = None) -> Trajectory:
    """Integrate dp/dt = -(E + beta x B), dr/dt = beta with fixed-step RK4.

    ``config=None`` means field-free motion.  With ``eta_stop`` the integration
    ends early once the retarded phase t - x passes it (pulse has gone by).
    """
    if not (0.0 < dt <= MAX_DT * (1 + 1e-12)):
        raise ConfigError(f"dt={dt:g} exceeds the limit of a period/200 ({MAX_DT:g})",
                          key="electron.dt_over_period")
    t0 = float(initial.time)
    if not (np.all(np.isfinite(initial.position)) and np.all(np.isfinite(initial.momentum))):
        raise PropagationError(f"non-finite initial state at t = {t0:.6g} (1/omega0)", time=t0)
    if not t_end > t0:
        raise DomainError("t_end must be later than the initial time")
    n_steps = int(math.ceil((t_end - t0) / dt - 1e-9))
    kern = _backend.get(backend)
    r_out = np.empty((n_steps + 1, 3))
    p_out = np.empty((n_steps + 1, 3))
    if config is None:
        model, params = 0, np.zeros(5)
    else:
        model, params = MODEL_CODES[config.model], config.kernel_params()
    written, bad = kern.push_rk4(model, params, np.ascontiguousarray(initial.position),
                                 np.ascontiguousarray(initial.momentum), t0, float(dt), n_steps,
                                 math.inf if eta_stop is None else float(eta_stop), r_out, p_out)
    t = t0 + dt * np.arange(written)
    if bad >= 0:
        raise PropagationError(f"non-finite electron state at t = {t[bad]:.6g} (1/omega0)",
                               time=float(t[bad]))
    r, p = r_out[:written], p_out[:written]
    _, bdot = force_and_acceleration(config, r, p, t)
    g = np.sqrt(1.0 + np.einsum("ij,ij->i", p, p))
    meta = {
        "integrator": "rk4",
        "dt": float(dt),
        "n_samples": int(written),
        "backend": getattr(kern, "__name__", str(kern)).rsplit(".", 1)[-1],
    }
    return Trajectory(t, r.copy(), p.copy(), p / g[:, None], bdot,
                      t0 if born else None, meta)


def drift_momentum(traj: Trajectory) -> np.ndarray:
    """Momentum averaged over the last full cycle of the laser phase t - x.

    The average is weighted by d(eta), i.e. taken over one cycle of the wave
    as seen by the electron.
    """
    if traj.t[-1] - traj.t[0] < 2 * PERIOD:
        raise DomainError("trajectory must span at least two laser periods")
    eta = traj.eta
    start = eta[-1] - PERIOD
    if eta[0] > start:
        raise DomainError("laser phase advances less than one cycle along the trajectory")
    i0 = int(np.searchsorted(eta, start))
    # linear interpolation of the sample at the window start
    if i0 > 0:
        s = (start - eta[i0 - 1]) / (eta[i0] - eta[i0 - 1])
        p_start = traj.p[i0 - 1] + s * (traj.p[i0] - traj.p[i0 - 1])
        e_w = np.concatenate([[start], eta[i0:]])
        p_w = np.vstack([p_start, traj.p[i0:]])
    else:
        e_w, p_w = eta[i0:], traj.p[i0:]
    return np.trapz(p_w, e_w, axis=0) / (e_w[-1] - e_w[0])


@dataclass(frozen=True)
class ElectronConfig:
    """How the single electron is created and how long it is followed."""

    birth_mode: str = "threshold"
    birth_threshold_W_cm2: float = 2e16
    birth_time_fs: float = 0.0
    birth_position_um: tuple = (0.0, 0.0, 0.0)
    initial_momentum_mec: tuple = (0.0, 0.0, 0.0)
    t_end_fs: float | None = None
    dt_over_period: float = 1e-3
    end_fwhm: float = 4.5

    def __post_init__(self):
        if self.birth_mode not in ("threshold", "explicit_time"):
            raise ConfigError("birth_mode must be 'threshold' or 'explicit_time'",
                              key="electron.birth_mode")
        if not (0 < self.dt_over_period <= 1.0 / 200.0):
            raise ConfigError("dt_over_period must lie in (0, 1/200]", key="electron.dt_over_period")


def start_state(beam: BeamConfig, electron: ElectronConfig, position=None, momentum=None):
    """Initial state (normalized) for the configured birth, optionally at another point."""
    units = beam.units
    if position is None:
        position = units.length_to_norm(np.asarray(electron.birth_position_um, dtype=float) * 1e-6)
    if momentum is None:
        momentum = np.asarray(electron.initial_momentum_mec, dtype=float)
    if electron.birth_mode == "threshold":
        t0 = find_birth_time(beam, position, electron.birth_threshold_W_cm2)
    else:
        t0 = units.fs_to_norm(electron.birth_time_fs)
    return ElectronState(position, momentum, t0)


def end_time(beam: BeamConfig, electron: ElectronConfig, initial: ElectronState):
    """(t_end, eta_stop) for a run.  Automatic end: the pulse has passed the electron."""
    if electron.t_end_fs is not None:
        return beam.units.fs_to_norm(electron.t_end_fs), None
    if not beam.pulsed:
        raise ConfigError("t_end_fs is required for the infinite plane wave", key="electron.t_end_fs")
    eta_stop = electron.end_fwhm * beam.fwhm
    eta0 = initial.time - initial.position[0]
    # phase velocity bound: d(eta)/dt >= 1/(gamma (1 + beta)) with gamma <= 1 + a0^2/2 + |p0|
    gmax = 1.0 + 0.5 * beam.a0**2 + 2.0 * initial.gamma
    span = max(eta_stop - eta0, 0.0) * 2.0 * gmax + 10 * PERIOD
    return initial.time + span, eta_stop


def simulate_electron(beam: BeamConfig, electron: ElectronConfig, position=None, momentum=None,
                      backend: str | None = None) -> Trajectory:
    """Birth + push for one electron as configured."""
    initial = start_state(beam, electron, position, momentum)
    t_end, eta_stop = end_time(beam, electron, initial)
    traj = push_trajectory(beam, initial, t_end, electron.dt_over_period * PERIOD,
                           eta_stop=eta_stop, born=True, backend=backend)
    traj.metadata["birth_mode"] = electron.birth_mode
    return traj

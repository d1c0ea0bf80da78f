"""Coherent Thomson scattering from an extended classical Gaussian charge cloud.

A current J ~ z r0^-3 exp(-r^2/r0^2) exp(i kappa x) radiates with intensity

    I(theta, phi) = sin^2(theta) exp(-|kappa|^2 r0^2 (1 - sin(theta) cos(phi)))

relative to a point charge's forward peak.  Lengths may use any unit as long
as r0 and 2 pi / |kappa| share it.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .units import FORWARD, PERPENDICULAR_Y, Z_POLE, Direction

N_THETA = 256
N_PHI = 256


@dataclass(frozen=True)
class GaussianCloud:
    r0: float
    kappa_mag: float = 2.0 * math.pi

    def __post_init__(self):
        if not (math.isfinite(self.r0) and self.r0 >= 0):
            raise DomainError("r0 must be finite and >= 0")
        if not (math.isfinite(self.kappa_mag) and self.kappa_mag > 0):
            raise DomainError("kappa_mag must be finite and > 0")

    @classmethod
    def from_wavelength(cls, r0_over_lambda: float) -> "GaussianCloud":
        """Cloud with lengths measured in laser wavelengths."""
        return cls(r0_over_lambda, 2.0 * math.pi)

    @property
    def exponent(self) -> float:
        """|kappa|^2 r0^2."""
        return (self.kappa_mag * self.r0) ** 2


def _ratio(cloud: GaussianCloud, theta, phi):
    return np.exp(-cloud.exponent * (1.0 - np.sin(theta) * np.cos(phi)))


def cloud_intensity(cloud: GaussianCloud, d: Direction) -> float:
    """sin^2(theta) times the coherent form factor; 1 for any r0 in the forward direction."""
    s = math.sin(d.theta)
    return s * s * math.exp(-cloud.exponent * (1.0 - s * math.cos(d.phi)))


def direction_ratio(cloud: GaussianCloud, d: Direction) -> float:
    """Intensity relative to r0 = 0 in direction d (the form factor; finite at the poles)."""
    return math.exp(-cloud.exponent * (1.0 - math.sin(d.theta) * math.cos(d.phi)))


def cloud_total_efficiency(cloud: GaussianCloud, n_theta: int = N_THETA,
                           n_phi: int = N_PHI) -> float:
    """Solid-angle integral of the cloud pattern over that of a point charge (8 pi / 3)."""
    if cloud.exponent == 0.0:
        return 1.0
    x, wx = np.polynomial.legendre.leggauss(n_theta)
    sin_t = np.sqrt(1.0 - x * x)
    phi = 2.0 * math.pi * np.arange(n_phi) / n_phi
    f = np.exp(-cloud.exponent * (1.0 - np.outer(sin_t, np.cos(phi))))
    inner = f.sum(axis=1) * (2.0 * math.pi / n_phi)
    return float(np.sum(wx * sin_t**2 * inner) / (8.0 * math.pi / 3.0))


@dataclass(frozen=True)
class ScanTable:
    r0_over_lambda: np.ndarray
    columns: dict

    def header(self) -> list[str]:
        return ["r0_over_lambda", *self.columns]

    def rows(self) -> np.ndarray:
        return np.column_stack([self.r0_over_lambda, *self.columns.values()])

    def write_csv(self, path, comments=()):
        lines = [f"# {c}" for c in comments]
        lines.append("# ratios are relative to a point charge (r0 = 0); r0 in laser wavelengths")
        with open(path, "w", newline="\n") as fh:
            fh.write("\n".join(lines) + "\n")
            fh.write(",".join(self.header()) + "\n")
            np.savetxt(fh, self.rows(), fmt="%.17e", delimiter=",")


def _column_name(d: Direction) -> str:
    return f"ratio_theta{d.theta:.6g}_phi{d.phi:.6g}"


def efficiency_scan(r0_values, directions=()) -> ScanTable:
    """Efficiency table: per-direction ratios and the total efficiency versus r0/lambda.

    The forward, perpendicular (y) and z-pole columns are always present;
    ``directions`` appends further ones.
    """
    r0 = np.asarray(r0_values, dtype=float).ravel()
    if r0.size == 0:
        raise DomainError("r0_values must not be empty")
    clouds = [GaussianCloud.from_wavelength(v) for v in r0]
    cols = {
        "ratio_forward": [direction_ratio(c, FORWARD) for c in clouds],
        "ratio_perpendicular_y": [direction_ratio(c, PERPENDICULAR_Y) for c in clouds],
        "ratio_z_pole": [direction_ratio(c, Z_POLE) for c in clouds],
    }
    for d in directions:
        cols[_column_name(d)] = [direction_ratio(c, d) for c in clouds]
    cols["ratio_total"] = [cloud_total_efficiency(c) for c in clouds]
    return ScanTable(r0, {k: np.asarray(v) for k, v in cols.items()})

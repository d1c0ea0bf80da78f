"""Run configuration: INI sections mirrored onto the module config objects."""
from __future__ import annotations

import configparser
import hashlib
import json
import math
from dataclasses import dataclass

import numpy as np

from .dynamics import ElectronConfig
from .errors import ConfigError
from .laser import MODELS, BeamConfig
from .units import AngularSpectralGrid, intensity_from_a0


def _float(v):
    return float(v)


def _int(v):
    return int(v)


def _str(v):
    return str(v).strip()


def _optional_float(v):
    v = str(v).strip().lower()
    return None if v in ("", "auto", "none") else float(v)


def _vec3(v):
    parts = [p for p in str(v).replace(",", " ").split()]
    if len(parts) != 3:
        raise ValueError("expected three numbers")
    return tuple(float(p) for p in parts)


def _bands(v):
    """'850-950, 700-800' -> ((850.0, 950.0), (700.0, 800.0))."""
    out = []
    for chunk in str(v).split(","):
        chunk = chunk.strip()
        if not chunk:
            continue
        lo, hi = chunk.split("-")
        out.append((float(lo), float(hi)))
    return tuple(out)


def _components(v):
    """'re im dpx dpy dpz; ...' -> tuple of 5-tuples (momentum offsets in m_e c)."""
    out = []
    for chunk in str(v).split(";"):
        chunk = chunk.strip()
        if not chunk:
            continue
        vals = [float(p) for p in chunk.replace(",", " ").split()]
        if len(vals) != 5:
            raise ValueError("each component needs 're im dpx dpy dpz'")
        out.append(tuple(vals))
    return tuple(out)


def _choice(*options):
    def parse(v):
        v = str(v).strip()
        if v not in options:
            raise ValueError(f"must be one of {', '.join(options)}")
        return v
    return parse


# section -> key -> (parser, default)
SCHEMA = {
    "beam": {
        "model": (_choice(*MODELS), "focused_pulsed"),
        "wavelength_nm": (_float, 800.0),
        "peak_intensity_W_cm2": (_optional_float, 1e19),
        "a0": (_optional_float, None),
        "fwhm_fs": (_float, 35.0),
        "waist_over_lambda": (_float, 3.0),
        "carrier_phase": (_float, 0.0),
    },
    "electron": {
        "birth_mode": (_choice("threshold", "explicit_time"), "threshold"),
        "birth_threshold_W_cm2": (_float, 2e16),
        "birth_time_fs": (_float, 0.0),
        "birth_position_um": (_vec3, (0.0, 0.0, 0.0)),
        "initial_momentum_mec": (_vec3, (0.0, 0.0, 0.0)),
        "t_end_fs": (_optional_float, None),
        "dt_over_period": (_float, 1e-3),
        "end_fwhm": (_float, 4.5),
    },
    "grids": {
        "kind": (_choice("sphere", "equatorial"), "sphere"),
        "n_theta": (_int, 64),
        "n_phi": (_int, 64),
        "n_omega": (_int, 512),
        "omega_min": (_float, 0.05),
        "omega_max": (_float, 10.0),
        "samples_per_period": (_float, 64.0),
        "window": (_choice("none", "hann"), "none"),
        "observation_radius_um": (_float, 100.0),
        "bands_nm": (_bands, ((850.0, 950.0),)),
        "collection_efficiency": (_float, 0.1),
        "scan_r0_max_over_lambda": (_float, 2.0),
        "scan_n_r0": (_int, 81),
    },
    "wavepacket": {
        "sigma_nm": (_optional_float, None),
        "sigma_angstrom": (_optional_float, 1.0),
        "center_momentum_mec": (_vec3, (0.0, 0.0, 0.0)),
        "components": (_components, ()),
        "evolve_fs": (_float, 0.0),
        "negativity_resolution": (_int, 12),
        "dump_points": (_int, 101),
    },
    "ensemble": {
        "n_samples": (_int, 4096),
        "seed": (_optional_float, None),
        "model": (_choice("incoherent", "coherent", "both"), "both"),
        "start_fwhm": (_float, 4.0),
        "dt_over_period": (_float, 1.0 / 200.0),
        "end_fwhm": (_float, 4.0),
    },
    "output": {
        "trajectory_stride": (_int, 10),
        "float_format": (_str, "%.12e"),
    },
}


def _canonical(value):
    if isinstance(value, tuple):
        return [_canonical(v) for v in value]
    return value


@dataclass(frozen=True)
class RunConfig:
    """Fully resolved and validated configuration."""

    values: dict  # section -> key -> parsed value

    def get(self, section, key):
        return self.values[section][key]

    def as_dict(self) -> dict:
        return {s: {k: _canonical(v) for k, v in kv.items()} for s, kv in self.values.items()}

    def content_hash(self) -> str:
        blob = json.dumps(self.as_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()

    @property
    def seed(self):
        s = self.values["ensemble"]["seed"]
        return None if s is None else int(s)

    # module objects

    def beam(self) -> BeamConfig:
        b = self.values["beam"]
        intensity = b["peak_intensity_W_cm2"]
        if b["a0"] is not None:
            intensity = intensity_from_a0(b["a0"], b["wavelength_nm"])
        if intensity is None:
            raise ConfigError("set beam.peak_intensity_W_cm2 or beam.a0", key="beam.peak_intensity_W_cm2")
        return BeamConfig(model=b["model"], wavelength_nm=b["wavelength_nm"],
                          peak_intensity_W_cm2=intensity, fwhm_fs=b["fwhm_fs"],
                          waist_over_lambda=b["waist_over_lambda"],
                          carrier_phase=b["carrier_phase"])

    def electron(self) -> ElectronConfig:
        return ElectronConfig(**self.values["electron"])

    def grid(self) -> AngularSpectralGrid:
        g = self.values["grids"]
        if g["kind"] == "sphere":
            return AngularSpectralGrid.sphere(g["n_theta"], g["n_phi"], g["n_omega"],
                                              g["omega_min"], g["omega_max"])
        from .ensemble import comparison_grid
        return comparison_grid(g["omega_min"], g["omega_max"], g["n_omega"])

    def sigma_r_m(self) -> float:
        w = self.values["wavepacket"]
        if w["sigma_nm"] is not None:
            return w["sigma_nm"] * 1e-9
        if w["sigma_angstrom"] is not None:
            return w["sigma_angstrom"] * 1e-10
        raise ConfigError("set wavepacket.sigma_nm or wavepacket.sigma_angstrom",
                          key="wavepacket.sigma_nm")

    def wavepacket(self):
        from .wigner import GaussianWavePacket, MomentumSuperposition
        w = self.values["wavepacket"]
        base = GaussianWavePacket(np.zeros(3), np.array(w["center_momentum_mec"]), self.sigma_r_m())
        if not w["components"]:
            return base
        comps = []
        for re, im, *dp in w["components"]:
            comps.append((complex(re, im), GaussianWavePacket(
                base.center_r, base.center_p + np.array(dp), base.sigma_r)))
        if len(comps) == 1:
            raise ConfigError("a superposition needs at least two components",
                              key="wavepacket.components")
        return MomentumSuperposition(tuple(comps))

    def ensemble_settings(self):
        from .ensemble import EnsembleSettings
        e = self.values["ensemble"]
        g = self.values["grids"]
        el = ElectronConfig(birth_mode="explicit_time", dt_over_period=e["dt_over_period"],
                            end_fwhm=e["end_fwhm"])
        return EnsembleSettings(start_fwhm=e["start_fwhm"], electron=el,
                                samples_per_period=g["samples_per_period"],
                                bands_nm=g["bands_nm"])

    def validate(self):
        """Build every module object once so all errors surface before any work."""
        self.beam()
        self.electron()
        self.grid()
        g = self.values["grids"]
        for key in ("n_theta", "n_phi", "n_omega", "scan_n_r0"):
            if g[key] < 1:
                raise ConfigError(f"{key} must be >= 1", key=f"grids.{key}")
        if not 0 <= g["collection_efficiency"] <= 1:
            raise ConfigError("collection_efficiency must lie in [0, 1]",
                              key="grids.collection_efficiency")
        if g["samples_per_period"] <= 0 or g["observation_radius_um"] <= 0:
            raise ConfigError("samples_per_period and observation_radius_um must be > 0",
                              key="grids.samples_per_period")
        for lo, hi in g["bands_nm"]:
            if not 0 < lo < hi:
                raise ConfigError("bands need 0 < lambda_min < lambda_max", key="grids.bands_nm")
        self.sigma_r_m()
        e = self.values["ensemble"]
        if e["n_samples"] < 1:
            raise ConfigError("n_samples must be >= 1", key="ensemble.n_samples")
        if e["seed"] is not None and (not e["seed"].is_integer() or e["seed"] < 0):
            raise ConfigError("seed must be a non-negative integer", key="ensemble.seed")
        if not (0 < e["dt_over_period"] <= 1 / 200):
            raise ConfigError("dt_over_period must lie in (0, 1/200]", key="ensemble.dt_over_period")
        w = self.values["wavepacket"]
        if w["evolve_fs"] < 0 or not math.isfinite(w["evolve_fs"]):
            raise ConfigError("evolve_fs must be >= 0", key="wavepacket.evolve_fs")
        if self.values["output"]["trajectory_stride"] < 1:
            raise ConfigError("trajectory_stride must be >= 1", key="output.trajectory_stride")
        try:
            self.values["output"]["float_format"] % 1.0
        except (TypeError, ValueError):
            raise ConfigError("float_format must be a printf pattern", key="output.float_format")
        try:
            self.wavepacket()
        except ConfigError:
            raise
        except ValueError as exc:
            raise ConfigError(str(exc), key="wavepacket.components") from exc
        return self


def _parse_value(section, key, raw):
    parser, _ = SCHEMA[section][key]
    try:
        return parser(raw)
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"bad value {raw!r} for {section}.{key}: {exc}",
                          key=f"{section}.{key}") from None


def load_config(path=None, overrides=(), text=None) -> RunConfig:
    """Read an INI file (or text), apply 'section.key=value' overrides, validate."""
    cp = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";"))
    cp.optionxform = str  # keep key case
    try:
        if text is not None:
            cp.read_string(text)
        elif path is not None:
            with open(path) as fh:
                cp.read_file(fh)
    except configparser.Error as exc:
        raise ConfigError(f"cannot parse configuration: {exc}") from None
    values = {s: {k: d for k, (_, d) in keys.items()} for s, keys in SCHEMA.items()}
    for section in cp.sections():
        if section not in SCHEMA:
            raise ConfigError(f"unknown section [{section}]", key=section)
        for key, raw in cp.items(section):
            if key not in SCHEMA[section]:
                raise ConfigError(f"unknown key {section}.{key}", key=f"{section}.{key}")
            values[section][key] = _parse_value(section, key, raw)
    for item in overrides:
        if "=" not in item or "." not in item.split("=", 1)[0]:
            raise ConfigError(f"override {item!r} is not of the form section.key=value", key=item)
        path_, raw = item.split("=", 1)
        section, key = path_.strip().split(".", 1)
        if section not in SCHEMA:
            raise ConfigError(f"unknown section [{section}]", key=section)
        if key not in SCHEMA[section]:
            raise ConfigError(f"unknown key {section}.{key}", key=f"{section}.{key}")
        values[section][key] = _parse_value(section, key, raw)
    return RunConfig(values).validate()

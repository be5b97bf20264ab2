"""Declarative experiment configuration.

Experiments are described by a flat INI file with sections [array],
[channel], [sweep], [learning] and [output]; every key has a default
matching the reference desk-scale setup (3.5 GHz carrier, 32-antenna
half-wavelength ULA, y-polarized, SV channel with 6 diffuse paths and a
10 dB Rician factor, SNR grid -10..15 dB).  Individual keys can be
overridden on the command line with ``--set section.key=value``.
"""

from __future__ import annotations

import configparser
from dataclasses import dataclass, field, fields

import numpy as np


class ConfigError(ValueError):
    """Invalid experiment configuration (maps to CLI exit code 1)."""


KNOWN_ESTIMATORS = ("gpr-single", "gpr-mixed", "ls", "mmse-iso", "omp", "amp")


@dataclass
class ArrayConfig:
    n: int = 32
    spacing_wavelengths: float = 0.5
    f_c_hz: float = 3.5e9
    polarization: str = "y"


@dataclass
class ChannelConfig:
    model: str = "sv"                 # "sv" or "geometric"
    phi_ue_deg: float = -15.0
    r_ue_m: float = 10.0              # geometric model range
    paths: int = 6                    # SV diffuse path count
    rician_k_db: float = 10.0
    path_loss_exp: float = 1.0


@dataclass
class SweepConfig:
    snr_db: tuple = (-10.0, -5.0, 0.0, 5.0, 10.0, 15.0)
    trials: int = 1000
    estimators: tuple = KNOWN_ESTIMATORS
    seed: int = 1234
    n_jobs: int = 1
    omp_paths: int = 7
    amp_shrink: float = 1.2
    amp_iters: int = 30
    dict_oversample: int = 4
    # likelihood surface scan (concentration plane, log-spaced grid)
    surface_grid: int = 40
    surface_mu_min: float = 0.1
    surface_mu_max: float = 100.0
    surface_snr_db: float = 0.0
    # kernel entropy curves
    entropy_n: int = 12
    entropy_spacings_wl: tuple = (0.25, 0.5, 1.0)
    entropy_mu_max: float = 100.0
    entropy_points: int = 41
    # space-time kernel slices
    slice_mu: tuple = (0.0, 10.0, 10.0)
    slice_velocity: tuple = (20.0, 0.0, 20.0)
    slice_sigma2: float = 1.0
    slice_extent_wl: float = 2.0
    slice_points: int = 61
    slice_dt_s: float = 4e-3


@dataclass
class LearningConfig:
    s: int = 2                        # sub-kernels of the mixed fit
    n_iter: int = 20


@dataclass
class OutputConfig:
    directory: str = "out"
    basename: str = "experiment"
    svg: bool = True


@dataclass
class ExperimentConfig:
    array: ArrayConfig = field(default_factory=ArrayConfig)
    channel: ChannelConfig = field(default_factory=ChannelConfig)
    sweep: SweepConfig = field(default_factory=SweepConfig)
    learning: LearningConfig = field(default_factory=LearningConfig)
    output: OutputConfig = field(default_factory=OutputConfig)

    def validate(self) -> "ExperimentConfig":
        if self.array.n < 1:
            raise ConfigError("array.n must be >= 1")
        if self.array.spacing_wavelengths <= 0:
            raise ConfigError("array.spacing_wavelengths must be positive")
        if self.array.f_c_hz <= 0:
            raise ConfigError("array.f_c_hz must be positive")
        if self.array.polarization not in ("x", "y", "z"):
            raise ConfigError("array.polarization must be one of x, y, z")
        if self.channel.model not in ("sv", "geometric"):
            raise ConfigError(f"unknown channel model {self.channel.model!r}")
        if self.channel.paths < 0:
            raise ConfigError("channel.paths must be >= 0")
        if not self.sweep.snr_db:
            raise ConfigError("sweep.snr_db must be non-empty")
        if self.sweep.trials < 1:
            raise ConfigError("sweep.trials must be >= 1")
        unknown = set(self.sweep.estimators) - set(KNOWN_ESTIMATORS)
        if unknown:
            raise ConfigError(f"unknown estimators: {sorted(unknown)}")
        if self.sweep.n_jobs < 1:
            raise ConfigError("sweep.n_jobs must be >= 1")
        if self.learning.s < 1:
            raise ConfigError("learning.s must be >= 1")
        if self.learning.n_iter < 0:
            raise ConfigError("learning.n_iter must be >= 0")
        return self


_SECTIONS = {
    "array": ArrayConfig,
    "channel": ChannelConfig,
    "sweep": SweepConfig,
    "learning": LearningConfig,
    "output": OutputConfig,
}


def _coerce(current, text: str):
    """Parse ``text`` into the type of the current value."""
    if isinstance(current, bool):
        low = text.strip().lower()
        if low in ("1", "true", "yes", "on"):
            return True
        if low in ("0", "false", "no", "off"):
            return False
        raise ConfigError(f"expected a boolean, got {text!r}")
    if isinstance(current, int):
        return int(text)
    if isinstance(current, float):
        return float(text)
    if isinstance(current, tuple):
        items = [t.strip() for t in text.split(",") if t.strip()]
        if current and isinstance(current[0], str):
            return tuple(items)
        return tuple(float(t) for t in items)
    return text.strip()


def _apply(cfg: ExperimentConfig, section: str, key: str, text: str):
    if section not in _SECTIONS:
        raise ConfigError(f"unknown config section [{section}]")
    target = getattr(cfg, section)
    names = {f.name for f in fields(target)}
    if key not in names:
        raise ConfigError(f"unknown key {key!r} in section [{section}]")
    try:
        value = _coerce(getattr(target, key), text)
    except (ValueError, TypeError) as err:
        raise ConfigError(f"bad value for {section}.{key}: {text!r} ({err})") from err
    setattr(target, key, value)


def load_config(path=None, overrides=()) -> ExperimentConfig:
    """Build an ExperimentConfig from an optional INI file plus
    ``section.key=value`` override strings."""
    cfg = ExperimentConfig()
    if path is not None:
        parser = configparser.ConfigParser()
        read = parser.read(path)
        if not read:
            raise ConfigError(f"cannot read config file {path!r}")
        for section in parser.sections():
            for key, text in parser.items(section):
                _apply(cfg, section, key, text)
    for item in overrides:
        if "=" not in item or "." not in item.split("=", 1)[0]:
            raise ConfigError(f"override must look like section.key=value, got {item!r}")
        addr, text = item.split("=", 1)
        section, key = addr.split(".", 1)
        _apply(cfg, section.strip(), key.strip(), text)
    return cfg.validate()


def config_wavelength(cfg: ExperimentConfig) -> float:
    from .kernel import SPEED_OF_LIGHT

    return SPEED_OF_LIGHT / cfg.array.f_c_hz


def trial_seed(master: int, snr_index: int, trial: int, stream: int) -> np.ndarray:
    """Deterministic per-trial seed material; parallel and serial sweeps
    agree because seeds derive from counters only."""
    return np.array([master, snr_index, trial, stream], dtype=np.uint64)

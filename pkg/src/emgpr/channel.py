"""Ground-truth channel generation and noisy pilot synthesis.

Two narrowband uplink channel models feed the experiments:

* geometric: deterministic spherical-wave coefficients
  h(n) = lambda / (4 pi d_n^r) * exp(+i k d_n) from a point user at
  finite range (positive phase: outgoing wave with the e^{-i w t} time
  convention), no normalization applied;
* Saleh-Valenzuela: one line-of-sight path at the user azimuth plus L
  equal-power non-line-of-sight paths at azimuths uniform in
  [-pi/2, pi/2], Rician-weighted, scaled analytically so that
  E ||h||^2 = N.

Pilots follow y = h + n with circular complex AWGN of per-entry
variance gamma^{-1} = 10^(-snr_db/10).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .kernel import SPEED_OF_LIGHT
from .sampling import SampleSet

_POL_AXES = {"x": np.array([1.0, 0.0, 0.0]),
             "y": np.array([0.0, 1.0, 0.0]),
             "z": np.array([0.0, 0.0, 1.0])}


@dataclass(frozen=True)
class ArrayGeometry:
    """Antenna positions [m], per-antenna unit polarizations, carrier."""

    positions: np.ndarray
    polarizations: np.ndarray
    f_c: float

    def __post_init__(self):
        object.__setattr__(self, "positions", np.asarray(self.positions, dtype=float).reshape(-1, 3))
        object.__setattr__(self, "polarizations",
                           np.asarray(self.polarizations, dtype=float).reshape(-1, 3))
        if len(self.positions) < 1:
            raise ValueError("need at least one antenna")
        if len(self.positions) != len(self.polarizations):
            raise ValueError("one polarization per antenna")
        if self.f_c <= 0:
            raise ValueError("carrier frequency must be positive")
        if len(self.positions) > 1:
            d = self.positions[:, None, :] - self.positions[None, :, :]
            dist = np.linalg.norm(d, axis=-1) + np.eye(len(self.positions))
            if dist.min() <= 0:
                raise ValueError("antenna positions must be distinct")

    @property
    def n(self) -> int:
        return len(self.positions)

    @property
    def wavelength(self) -> float:
        return SPEED_OF_LIGHT / self.f_c

    @property
    def wavenumber(self) -> float:
        return 2.0 * np.pi / self.wavelength

    @property
    def center(self) -> np.ndarray:
        return self.positions.mean(axis=0)

    def sample_set(self, time: float = 0.0) -> SampleSet:
        return SampleSet.from_arrays(self.positions, np.full(self.n, time), self.polarizations)


@dataclass(frozen=True)
class ChannelRealization:
    """One channel draw plus the metadata needed to reproduce it."""

    h: np.ndarray
    model: str
    seed: int | None = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "h", np.asarray(self.h, dtype=complex).reshape(-1))
        if not np.isfinite(self.h).all():
            raise ValueError("channel coefficients must be finite")


def ula_geometry(n: int, spacing: float, f_c: float, polarization="y") -> ArrayGeometry:
    """Uniform linear array along x: antenna i at (i * spacing, 0, 0)."""
    if n < 1:
        raise ValueError("need at least one antenna")
    if spacing <= 0:
        raise ValueError("spacing must be positive")
    if isinstance(polarization, str):
        polarization = _POL_AXES[polarization]
    pol = np.asarray(polarization, dtype=float).reshape(3)
    pol = pol / np.linalg.norm(pol)
    positions = np.zeros((n, 3))
    positions[:, 0] = np.arange(n) * spacing
    return ArrayGeometry(positions, np.tile(pol, (n, 1)), f_c)


def user_position(geom: ArrayGeometry, phi_deg: float, range_m: float) -> np.ndarray:
    """Place a user at the given azimuth/range relative to the array
    phase center, in the xOz plane (phi measured off broadside +z)."""
    phi = np.deg2rad(phi_deg)
    return geom.center + range_m * np.array([np.sin(phi), 0.0, np.cos(phi)])


def geometric_channel(geom: ArrayGeometry, user_pos, r_exp: float = 1.0) -> ChannelRealization:
    """Spherical-wave coefficients lambda/(4 pi d^r) e^{+i k d}."""
    user_pos = np.asarray(user_pos, dtype=float).reshape(3)
    d = np.linalg.norm(geom.positions - user_pos, axis=1)
    if np.any(d <= 0):
        raise ValueError("user coincides with an antenna")
    lam = geom.wavelength
    h = lam / (4.0 * np.pi * d**r_exp) * np.exp(1j * geom.wavenumber * d)
    return ChannelRealization(h, "geometric", meta={"user_pos": user_pos, "r_exp": r_exp})


def steering_vector(geom: ArrayGeometry, phi_deg: float) -> np.ndarray:
    """Far-field ULA steering vector a(phi)_n = e^{i k0 x_n sin phi}."""
    u = np.sin(np.deg2rad(phi_deg))
    return np.exp(1j * geom.wavenumber * geom.positions[:, 0] * u)


def sv_channel(
    geom: ArrayGeometry,
    phi_ue_deg: float,
    n_paths: int = 6,
    rician_k_db: float = 10.0,
    seed=None,
) -> ChannelRealization:
    """Saleh-Valenzuela draw: Rician line-of-sight at the user azimuth
    plus ``n_paths`` equal-power diffuse paths.

    The scale is analytic (per-path powers sum to 1 and each steering
    vector has squared norm N), so E ||h||^2 = N holds exactly in
    expectation without per-realization renormalization.
    """
    if n_paths < 0:
        raise ValueError("path count must be non-negative")
    rng = np.random.default_rng(seed)
    k_lin = 10.0 ** (rician_k_db / 10.0)
    h = np.sqrt(k_lin / (k_lin + 1.0)) * steering_vector(geom, phi_ue_deg)
    if n_paths > 0:
        aoas = rng.uniform(-90.0, 90.0, n_paths)
        gains = (rng.standard_normal(n_paths) + 1j * rng.standard_normal(n_paths)) / np.sqrt(2.0)
        atoms = np.stack([steering_vector(geom, a) for a in aoas], axis=1)
        h = h + np.sqrt(1.0 / (k_lin + 1.0)) * (atoms @ gains) / np.sqrt(n_paths)
    return ChannelRealization(
        h, "sv", seed=None if seed is None else int(np.atleast_1d(seed)[0]),
        meta={"phi_ue_deg": phi_ue_deg, "n_paths": n_paths, "rician_k_db": rician_k_db},
    )


def add_awgn(h, gamma_db: float, seed=None):
    """Noisy pilots y = h + n with per-entry noise variance 10^(-snr/10).

    Returns ``(y, noise_var)``.
    """
    h = np.asarray(h, dtype=complex).reshape(-1)
    if not np.isfinite(h).all():
        raise ValueError("channel must be finite")
    rng = np.random.default_rng(seed)
    noise_var = 10.0 ** (-gamma_db / 10.0)
    n = np.sqrt(noise_var / 2.0) * (
        rng.standard_normal(len(h)) + 1j * rng.standard_normal(len(h))
    )
    return h + n, noise_var

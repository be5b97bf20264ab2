"""Reference channel estimators used for benchmarking.

* least squares: h_hat = y (identity; the pilots are the estimate);
* isotropic-correlation MMSE with [K_iso]_ab = sigma^2 sinc(2 d_ab / lambda),
  normalized sinc, so half wavelength spacing decorrelates samples;
* orthogonal matching pursuit over an oversampled angular dictionary;
* approximate message passing in the unitary DFT angular domain with a
  complex soft threshold and the usual Onsager correction.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import cho_factor, cho_solve

from .channel import ArrayGeometry


def ls_estimate(y):
    """Least squares under the identity observation model: h_hat = y."""
    return np.asarray(y, dtype=complex).reshape(-1).copy()


def isotropic_gram(geom: ArrayGeometry, sigma2: float) -> np.ndarray:
    """sigma^2 sinc(2 ||x_a - x_b|| / lambda) over the array."""
    d = np.linalg.norm(geom.positions[:, None, :] - geom.positions[None, :, :], axis=-1)
    return sigma2 * np.sinc(2.0 * d / geom.wavelength)


def mmse_isotropic(y, geom: ArrayGeometry, sigma2: float, noise_var: float):
    """Linear MMSE filter K (K + noise_var I)^{-1} y with the isotropic
    sinc correlation model."""
    y = np.asarray(y, dtype=complex).reshape(-1)
    K = isotropic_gram(geom, sigma2)
    try:
        cf = cho_factor(K + noise_var * np.eye(geom.n), lower=True, check_finite=False)
    except np.linalg.LinAlgError as err:
        raise np.linalg.LinAlgError(
            "isotropic kernel matrix is singular; add observation noise"
        ) from err
    return K @ cho_solve(cf, y, check_finite=False)


@dataclass(frozen=True)
class AngularDictionary:
    """Unit-norm steering atoms on a uniform grid in sin-azimuth."""

    atoms: np.ndarray        # (N, G), unit-norm columns
    grid_sin: np.ndarray     # (G,)

    @property
    def size(self) -> int:
        return self.atoms.shape[1]


def angular_dictionary(geom: ArrayGeometry, oversample: int = 4) -> AngularDictionary:
    """G = oversample * N atoms, sin-azimuth uniform over [-1, 1)."""
    n = geom.n
    g = max(oversample * n, n)
    grid = np.linspace(-1.0, 1.0, g, endpoint=False)
    x = geom.positions[:, 0]
    atoms = np.exp(1j * geom.wavenumber * x[:, None] * grid[None, :]) / np.sqrt(n)
    return AngularDictionary(atoms, grid)


def omp_estimate(y, dictionary: AngularDictionary, n_paths: int):
    """Greedy sparse recovery: pick the atom best correlated with the
    residual, re-solve least squares on the accumulated support.

    A rank-deficient support solve drops the newest atom and continues.
    """
    y = np.asarray(y, dtype=complex).reshape(-1)
    atoms = dictionary.atoms
    if n_paths > len(y):
        raise ValueError("cannot select more atoms than observations")
    support: list[int] = []
    coef = np.zeros(0, dtype=complex)
    residual = y.copy()
    for _ in range(n_paths):
        corr = np.abs(atoms.conj().T @ residual)
        if support:
            corr[support] = -1.0
        pick = int(np.argmax(corr))
        trial = support + [pick]
        sub = atoms[:, trial]
        if np.linalg.matrix_rank(sub) < len(trial):
            continue  # degenerate atom: drop it and keep going
        coef, *_ = np.linalg.lstsq(sub, y, rcond=None)
        support = trial
        residual = y - sub @ coef
    if not support:
        return np.zeros_like(y)
    return atoms[:, support] @ coef


def _soft_threshold(v, tau):
    mag = np.abs(v)
    scale = np.maximum(1.0 - tau / np.maximum(mag, 1e-300), 0.0)
    return v * scale


def amp_estimate(y, shrink_lambda: float = 1.2, n_iter: int = 30):
    """Approximate message passing in the unitary DFT angular domain.

    Iterates x <- eta(x + F y_res; lambda sigma_t) with
    sigma_t = ||z||/sqrt(N), Onsager-corrected residual
    z <- y - F^H x + z <eta'>, and returns the antenna-domain estimate
    together with a convergence flag.  If the residual grows tenfold
    above its initial norm the best iterate seen so far is returned and
    the flag is False.
    """
    y = np.asarray(y, dtype=complex).reshape(-1)
    n = len(y)
    if n_iter < 1:
        raise ValueError("need at least one iteration")
    x = np.zeros(n, dtype=complex)
    z = y.copy()
    z0 = np.linalg.norm(z)
    best_x, best_res = x.copy(), z0
    converged = True
    for _ in range(n_iter):
        v = x + np.fft.fft(z, norm="ortho")
        tau = shrink_lambda * np.linalg.norm(z) / np.sqrt(n)
        x = _soft_threshold(v, tau)
        active = np.abs(v) > tau
        # complex soft-threshold derivative: 1 - tau/(2|v|) on the
        # active set, averaged over all coordinates
        onsager = float(np.sum(1.0 - tau / (2.0 * np.abs(v[active]))) / n) if active.any() else 0.0
        z = y - np.fft.ifft(x, norm="ortho") + onsager * z
        res = np.linalg.norm(z)
        if res < best_res:
            best_res = res
            best_x = x.copy()
        if res > 10.0 * max(z0, 1e-300):
            converged = False
            x = best_x
            break
    return np.fft.ifft(x, norm="ortho"), converged

"""Vectorized pairwise evaluation of the scalar kernel and its gradients.

For a fixed pair of sample sets the geometry (scaled displacements,
polarization products) never changes while hyperparameters do, so the
learning loop reuses a precomputed workspace.  The scalar kernel between
samples i (rows) and j (columns) is

    k_ij = sigma^2 / C(m) * [ (f0 + f2)/8 * (p_i . p_j)
                              + g8 * (w . p_i)(w . p_j) ],
    w    = k0 (x_i - x_j) + k0 v (t_i - t_j) + i mu,
    g8   = (f0 - 3 f2)/(8 w^T w)   (entire in w^T w)

with all f_n evaluated at the pseudo-norm of w.  Velocity is treated as
a fixed kernel parameter here; the learning code never varies it.
"""

from __future__ import annotations

import numpy as np

from .kernel import KernelParams
from .special import (
    DEGENERATE_BSQ as _DEGENERATE_BSQ,
    fn_tableau,
    rank_one_coefficient,
    vmf_normalizer,
    vmf_normalizer_deriv,
)


class PairwiseGeometry:
    """Precomputed geometry between a row set and a column set."""

    def __init__(self, rows, cols=None, k0=None):
        self.rows = rows
        self.cols = rows if cols is None else cols
        self.square = cols is None
        if k0 is None:
            raise ValueError("k0 required")
        self.k0 = float(k0)
        dx = self.rows.positions[:, None, :] - self.cols.positions[None, :, :]
        self._dx = dx
        self._dt = self.rows.times[:, None] - self.cols.times[None, :]
        self._p_rows = self.rows.polarizations
        self._p_cols = self.cols.polarizations
        self.pdot = self._p_rows @ self._p_cols.T

    def _scaled_displacement(self, velocity):
        r = self._dx + velocity[None, None, :] * self._dt[:, :, None]
        return self.k0 * r

    def gram(self, params: KernelParams):
        """Dense scalar-kernel matrix for one sub-kernel (no noise term).

        Square outputs are exactly Hermitian with a real diagonal: the
        strict upper triangle is kept and mirror-conjugated.
        """
        kd = self._scaled_displacement(params.velocity)
        mu = params.mu
        m = params.mu_norm
        b2 = np.einsum("ijk,ijk->ij", kd, kd) - m * m + 2j * np.einsum("ijk,k->ij", kd, mu)
        f = fn_tableau(np.sqrt(b2))
        iso = (f[0] + f[2]) / 8.0
        g8 = rank_one_coefficient(b2, f[0], f[2]) / 8.0
        wp_r = np.einsum("ijk,ik->ij", kd, self._p_rows) + 1j * (self._p_rows @ mu)[:, None]
        wp_c = np.einsum("ijk,jk->ij", kd, self._p_cols) + 1j * (self._p_cols @ mu)[None, :]
        K = (params.sigma2 / vmf_normalizer(m)) * (iso * self.pdot + g8 * wp_r * wp_c)
        if self.square:
            upper = np.triu(K, 1)
            K = upper + upper.conj().T + np.diag(K.diagonal().real)
        return K

    def gram_grad_mu(self, params: KernelParams):
        """d gram / d mu_k, k = 0..2, stacked as ``(3, N, M)``.

        Analytic everywhere except entries whose pseudo-norm squared is
        degenerate; those fall back to central finite differences of the
        full matrix (rare: complex null vectors need |k0 r| = |mu| with
        r orthogonal to mu).
        """
        kd = self._scaled_displacement(params.velocity)
        mu = params.mu
        m = params.mu_norm
        C = vmf_normalizer(m)
        scale = params.sigma2 / C
        b2 = np.einsum("ijk,ijk->ij", kd, kd) - m * m + 2j * np.einsum("ijk,k->ij", kd, mu)
        beta = np.sqrt(b2)
        f0, f1, f2, f3 = fn_tableau(beta)
        iso = (f0 + f2) / 8.0
        g8 = rank_one_coefficient(b2, f0, f2) / 8.0
        wp_r = np.einsum("ijk,ik->ij", kd, self._p_rows) + 1j * (self._p_rows @ mu)[:, None]
        wp_c = np.einsum("ijk,jk->ij", kd, self._p_cols) + 1j * (self._p_cols @ mu)[None, :]
        S = iso * self.pdot + g8 * wp_r * wp_c

        degen = np.abs(b2) < _DEGENERATE_BSQ
        with np.errstate(divide="ignore", invalid="ignore"):
            # d iso / d w_k = A w_k;  d g8 / d w_k = dg8_db2 * 2 w_k
            A = 1j * (f1 + f3) / (8.0 * beta)
            dg8_db2 = (1j * (f1 - 3.0 * f3) / (2.0 * beta) * b2 - (f0 - 3.0 * f2)) / (
                8.0 * b2 * b2
            )
        if m > 1e-12:
            ratio = (vmf_normalizer_deriv(m) / C) * (mu / m)
        else:
            ratio = np.zeros(3)
        out = np.empty((3,) + S.shape, dtype=complex)
        pr = self._p_rows
        pc = self._p_cols
        for k in range(3):
            w_k = kd[:, :, k] + 1j * mu[k]
            dS = (
                A * w_k * self.pdot
                + dg8_db2 * 2.0 * w_k * wp_r * wp_c
                + g8 * (pr[:, k][:, None] * wp_c + wp_r * pc[:, k][None, :])
            )
            out[k] = scale * (1j * dS - ratio[k] * S)
        if degen.any():
            self._grad_fd_patch(params, out, degen)
        if self.square:
            for k in range(3):
                out[k] = 0.5 * (out[k] + out[k].conj().T)
        return out

    def _grad_fd_patch(self, params, out, mask):
        """Replace degenerate entries with central differences in mu."""
        h = 1e-6 * max(1.0, float(np.abs(params.mu).max()))
        for k in range(3):
            dmu = np.zeros(3)
            dmu[k] = h
            up = self.gram(_with_mu(params, params.mu + dmu))
            dn = self.gram(_with_mu(params, params.mu - dmu))
            fd = (up - dn) / (2.0 * h)
            out[k][mask] = fd[mask]


def _with_mu(params: KernelParams, mu) -> KernelParams:
    return KernelParams(mu=mu, sigma2=params.sigma2, velocity=params.velocity, k0=params.k0)

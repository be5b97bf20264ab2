"""Kernel-matrix assembly and Gaussian-process channel inference.

With a zero prior mean the posterior over the channel values at
prediction sites B given noisy pilots y on evidence sites A is

    mean      = K_BA (K_AA + s_eps^2 I)^{-1} y
    variance  = k(b, b) - k_b^H (K_AA + s_eps^2 I)^{-1} k_b

which for B = A is exactly the linear MMSE filter
R (R + gamma^{-1} I)^{-1} y.  All solves go through a Hermitian
Cholesky factorization; matrices are never inverted explicitly.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import cho_factor, cho_solve

from ._pairwise import PairwiseGeometry
from .sampling import MixedKernel, SampleSet


class RankDeficientError(np.linalg.LinAlgError):
    """Raised when a noiseless kernel matrix cannot be factorized."""


@dataclass
class KernelMatrix:
    """Dense Hermitian kernel matrix over one SampleSet.

    ``noisy`` records whether ``noise_var * I`` has been added.
    """

    matrix: np.ndarray
    noisy: bool
    noise_var: float = 0.0

    @property
    def n(self) -> int:
        return self.matrix.shape[0]


def _mixed_gram(A: SampleSet, kernel: MixedKernel, B: SampleSet = None) -> np.ndarray:
    """Weighted sum of sub-kernel matrices (noiseless).

    Square (B is None) outputs are Hermitian by construction.
    """
    geo = PairwiseGeometry(A if B is None else B, None if B is None else A,
                           k0=kernel.sub_params[0].k0)
    K = None
    for w_s, params in zip(kernel.weights, kernel.sub_params):
        G = geo.gram(params)
        K = w_s * G if K is None else K + w_s * G
    return K


def assemble_kernel_matrix(A: SampleSet, kernel: MixedKernel, noise_var: float) -> KernelMatrix:
    """Assemble the (optionally noise-augmented) Gram matrix over A.

    Raises ValueError naming the offending sample pair if any entry
    comes out non-finite.
    """
    if noise_var < 0:
        raise ValueError("noise_var must be non-negative")
    K = _mixed_gram(A, kernel)
    bad = ~np.isfinite(K)
    if bad.any():
        i, j = np.argwhere(bad)[0]
        raise ValueError(f"non-finite kernel value at sample pair ({i}, {j})")
    if noise_var > 0:
        K = K + noise_var * np.eye(len(A))
    return KernelMatrix(matrix=K, noisy=noise_var > 0, noise_var=float(noise_var))


def cross_kernel_matrix(B: SampleSet, A: SampleSet, kernel: MixedKernel) -> np.ndarray:
    """Rectangular |B| x |A| matrix of kernel values k(b, a)."""
    return _mixed_gram(A, kernel, B=B)


def _factor(K: np.ndarray, noisy: bool):
    try:
        return cho_factor(K, lower=True, check_finite=False)
    except np.linalg.LinAlgError as err:
        if not noisy:
            raise RankDeficientError(
                "noiseless kernel matrix is rank deficient; add observation noise"
            ) from err
        raise


def posterior_from_grams(K_y: np.ndarray, K_BA: np.ndarray, prior_diag: np.ndarray, y, noisy=True):
    """Posterior mean/variance from pre-assembled matrices.

    Shared by the kernel-driven path below and by matrix-level
    consistency checks against other estimators.
    """
    y = np.asarray(y, dtype=complex).reshape(-1)
    cf = _factor(K_y, noisy)
    mean = K_BA @ cho_solve(cf, y, check_finite=False)
    V = cho_solve(cf, K_BA.conj().T, check_finite=False)
    var = np.asarray(prior_diag, dtype=float) - np.einsum("ij,ji->i", K_BA, V).real
    return mean, np.maximum(var, 0.0)


def gpr_posterior(A: SampleSet, y, B: SampleSet, kernel: MixedKernel, noise_var: float):
    """Posterior mean and (clipped non-negative) variance on B given
    pilots y observed on A."""
    y = np.asarray(y, dtype=complex).reshape(-1)
    if len(y) != len(A):
        raise ValueError(f"need one observation per evidence sample, got {len(y)} for {len(A)}")
    Ky = assemble_kernel_matrix(A, kernel, noise_var).matrix
    K_BA = cross_kernel_matrix(B, A, kernel)
    prior = _mixed_gram(B, kernel).diagonal().real
    return posterior_from_grams(Ky, K_BA, prior, y, noisy=noise_var > 0)


def eit_gpr_estimate(A: SampleSet, y, B: SampleSet, kernel: MixedKernel, noise_var: float):
    """Two-stage channel inference: a = K^{-1} y, then h_hat = W a with
    W the cross kernel matrix.  Identical to the posterior mean."""
    y = np.asarray(y, dtype=complex).reshape(-1)
    if len(y) != len(A):
        raise ValueError(f"need one observation per evidence sample, got {len(y)} for {len(A)}")
    Ky = assemble_kernel_matrix(A, kernel, noise_var).matrix
    cf = _factor(Ky, noise_var > 0)
    a = cho_solve(cf, y, check_finite=False)
    W = cross_kernel_matrix(B, A, kernel)
    return W @ a


def kernel_entropy(K) -> float:
    """Differential entropy log det(pi e K) of a Hermitian PSD matrix.

    Eigenvalues are floored at 1e-300 to keep the value finite; an
    eigenvalue below -1e-8 * max eigenvalue means the input is not a
    kernel matrix and raises.
    """
    M = K.matrix if isinstance(K, KernelMatrix) else np.asarray(K)
    ev = np.linalg.eigvalsh(M)
    if ev[0] < -1e-8 * max(ev[-1], 0.0):
        raise ValueError(f"matrix is not positive semi-definite (min eig {ev[0]!r})")
    return float(np.sum(np.log(np.pi * np.e * np.maximum(ev, 1e-300))))

"""Closed-form spatio-temporal correlation kernel of a polarized wave field.

A receive region illuminated by a superposition of plane waves with
independent complex Gaussian amplitudes has the matrix-valued field
correlation

    K(x, t; x', t') = sigma^2 / (2 C(|mu|)) *
        < (I - k k^T) exp(-i k0 k . (r + v dt)) exp(k . mu) >_{S^2}

where the average runs over arrival directions k on the unit sphere,
r = x - x', dt = t - t', v is the receiver velocity, and the von
Mises-Fisher weight exp(k . mu) concentrates the incoming power around
the arrival direction mu/|mu| (the vector pointing from the receiver
toward the dominant source).  C(m) = sinh(m)/m restores the energy
normalization tr K(x,t; x,t) = sigma^2 for every mu.

The average has the closed form

    K = sigma^2 / C(|mu|) * Sigma(w),      w = k0 (r + v dt) + i mu,
    Sigma(w) = (f0(|w|) + f2(|w|))/8 * I
             + (f0(|w|) - 3 f2(|w|))/8 * what what^T,

with the pseudo-norm |w| = sqrt(w^T w) (no conjugation) and
what = w / |w|.  Sigma is an even entire function of w: every output
here is assembled from w^T w and w w^T only, so the square-root branch
can never matter.  Both the Helmholtz constraint
(laplacian + k0^2) K = 0 and the divergence-free column property are
inherited from the plane-wave representation.

Derivatives with respect to mu(k) and sigma^2 are analytic:

    dSigma/dw_k = [ i (f1 + f3) what_k I + i (f1 - 3 f3) what_k what what^T
                    + (f0 - 3 f2) (d_k what . what^T + what . d_k what^T) ] / 8
    d_k what    = (e_k - what_k what)/|w|
    dK/dmu_k    = sigma^2/C * ( i dSigma/dw_k - C'(m) mu_k / (C(m) m) * Sigma )
    dK/dsigma^2 = Sigma(w) / C(m)

using f_n'(b) = i f_{n+1}(b).  Where |w^T w| falls below the degeneracy
threshold the gradient falls back to central finite differences of
``sigma_matrix`` (Sigma itself never degenerates: the rank-one
coefficient is evaluated as an entire function of w^T w).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .special import (
    DEGENERATE_BSQ,
    fn_tableau,
    rank_one_coefficient,
    vmf_normalizer,
    vmf_normalizer_deriv,
)

SPEED_OF_LIGHT = 299792458.0

#: finite-difference step, relative to the argument scale, used by the
#: degenerate-pseudo-norm gradient fallback.
FD_STEP_REL = 1e-6

_EYE3 = np.eye(3)


@dataclass(frozen=True)
class KernelParams:
    """Hyperparameters of one correlation kernel.

    mu        -- arrival-concentration vector (dimensionless)
    sigma2    -- total field energy tr K(x,t;x,t), > 0
    velocity  -- receiver velocity in m/s
    k0        -- carrier wavenumber 2 pi / lambda in rad/m
    """

    mu: np.ndarray
    sigma2: float
    velocity: np.ndarray = field(default_factory=lambda: np.zeros(3))
    k0: float = 2 * np.pi

    def __post_init__(self):
        object.__setattr__(self, "mu", np.asarray(self.mu, dtype=float).reshape(3))
        object.__setattr__(self, "velocity", np.asarray(self.velocity, dtype=float).reshape(3))
        if not np.isfinite(self.mu).all():
            raise ValueError("mu must be finite")
        if not np.isfinite(self.velocity).all():
            raise ValueError("velocity must be finite")
        if not (self.sigma2 > 0 and np.isfinite(self.sigma2)):
            raise ValueError(f"sigma2 must be positive and finite, got {self.sigma2}")
        if not (self.k0 > 0 and np.isfinite(self.k0)):
            raise ValueError(f"k0 must be positive and finite, got {self.k0}")

    @property
    def mu_norm(self) -> float:
        return float(np.linalg.norm(self.mu))


def sigma_matrix(w):
    """Sigma(w) for a complex 3-vector (or batch ``(..., 3)``) argument.

    Returns shape ``(..., 3, 3)``.  Sigma(0) = I/3; outputs depend on w
    only through w^T w and w w^T and are therefore branch independent.
    """
    w = np.asarray(w, dtype=complex)
    b2 = np.einsum("...i,...i->...", w, w)
    f = fn_tableau(np.sqrt(b2))
    iso = (f[0] + f[2]) / 8.0
    g8 = rank_one_coefficient(b2, f[0], f[2]) / 8.0
    outer = w[..., :, None] * w[..., None, :]
    return iso[..., None, None] * _EYE3 + g8[..., None, None] * outer


def sigma_gradient(w):
    """dSigma/dw_k for k = 0, 1, 2; returns shape ``(3, 3, 3)``.

    Uses the analytic formula when |w^T w| >= DEGENERATE_BSQ and central
    finite differences on ``sigma_matrix`` otherwise, so it is total.
    """
    w = np.asarray(w, dtype=complex).reshape(3)
    b2 = w @ w
    if abs(b2) < DEGENERATE_BSQ:
        return _sigma_gradient_fd(w)
    beta = np.sqrt(b2)
    f0, f1, f2, f3 = fn_tableau(beta)
    what = w / beta
    ww = np.outer(what, what)
    out = np.empty((3, 3, 3), dtype=complex)
    for k in range(3):
        d_what = (_EYE3[k] - what[k] * what) / beta
        out[k] = (
            1j * (f1 + f3) * what[k] * _EYE3
            + 1j * (f1 - 3 * f3) * what[k] * ww
            + (f0 - 3 * f2) * (np.outer(d_what, what) + np.outer(what, d_what))
        ) / 8.0
    return out


def _sigma_gradient_fd(w):
    """Central-difference fallback; Sigma is analytic, so a real step
    along each coordinate gives the complex derivative."""
    h = FD_STEP_REL * max(1.0, float(np.abs(w).max()))
    out = np.empty((3, 3, 3), dtype=complex)
    for k in range(3):
        e = np.zeros(3)
        e[k] = h
        out[k] = (sigma_matrix(w + e) - sigma_matrix(w - e)) / (2.0 * h)
    return out


def _displacement(xa, ta, xb, tb, velocity):
    """Effective displacement (xa - xb) + v (ta - tb); the kernel sees
    motion only through this combination."""
    r = np.asarray(xa, dtype=float) - np.asarray(xb, dtype=float)
    return r + np.asarray(velocity, dtype=float) * (float(ta) - float(tb))


def em_kernel(xa, ta, xb, tb, p: KernelParams):
    """3x3 field correlation between spacetime points (xa, ta), (xb, tb)."""
    r = _displacement(xa, ta, xb, tb, p.velocity)
    w = p.k0 * r + 1j * p.mu
    return (p.sigma2 / vmf_normalizer(p.mu_norm)) * sigma_matrix(w)


def em_kernel_grad_mu(a, b, p: KernelParams):
    """d em_kernel / d mu_k for k = 0, 1, 2; shape ``(3, 3, 3)``.

    ``a`` and ``b`` are SpacetimeSample-like objects (``position`` and
    ``time`` attributes).  The mu = 0 limit is handled exactly since
    C'(0) = 0 and C'(m) mu_k / m stays bounded.
    """
    r = _displacement(a.position, a.time, b.position, b.time, p.velocity)
    w = p.k0 * r + 1j * p.mu
    m = p.mu_norm
    C = vmf_normalizer(m)
    S = sigma_matrix(w)
    dS = sigma_gradient(w)
    if m > 1e-12:
        ratio = (vmf_normalizer_deriv(m) / C) * (p.mu / m)
    else:
        ratio = np.zeros(3)
    out = np.empty((3, 3, 3), dtype=complex)
    for k in range(3):
        out[k] = (p.sigma2 / C) * (1j * dS[k] - ratio[k] * S)
    return out


def em_kernel_grad_sigma2(a, b, p: KernelParams):
    """d em_kernel / d sigma^2 = Sigma(w)/C(m), i.e. em_kernel/sigma^2."""
    r = _displacement(a.position, a.time, b.position, b.time, p.velocity)
    w = p.k0 * r + 1j * p.mu
    return sigma_matrix(w) / vmf_normalizer(p.mu_norm)


def em_kernel_scalar(a, b, p: KernelParams):
    """Scalar channel correlation p_a^T K p_b between two antennas.

    ``a`` and ``b`` carry position, time and a real unit polarization
    vector.  Swapping the arguments conjugates the value.
    """
    pa = _checked_polarization(a.polarization)
    pb = _checked_polarization(b.polarization)
    K = em_kernel(a.position, a.time, b.position, b.time, p)
    return complex(pa @ K @ pb)


def _checked_polarization(pol):
    pol = np.asarray(pol, dtype=float).reshape(3)
    if abs(np.linalg.norm(pol) - 1.0) > 1e-9:
        raise ValueError(f"polarization must be a unit vector, got norm {np.linalg.norm(pol)!r}")
    return pol


def jakes_correlation(dt, v, lam, sigma_h2):
    """Classic scalar isotropic-scattering temporal correlation
    sigma_h^2 J0(2 pi v dt / lambda), kept for comparison plots."""
    from scipy.special import j0

    if lam <= 0:
        raise ValueError("wavelength must be positive")
    return sigma_h2 * j0(2.0 * np.pi * v * np.asarray(dt, dtype=float) / lam)

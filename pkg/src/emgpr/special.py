"""Moment integrals of the complex exponential over [-1, 1].

The whole kernel family in this package is assembled from the four
entire functions

    f_n(beta) = int_{-1}^{1} x^n exp(i beta x) dx,   n = 0..3,

evaluated at complex arguments, together with the von Mises-Fisher
normalizer C(m) = sinh(m)/m.  Closed forms exist,

    f_0 = 2 sin(b)/b
    f_1 = -2i (b cos b - sin b)/b^2
    f_2 = (2 b^2 sin b + 4 b cos b - 4 sin b)/b^3
    f_3 = -2i (b^3 cos b - 3 b^2 sin b - 6 b cos b + 6 sin b)/b^4

but they cancel catastrophically near b = 0.  Below ``BETA_SWITCH`` the
power series

    f_n(b) = sum_m 2 (i b)^m / (m! (n + m + 1)),   m = n mod 2, n+m even

is used instead.  In the intermediate band the trig forms of f_2 and
f_3 still lose digits, so there they are evaluated by the downward
recurrence f_{n-1} = (E_n - i b f_n)/n started high with a zero seed
(E_n = e^{ib} - (-1)^n e^{-ib}); the recurrence damps the seed error by
prod(|b|/k) and is accurate to machine precision for |b| < 1.

Everything here is vectorized over numpy arrays and safe for any finite
complex argument.
"""

from __future__ import annotations

from math import factorial

import numpy as np

#: |beta| below which the power series replaces the closed forms.
BETA_SWITCH = 1e-1

#: truncation rule for the series: stop once the next term is below
#: this fraction of the partial sum.
SERIES_RTOL = 1e-17

# starting index of the downward recurrence; the seed error reaches
# f_3 attenuated by |b|^13/(16!/3!) < 1e-12 for |b| <= 1.
_RECURRENCE_TOP = 16

# trig forms of f_2/f_3 are well conditioned only above this.
_DIRECT_MIN = 1.0


def _fn_series(n, beta):
    """Power series for f_n, vectorized; beta is a 1-d complex array."""
    m = n % 2
    ib = 1j * beta
    term = 2.0 * ib**m / (factorial(m) * (n + m + 1))
    total = term.copy()
    while True:
        # ratio between consecutive kept terms (m -> m+2)
        term = term * ib * ib * ((n + m + 1) / ((m + 1) * (m + 2) * (n + m + 3)))
        m += 2
        total += term
        if np.all(np.abs(term) <= SERIES_RTOL * np.maximum(np.abs(total), 1e-300)):
            return total
        if m > 200:  # unreachable for |beta| < BETA_SWITCH
            return total


def _fn_recurrence(beta):
    """f_2 and f_3 by downward recurrence; beta is a 1-d complex array."""
    s, c = np.sin(beta), np.cos(beta)
    e_even = 2j * s           # e^{ib} - e^{-ib}
    e_odd = 2.0 * c           # e^{ib} + e^{-ib}
    f = np.zeros_like(beta)
    f2 = f3 = None
    for m in range(_RECURRENCE_TOP, 2, -1):
        e_m = e_even if m % 2 == 0 else e_odd
        f = (e_m - 1j * beta * f) / m
        if m - 1 == 3:
            f3 = f.copy()
        if m - 1 == 2:
            f2 = f
    return f2, f3


def fn_closed(n, beta):
    """Closed-form branch of f_n, stable down to |beta| ~ BETA_SWITCH/2."""
    beta = np.asarray(beta, dtype=complex)
    shape = beta.shape
    b = np.atleast_1d(beta).ravel()
    s, c = np.sin(b), np.cos(b)
    if n == 0:
        out = 2.0 * s / b
    elif n == 1:
        out = -2j * (b * c - s) / b**2
    else:
        out = np.empty_like(b)
        lo = np.abs(b) < _DIRECT_MIN
        if lo.any():
            f2, f3 = _fn_recurrence(b[lo])
            out[lo] = f2 if n == 2 else f3
        hi = ~lo
        if hi.any():
            bh, sh, ch = b[hi], s[hi], c[hi]
            if n == 2:
                out[hi] = (2 * bh**2 * sh + 4 * bh * ch - 4 * sh) / bh**3
            else:
                out[hi] = -2j * (bh**3 * ch - 3 * bh**2 * sh - 6 * bh * ch + 6 * sh) / bh**4
    return out.reshape(shape) if shape else out[0]


def fn_series(n, beta):
    """Series branch of f_n (accurate for small |beta|, exact at 0)."""
    beta = np.asarray(beta, dtype=complex)
    shape = beta.shape
    out = _fn_series(n, np.atleast_1d(beta).ravel())
    return out.reshape(shape) if shape else out[0]


def f_n(n, beta):
    """Evaluate f_n(beta) = int_{-1}^1 x^n e^{i beta x} dx for n in 0..3.

    Accepts scalar or array ``beta`` (real or complex); total on finite
    inputs.  Relative accuracy is ~1e-13 or better everywhere.
    """
    if n not in (0, 1, 2, 3):
        raise ValueError(f"f_n is implemented for n in 0..3, got n={n}")
    beta = np.asarray(beta, dtype=complex)
    shape = beta.shape
    b = np.atleast_1d(beta).ravel()
    out = np.empty_like(b)
    small = np.abs(b) < BETA_SWITCH
    if small.any():
        out[small] = _fn_series(n, b[small])
    if (~small).any():
        out[~small] = fn_closed(n, b[~small])
    return out.reshape(shape) if shape else out[0]


def fn_tableau(beta):
    """All four f_n at once, sharing one sin/cos evaluation.

    Returns an array of shape ``(4,) + beta.shape``.  This is the hot
    path used by the kernel assembly.
    """
    beta = np.asarray(beta, dtype=complex)
    shape = beta.shape
    b = np.atleast_1d(beta).ravel()
    f = np.empty((4, b.size), dtype=complex)
    ab = np.abs(b)
    small = ab < BETA_SWITCH
    mid = ~small & (ab < _DIRECT_MIN)
    big = ab >= _DIRECT_MIN
    if small.any():
        bs = b[small]
        for n in range(4):
            f[n, small] = _fn_series(n, bs)
    if mid.any():
        bm = b[mid]
        s, c = np.sin(bm), np.cos(bm)
        f[0, mid] = 2.0 * s / bm
        f[1, mid] = -2j * (bm * c - s) / bm**2
        f2, f3 = _fn_recurrence(bm)
        f[2, mid] = f2
        f[3, mid] = f3
    if big.any():
        bb = b[big]
        s, c = np.sin(bb), np.cos(bb)
        f[0, big] = 2.0 * s / bb
        f[1, big] = -2j * (bb * c - s) / bb**2
        f[2, big] = (2 * bb**2 * s + 4 * bb * c - 4 * s) / bb**3
        f[3, big] = -2j * (bb**3 * c - 3 * bb**2 * s - 6 * bb * c + 6 * s) / bb**4
    return f.reshape((4,) + shape)


def rank_one_coefficient(beta_sq, f0=None, f2=None):
    """(f_0(b) - 3 f_2(b)) / b^2 as an entire function of b^2.

    The rank-one part of the kernel carries this coefficient.  Dividing
    the plain difference by b^2 breaks down when b^2 -> 0 (complex null
    vectors make this reachable), so below ``DEGENERATE_BSQ`` the Taylor
    series in b^2 is summed directly; the value at 0 is 4/15.

    ``f0``/``f2`` may be passed to reuse a tableau already computed for
    the same arguments.
    """
    beta_sq = np.asarray(beta_sq, dtype=complex)
    shape = beta_sq.shape
    b2 = np.atleast_1d(beta_sq).ravel()
    out = np.empty_like(b2)
    degen = np.abs(b2) < DEGENERATE_BSQ
    reg = ~degen
    if reg.any():
        if f0 is None:
            fr = fn_tableau(np.sqrt(b2[reg]))
            f0r, f2r = fr[0], fr[2]
        else:
            f0r = np.atleast_1d(np.asarray(f0, dtype=complex)).ravel()[reg]
            f2r = np.atleast_1d(np.asarray(f2, dtype=complex)).ravel()[reg]
        out[reg] = (f0r - 3.0 * f2r) / b2[reg]
    if degen.any():
        bd = b2[degen]
        total = np.zeros_like(bd)
        # sum_{j>=1} 2 (-1)^j b2^{j-1} [1/((2j)!(2j+1)) - 3/((2j)!(2j+3))]
        for j in range(1, 9):
            coef = 2.0 * (-1) ** j * (
                1.0 / (factorial(2 * j) * (2 * j + 1))
                - 3.0 / (factorial(2 * j) * (2 * j + 3))
            )
            total += coef * bd ** (j - 1)
        out[degen] = total
    return out.reshape(shape) if shape else out[0]


#: |w^T w| below which the factored rank-one form would divide by a
#: vanishing pseudo-norm; the entire-series path takes over there.
DEGENERATE_BSQ = 1e-8


def vmf_normalizer(mu_norm):
    """von Mises-Fisher normalizer C(m) = sinh(m)/m, with C(0) = 1."""
    m = np.asarray(mu_norm, dtype=float)
    if np.any(m < 0):
        raise ValueError("vmf_normalizer expects a non-negative norm")
    shape = m.shape
    m = np.atleast_1d(m).ravel()
    out = np.empty_like(m)
    small = m < 1e-4
    ms = m[small]
    out[small] = 1.0 + ms**2 / 6.0 + ms**4 / 120.0
    out[~small] = np.sinh(m[~small]) / m[~small]
    return out.reshape(shape) if shape else out[0]


def vmf_normalizer_deriv(mu_norm):
    """C'(m) = (m cosh m - sinh m)/m^2; odd in m, so C'(0) = 0."""
    m = np.asarray(mu_norm, dtype=float)
    if np.any(m < 0):
        raise ValueError("vmf_normalizer_deriv expects a non-negative norm")
    shape = m.shape
    m = np.atleast_1d(m).ravel()
    out = np.empty_like(m)
    small = m < 1e-4
    ms = m[small]
    out[small] = ms / 3.0 + ms**3 / 30.0
    mb = m[~small]
    out[~small] = (mb * np.cosh(mb) - np.sinh(mb)) / mb**2
    return out.reshape(shape) if shape else out[0]

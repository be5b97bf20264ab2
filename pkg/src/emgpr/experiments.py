"""Monte-Carlo experiment drivers.

Four experiments are provided:

* ``run_snr_sweep``      NMSE of every configured estimator over an SNR
                         grid (channel and noise redrawn per trial);
* ``run_surface_scan``   marginal log likelihood over a log-spaced grid
                         of concentration components (mu_x, mu_z);
* ``run_entropy_sweep``  kernel entropy versus concentration for
                         several antenna spacings;
* ``run_kernel_slices``  planar slices of the space-time kernel.

Every trial derives its random streams from (master seed, SNR index,
trial index) counters, so serial and parallel executions produce
bit-identical results, and all estimators inside one trial see the same
channel/pilot pair.
"""

from __future__ import annotations

import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .baselines import (
    amp_estimate,
    angular_dictionary,
    ls_estimate,
    mmse_isotropic,
    omp_estimate,
)
from .channel import ArrayGeometry, add_awgn, geometric_channel, sv_channel, ula_geometry, user_position
from .config import ExperimentConfig, config_wavelength, trial_seed
from .gpr import eit_gpr_estimate, kernel_entropy, assemble_kernel_matrix
from .kernel import KernelParams, sigma_matrix
from .learning import init_sigma2, learn_kernel, log_likelihood
from .sampling import MixedKernel
from .special import vmf_normalizer


def nmse(h_hat, h) -> float:
    """Single-trial normalized squared error ||h_hat - h||^2 / ||h||^2."""
    h = np.asarray(h, dtype=complex).reshape(-1)
    h_hat = np.asarray(h_hat, dtype=complex).reshape(-1)
    denom = float(np.sum(np.abs(h) ** 2))
    if denom <= 0.0:
        raise ValueError("true channel has zero energy")
    return float(np.sum(np.abs(h_hat - h) ** 2) / denom)


def build_geometry(cfg: ExperimentConfig) -> ArrayGeometry:
    lam = config_wavelength(cfg)
    return ula_geometry(
        cfg.array.n, cfg.array.spacing_wavelengths * lam, cfg.array.f_c_hz,
        cfg.array.polarization,
    )


def _draw_channel(cfg: ExperimentConfig, geom: ArrayGeometry, seed) -> np.ndarray:
    ch = cfg.channel
    if ch.model == "sv":
        return sv_channel(geom, ch.phi_ue_deg, ch.paths, ch.rician_k_db, seed=seed).h
    # geometric channels are deterministic; scale them to the pilot
    # model's unit per-antenna power so the SNR definition is absolute
    pos = user_position(geom, ch.phi_ue_deg, ch.r_ue_m)
    h = geometric_channel(geom, pos, ch.path_loss_exp).h
    return h * np.sqrt(geom.n / np.sum(np.abs(h) ** 2))


@dataclass
class SweepResult:
    """Per-(estimator, SNR) NMSE statistics plus bookkeeping."""

    rows: list = field(default_factory=list)   # dicts with the CSV schema
    failures: dict = field(default_factory=dict)
    wall_clock: float = 0.0

    schema = ("estimator", "snr_db", "nmse_mean", "nmse_stderr", "trials")

    def table(self):
        return [tuple(row[k] for k in self.schema) for row in self.rows]

    def mean(self, estimator: str, snr_db: float) -> float:
        for row in self.rows:
            if row["estimator"] == estimator and row["snr_db"] == snr_db:
                return row["nmse_mean"]
        raise KeyError((estimator, snr_db))

    def stderr(self, estimator: str, snr_db: float) -> float:
        for row in self.rows:
            if row["estimator"] == estimator and row["snr_db"] == snr_db:
                return row["nmse_stderr"]
        raise KeyError((estimator, snr_db))


def _trial_errors(cfg: ExperimentConfig, geom, dictionary, snr_idx, trial) -> dict:
    """All estimators on one shared (h, y) draw; failures become NaN."""
    sw = cfg.sweep
    snr_db = sw.snr_db[snr_idx]
    h = _draw_channel(cfg, geom, trial_seed(sw.seed, snr_idx, trial, 0))
    y, noise_var = add_awgn(h, snr_db, seed=trial_seed(sw.seed, snr_idx, trial, 1))
    A = geom.sample_set()
    out = {}
    sigma2_hat = init_sigma2(y, noise_var)
    for name in sw.estimators:
        try:
            if name == "ls":
                h_hat = ls_estimate(y)
            elif name == "mmse-iso":
                h_hat = mmse_isotropic(y, geom, sigma2_hat, noise_var)
            elif name == "omp":
                h_hat = omp_estimate(y, dictionary, sw.omp_paths)
            elif name == "amp":
                h_hat, _ = amp_estimate(y, sw.amp_shrink, sw.amp_iters)
            elif name == "gpr-single":
                report = learn_kernel(A, y, noise_var, S=1,
                                      n_iter=cfg.learning.n_iter, k0=geom.wavenumber)
                h_hat = eit_gpr_estimate(A, y, A, report.kernel, noise_var)
            elif name == "gpr-mixed":
                report = learn_kernel(A, y, noise_var, S=cfg.learning.s,
                                      n_iter=cfg.learning.n_iter, k0=geom.wavenumber)
                h_hat = eit_gpr_estimate(A, y, A, report.kernel, noise_var)
            else:  # pragma: no cover - validated by the config layer
                raise ValueError(f"unknown estimator {name!r}")
            out[name] = nmse(h_hat, h)
        except (np.linalg.LinAlgError, ValueError):
            out[name] = np.nan
    return out


def _sweep_chunk(args):
    cfg, snr_idx, trials = args
    geom = build_geometry(cfg)
    dictionary = angular_dictionary(geom, cfg.sweep.dict_oversample)
    return [(snr_idx, t, _trial_errors(cfg, geom, dictionary, snr_idx, t)) for t in trials]


def run_snr_sweep(cfg: ExperimentConfig) -> SweepResult:
    """Monte-Carlo NMSE sweep over the configured SNR grid."""
    cfg.validate()
    sw = cfg.sweep
    t0 = time.perf_counter()
    n_snr, n_trials = len(sw.snr_db), sw.trials

    # errors[estimator][snr_idx, trial]
    errors = {name: np.full((n_snr, n_trials), np.nan) for name in sw.estimators}
    jobs = []
    for snr_idx in range(n_snr):
        if sw.n_jobs == 1:
            jobs.append((cfg, snr_idx, range(n_trials)))
        else:
            for chunk in np.array_split(np.arange(n_trials), sw.n_jobs):
                if len(chunk):
                    jobs.append((cfg, snr_idx, list(chunk)))
    if sw.n_jobs == 1:
        results = map(_sweep_chunk, jobs)
    else:
        with ProcessPoolExecutor(max_workers=sw.n_jobs) as pool:
            results = list(pool.map(_sweep_chunk, jobs))
    for chunk in results:
        for snr_idx, trial, per_est in chunk:
            for name, val in per_est.items():
                errors[name][snr_idx, trial] = val

    result = SweepResult()
    for name in sw.estimators:
        result.failures[name] = int(np.isnan(errors[name]).sum())
        for snr_idx, snr_db in enumerate(sw.snr_db):
            vals = errors[name][snr_idx]
            ok = vals[np.isfinite(vals)]
            n_ok = len(ok)
            mean = float(np.mean(ok)) if n_ok else float("nan")
            stderr = float(np.std(ok, ddof=1) / np.sqrt(n_ok)) if n_ok > 1 else 0.0
            result.rows.append({
                "estimator": name,
                "snr_db": float(snr_db),
                "nmse_mean": mean,
                "nmse_stderr": stderr,
                "trials": n_ok,
            })
    result.wall_clock = time.perf_counter() - t0
    return result


@dataclass
class SurfaceResult:
    """Log-likelihood samples over the signed concentration grid."""

    rows: list = field(default_factory=list)   # dicts mu_x, mu_z, loglik
    wall_clock: float = 0.0

    schema = ("mu_x", "mu_z", "loglik")

    def table(self):
        return [tuple(row[k] for k in self.schema) for row in self.rows]

    def grid(self, sign: int):
        """(mu_x_abs, mu_z, loglik) arrays for one sign of mu_x."""
        sel = [r for r in self.rows if np.sign(r["mu_x"]) == sign]
        xs = np.array(sorted({abs(r["mu_x"]) for r in sel}))
        zs = np.array(sorted({r["mu_z"] for r in sel}))
        L = np.full((len(xs), len(zs)), np.nan)
        for r in sel:
            i = np.searchsorted(xs, abs(r["mu_x"]))
            j = np.searchsorted(zs, r["mu_z"])
            L[i, j] = r["loglik"]
        return xs, zs, L


def run_surface_scan(cfg: ExperimentConfig) -> SurfaceResult:
    """Likelihood surface l(mu_x, mu_z | y) on a log-spaced grid, both
    signs of mu_x, mu_y fixed to zero."""
    cfg.validate()
    if cfg.channel.model != "geometric":
        raise ValueError("surface scan expects the geometric channel model")
    sw = cfg.sweep
    t0 = time.perf_counter()
    geom = build_geometry(cfg)
    h = _draw_channel(cfg, geom, None)
    y, noise_var = add_awgn(h, sw.surface_snr_db, seed=trial_seed(sw.seed, 0, 0, 1))
    A = geom.sample_set()
    sigma2 = init_sigma2(y, noise_var)
    grid = np.geomspace(sw.surface_mu_min, sw.surface_mu_max, sw.surface_grid)
    result = SurfaceResult()
    for sign in (1.0, -1.0):
        for mu_x in grid:
            for mu_z in grid:
                params = KernelParams(
                    mu=np.array([sign * mu_x, 0.0, mu_z]), sigma2=sigma2,
                    k0=geom.wavenumber,
                )
                try:
                    ll = log_likelihood(A, y, MixedKernel.single(params), noise_var)
                except np.linalg.LinAlgError:
                    ll = float("nan")
                result.rows.append({"mu_x": float(sign * mu_x), "mu_z": float(mu_z),
                                    "loglik": ll})
    result.wall_clock = time.perf_counter() - t0
    return result


def analyze_surface_ridge(result: SurfaceResult, mu_z_min: float = 2.0):
    """Fit the high-likelihood ridge in (lg |mu_x|, lg mu_z).

    For every mu_z column above ``mu_z_min`` the best mu_x < 0 cell is
    located; a least-squares line lg|mu_x| = slope * lg(mu_z) +
    intercept is fit through those maxima.  Returns (slope, intercept,
    fraction of global maxima with mu_x < 0).
    """
    xs, zs, Lneg = result.grid(-1)
    _, _, Lpos = result.grid(1)
    best_neg = np.nanmax(Lneg)
    best_pos = np.nanmax(Lpos)
    neg_fraction = 1.0 if best_neg > best_pos else 0.0
    cols = zs >= mu_z_min
    lg_z, lg_x = [], []
    for j in np.nonzero(cols)[0]:
        col = Lneg[:, j]
        if np.all(np.isnan(col)):
            continue
        lg_z.append(np.log10(zs[j]))
        lg_x.append(np.log10(xs[np.nanargmax(col)]))
    coeffs = np.polyfit(lg_z, lg_x, 1)
    return float(coeffs[0]), float(coeffs[1]), neg_fraction


@dataclass
class EntropyResult:
    rows: list = field(default_factory=list)   # dicts spacing, mu, entropy
    wall_clock: float = 0.0

    schema = ("spacing", "mu", "entropy")

    def table(self):
        return [tuple(row[k] for k in self.schema) for row in self.rows]

    def curve(self, spacing_wl: float):
        sel = [r for r in self.rows if abs(r["spacing"] - spacing_wl) < 1e-12]
        sel.sort(key=lambda r: r["mu"])
        return (np.array([r["mu"] for r in sel]),
                np.array([r["entropy"] for r in sel]))


#: concentration direction used by the entropy curves.
ENTROPY_MU_DIR = np.array([0.0, 1.0, 1.0]) / np.sqrt(2.0)


def run_entropy_sweep(cfg: ExperimentConfig) -> EntropyResult:
    """Kernel entropy log det(pi e K) versus concentration for each
    configured antenna spacing."""
    cfg.validate()
    sw = cfg.sweep
    t0 = time.perf_counter()
    lam = config_wavelength(cfg)
    mus = np.linspace(0.0, sw.entropy_mu_max, sw.entropy_points)
    result = EntropyResult()
    for spacing_wl in sw.entropy_spacings_wl:
        geom = ula_geometry(sw.entropy_n, spacing_wl * lam, cfg.array.f_c_hz,
                            cfg.array.polarization)
        A = geom.sample_set()
        for mu_norm in mus:
            params = KernelParams(mu=mu_norm * ENTROPY_MU_DIR, sigma2=1.0,
                                  k0=geom.wavenumber)
            try:
                K = assemble_kernel_matrix(A, MixedKernel.single(params), 0.0)
                H = kernel_entropy(K)
            except (np.linalg.LinAlgError, ValueError):
                H = float("nan")  # non-PSD sample: record and skip
            result.rows.append({"spacing": float(spacing_wl), "mu": float(mu_norm),
                                "entropy": H})
    result.wall_clock = time.perf_counter() - t0
    return result


@dataclass
class SliceResult:
    """Scalar kernel sampled over 2-D spacetime planes."""

    planes: dict = field(default_factory=dict)  # name -> (ax1, ax2, K complex grid)
    wall_clock: float = 0.0

    schema = ("axis1", "axis2", "re", "im")

    def table(self, name: str):
        ax1, ax2, K = self.planes[name]
        rows = []
        for i, a in enumerate(ax1):
            for j, b in enumerate(ax2):
                rows.append((float(a), float(b), float(K[i, j].real), float(K[i, j].imag)))
        return rows


def _scalar_kernel_grid(r_grid, dt, params: KernelParams, pol):
    """y-polarized scalar kernel over a batch of displacements."""
    w = params.k0 * (r_grid + params.velocity * dt) + 1j * params.mu
    S = sigma_matrix(w)
    val = np.einsum("i,...ij,j->...", pol, S, pol)
    return params.sigma2 / vmf_normalizer(params.mu_norm) * val


def run_kernel_slices(cfg: ExperimentConfig) -> SliceResult:
    """Sample the space-time kernel over an (x, z) plane at dt = 0 and
    at the configured time offset, and over an (x, t) plane."""
    cfg.validate()
    sw = cfg.sweep
    t0 = time.perf_counter()
    lam = config_wavelength(cfg)
    k0 = 2.0 * np.pi / lam
    params = KernelParams(mu=np.array(sw.slice_mu), sigma2=sw.slice_sigma2,
                          velocity=np.array(sw.slice_velocity), k0=k0)
    pol = np.array([0.0, 1.0, 0.0])
    ext = sw.slice_extent_wl * lam
    ax = np.linspace(-ext, ext, sw.slice_points)
    result = SliceResult()

    X, Z = np.meshgrid(ax, ax, indexing="ij")
    r = np.stack([X, np.zeros_like(X), Z], axis=-1)
    for name, dt in (("xz_dt0", 0.0), (f"xz_dt{sw.slice_dt_s:g}", sw.slice_dt_s)):
        K = _scalar_kernel_grid(r, dt, params, pol)
        result.planes[name] = (ax, ax, K)

    ts = np.linspace(-sw.slice_dt_s, sw.slice_dt_s, sw.slice_points)
    Kxt = np.empty((len(ax), len(ts)), dtype=complex)
    for j, dt in enumerate(ts):
        r_line = np.stack([ax, np.zeros_like(ax), np.zeros_like(ax)], axis=-1)
        Kxt[:, j] = _scalar_kernel_grid(r_line, dt, params, pol)
    result.planes["xt"] = (ax, ts, Kxt)
    result.wall_clock = time.perf_counter() - t0
    return result

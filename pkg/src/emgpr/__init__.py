"""Electromagnetic correlation kernels and Gaussian-process channel
estimation for antenna arrays.

The package provides, in layers:

* ``special`` / ``kernel``: the closed-form polarized space-time
  correlation kernel, its building blocks and analytic derivatives;
* ``sampling`` / ``gpr``: kernel matrices over sample sets, the
  Gaussian-process posterior, and kernel entropy;
* ``learning``: marginal-likelihood fitting of mixed-kernel
  hyperparameters with projected backtracking ascent;
* ``channel`` / ``baselines``: ground-truth channel simulators and the
  reference estimators used for benchmarking;
* ``config`` / ``experiments`` / ``output`` / ``cli``: reproducible
  Monte-Carlo experiment drivers with CSV/SVG emission.
"""

from .baselines import (
    AngularDictionary,
    amp_estimate,
    angular_dictionary,
    isotropic_gram,
    ls_estimate,
    mmse_isotropic,
    omp_estimate,
)
from .channel import (
    ArrayGeometry,
    ChannelRealization,
    add_awgn,
    geometric_channel,
    steering_vector,
    sv_channel,
    ula_geometry,
    user_position,
)
from .config import ConfigError, ExperimentConfig, load_config
from .experiments import (
    EntropyResult,
    SliceResult,
    SurfaceResult,
    SweepResult,
    analyze_surface_ridge,
    nmse,
    run_entropy_sweep,
    run_kernel_slices,
    run_snr_sweep,
    run_surface_scan,
)
from .gpr import (
    KernelMatrix,
    RankDeficientError,
    assemble_kernel_matrix,
    cross_kernel_matrix,
    eit_gpr_estimate,
    gpr_posterior,
    kernel_entropy,
    posterior_from_grams,
)
from .kernel import (
    SPEED_OF_LIGHT,
    KernelParams,
    em_kernel,
    em_kernel_grad_mu,
    em_kernel_grad_sigma2,
    em_kernel_scalar,
    jakes_correlation,
    sigma_gradient,
    sigma_matrix,
)
from .learning import (
    ArmijoState,
    LearnReport,
    LearnState,
    armijo_ascent_step,
    estimate_azimuth,
    grad_mu,
    grad_weights,
    init_sigma2,
    learn_kernel,
    log_likelihood,
    project_simplex,
)
from .output import emit_csv, emit_svg_plot, read_csv
from .sampling import MixedKernel, SampleSet, SpacetimeSample
from .special import f_n, vmf_normalizer, vmf_normalizer_deriv

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]

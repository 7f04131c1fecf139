"""Joint sampling-frequency/sampling-time offset estimation and compensation.

Two digitized copies of one bandlimited signal, taken at slightly different
rates and instants, are aligned by estimating the per-sample delay law
d(n) = n*delta + epsilon with Newton iterations on a Farrow
fractional-delay structure, then resampling one copy onto the other's grid.

Public surface:

* :mod:`farrowsync.farrow` - Farrow banks (Lagrange and wideband
  least-squares designs), block and streaming compensation.
* :mod:`farrowsync.accum` - cascaded accumulators for index-weighted sums.
* :mod:`farrowsync.estimator` - the joint Newton estimator and its
  operation-count model.
* :mod:`farrowsync.sigsim` - test-signal samplers, impairments and metrics.
* :mod:`farrowsync.experiments` / :mod:`farrowsync.cli` - Monte-Carlo
  campaigns with CSV output and their command-line front end.
"""

from .accum import AccumulatorChain, brute_force_sums
from .errors import (
    DelayRangeError,
    EmptyChainError,
    FarrowSyncError,
    InsufficientSamplesError,
    InvalidOrderError,
    ParameterError,
    SingularHessianError,
)
from .estimator import (
    EstimateResult,
    EstimatorConfig,
    OffsetParams,
    assemble_gradient_hessian,
    complexity_report,
    cost,
    estimate,
    fractional_delay,
    newton_step,
    per_sample_derivatives,
)
from .experiments import ExperimentConfig, TrialRecord, run_custom, run_experiment
from .farrow import (
    FarrowBank,
    SubfilterOutputs,
    compensate_block,
    compensate_complex,
    design_lagrange,
    design_wideband,
    evaluate,
    frequency_response,
    load_coeffs_csv,
    save_coeffs_csv,
    stream_compensate,
    subfilter_outputs,
)
from .sigsim import (
    BandpassNoiseSampler,
    ImpairmentSpec,
    Metrics,
    MultiSineSampler,
    OfdmSampler,
    OfdmSpec,
    add_awgn,
    apply_cfo_po,
    ber_qam16,
    gen_bandpass_noise,
    gen_multisine,
    gen_ofdm,
    nmse,
    qam16_constellation,
    qam16_demap,
    qam16_gray_labels,
    residual_phase_fit,
    sample_pair,
)

__version__ = "0.1.0"

__all__ = [
    "__version__",
    # errors
    "FarrowSyncError", "InvalidOrderError", "InsufficientSamplesError",
    "ParameterError", "EmptyChainError", "DelayRangeError",
    "SingularHessianError",
    # farrow
    "FarrowBank", "SubfilterOutputs", "design_lagrange", "design_wideband",
    "subfilter_outputs", "evaluate", "compensate_block", "compensate_complex",
    "stream_compensate", "frequency_response", "save_coeffs_csv",
    "load_coeffs_csv",
    # accum
    "AccumulatorChain", "brute_force_sums",
    # estimator
    "OffsetParams", "EstimatorConfig", "EstimateResult", "fractional_delay",
    "cost", "per_sample_derivatives", "assemble_gradient_hessian",
    "newton_step", "estimate", "complexity_report",
    # sigsim
    "MultiSineSampler", "BandpassNoiseSampler", "OfdmSpec", "OfdmSampler",
    "ImpairmentSpec", "Metrics", "gen_multisine", "gen_bandpass_noise",
    "gen_ofdm", "sample_pair", "apply_cfo_po", "add_awgn", "nmse",
    "qam16_constellation", "qam16_gray_labels", "qam16_demap", "ber_qam16",
    "residual_phase_fit",
    # experiments
    "ExperimentConfig", "TrialRecord", "run_experiment", "run_custom",
]

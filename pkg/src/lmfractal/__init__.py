"""Simulation and verification of L-multifractal processes and log-normal cascades."""

__version__ = "0.1.0"

from .errors import ConstructionError, DomainError, EstimationError, ResourceError
from .levy import (BrownianWithDrift, CompoundPoissonNormal, DeterministicDrift, GammaProcess,
                   LevyModel)
from .stationary import (Constant, GaussianFromCovariance, OrnsteinUhlenbeck, StationaryModel,
                         gamma_from_psi)
from .scaling import ScalingFactorGrid, sample_factor, sample_scaling_grid
from .lmf import (LmfModel, SamplePath, independent_pair_cross_moment, inverse_lamperti,
                  mbm_analog_preset, rescale_time, sample_lmf, sample_lmf_path,
                  sample_scaled_coupled, theoretical_cov, theoretical_moment, time_invert)
from .cascade import CascadeSpec, non_levy_gap, simulate_lognormal_cascade
from .analysis import (TestReport, empirical_cov, empirical_mellin, fit_scaling_function,
                       ks_two_sample)
from .rng import run_chunked, stream

__all__ = [name for name in dir() if not name.startswith("_")]

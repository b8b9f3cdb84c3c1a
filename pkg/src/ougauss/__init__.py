"""Numerics for the Ornstein-Uhlenbeck Poisson semigroup and Gaussian Lipschitz spaces."""

from .analyzer import (EquivalenceReport, PairSampler, SeminormEstimate, SweepGrid, boundary_convergence,
                       equivalence_report, growth_check, seminorm_holder, seminorm_poisson)
from .catalog import FieldSum, ScalarField
from .errors import (ConvergenceError, InadmissibleFieldError, KernelRangeError, OUGaussError,
                     ValidationError)
from .geometry import (ModulusKind, ParallelSplit, decompose, gauss_dist_1d, gauss_dist_par,
                       gaussian_density, modulus)
from .kernels import (DEFAULT_SPEC, KernelPoint, QuadratureSpec, kernel_values, mehler, poisson_kernel,
                      poisson_kernel_dt, poisson_kernel_dtdx, poisson_kernel_dx)
from .majorants import BoundId, Certificate, ExpStarConfig, certify, majorant_terms
from .sampling import SamplerSpec
from .transform import (AdmissibilityReport, admissibility, poisson_integral, poisson_integral_dt,
                        poisson_integral_dtdx, poisson_integral_dx)

__version__ = "0.1.0"

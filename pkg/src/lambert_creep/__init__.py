"""Lambert-W creep model of linear viscoelasticity.

The creep function ``psi(t) = W0(t)`` (principal Lambert W) together with
its spectra, relaxation function and structural audits.
"""

from .creep import (
    LAMBERT,
    LINEAR_TEST_MODEL,
    CreepFunction,
    CreepModel,
    PhiGrid,
    PhiRoute,
    SpectralSample,
    creep_compliance,
    creep_rate_transform,
    phi_laplace,
    phi_volterra,
    psi,
    psi_prime,
    psi_prime_from_rho,
    relaxation_modulus,
    rho,
    spectrum_H,
    spectrum_K,
)
from .errors import (
    ConvergenceError,
    CutError,
    CutEvaluationError,
    DomainError,
    GridError,
    GridTooCoarse,
    InversionInstability,
    LambertCreepError,
    MethodDomainError,
    NumericalWarning,
    StepTooCoarse,
    ToleranceNotMet,
)
from .lambertw import (
    BranchSide,
    SolveConfig,
    w0_asymptotic,
    w0_complex,
    w0_cut_limit,
    w0_prime_asymptotic,
    w0_prime_branch_series,
    w0_prime_complex,
    w0_prime_cut_limit,
    w0_prime_real,
    w0_real,
)
from .transforms import (
    InversionConfig,
    InversionMethod,
    QuadratureConfig,
    TailPolicy,
    invert_laplace,
    laplace,
    stieltjes,
    titchmarsh_inverse,
)
from .validation import ValidationReport, check_bernstein, check_cm, run_identity_suite

__version__ = "0.1.0"

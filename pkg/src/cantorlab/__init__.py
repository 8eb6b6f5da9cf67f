"""cantorlab: high-precision orthogonal-polynomial diagnostics on Cantor-type sets.

The package builds discrete approximations of self-similar and Julia-set
measures, derives their Jacobi recurrence coefficients by independent
routes, and runs potential-theoretic and almost-periodicity diagnostics on
the results.  See README.md for the tour.
"""

__version__ = "0.1.0"

from .bigfloat import DEFAULT_PRECISION, mpf, to_decimal, workprec
from .coeffs import (
    CrossValidationReport,
    chebyshev_from_moments,
    chebyshev_validated,
    cross_validate,
    julia_exact_coeffs,
    lanczos_from_discrete,
    stieltjes_fast,
    trusted_prefix_length,
)
from .diagnostics import (
    APScanReport,
    ConjectureReport,
    WidomSeries,
    ap_scan,
    asymptotic_ap_scan,
    conjecture_report,
    dos_compare,
    julia_identity_residual,
    regularity_index,
    verify_almost_period,
    widom_series,
)
from .errors import (
    CantorLabError,
    ConfigError,
    ConsistencyError,
    DomainError,
    LengthError,
    NumericalFailureError,
    PrecisionExhaustedError,
    ResourceCapError,
)
from .jacobi import (
    JacobiCoeffs,
    PolyEvalResult,
    SpectrumSample,
    dos_measure,
    eval_orthonormal,
    monic_norm,
    perturbed_truncation_spectrum,
    truncation_zeros,
)
from .measures import (
    AffineIFS,
    DiscreteMeasure,
    MomentVector,
    PolySequenceSpec,
    ifs_moments,
    ifs_refine,
    ifs_refine_f64,
    julia_inverse_orbit,
    julia_inverse_orbit_f64,
)
from .potential import (
    CapacityEstimate,
    GreenValue,
    TransferMatrix,
    capacity_from_coeffs,
    green_julia,
    lyapunov_approx,
    robin_capacity,
    transfer_product,
)

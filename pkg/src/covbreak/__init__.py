"""covbreak: break detection in the covariance structure of multivariate
time series via vech-CUSUM statistics, with exact limit-law quantiles,
break location estimation, binary segmentation, heavy-tail transforms
and simulators for the model families the test targets."""

from .cusum import CusumPath, TestConfig, TestReport, cusum_path, estimate_theta, run_test, test_statistics
from .errors import (
    CovbreakError,
    DataError,
    NotPositiveDefiniteError,
    SimulationOverflowError,
    SingularCovarianceError,
    SpecValidationError,
    StudyError,
    UsageError,
)
from .generators import (
    CccGarchSpec,
    ExpGarchSpec,
    FactorSpec,
    JeantheauSpec,
    LinearProcessSpec,
    VarmaSpec,
    break_panel,
    check_expgarch,
    check_gamma_c,
    check_gamma_j,
    check_varma_stationary,
    simulate,
    validate_spec,
)
from .limits import (
    LambdaLaw,
    OmegaLaw,
    lambda_quantile,
    normal_coverage,
    omega_cdf,
    omega_normal_approx_quantile,
    omega_quantile,
)
from .linalg import SpdMatrix, spd_quadratic_form, spectral_norm, sym_exp, sym_exp_sqrt, unvech, vech
from .longrun import BartlettConfig, LongRunCov, bartlett_estimate, longrun_from_panel, vech_outer_series
from .panel import TimeSeriesPanel
from .segmentation import SegmentationReport, SegmentConfig, SegmentNode, binary_segment
from .study import StudyCell, StudyDesign, StudyResult, run_study, theoretical_drift
from .transforms import TransformSpec, center_log_returns, fractional_transform, rolling_vol

__version__ = "0.1.0"

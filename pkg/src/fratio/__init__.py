"""Exact and log-normal statistics of ratios of products of squared F variates."""

from .errors import (
    ConfigError,
    DomainError,
    FRatioError,
    NonConvergenceError,
    NumericalError,
    ParameterError,
)
from .fisher_f import FisherFParams, from_db
from .goodness_of_fit import EmpiricalCDF, KSReport, critical_value, ks_statistic, ks_test
from .lognormal_fit import (
    FitReport,
    LogNormalParams,
    fit_iid_ratio,
    fit_ratio,
    fit_ratio_of_products,
    fit_tuned,
    lognormal_cdf,
    lognormal_pdf,
    tune_epsilon,
)
from .montecarlo import McEstimate, RandomStream
from .ratio_stats import RatioSpec, cdf_product, cdf_z, mgf_z, pdf_z, sample_z
from .wireless_metrics import (
    RelayConfig,
    SecrecyConfig,
    fd_outage_bound,
    pnsc,
    sop_lower_bound,
)

__version__ = "0.1.0"

__all__ = [
    "ConfigError", "DomainError", "FRatioError", "NonConvergenceError", "NumericalError",
    "ParameterError", "FisherFParams", "from_db", "EmpiricalCDF", "KSReport",
    "critical_value", "ks_statistic", "ks_test", "FitReport", "LogNormalParams",
    "fit_iid_ratio", "fit_ratio", "fit_ratio_of_products", "fit_tuned", "lognormal_cdf",
    "lognormal_pdf", "tune_epsilon", "McEstimate", "RandomStream", "RatioSpec",
    "cdf_product", "cdf_z", "mgf_z", "pdf_z", "sample_z", "RelayConfig", "SecrecyConfig",
    "fd_outage_bound", "pnsc", "sop_lower_bound", "__version__",
]

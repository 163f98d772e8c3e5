"""Support recovery under Hamming loss: selectors, risk bounds and Monte Carlo tools."""

from ._jit import backend_name
from .bounds import BoundsReport, TwoPointModel, bounds_report
from .dist import DistributionSpec, DomainError, chi_square, gaussian, subbotin
from .risklab import RiskEstimate, SweepConfig, estimate_hamming_risk, estimate_wrong_recovery
from .select import Selection

__version__ = "0.1.0"

__all__ = [
    "BoundsReport", "DistributionSpec", "DomainError", "RiskEstimate", "Selection",
    "SweepConfig", "TwoPointModel", "backend_name", "bounds_report", "chi_square",
    "estimate_hamming_risk", "estimate_wrong_recovery", "gaussian", "subbotin",
]

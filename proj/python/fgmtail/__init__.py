"""Python bindings for the fgmtail C++ library."""

from ._fgmtail import (
    ClassMismatchError,
    ConfigError,
    DomainError,
    FgmModel,
    GridCoverageError,
    HatValues,
    Margin,
    MinSquaredMargin,
    UnsupportedBranchError,
    __version__,
    asym_rho,
    estimate_joint_tail,
    f_poly,
    k_coefficient_iterative,
    k_coefficient_sum,
    nfold_ratio_check,
    philox4x32,
    run_config,
    validate,
)

__all__ = [
    "ClassMismatchError",
    "ConfigError",
    "DomainError",
    "FgmModel",
    "GridCoverageError",
    "HatValues",
    "Margin",
    "MinSquaredMargin",
    "UnsupportedBranchError",
    "__version__",
    "asym_rho",
    "estimate_joint_tail",
    "f_poly",
    "k_coefficient_iterative",
    "k_coefficient_sum",
    "nfold_ratio_check",
    "philox4x32",
    "run_config",
    "validate",
]

from .glm import FitResult, fit_poisson_its, derived_effects
from .gee import fit_gee_ar1, fit_gee_ar1_panel
from .contingency import ContingencyResult, chi2_suite, bh_fdr
from .panel import PanelCell, build_panel, rolling_mean, build_design, report_tables

__all__ = [
    "FitResult",
    "fit_poisson_its",
    "derived_effects",
    "fit_gee_ar1",
    "fit_gee_ar1_panel",
    "ContingencyResult",
    "chi2_suite",
    "bh_fdr",
    "PanelCell",
    "build_panel",
    "rolling_mean",
    "build_design",
    "report_tables",
]

"""Grids, test forms, weighted integrals and the mode-wise dbar solve on X."""

from .chain import ChainReport, correction_chain, support_decay_report
from .forms import Form01, Recipe, TorusGrid, build_test_form
from .geometry import form_norm, geometry_eval
from .integrals import Quadrature, slab_sum_integrals, wedge_integrals
from .pipeline import PipelineReport, run_pipeline
from .solve import DbarSolveReport, solve_dbar_modes, truncation_convergence_study

__all__ = [
    "ChainReport", "DbarSolveReport", "Form01", "PipelineReport", "Quadrature", "Recipe", "TorusGrid",
    "build_test_form", "slab_sum_integrals", "correction_chain", "form_norm", "geometry_eval",
    "wedge_integrals", "run_pipeline", "solve_dbar_modes", "support_decay_report",
    "truncation_convergence_study",
]

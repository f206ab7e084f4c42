"""End-to-end run: build f̃, check the weighted estimates, solve, correct, and
measure what is left outside the support band."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from ..bundle import (
    Character,
    char_inverse,
    neighborhood_vanishing_certificate,
    neighborhood_vanishing_check,
    thm_assumption_check,
)
from ..group import GroupParams
from .chain import correction_chain, support_decay_report
from .forms import Recipe, TorusGrid, build_test_form, form_equivariance_residual
from .integrals import Quadrature, slab_sum_integrals, wedge_integrals
from .solve import solve_dbar_modes, truncation_convergence_study

NEIGHBORHOOD_N_MAX = 50


@dataclass
class PipelineReport:
    recipe: str
    input_weighted_l2: float
    input_equivariance: float
    assumption: dict
    neighborhood: dict
    slab_sum: dict
    wedge: dict
    solve: dict
    chain: dict
    support_decay: float
    round_trip: float | None
    truncation: dict | None
    tol: float
    checks: dict = field(default_factory=dict)
    g_tilde: object = field(default=None, repr=False)  # ModeSection; not serialized

    @property
    def residuals(self) -> dict:
        return {
            "dbar": self.solve["dbar_residual_rel"],
            "equivariance": self.chain["equivariance_residual"],
            "support_decay": self.support_decay,
            "constancy": self.chain["constancy_violation"],
            "holomorphy": self.chain["holomorphy_residual"],
        }

    @property
    def passed(self) -> bool:
        return all(self.checks.values())

    def as_dict(self) -> dict:
        return {
            "recipe": self.recipe,
            "input_weighted_l2": self.input_weighted_l2,
            "input_equivariance": self.input_equivariance,
            "assumption": self.assumption,
            "neighborhood": self.neighborhood,
            "slab_sum": self.slab_sum,
            "wedge": self.wedge,
            "solve": self.solve,
            "chain": self.chain,
            "support_decay": self.support_decay,
            "round_trip_sup": self.round_trip,
            "truncation": self.truncation,
            "residuals": self.residuals,
            "tol": self.tol,
            "checks": self.checks,
            "passed": self.passed,
        }


def _neighborhood(theta2, q) -> dict:
    """E|_W against the normal bundles N_{W±} ≅ F_C^{∓1}, F_C the character of η."""
    E = Character(Fraction(0), theta2)
    F_C = Character(Fraction(0), q)
    out = {}
    for name, N in (("W+", char_inverse(F_C)), ("W-", F_C)):
        entry = {"scan_n_max": NEIGHBORHOOD_N_MAX, "scan": neighborhood_vanishing_check(E, N, NEIGHBORHOOD_N_MAX)}
        if E.exact and N.exact:
            holds, first = neighborhood_vanishing_certificate(E, N)
            entry.update(certified=holds, first_failure=first)
        out[name] = entry
    return out


def run_pipeline(
    params: GroupParams,
    theta1=Fraction(0),
    theta2=Fraction(1, 3),
    recipe: Recipe | None = None,
    grid: TorusGrid | None = None,
    trunc: int = 32,
    tol: float = 1e-6,
    quad: Quadrature | None = None,
    study: tuple[int, ...] | None = (8, 16, 32),
    n_box: int = 1000,
    chain_tol: float = 1e-8,
) -> PipelineReport:
    """Run every stage; ResonantObstruction propagates with the offending mode."""
    recipe = recipe or Recipe()
    grid = grid or TorusGrid()
    f = build_test_form(params, theta1, theta2, recipe, grid)
    assumption = thm_assumption_check(params, theta1, theta2, n_box)
    slab = slab_sum_integrals(f, quad=quad)
    wdg = wedge_integrals(f, quad=quad)
    solved = solve_dbar_modes(f, trunc, tol)
    chain = correction_chain(solved.g, f.constants, tol=chain_tol)
    decay = support_decay_report(chain.g_tilde, f.K)
    round_trip = None
    if f.g0 is not None:
        B, Vv, Y, X = grid.mesh()
        round_trip = float(np.abs(chain.g_tilde() - f.g0(X, Y, Vv, B)).max())
    truncation = None
    if study and recipe.kind != "zero":
        truncation = truncation_convergence_study(f, [t for t in study if t + 1 <= min(grid.kx, grid.ky)])
    checks = {
        "dbar": solved.residual_rel < tol,
        "equivariance": chain.equivariance_residual < max(tol, chain_tol),
        "support_decay": decay < tol,
        "chain_not_flagged": not chain.flagged,
        "slab_sum": slab.holds,
        "wedge": wdg.holds(),
    }
    if round_trip is not None:
        checks["round_trip"] = round_trip < tol
    rep = PipelineReport(
        recipe.kind,
        f.weighted_l2(),
        form_equivariance_residual(f),
        assumption.as_dict(),
        _neighborhood(theta2, params.q),
        slab.as_dict(),
        wdg.as_dict(),
        solved.as_dict(),
        chain.as_dict(),
        decay,
        round_trip,
        None if truncation is None else truncation.as_dict(),
        tol,
        checks,
        chain.g_tilde,
    )
    for name, value in rep.residuals.items():
        if not (math.isfinite(value) and value >= 0):
            raise ArithmeticError(f"residual {name} is not a finite nonnegative number: {value}")
    return rep

"""Computable optimality residuals at candidate points.

A feasible point is critical when it solves its own linearized subproblem,
so the criticality residual is the gap between the shifted objective at the
point and the subproblem optimum.  The KKT residuals test the multiplier
form of the same condition; the generalized residual does the analogous
comparison for the penalized subproblem at (possibly infeasible) points.
All residuals are computed for one supplied subgradient of the concave
objective part; oracles return single elements, never subdifferential sets.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import inner
from .cones import ConeElement, dist_to_neg_cone, inner as cone_inner, project_pos
from .errors import InfeasibleStart, SubproblemInfeasible
from .subproblem import build_constrained, build_penalized, linearize_constraint


@dataclass
class KktResiduals:
    stationarity: float
    complementarity: float
    dual_feasibility: float

    def __iter__(self):
        return iter((self.stationarity, self.complementarity,
                     self.dual_feasibility))


@dataclass
class CriticalityCertificate:
    x: np.ndarray
    v: np.ndarray
    subproblem_gap: float
    kkt: KktResiduals | None
    slater: inner.SlaterProbe | None


def infeasibility(problem, x) -> float:
    """Distance from F(x) to the negated cone: zero exactly on feasible points."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    return dist_to_neg_cone(problem.constraint.value(x))


def criticality_residual(problem, x, v=None, *, tol=1e-9, tol_feas=1e-8,
                         max_cuts=5000) -> float:
    """Gap between x and the optimum of its own linearized subproblem.

    Nonnegative up to solver tolerance; at or below tolerance the point is
    critical for the supplied subgradient choice.
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if infeasibility(problem, x) > 10.0 * tol_feas:
        raise InfeasibleStart("criticality residual needs a feasible point")
    if v is None:
        v = problem.objective.h0.subgrad(x)
    spec = build_constrained(problem, x, v)
    rep = inner.solve_convex(spec, tol=tol, tol_feas=tol_feas,
                             max_cuts=max_cuts, feasible_hint=x)
    if rep.status == inner.INFEASIBLE:
        raise SubproblemInfeasible(
            "linearized subproblem infeasible at a feasible point")
    return float(problem.objective.g0.value(x) - rep.objective_value)


def generalized_criticality_residual(problem, x, tau, v=None, *, tol=1e-9,
                                     max_cuts=5000) -> float:
    """Gap between (x, minimal slack) and the penalized subproblem optimum.

    Defined at infeasible points as well; at or below tolerance the point is
    generalized-critical for penalty tau times the cone identity.
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if v is None:
        v = problem.objective.h0.subgrad(x)
    spec = build_penalized(problem, x, v, tau)
    rep = inner.solve_convex(spec, tol=tol, max_cuts=max_cuts,
                             feasible_hint=x)
    value_at_x = spec.objective.value(x)
    return float(value_at_x - rep.objective_value)


def kkt_residual(problem, x, v, lam: ConeElement) -> KktResiduals:
    """Multiplier-form residuals at (x, lam).

    stationarity: distance from v - (subgradient of g0) - (derivative of
    <lam, F>) to the normal cone of the box at x, measured coordinatewise
    (affine rows of the set are not modeled here).
    complementarity: |<lam, F(x)>|.
    dual feasibility: distance from lam to the cone.
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    v = np.atleast_1d(np.asarray(v, dtype=float))
    g0_sub = problem.objective.g0.subgrad(x)
    cmap = problem.constraint

    # Split lam into cone part (used for the derivative, keeping the pairing
    # convex) and report the residual of the split as dual infeasibility.
    lam_neg_part = project_pos(-lam)
    dual_feas = lam_neg_part.norm()
    lam_pos = lam + lam_neg_part

    d_pair = np.zeros(x.size)
    for k, (leaf_val, leaf) in enumerate(zip(lam_pos.blocks,
                                             cmap.cone.leaves())):
        if leaf_val.ndim == 2:
            w, vecs = np.linalg.eigh(leaf_val)
            for idx in np.nonzero(w > 1e-14 * (1.0 + abs(w[-1])))[0]:
                d_pair += w[idx] * cmap.G.quad_form_subgrad(x, k, vecs[:, idx])
        else:
            for idx in np.nonzero(leaf_val > 0.0)[0]:
                u = np.zeros(leaf_val.size)
                u[idx] = 1.0
                d_pair += leaf_val[idx] * cmap.G.quad_form_subgrad(x, k, u)
    d_pair -= cmap.H.derivative(x).pair(lam_pos)

    r = v - g0_sub - d_pair
    fs = problem.feasible_set
    res = np.empty(x.size)
    for k in range(x.size):
        at_hi = x[k] >= fs.hi[k] - 1e-9 * (1.0 + abs(fs.hi[k]))
        at_lo = x[k] <= fs.lo[k] + 1e-9 * (1.0 + abs(fs.lo[k]))
        if at_hi and at_lo:
            res[k] = 0.0
        elif at_hi:
            res[k] = max(0.0, -r[k])
        elif at_lo:
            res[k] = max(0.0, r[k])
        else:
            res[k] = abs(r[k])
    stationarity = float(np.linalg.norm(res))

    fval = cmap.value(x)
    complementarity = abs(cone_inner(lam, fval))
    return KktResiduals(stationarity, complementarity, dual_feas)


def certify(problem, x, v=None, lam=None, tau=None, *, tol=1e-9,
            tol_feas=1e-8, probe_slater=True) -> CriticalityCertificate:
    """Assemble the certificate a solver run hands to a reviewer."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if v is None:
        v = problem.objective.h0.subgrad(x)
    gap = criticality_residual(problem, x, v, tol=tol, tol_feas=tol_feas)
    kkt = kkt_residual(problem, x, v, lam) if lam is not None else None
    probe = None
    if probe_slater:
        lin = linearize_constraint(problem, x)
        probe = inner.slater_probe(lin, problem.feasible_set, tol=tol_feas)
    return CriticalityCertificate(x, v, gap, kkt, probe)

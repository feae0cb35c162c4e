"""Entanglement measures of bipartite states (all values in bits)."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from . import sdp
from .operators import (
    DEFAULT_RANK_TOL,
    HermitianOperator,
    identity,
    numerical_rank,
    partial_transpose,
    support_projector,
    trace_norm,
)


@dataclass
class MeasureReport:
    """Result of a measure evaluation.

    ``raw`` is the optimum of the defining program before taking the
    logarithm; ``primal_value``/``dual_value`` are the two certified bounds on
    ``raw`` (from one solve and its audited dual, or from two paired programs).
    """

    measure: str
    value: float
    raw: float
    primal_value: float
    dual_value: float
    gap: float
    status: str = sdp.OPTIMAL
    witness: dict[str, HermitianOperator] = field(default_factory=dict)
    solver: list[dict] = field(default_factory=list)
    rank: int | None = None
    lower_bound: bool = False

    @property
    def relative_gap(self) -> float:
        return self.gap / max(1.0, abs(self.primal_value))

    def to_dict(self) -> dict[str, Any]:
        return {
            "measure": self.measure,
            "value": self.value,
            "raw": self.raw,
            "primal_value": self.primal_value,
            "dual_value": self.dual_value,
            "gap": self.gap,
            "status": self.status,
            "rank": self.rank,
            "lower_bound": self.lower_bound,
            "solver": self.solver,
        }


def _require_cut(rho: HermitianOperator) -> None:
    if not rho.layout.b_side:
        raise ValueError("operator layout has no B side; set b_side to define the cut")
    if set(rho.layout.b_side) == set(rho.labels):
        raise ValueError("operator layout has no A side")


def run(problem: sdp.SdpProblem, **opts) -> sdp.SdpSolution:
    """Solve and raise :class:`sdp.SolverError` unless the result is optimal."""
    sol = sdp.solve(problem, **opts)
    if not sol.optimal:
        raise sdp.SolverError(
            f"{problem.name}: solver ended with status {sol.status} "
            f"(rel. gap {sol.relative_gap:.2e}, infeasibility {sol.primal_infeasibility:.2e})",
            sol,
        )
    return sol


def _log2(x: float) -> float:
    return math.log2(x) if x > 0 else -math.inf


def _witness(prefix: str, sol: sdp.SdpSolution) -> dict[str, HermitianOperator]:
    return {f"{prefix}.{k}": v for k, v in sol.variable_values.items()}


def _report_single(name: str, sol: sdp.SdpSolution, value: float, prefix: str, **extra) -> MeasureReport:
    return MeasureReport(
        measure=name,
        value=value,
        raw=sol.primal_value,
        primal_value=sol.primal_value,
        dual_value=sol.dual_value,
        gap=sol.gap,
        witness=_witness(prefix, sol),
        solver=[sol.summary()],
        **extra,
    )


def _report_pair(name, value, raw, p_sol, d_sol, p_prefix, d_prefix, **extra) -> MeasureReport:
    return MeasureReport(
        measure=name,
        value=value,
        raw=raw,
        primal_value=p_sol.primal_value,
        dual_value=d_sol.primal_value,
        gap=abs(p_sol.primal_value - d_sol.primal_value),
        witness={**_witness(p_prefix, p_sol), **_witness(d_prefix, d_sol)},
        solver=[p_sol.summary(), d_sol.summary()],
        **extra,
    )


# -- membership --------------------------------------------------------------------


def is_ppt(rho: HermitianOperator, tol: float = 1e-9) -> bool:
    _require_cut(rho)
    return partial_transpose(rho).min_eigenvalue() >= -tol


def is_ppt_prime(sigma: HermitianOperator, tol: float = 1e-9) -> bool:
    """``sigma ⪰ 0`` and ``||T_B sigma||_1 <= 1`` (both up to ``tol``)."""
    _require_cut(sigma)
    return sigma.min_eigenvalue() >= -tol and trace_norm(partial_transpose(sigma)) <= 1 + tol


# -- logarithmic negativity ------------------------------------------------------------


def log_negativity_primal(rho: HermitianOperator) -> sdp.SdpProblem:
    """``sup Tr[R rho]`` s.t. ``-I ⪯ T_B R ⪯ I``."""
    p = sdp.SdpProblem("log-negativity-primal")
    r = p.variable("R", rho.layout)
    p.geq(r.pt(), -1.0)
    p.geq(1.0, r.pt())
    p.maximize(r.inner(rho))
    return p


def log_negativity_dual(rho: HermitianOperator) -> sdp.SdpProblem:
    """``inf Tr[K + L]`` s.t. ``T_B(K - L) = rho``, ``K, L ⪰ 0``."""
    p = sdp.SdpProblem("log-negativity-dual")
    k = p.variable("K", rho.layout, psd=True)
    l_ = p.variable("L", rho.layout, psd=True)
    p.equal((k - l_).pt(), rho)
    p.minimize(k.trace() + l_.trace())
    return p


def log_negativity_state(rho: HermitianOperator, cross_check: bool = True, **opts) -> MeasureReport:
    """``log2 ||T_B rho||_1`` from the spectrum, optionally cross-checked by SDP."""
    _require_cut(rho)
    raw = trace_norm(partial_transpose(rho))
    value = _log2(raw)
    if not cross_check:
        return MeasureReport("log-negativity", value, raw, raw, raw, 0.0)
    ps = run(log_negativity_primal(rho), **opts)
    ds = run(log_negativity_dual(rho), **opts)
    report = _report_pair("log-negativity", value, raw, ps, ds, "primal", "dual")
    tol = 10 * opts.get("gap_tol", sdp.GAP_TOL) * max(1.0, raw)
    if abs(ps.primal_value - raw) > tol + 1e-7 or abs(ds.primal_value - raw) > tol + 1e-7:
        raise sdp.SolverError(
            f"log-negativity SDPs ({ps.primal_value}, {ds.primal_value}) disagree with spectrum ({raw})"
        )
    return report


# -- max-Rains ---------------------------------------------------------------------------


def max_rains_problem(rho: HermitianOperator) -> sdp.SdpProblem:
    """``min Tr[C + D]`` s.t. ``T_B(C - D) ⪰ rho``, ``C, D ⪰ 0``."""
    p = sdp.SdpProblem("max-rains-state")
    c = p.variable("C", rho.layout, psd=True)
    d = p.variable("D", rho.layout, psd=True)
    p.geq((c - d).pt(), rho)
    p.minimize(c.trace() + d.trace())
    return p


def max_rains_dual_problem(rho: HermitianOperator) -> sdp.SdpProblem:
    """``sup Tr[R rho]`` s.t. ``R ⪰ 0``, ``-I ⪯ T_B R ⪯ I``."""
    p = sdp.SdpProblem("max-rains-state-dual")
    r = p.variable("R", rho.layout, psd=True)
    p.geq(r.pt(), -1.0)
    p.geq(1.0, r.pt())
    p.maximize(r.inner(rho))
    return p


def max_rains_state(rho: HermitianOperator, cross_check: bool = True, **opts) -> MeasureReport:
    _require_cut(rho)
    ps = run(max_rains_problem(rho), **opts)
    raw = ps.primal_value
    if not cross_check:
        return _report_single("max-rains", ps, _log2(raw), "primal")
    ds = run(max_rains_dual_problem(rho), **opts)
    return _report_pair("max-rains", _log2(raw), raw, ps, ds, "primal", "dual")


# -- kappa-entanglement -------------------------------------------------------------------


def kappa_problem(rho: HermitianOperator) -> sdp.SdpProblem:
    """``min Tr S`` s.t. ``-T_B S ⪯ T_B rho ⪯ T_B S``, ``S ⪰ 0``."""
    p = sdp.SdpProblem("kappa-state")
    s = p.variable("S", rho.layout, psd=True)
    rho_pt = partial_transpose(rho)
    p.geq(s.pt(), rho_pt)
    p.geq(rho_pt, -s.pt())
    p.minimize(s.trace())
    return p


def kappa_entanglement_state(rho: HermitianOperator, **opts) -> MeasureReport:
    _require_cut(rho)
    sol = run(kappa_problem(rho), **opts)
    return _report_single("kappa-entanglement", sol, _log2(sol.primal_value), "kappa")


# -- min-Rains and one-shot exact distillation ---------------------------------------------


def _support_norm_problem(rho, rank_tol, cap: bool, name: str) -> tuple[sdp.SdpProblem, int]:
    proj = support_projector(rho, rank_tol)
    p = sdp.SdpProblem(name)
    r = p.variable("R", rho.layout)
    p.geq(r, proj)
    if cap:
        p.geq(identity(rho.layout), r)
    t = sdp.inf_norm_epigraph(p, r.pt())
    p.minimize(t)
    return p, numerical_rank(rho, rank_tol)


def min_rains_problem(rho: HermitianOperator, rank_tol: float = DEFAULT_RANK_TOL) -> sdp.SdpProblem:
    """``inf ||T_B R||_inf`` s.t. ``P ⪯ R`` with ``P`` the support projector of ``rho``."""
    return _support_norm_problem(rho, rank_tol, False, "min-rains-state")[0]


def w0_problem(rho: HermitianOperator, rank_tol: float = DEFAULT_RANK_TOL) -> sdp.SdpProblem:
    """``inf ||T_B R||_inf`` s.t. ``P ⪯ R ⪯ I``."""
    return _support_norm_problem(rho, rank_tol, True, "w0-state")[0]


def min_rains_state(rho: HermitianOperator, rank_tol: float = DEFAULT_RANK_TOL, **opts) -> MeasureReport:
    """``E_M = -log2 M`` (reports the numerical rank of the support used)."""
    _require_cut(rho)
    p, rank = _support_norm_problem(rho, rank_tol, False, "min-rains-state")
    sol = run(p, **opts)
    return _report_single("min-rains", sol, -_log2(sol.primal_value), "min_rains", rank=rank)


def one_shot_exact_distillable(rho: HermitianOperator, rank_tol: float = DEFAULT_RANK_TOL, **opts) -> MeasureReport:
    """``-log2 W0``, a lower bound companion of :func:`min_rains_state`."""
    _require_cut(rho)
    p, rank = _support_norm_problem(rho, rank_tol, True, "w0-state")
    sol = run(p, **opts)
    return _report_single("w0", sol, -_log2(sol.primal_value), "w0", rank=rank)


__all__ = [
    "MeasureReport",
    "is_ppt",
    "is_ppt_prime",
    "kappa_entanglement_state",
    "kappa_problem",
    "log_negativity_dual",
    "log_negativity_primal",
    "log_negativity_state",
    "max_rains_dual_problem",
    "max_rains_problem",
    "max_rains_state",
    "min_rains_problem",
    "min_rains_state",
    "one_shot_exact_distillable",
    "run",
    "w0_problem",
]

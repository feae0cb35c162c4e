"""Entanglement measures of bipartite channels (values in bits).

All programs act on the Choi operator ``J`` laid out as ``(S_A, A, B, S_B)``;
partial transposes act on ``{B, S_B}``.
"""

from __future__ import annotations

from typing import Callable

import numpy as np

from . import sdp
from .channels import A, B, S_A, S_B, BipartiteChannel, CPMap, apply, embed_point_to_point
from .operators import (
    DEFAULT_RANK_TOL,
    HermitianOperator,
    SystemLayout,
    partial_transpose,
    pure_state,
)
from .state_measures import (
    MeasureReport,
    _log2,
    _report_pair,
    _report_single,
    kappa_entanglement_state,
    max_rains_state,
    min_rains_state,
    run,
)

CUT = (B, S_B)


def _ref_layout(n: CPMap) -> SystemLayout:
    return n.choi.layout.without([A, B])


def _choi(n: CPMap) -> HermitianOperator:
    return n.choi


# -- logarithmic negativity --------------------------------------------------------------


def log_negativity_channel_dual(n: CPMap) -> sdp.SdpProblem:
    """``min ||Tr_AB[V + Y]||_inf`` s.t. ``T_{B S_B}(V - Y) = J``, ``V, Y ⪰ 0``."""
    j = _choi(n)
    p = sdp.SdpProblem("log-negativity-channel-dual")
    v = p.variable("V", j.layout, psd=True)
    y = p.variable("Y", j.layout, psd=True)
    p.equal((v - y).pt(CUT), j)
    t = sdp.inf_norm_epigraph(p, (v + y).ptrace([A, B]), psd=True)
    p.minimize(t)
    return p


def log_negativity_channel_primal(n: CPMap) -> sdp.SdpProblem:
    """``sup Tr[T_{B S_B}(J) R]`` s.t. ``-rho ⊗ I ⪯ R ⪯ rho ⊗ I``, ``rho ⪰ 0``, ``Tr rho <= 1``."""
    j = _choi(n)
    p = sdp.SdpProblem("log-negativity-channel-primal")
    rho = p.variable("rho", _ref_layout(n), psd=True)
    r = p.variable("R", j.layout)
    rho_i = rho.tensor_identity(j.layout)
    p.geq(rho_i, r)
    p.geq(r, -rho_i)
    p.geq(1.0, rho.trace())
    p.maximize(r.inner(partial_transpose(j, CUT)))
    return p


def log_negativity_channel(n: CPMap, cross_check: bool = True, **opts) -> MeasureReport:
    """Reference value from the equality-constrained program; the sup form cross-checks it."""
    ref = run(log_negativity_channel_dual(n), **opts)
    raw = ref.primal_value
    if not cross_check:
        return _report_single("log-negativity-channel", ref, _log2(raw), "dual")
    other = run(log_negativity_channel_primal(n), **opts)
    return _report_pair("log-negativity-channel", _log2(raw), raw, ref, other, "dual", "primal")


# -- max-Rains ---------------------------------------------------------------------------


def max_rains_channel_problem(n: CPMap) -> sdp.SdpProblem:
    """``min ||Tr_AB[V + Y]||_inf`` s.t. ``T_{B S_B}(V - Y) ⪰ J``, ``V, Y ⪰ 0``."""
    j = _choi(n)
    p = sdp.SdpProblem("max-rains-channel")
    v = p.variable("V", j.layout, psd=True)
    y = p.variable("Y", j.layout, psd=True)
    p.geq((v - y).pt(CUT), j)
    t = sdp.inf_norm_epigraph(p, (v + y).ptrace([A, B]), psd=True)
    p.minimize(t)
    return p


def max_rains_channel_dual_problem(n: CPMap) -> sdp.SdpProblem:
    """``sup Tr[J X]`` s.t. ``-rho ⊗ I ⪯ T_{B S_B}(X) ⪯ rho ⊗ I``, ``X, rho ⪰ 0``, ``Tr rho = 1``."""
    j = _choi(n)
    p = sdp.SdpProblem("max-rains-channel-dual")
    rho = p.variable("rho", _ref_layout(n), psd=True)
    x = p.variable("X", j.layout, psd=True)
    rho_i = rho.tensor_identity(j.layout)
    p.geq(rho_i, x.pt(CUT))
    p.geq(x.pt(CUT), -rho_i)
    p.equal(rho.trace(), 1.0)
    p.maximize(x.inner(j))
    return p


def max_rains_divergence_problem(n: CPMap) -> sdp.SdpProblem:
    """Distance to maps with non-positive log-negativity, over CP ``M`` with ``J^M ⪰ J^N``.

    ``min ||Tr_AB[V + Y]||_inf`` s.t. ``T_{B S_B}(V - Y) = J^M``, ``J^M ⪰ J^N``,
    ``V, Y ⪰ 0``: the log-negativity of ``M`` is evaluated through its own
    equality-constrained program.
    """
    j = _choi(n)
    p = sdp.SdpProblem("max-rains-channel-divergence")
    jm = p.variable("J_M", j.layout, psd=True)
    v = p.variable("V", j.layout, psd=True)
    y = p.variable("Y", j.layout, psd=True)
    p.equal((v - y).pt(CUT), jm)
    p.geq(jm, j)
    t = sdp.inf_norm_epigraph(p, (v + y).ptrace([A, B]), psd=True)
    p.minimize(t)
    return p


def max_rains_channel(n: CPMap, cross_check: bool = True, **opts) -> MeasureReport:
    ref = run(max_rains_channel_problem(n), **opts)
    raw = ref.primal_value
    if not cross_check:
        return _report_single("max-rains-channel", ref, _log2(raw), "primal")
    other = run(max_rains_channel_dual_problem(n), **opts)
    return _report_pair("max-rains-channel", _log2(raw), raw, ref, other, "primal", "dual")


def max_rains_channel_divergence(n: CPMap, **opts) -> MeasureReport:
    """The same quantity through its divergence form (checks the SDP reformulation)."""
    sol = run(max_rains_divergence_problem(n), **opts)
    return _report_single("max-rains-channel-divergence", sol, _log2(sol.primal_value), "divergence")


# -- kappa-entanglement ---------------------------------------------------------------------


def kappa_channel_problem(n: CPMap) -> sdp.SdpProblem:
    """``min ||Tr_AB Q||_inf`` s.t. ``-T(Q) ⪯ T(J) ⪯ T(Q)``, ``Q ⪰ 0`` with ``T = T_{B S_B}``."""
    j = _choi(n)
    p = sdp.SdpProblem("kappa-channel")
    q = p.variable("Q", j.layout, psd=True)
    j_pt = partial_transpose(j, CUT)
    p.geq(q.pt(CUT), j_pt)
    p.geq(j_pt, -q.pt(CUT))
    t = sdp.inf_norm_epigraph(p, q.ptrace([A, B]), psd=True)
    p.minimize(t)
    return p


def kappa_point_to_point_problem(choi_rb: HermitianOperator) -> sdp.SdpProblem:
    """Single-sender form on the Choi operator ``(R, B)`` of a channel ``A -> B``."""
    if len(choi_rb.dims) != 2:
        raise ValueError("point-to-point Choi operator must have two factors (R, B)")
    r_lab, b_lab = choi_rb.labels
    p = sdp.SdpProblem("kappa-point-to-point")
    q = p.variable("Q", choi_rb.layout, psd=True)
    j_pt = partial_transpose(choi_rb, [b_lab])
    p.geq(q.pt([b_lab]), j_pt)
    p.geq(j_pt, -q.pt([b_lab]))
    t = sdp.inf_norm_epigraph(p, q.ptrace([b_lab]), psd=True)
    p.minimize(t)
    return p


def kappa_entanglement_channel(n: CPMap, **opts) -> MeasureReport:
    sol = run(kappa_channel_problem(n), **opts)
    return _report_single("kappa-entanglement-channel", sol, _log2(sol.primal_value), "kappa")


def kappa_entanglement_point_to_point(choi_rb: HermitianOperator, **opts) -> MeasureReport:
    sol = run(kappa_point_to_point_problem(choi_rb), **opts)
    return _report_single("kappa-entanglement-point-to-point", sol, _log2(sol.primal_value), "kappa")


# -- min-Rains lower bound -----------------------------------------------------------------


def _as_point_to_point(m) -> BipartiteChannel:
    if isinstance(m, CPMap):
        if m.in_dims[1] != 1 or m.out_dims[0] != 1:
            raise ValueError("expected a point-to-point channel (trivial B' and A)")
        return m
    return embed_point_to_point(m)


def min_rains_channel_lower(
    m,
    samples: int = 8,
    restarts: int = 8,
    seed: int | None = 0,
    rank_tol: float = DEFAULT_RANK_TOL,
    step: float = 0.3,
    progress: Callable[[int, float], None] | None = None,
    **opts,
) -> MeasureReport:
    """Lower bound on ``sup_psi E_M(N(psi_RA))`` over pure inputs.

    Candidates are the maximally entangled input, ``samples`` random pure
    inputs, then ``restarts`` random perturbations of the best input so far.
    Candidates are drawn from a single stream, so raising ``restarts`` never
    lowers the result.  The report is always flagged as a lower bound.
    """
    if samples < 1:
        raise ValueError("samples must be at least 1")
    if restarts < 0:
        raise ValueError("restarts must be non-negative")
    n = _as_point_to_point(m)
    d = n.in_dims[0]
    layout = SystemLayout((("R", d), ("A'", d)), frozenset())
    rng = np.random.default_rng(seed)

    def evaluate(vec: np.ndarray) -> MeasureReport:
        psi = pure_state(vec, layout)
        omega = apply(n, psi)
        return min_rains_state(omega, rank_tol=rank_tol, **opts)

    best_vec = np.eye(d).reshape(-1).astype(complex)
    best = evaluate(best_vec)
    count = 1
    if progress:
        progress(count, best.value)
    for k in range(samples + restarts):
        g = rng.normal(size=d * d) + 1j * rng.normal(size=d * d)
        if k < samples:
            cand = g
        else:
            cand = best_vec / np.linalg.norm(best_vec) + step * g / np.linalg.norm(g)
        rep = evaluate(cand)
        count += 1
        if rep.value > best.value:
            best, best_vec = rep, cand
        if progress:
            progress(count, best.value)
    best.measure = "min-rains-channel-lower-bound"
    best.lower_bound = True
    return best


# -- amortization -----------------------------------------------------------------------------


def _amortized(n, rho, measure, inputs, opts) -> float:
    a_in, b_in = inputs
    if b_in in rho.layout.labels and b_in not in rho.layout.b_side:
        raise ValueError(f"input {b_in!r} must be on the B side of the state's cut")
    if a_in in rho.layout.b_side:
        raise ValueError(f"input {a_in!r} must be on the A side of the state's cut")
    omega = apply(n, rho, inputs=inputs)
    after = measure(omega, **opts).value
    before = measure(rho, **opts).value
    return after - before


def amortized_kappa_gap(n: CPMap, rho: HermitianOperator, inputs=("A'", "B'"), **opts) -> float:
    """``E_κ(L_A A; B L_B)_ω - E_κ(L_A A'; B' L_B)_ρ`` with ``ω = N(ρ)``."""
    return _amortized(n, rho, kappa_entanglement_state, inputs, opts)


def amortized_max_rains_gap(n: CPMap, rho: HermitianOperator, inputs=("A'", "B'"), **opts) -> float:
    """``R_max(L_A A; B L_B)_ω - R_max(L_A A'; B' L_B)_ρ`` with ``ω = N(ρ)``."""
    opts.setdefault("cross_check", False)
    return _amortized(n, rho, max_rains_state, inputs, opts)


__all__ = [
    "amortized_kappa_gap",
    "amortized_max_rains_gap",
    "kappa_channel_problem",
    "kappa_entanglement_channel",
    "kappa_entanglement_point_to_point",
    "kappa_point_to_point_problem",
    "log_negativity_channel",
    "log_negativity_channel_dual",
    "log_negativity_channel_primal",
    "max_rains_channel",
    "max_rains_channel_divergence",
    "max_rains_channel_dual_problem",
    "max_rains_channel_problem",
    "max_rains_divergence_problem",
    "min_rains_channel_lower",
]

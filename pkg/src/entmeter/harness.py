"""Randomized property suites with slack accounting and line-delimited reports.

Each property draws its inputs from a per-trial seed derived from the suite
seed, evaluates one or more checks ``lhs <= rhs + slack`` (or
``|lhs - rhs| <= slack``) and records the worst margin.  A failing trial
keeps its seed and a serialized copy of its inputs so it can be re-run.
"""

from __future__ import annotations

import json
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Iterable

import numpy as np

from . import channel_measures as cm
from . import divergences as dv
from . import state_measures as sm
from .channels import (
    BipartiteChannel,
    apply,
    apply_matrix,
    choi_from_kraus,
    compose,
    embed_point_to_point,
    is_cpptp,
    point_to_point_choi,
    ppt_superchannel,
    random_channel,
    random_cpptp,
    replacer,
)
from .generators import as_layout, random_ppt_state, random_state
from .operators import (
    DensityOperator,
    HermitianOperator,
    maximally_entangled,
    merge,
    split,
    tensor,
)
from .sdp import SolverError

DEFAULT_SLACK = 1e-5


@dataclass
class SuiteConfig:
    seed: int = 0
    trials: int = 5
    dims: dict[str, int] = field(default_factory=dict)
    slack: float | None = None
    measures: tuple[str, ...] = ("en", "rmax", "kappa", "emin", "w0")
    suites: tuple[str, ...] = ("all",)
    workers: int = 1
    cpptp_sampler: Callable | None = None

    def __post_init__(self):
        if self.trials < 1:
            raise ValueError("trials must be at least 1")
        if self.slack is not None and self.slack <= 0:
            raise ValueError("slack must be positive")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")

    def dim(self, key: str, default: int = 2) -> int:
        return int(self.dims.get(key, default))


@dataclass
class TrialFailure:
    trial: int
    seed: int
    message: str
    margin: float
    witness: dict

    def to_dict(self) -> dict:
        return {"trial": self.trial, "seed": self.seed, "message": self.message,
                "margin": self.margin, "witness": self.witness}


@dataclass
class PropertyResult:
    name: str
    anchor: str
    trials: int = 0
    failures: list[TrialFailure] = field(default_factory=list)
    worst_slack: float = math.inf
    seconds: float = 0.0

    @property
    def passed(self) -> bool:
        return not self.failures

    def to_dict(self) -> dict:
        return {
            "property": self.name,
            "anchor": self.anchor,
            "trials": self.trials,
            "failures": len(self.failures),
            "worst_slack": self.worst_slack,
            "seconds": round(self.seconds, 3),
            "failed_trials": [f.to_dict() for f in self.failures],
        }


@dataclass
class SuiteReport:
    config: SuiteConfig
    results: list[PropertyResult]

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.results)

    @property
    def total_failures(self) -> int:
        return sum(len(r.failures) for r in self.results)

    def lines(self) -> list[str]:
        return [json.dumps(r.to_dict(), default=_json_default) for r in self.results]

    def write(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            for line in self.lines():
                fh.write(line + "\n")


def _json_default(x):
    if isinstance(x, (np.floating, np.integer)):
        return x.item()
    if isinstance(x, float) and not math.isfinite(x):
        return str(x)
    raise TypeError(type(x).__name__)


def serialize(x) -> object:
    """JSON-friendly copy of an operator, channel or array (complex as [re, im])."""
    if isinstance(x, BipartiteChannel):
        return {"choi": serialize(x.choi.matrix), "in": list(x.in_dims), "out": list(x.out_dims)}
    if isinstance(x, HermitianOperator):
        return {"layout": [list(f) for f in x.layout.factors], "b_side": sorted(x.layout.b_side),
                "matrix": serialize(x.matrix)}
    if isinstance(x, np.ndarray):
        return [np.round(x.real, 15).tolist(), np.round(x.imag, 15).tolist()]
    return x


# -- checks -------------------------------------------------------------------------------


class Trial:
    """Collects checks for a single trial."""

    def __init__(self, slack: float):
        self.slack = slack
        self.margins: list[tuple[float, str]] = []
        self.witness: dict = {}

    def keep(self, **items) -> None:
        self.witness.update({k: serialize(v) for k, v in items.items()})

    def leq(self, lhs: float, rhs: float, label: str, slack: float | None = None) -> None:
        s = self.slack if slack is None else slack
        self.margins.append((rhs + s - lhs, f"{label}: {lhs:.10g} <= {rhs:.10g} + {s:g}"))

    def close(self, lhs: float, rhs: float, label: str, slack: float | None = None) -> None:
        s = self.slack if slack is None else slack
        self.margins.append((s - abs(lhs - rhs), f"{label}: |{lhs:.10g} - {rhs:.10g}| <= {s:g}"))


@dataclass(frozen=True)
class Property:
    name: str
    anchor: str
    default_slack: float
    fn: Callable[[np.random.Generator, Trial, SuiteConfig], None]
    fixed_trials: int | None = None


def _cpptp(cfg: SuiteConfig, in_dims, out_dims, rng) -> BipartiteChannel:
    seed = int(rng.integers(2**63))
    if cfg.cpptp_sampler is not None:
        return cfg.cpptp_sampler(in_dims, out_dims, seed)
    return random_cpptp(in_dims, out_dims, seed=seed)


def _two(cfg, key="state"):
    d = cfg.dim(key)
    return as_layout((d, d))


def _rank(rng, d):
    return int(rng.integers(1, d + 1))


STATE_MEASURES = {
    "en": lambda r: sm.log_negativity_state(r, cross_check=False).value,
    "rmax": lambda r: sm.max_rains_state(r, cross_check=False).value,
    "kappa": lambda r: sm.kappa_entanglement_state(r).value,
    "emin": lambda r: sm.min_rains_state(r).value,
    "w0": lambda r: sm.one_shot_exact_distillable(r).value,
}

CHANNEL_MEASURES = {
    "en": lambda n: cm.log_negativity_channel(n, cross_check=False).value,
    "rmax": lambda n: cm.max_rains_channel(n, cross_check=False).value,
    "kappa": lambda n: cm.kappa_entanglement_channel(n).value,
}


def _channel_keys(cfg):
    return [k for k in cfg.measures if k in CHANNEL_MEASURES]


def _state_keys(cfg):
    return [k for k in cfg.measures if k in STATE_MEASURES]


# -- property bodies -------------------------------------------------------------------


def p_bell(rng, t: Trial, cfg, trial_index=0):
    d = 2 + trial_index % max(1, cfg.dim("bell", 4) - 1)
    phi = maximally_entangled(d)
    for key in _state_keys(cfg):
        t.close(STATE_MEASURES[key](phi), math.log2(d), f"{key}(Phi_{d})")


def p_faithful_states(rng, t: Trial, cfg, trial_index=0):
    rho = random_ppt_state(_two(cfg), seed=rng)
    t.keep(rho=rho)
    for key in _state_keys(cfg):
        t.leq(STATE_MEASURES[key](rho), 0.0, f"{key}(PPT state)")


def p_faithful_channels(rng, t: Trial, cfg, trial_index=0):
    d = cfg.dim("channel")
    n = _cpptp(cfg, (d, d), (d, d), rng)
    t.keep(channel=n)
    for key in _channel_keys(cfg):
        t.leq(CHANNEL_MEASURES[key](n), 0.0, f"{key}(C-PPT-P channel)")


def p_identity_channel(rng, t: Trial, cfg, trial_index=0):
    n = embed_point_to_point(point_to_point_choi(lambda x: x, 2, 2))
    for key in _channel_keys(cfg):
        t.close(CHANNEL_MEASURES[key](n), 1.0, f"{key}(identity qubit channel)")


def _rel(t: Trial, p: float, d: float, label: str):
    t.leq(abs(p - d), t.slack * max(1.0, abs(p)), label, slack=0.0)


def p_primal_dual_state(rng, t: Trial, cfg, trial_index=0):
    rho = random_state(_two(cfg), rank=_rank(rng, cfg.dim("state") ** 2), seed=rng)
    t.keep(rho=rho)
    ps = sm.run(sm.log_negativity_primal(rho))
    ds = sm.run(sm.log_negativity_dual(rho))
    _rel(t, ps.primal_value, ds.primal_value, "E_N state sup vs inf")


def p_primal_dual_channel(rng, t: Trial, cfg, trial_index=0):
    d = cfg.dim("channel")
    n = random_channel((d, d), seed=int(rng.integers(2**63)))
    t.keep(channel=n)
    r = cm.log_negativity_channel(n, cross_check=True)
    _rel(t, r.primal_value, r.dual_value, "E_N channel inf vs sup")


def p_rmax_forms(rng, t: Trial, cfg, trial_index=0):
    d = cfg.dim("channel")
    n = random_channel((d, d), seed=int(rng.integers(2**63)))
    t.keep(channel=n)
    a = cm.max_rains_channel(n, cross_check=False).raw
    b = cm.max_rains_channel_divergence(n).raw
    _rel(t, b, a, "R_max channel divergence form vs SDP form")


def p_ordering(rng, t: Trial, cfg, trial_index=0):
    rho = random_state(_two(cfg), rank=_rank(rng, cfg.dim("state") ** 2), seed=rng)
    t.keep(rho=rho)
    en = sm.log_negativity_state(rho, cross_check=False).value
    rm = sm.max_rains_state(rho, cross_check=False).value
    em = sm.min_rains_state(rho).value
    w0 = sm.one_shot_exact_distillable(rho).value
    t.leq(-rm, 0.0, "0 <= R_max")
    t.leq(rm, en, "R_max <= E_N")
    t.leq(w0, em, "-log2 W0 <= E_M")


def p_reduction(rng, t: Trial, cfg, trial_index=0):
    rho = random_state(_two(cfg), rank=_rank(rng, cfg.dim("state") ** 2), seed=rng)
    t.keep(rho=rho)
    n = replacer(rho, (2, 2))
    pairs = {
        "en": (lambda: sm.log_negativity_state(rho, cross_check=False).value,
               lambda: cm.log_negativity_channel(n, cross_check=False).value),
        "rmax": (lambda: sm.max_rains_state(rho, cross_check=False).value,
                 lambda: cm.max_rains_channel(n, cross_check=False).value),
        "kappa": (lambda: sm.kappa_entanglement_state(rho).value,
                  lambda: cm.kappa_entanglement_channel(n).value),
    }
    for key in _channel_keys(cfg):
        s_val, c_val = pairs[key]
        t.close(c_val(), s_val(), f"{key}(replacer) vs {key}(state)")


def _pair_state(rho, sigma):
    a = rho.relabel({"A": "A1", "B": "B1"})
    b = sigma.relabel({"A": "A2", "B": "B2"})
    return tensor(a, b)


def p_additivity(rng, t: Trial, cfg, trial_index=0):
    d = cfg.dim("state")
    rho = random_state(_two(cfg), rank=_rank(rng, d * d - 1), seed=rng)
    sigma = random_state(_two(cfg), rank=_rank(rng, d * d - 1), seed=rng)
    t.keep(rho=rho, sigma=sigma)
    joint = _pair_state(rho, sigma)
    if "kappa" in cfg.measures:
        t.close(sm.kappa_entanglement_state(joint).value,
                sm.kappa_entanglement_state(rho).value + sm.kappa_entanglement_state(sigma).value,
                "E_kappa additivity")
    if "emin" in cfg.measures:
        t.close(sm.min_rains_state(joint).value,
                sm.min_rains_state(rho).value + sm.min_rains_state(sigma).value,
                "E_M additivity")


def p_subadditivity(rng, t: Trial, cfg, trial_index=0):
    d = cfg.dim("channel")
    n1 = random_channel((d, d), seed=int(rng.integers(2**63)))
    n2 = random_channel((d, d), seed=int(rng.integers(2**63)))
    t.keep(n1=n1, n2=n2)
    r = lambda n: cm.max_rains_channel(n, cross_check=False).value
    t.leq(r(compose(n2, n1)), r(n1) + r(n2), "R_max(N2 o N1) <= R_max(N1) + R_max(N2)")


def p_superchannel(rng, t: Trial, cfg, trial_index=0):
    d = cfg.dim("channel")
    mem = cfg.dim("memory")
    m = random_channel((d, d), seed=int(rng.integers(2**63)))
    pre = _cpptp(cfg, (d, d), (mem * d, d * mem), rng)
    post = _cpptp(cfg, (mem * d, d * mem), (d, d), rng)
    t.keep(channel=m, pre=pre, post=post)
    theta = ppt_superchannel(pre, post, (mem, mem))
    out = theta(m)
    t.leq(-1.0 if is_cpptp(theta(random_cpptp((d, d), seed=int(rng.integers(2**63))))) else 1.0,
          0.0, "C-PPT-P closed under PPT superchannels", slack=0.0)
    for key in _channel_keys(cfg):
        f = CHANNEL_MEASURES[key]
        t.leq(f(out), f(m), f"{key}(Theta(M)) <= {key}(M)")


def _memory_layout(mem: int, d: int):
    return as_layout((mem, d, d, mem))


def p_amortization(rng, t: Trial, cfg, trial_index=0):
    d = cfg.dim("channel")
    mem = cfg.dim("memory")
    if rng.random() < 0.5:
        n = random_channel((d, d), seed=int(rng.integers(2**63)))
    else:
        n = random_cpptp((d, d), seed=int(rng.integers(2**63)))
    rho = random_state(_memory_layout(mem, d), rank=_rank(rng, (mem * d) ** 2), seed=rng)
    t.keep(channel=n, rho=rho)
    if "kappa" in cfg.measures:
        t.leq(cm.amortized_kappa_gap(n, rho), cm.kappa_entanglement_channel(n).value,
              "E_kappa amortization")
    if "rmax" in cfg.measures:
        t.leq(cm.amortized_max_rains_gap(n, rho), cm.max_rains_channel(n, cross_check=False).value,
              "R_max amortization")


def _apply_merged(ch, state, a_parts, b_parts, a_label, b_label, out_labels):
    """Apply ``ch`` to the merged factors ``a_parts`` and ``b_parts`` of ``state``."""
    x = merge(state, a_parts, a_label)
    x = merge(x, b_parts, b_label)
    return apply(ch, x, inputs=(a_label, b_label), outputs=out_labels, keep_trivial=True)


def p_chain(rng, t: Trial, cfg, trial_index=0):
    d = cfg.dim("channel")
    mem = cfg.dim("memory")
    n = random_channel((d, d), seed=int(rng.integers(2**63)))
    t.keep(channel=n)
    # round 1: a PPT preparation of L_A A' B' L_B
    state = random_ppt_state(_memory_layout(mem, d), seed=rng)
    state = state.relabel({"L_A": "LA", "L_B": "LB", "A'": "Ai", "B'": "Bi"})
    for k in range(2):
        state = apply(n, state, inputs=("Ai", "Bi"), outputs=("Ao", "Bo"), keep_trivial=True)
        if k == 0:
            p2 = _cpptp(cfg, (mem * d, d * mem), (mem * d, d * mem), rng)
            state = _apply_merged(p2, state, ["LA", "Ao"], ["Bo", "LB"], "PA", "PB", ("PA2", "PB2"))
            state = split(state, "PA2", [("LA", mem), ("Ai", d)])
            state = split(state, "PB2", [("Bi", d), ("LB", mem)])
    p3 = _cpptp(cfg, (mem * d, d * mem), (2, 2), rng)
    omega = _apply_merged(p3, state, ["LA", "Ao"], ["Bo", "LB"], "PA", "PB", ("A", "B"))
    omega = DensityOperator(omega.matrix, omega.layout, tol=1e-7)
    t.leq(sm.max_rains_state(omega, cross_check=False).value,
          2 * cm.max_rains_channel(n, cross_check=False).value, "R_max(omega) <= 2 R_max(N)")


def p_state_monotonicity(rng, t: Trial, cfg, trial_index=0):
    rho = random_state(_two(cfg), rank=_rank(rng, cfg.dim("state") ** 2), seed=rng)
    d = cfg.dim("state")
    ch = random_cpptp((d, d), seed=int(rng.integers(2**63)))
    t.keep(rho=rho, channel=ch)
    out = apply(ch, rho.relabel({"A": "A'", "B": "B'"}))
    for key in ("en", "rmax", "kappa"):
        if key in cfg.measures:
            t.leq(STATE_MEASURES[key](out), STATE_MEASURES[key](rho), f"{key} under C-PPT-P channel")


def _full_rank_pair(rng, d):
    return random_state((d,), seed=rng).matrix, random_state((d,), seed=rng).matrix


def p_divergences(rng, t: Trial, cfg, trial_index=0):
    d = cfg.dim("divergence", 4)
    rho, sigma = _full_rank_pair(rng, d)
    t.keep(rho=rho, sigma=sigma)
    n = random_channel((2, d // 2), seed=int(rng.integers(2**63)))
    nr, ns = apply_matrix(n, rho), apply_matrix(n, sigma)
    for a in (0.5, 2.0, 10.0):
        t.leq(dv.sandwiched_renyi(nr, ns, a).value, dv.sandwiched_renyi(rho, sigma, a).value,
              f"data processing alpha={a:g}", slack=1e-7)
    vals = [dv.sandwiched_renyi(rho, sigma, a).value for a in (0.5, 2.0, 64.0)]
    dmax = dv.max_relative_entropy(rho, sigma).value
    t.leq(vals[0], vals[1], "D_1/2 <= D_2", slack=1e-9)
    t.leq(vals[1], vals[2], "D_2 <= D_64", slack=1e-9)
    t.leq(vals[2], dmax, "D_64 <= D_max", slack=1e-6)
    big = dv.sandwiched_renyi(rho, sigma, 2.0**14).value
    t.leq(big, dmax, "D_(2^14) <= D_max", slack=1e-9)
    t.leq(dmax - big, 1e-3, "D_max - D_(2^14) < 1e-3", slack=0.0)
    rel = dv.relative_entropy(rho, sigma).value
    for a in (1 - 1e-4, 1 + 1e-4):
        t.leq(abs(dv.sandwiched_renyi(rho, sigma, a).value - rel), 1e-2, f"alpha={a} vs D", slack=0.0)


def _kraus_of(n: BipartiteChannel):
    w, v = np.linalg.eigh(n.choi.matrix)
    da_in, db_in = n.in_dims
    da, db = n.out_dims
    out = []
    for lam, vec in zip(w, v.T):
        if lam <= 1e-12:
            continue
        k = np.sqrt(lam) * vec.reshape(da_in, da, db, db_in).transpose(1, 2, 0, 3)
        out.append(k.reshape(da * db, da_in * db_in))
    return out


def p_channel_algebra(rng, t: Trial, cfg, trial_index=0):
    d = cfg.dim("channel")
    n = random_channel((d, d), seed=int(rng.integers(2**63)))
    t.keep(channel=n)
    rho = random_state(as_layout((2, d, d, 2)), seed=rng)
    kraus = _kraus_of(n)
    direct = sum(np.kron(np.kron(np.eye(2), k), np.eye(2)) @ rho.matrix
                 @ np.kron(np.kron(np.eye(2), k), np.eye(2)).conj().T for k in kraus)
    t.leq(float(np.max(np.abs(apply(n, rho).matrix - direct))), 0.0, "Choi application vs Kraus", slack=1e-9)
    n2 = random_channel((d, d), seed=int(rng.integers(2**63)))
    n3 = random_channel((d, d), seed=int(rng.integers(2**63)))
    a = compose(n3, compose(n2, n))
    b = compose(compose(n3, n2), n)
    t.leq(float(np.max(np.abs(a.matrix - b.matrix))), 0.0, "composition associativity", slack=1e-9)
    rebuilt = choi_from_kraus(kraus, (d, d), (d, d))
    t.leq(float(np.max(np.abs(rebuilt.matrix - n.matrix))), 0.0, "Kraus round trip", slack=1e-9)


PROPERTIES: dict[str, Property] = {
    p.name: p
    for p in [
        Property("bell", "maximally entangled states: every measure equals log2 d", 1e-6, p_bell, 3),
        Property("faithfulness-states", "PPT states have zero entanglement", 1e-6, p_faithful_states),
        Property("faithfulness-channels", "C-PPT-P channels have zero entanglement", 1e-6, p_faithful_channels),
        Property("identity-channel", "identity qubit channel carries one ebit", 1e-6, p_identity_channel, 1),
        Property("primal-dual-state", "E_N of states: sup and inf programs agree", 1e-6, p_primal_dual_state),
        Property("primal-dual-channel", "E_N of channels: inf and sup programs agree", 1e-6, p_primal_dual_channel),
        Property("rmax-forms", "R_max of channels: divergence form equals SDP form", 1e-6, p_rmax_forms),
        Property("ordering", "0 <= R_max <= E_N and -log2 W0 <= E_M", 1e-7, p_ordering),
        Property("reduction", "replacer channels reduce to their output state", 1e-6, p_reduction),
        Property("additivity", "E_kappa and E_M are additive on tensor products", 1e-5, p_additivity),
        Property("subadditivity", "R_max subadditive under serial composition", 1e-6, p_subadditivity),
        Property("superchannel", "measures monotone under PPT superchannels", 1e-6, p_superchannel),
        Property("amortization", "amortized gains bounded by the channel measure", 1e-5, p_amortization),
        Property("chain", "two uses of N yield at most 2 R_max(N)", 1e-5, p_chain),
        Property("state-monotonicity", "measures monotone under local product channels", 1e-6, p_state_monotonicity),
        Property("divergences", "data processing, alpha monotonicity and limits of D_alpha", 1e-7, p_divergences),
        Property("channel-algebra", "Choi application, composition and Kraus conversion agree", 1e-9, p_channel_algebra),
    ]
}

GROUPS = {
    "all": tuple(PROPERTIES),
    "faithfulness": ("faithfulness-states", "faithfulness-channels", "identity-channel"),
    "primal-dual": ("primal-dual-state", "primal-dual-channel", "rmax-forms"),
    "monotonicity": ("subadditivity", "superchannel", "state-monotonicity"),
}


def suite_names() -> list[str]:
    return sorted(set(PROPERTIES) | set(GROUPS))


def resolve(names: Iterable[str]) -> list[str]:
    out: list[str] = []
    for name in names:
        if name in GROUPS:
            members = GROUPS[name]
        elif name in PROPERTIES:
            members = (name,)
        else:
            raise KeyError(f"unknown suite {name!r}; choose from {', '.join(suite_names())}")
        out.extend(m for m in members if m not in out)
    return out


def trial_seed(seed: int, prop_index: int, trial: int) -> int:
    return int(np.random.SeedSequence([seed, prop_index, trial]).generate_state(1, dtype=np.uint64)[0])


def run_trial(name: str, seed: int, cfg: SuiteConfig, trial: int = 0) -> tuple[float, str, dict]:
    """Run one trial; returns ``(worst margin, message, witness)``.

    A negative margin is a failure.  Solver errors count as failures with
    margin ``-inf``.
    """
    prop = PROPERTIES[name]
    slack = cfg.slack if cfg.slack is not None else prop.default_slack
    t = Trial(slack)
    rng = np.random.default_rng(seed)
    try:
        prop.fn(rng, t, cfg, trial)
    except (SolverError, ValueError, np.linalg.LinAlgError) as exc:
        return -math.inf, f"{type(exc).__name__}: {exc}", t.witness
    if not t.margins:
        return math.inf, "no checks", t.witness
    margin, label = min(t.margins, key=lambda m: m[0])
    return margin, label, t.witness


def _run_job(job):
    name, seed, cfg, trial = job
    return run_trial(name, seed, cfg, trial)


def run_suite(cfg: SuiteConfig, progress: Callable[[str, int, float], None] | None = None) -> SuiteReport:
    names = resolve(cfg.suites)
    order = list(PROPERTIES)
    results = []
    for name in names:
        prop = PROPERTIES[name]
        n_trials = prop.fixed_trials if prop.fixed_trials is not None else cfg.trials
        if name == "bell":
            n_trials = max(1, cfg.dim("bell", 4) - 1)
        seeds = [trial_seed(cfg.seed, order.index(name), k) for k in range(n_trials)]
        res = PropertyResult(name, prop.anchor)
        start = time.perf_counter()
        jobs = [(name, s, cfg, k) for k, s in enumerate(seeds)]
        if cfg.workers > 1 and cfg.cpptp_sampler is None:
            with ProcessPoolExecutor(cfg.workers) as pool:
                outcomes = list(pool.map(_run_job, jobs))
        else:
            outcomes = [_run_job(j) for j in jobs]
        for k, (margin, msg, witness) in enumerate(outcomes):
            res.trials += 1
            res.worst_slack = min(res.worst_slack, margin)
            if margin < 0:
                res.failures.append(TrialFailure(k, seeds[k], msg, margin, witness))
            if progress:
                progress(name, k, margin)
        res.seconds = time.perf_counter() - start
        results.append(res)
    return SuiteReport(cfg, results)


__all__ = [
    "GROUPS",
    "PROPERTIES",
    "PropertyResult",
    "SuiteConfig",
    "SuiteReport",
    "TrialFailure",
    "resolve",
    "run_suite",
    "run_trial",
    "serialize",
    "suite_names",
    "trial_seed",
]

"""Entropies and divergences in bits.

Matrix functions go through Hermitian eigendecompositions.  Support
inclusion ``supp(rho) ⊆ supp(sigma)`` is decided by the weight of ``rho``
outside the eigenvectors of ``sigma`` with eigenvalue above ``rank_tol``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable

import numpy as np
from scipy.special import logsumexp

from .operators import DEFAULT_RANK_TOL, HermitianOperator, eigh, partial_trace

LN2 = math.log(2.0)


@dataclass(frozen=True)
class DivergenceValue:
    """A divergence in bits; ``+inf`` exactly when the support condition fails."""

    value: float
    support_violation: bool = False

    def __float__(self) -> float:
        return float(self.value)

    @property
    def finite(self) -> bool:
        return math.isfinite(self.value)


INFINITE = DivergenceValue(math.inf, True)


def _matrix(x) -> np.ndarray:
    return x.matrix if isinstance(x, HermitianOperator) else np.asarray(x, dtype=complex)


def _entropy_of_spectrum(w: np.ndarray) -> float:
    w = w[w > 0]
    return float(-np.sum(w * np.log2(w))) if w.size else 0.0


def entropy(rho) -> float:
    """von Neumann entropy ``-Tr[rho log2 rho]`` with ``0 log 0 = 0``."""
    w = np.clip(eigh(_matrix(rho))[0], 0.0, None)
    return _entropy_of_spectrum(w)


def conditional_entropy(rho_ab: HermitianOperator, cond: str | Iterable[str]) -> float:
    """``S(rest | cond) = S(all) - S(cond)``."""
    cond = [cond] if isinstance(cond, str) else list(cond)
    others = [lab for lab in rho_ab.labels if lab not in cond]
    return entropy(rho_ab) - entropy(partial_trace(rho_ab, others))


def coherent_information(rho_ab: HermitianOperator) -> float:
    """``I(A>B) = S(B) - S(AB)`` with B the layout's B side (last factor if unset)."""
    b = sorted(rho_ab.layout.b_side) or [rho_ab.labels[-1]]
    return -conditional_entropy(rho_ab, b)


def _support(sigma: np.ndarray, rank_tol: float):
    w, v = eigh(sigma)
    keep = w > rank_tol
    return w[keep], v[:, keep]


def _violates(rho: np.ndarray, v_sigma: np.ndarray, rank_tol: float) -> bool:
    inside = np.real(np.trace(v_sigma.conj().T @ rho @ v_sigma)) if v_sigma.size else 0.0
    outside = float(np.real(np.trace(rho))) - inside
    return outside > rank_tol


def relative_entropy(rho, sigma, rank_tol: float = DEFAULT_RANK_TOL) -> DivergenceValue:
    """Umegaki relative entropy ``Tr rho (log2 rho - log2 sigma)``."""
    r, s = _matrix(rho), _matrix(sigma)
    ws, vs = _support(s, rank_tol)
    if _violates(r, vs, rank_tol):
        return INFINITE
    wr = np.clip(eigh(r)[0], 0.0, None)
    tr_r_log_r = -_entropy_of_spectrum(wr)
    r_in = vs.conj().T @ r @ vs
    tr_r_log_s = float(np.real(np.sum(np.diag(r_in) * np.log2(ws))))
    return DivergenceValue(tr_r_log_r - tr_r_log_s)


def max_relative_entropy(rho, sigma, rank_tol: float = DEFAULT_RANK_TOL) -> DivergenceValue:
    """``log2 || sigma^{-1/2} rho sigma^{-1/2} ||_inf`` on the support of sigma."""
    r, s = _matrix(rho), _matrix(sigma)
    ws, vs = _support(s, rank_tol)
    if _violates(r, vs, rank_tol):
        return INFINITE
    m = (vs.conj().T @ r @ vs) / np.sqrt(np.outer(ws, ws))
    top = float(np.max(eigh(m)[0]))
    if top <= 0:
        return DivergenceValue(-math.inf)
    return DivergenceValue(math.log2(top))


def sandwiched_renyi(rho, sigma, alpha: float, rank_tol: float = DEFAULT_RANK_TOL) -> DivergenceValue:
    """Sandwiched Rényi divergence of order ``alpha`` (``alpha != 1``)."""
    alpha = float(alpha)
    if alpha <= 0 or alpha == 1.0 or not math.isfinite(alpha):
        raise ValueError("alpha must lie in (0, 1) or (1, inf); use relative_entropy for alpha = 1")
    r, s = _matrix(rho), _matrix(sigma)
    ws, vs = _support(s, rank_tol)
    if alpha > 1 and _violates(r, vs, rank_tol):
        return INFINITE
    if ws.size == 0:
        return INFINITE
    gamma = (1.0 - alpha) / (2.0 * alpha)
    # only the part of rho inside supp(sigma) contributes (sigma^gamma kills the rest)
    half = ws**gamma
    m = (vs.conj().T @ r @ vs) * np.outer(half, half)
    mu = np.clip(eigh(m)[0], 0.0, None)
    mu = mu[mu > 0]
    if mu.size == 0:
        return INFINITE
    log_q = logsumexp(alpha * np.log(mu))
    return DivergenceValue(float(log_q / LN2 / (alpha - 1.0)))


__all__ = [
    "DivergenceValue",
    "coherent_information",
    "conditional_entropy",
    "entropy",
    "max_relative_entropy",
    "relative_entropy",
    "sandwiched_renyi",
]

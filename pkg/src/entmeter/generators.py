"""Seeded random states and channels for the property suites."""

from __future__ import annotations

from typing import Sequence

import numpy as np

from .channels import random_channel, random_cpptp, random_isometry
from .operators import DensityOperator, SystemLayout, partial_transpose, permute_array

DEFAULT_LABELS = {2: ("A", "B"), 4: ("L_A", "A'", "B'", "L_B")}


def as_layout(dims, b_side: Sequence[str] | None = None) -> SystemLayout:
    """Layout from a layout, or from a tuple of dims with default labels.

    Two factors are labelled ``A, B`` (B side ``{B}``); four factors are
    ``L_A, A', B', L_B`` (B side ``{B', L_B}``); other counts get ``X0, X1, ...``
    with the second half on the B side.
    """
    if isinstance(dims, SystemLayout):
        return dims
    dims = tuple(int(d) for d in dims)
    labels = DEFAULT_LABELS.get(len(dims)) or tuple(f"X{i}" for i in range(len(dims)))
    if b_side is None:
        b_side = labels[len(labels) // 2 :]
    return SystemLayout(tuple(zip(labels, dims)), frozenset(b_side))


def _rng(seed) -> np.random.Generator:
    return seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)


def random_state(dims, rank: int | None = None, seed=None) -> DensityOperator:
    """``G G^† / Tr`` with ``G`` a complex Gaussian ``d x rank`` matrix."""
    layout = as_layout(dims)
    d = layout.dim
    rank = d if rank is None else int(rank)
    if not 1 <= rank <= d:
        raise ValueError(f"rank must lie in [1, {d}]")
    rng = _rng(seed)
    g = rng.normal(size=(d, rank)) + 1j * rng.normal(size=(d, rank))
    m = g @ g.conj().T
    return DensityOperator(m / np.trace(m).real, layout)


def random_pure(dims, seed=None) -> DensityOperator:
    return random_state(dims, rank=1, seed=seed)


def random_ppt_state(dims, seed=None, terms: int | None = None) -> DensityOperator:
    """Separable mixture of product pure states (PPT by construction)."""
    layout = as_layout(dims)
    rng = _rng(seed)
    b = [i for i, lab in enumerate(layout.labels) if lab in layout.b_side]
    a = [i for i in range(len(layout.dims)) if i not in b]
    da = int(np.prod([layout.dims[i] for i in a], dtype=int))
    db = int(np.prod([layout.dims[i] for i in b], dtype=int))
    terms = terms if terms is not None else int(rng.integers(1, 2 * layout.dim + 1))
    weights = rng.dirichlet(np.ones(terms))
    m = np.zeros((da * db, da * db), dtype=complex)
    for w in weights:
        x = rng.normal(size=da) + 1j * rng.normal(size=da)
        y = rng.normal(size=db) + 1j * rng.normal(size=db)
        v = np.kron(x / np.linalg.norm(x), y / np.linalg.norm(y))
        m += w * np.outer(v, v.conj())
    # factors are in (A-side..., B-side...) order; put them back in layout order
    order = a + b
    inverse = [order.index(k) for k in range(len(order))]
    m = permute_array(m, [layout.dims[k] for k in order], inverse)
    return DensityOperator(m, layout)


def horodecki_3x3(a: float) -> np.ndarray:
    """A one-parameter family of 3x3 states that are PPT and entangled for ``0 < a < 1``."""
    if not 0 <= a <= 1:
        raise ValueError("a must lie in [0, 1]")
    m = np.zeros((9, 9))
    # |ij> -> 3 i + j
    for k in (0, 4, 8):
        for l in (0, 4, 8):
            m[k, l] = a
    for k in (1, 2, 3, 5, 7):
        m[k, k] = a
    s = np.sqrt(1 - a * a)
    m[6, 6] = m[8, 8] = (1 + a) / 2
    m[6, 8] = m[8, 6] = s / 2
    return m / np.trace(m)


def realignment_norm(m: np.ndarray, da: int, db: int) -> float:
    """Trace norm of the realigned matrix; values above one certify entanglement."""
    t = m.reshape(da, db, da, db).transpose(0, 2, 1, 3).reshape(da * da, db * db)
    return float(np.sum(np.linalg.svd(t, compute_uv=False)))


def random_ppt_entangled_3x3(seed=None, max_tries: int = 1000) -> DensityOperator:
    """Rejection sample a PPT state on 3x3 whose entanglement is certified by realignment.

    Candidates are locally rotated, slightly noisy members of a known PPT
    entangled family; a candidate is accepted only if it passes the PPT test
    and violates the realignment criterion.
    """
    rng = _rng(seed)
    layout = as_layout((3, 3))
    for _ in range(max_tries):
        a = rng.uniform(0.05, 0.95)
        eps = rng.uniform(0.0, 0.02)
        noise = random_state(layout, seed=rng).matrix
        u = random_isometry(3, 3, rng)
        v = random_isometry(3, 3, rng)
        uv = np.kron(u, v)
        m = uv @ ((1 - eps) * horodecki_3x3(a) + eps * noise) @ uv.conj().T
        cand = DensityOperator(m, layout)
        if partial_transpose(cand).min_eigenvalue() >= 1e-12 and realignment_norm(m, 3, 3) > 1 + 1e-9:
            return cand
    raise RuntimeError("no PPT entangled candidate accepted")


__all__ = [
    "as_layout",
    "horodecki_3x3",
    "random_channel",
    "random_cpptp",
    "random_ppt_entangled_3x3",
    "random_ppt_state",
    "random_pure",
    "random_state",
    "realignment_norm",
]

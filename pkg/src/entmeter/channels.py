"""Bipartite channels stored as Choi operators.

A channel with inputs ``A'`` (Alice) and ``B'`` (Bob) and outputs ``A`` and
``B`` is represented by

    J = sum_{ij} |i><j|_{S_A S_B} (rearranged) ⊗ N(|i><j|_{A'B'}),

laid out in the fixed order ``(S_A, A, B, S_B)`` with ``S_A ≅ A'`` and
``S_B ≅ B'``.  The Bob side of the cut is ``{B, S_B}``, which is where every
channel-level partial transpose acts.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .operators import (
    DensityOperator,
    HermitianOperator,
    SystemLayout,
    merge,
    partial_trace,
    partial_transpose,
    permute_array,
    split,
)

S_A, A, B, S_B = "S_A", "A", "B", "S_B"
CHOI_LABELS = (S_A, A, B, S_B)
CP_TOL = 1e-9
TP_TOL = 1e-7


def choi_layout(in_dims: Sequence[int], out_dims: Sequence[int]) -> SystemLayout:
    (da_in, db_in), (da, db) = in_dims, out_dims
    return SystemLayout(((S_A, da_in), (A, da), (B, db), (S_B, db_in)), frozenset([B, S_B]))


class CPMap:
    """Completely positive bipartite map ``A'B' -> AB`` given by its Choi operator."""

    def __init__(self, choi, in_dims: Sequence[int], out_dims: Sequence[int], *, cp_tol: float = CP_TOL):
        self.in_dims = tuple(int(d) for d in in_dims)
        self.out_dims = tuple(int(d) for d in out_dims)
        layout = choi_layout(self.in_dims, self.out_dims)
        m = choi.matrix if isinstance(choi, HermitianOperator) else np.asarray(choi)
        if m.shape != (layout.dim, layout.dim):
            raise ValueError(f"Choi matrix of shape {m.shape} does not fit dims {self.in_dims}->{self.out_dims}")
        self.choi = HermitianOperator(m, layout, atol=1e-9)
        lam = self.choi.min_eigenvalue()
        scale = max(1.0, float(np.max(np.abs(self.choi.eigvalsh()))))
        if lam < -cp_tol * scale:
            raise ValueError(f"Choi operator is not PSD (min eigenvalue {lam:.3e})")

    @property
    def matrix(self) -> np.ndarray:
        return self.choi.matrix

    def tp_defect(self) -> float:
        marg = partial_trace(self.choi, [A, B]).matrix
        return float(np.max(np.abs(marg - np.eye(marg.shape[0])))) if marg.size else 0.0

    def __repr__(self):
        return f"{type(self).__name__}(in={self.in_dims}, out={self.out_dims})"


class BipartiteChannel(CPMap):
    """Completely positive and trace-preserving bipartite map."""

    def __init__(self, choi, in_dims, out_dims, *, cp_tol: float = CP_TOL, tp_tol: float = TP_TOL):
        super().__init__(choi, in_dims, out_dims, cp_tol=cp_tol)
        defect = self.tp_defect()
        if defect > tp_tol:
            raise ValueError(f"map is not trace preserving (defect {defect:.3e})")


# -- construction -----------------------------------------------------------------


def _choi_matrix(apply_fn, in_dims, out_dims) -> np.ndarray:
    da_in, db_in = in_dims
    da, db = out_dims
    d_in, d_out = da_in * db_in, da * db
    # blocks[i, j] = N(|i><j|) with i, j indexing (A', B')
    blocks = np.zeros((d_in, d_in, d_out, d_out), dtype=complex)
    for i in range(d_in):
        for j in range(d_in):
            e = np.zeros((d_in, d_in), dtype=complex)
            e[i, j] = 1.0
            out = np.asarray(apply_fn(e), dtype=complex)
            if out.shape != (d_out, d_out):
                raise ValueError(f"map returned shape {out.shape}, expected {(d_out, d_out)}")
            blocks[i, j] = out
    t = blocks.reshape(da_in, db_in, da_in, db_in, da, db, da, db)
    # rows (sa, a, b, sb), columns (sa~, a~, b~, sb~)
    t = t.transpose(0, 4, 5, 1, 2, 6, 7, 3)
    n = da_in * da * db * db_in
    return t.reshape(n, n)


def _check_linear(apply_fn, d_in: int, rng: np.random.Generator, tol: float = 1e-9) -> None:
    x = rng.normal(size=(d_in, d_in)) + 1j * rng.normal(size=(d_in, d_in))
    y = rng.normal(size=(d_in, d_in)) + 1j * rng.normal(size=(d_in, d_in))
    a, b = 0.7 - 0.2j, -1.3 + 0.5j
    lhs = np.asarray(apply_fn(a * x + b * y))
    rhs = a * np.asarray(apply_fn(x)) + b * np.asarray(apply_fn(y))
    scale = max(1.0, float(np.max(np.abs(rhs))))
    if np.max(np.abs(lhs - rhs)) > tol * scale:
        raise ValueError("map is not linear on operator space")


def choi_of(
    apply_fn: Callable[[np.ndarray], np.ndarray],
    in_dims: Sequence[int],
    out_dims: Sequence[int] | None = None,
    *,
    trace_preserving: bool = True,
) -> CPMap:
    """Choi operator of ``apply_fn``, a linear map on ``(A' ⊗ B')`` matrices.

    ``apply_fn`` receives a square matrix ordered ``(A', B')`` and returns one
    ordered ``(A, B)``.  Linearity is checked on random samples.
    """
    in_dims = tuple(in_dims)
    out_dims = tuple(out_dims) if out_dims is not None else in_dims
    if len(in_dims) != 2 or len(out_dims) != 2 or min(in_dims + out_dims) < 1:
        raise ValueError("in_dims and out_dims must be pairs of positive integers")
    _check_linear(apply_fn, in_dims[0] * in_dims[1], np.random.default_rng(0))
    m = _choi_matrix(apply_fn, in_dims, out_dims)
    cls = BipartiteChannel if trace_preserving else CPMap
    return cls(m, in_dims, out_dims)


def choi_from_kraus(kraus: Sequence[np.ndarray], in_dims, out_dims) -> BipartiteChannel:
    """Conversion utility: Kraus operators mapping ``(A', B')`` to ``(A, B)``."""

    def fn(x):
        return sum(k @ x @ k.conj().T for k in kraus)

    return choi_of(fn, in_dims, out_dims)


def identity_channel(in_dims: Sequence[int]) -> BipartiteChannel:
    return choi_of(lambda x: x, in_dims, in_dims)


def replacer(omega: HermitianOperator, in_dims: Sequence[int]) -> BipartiteChannel:
    """Channel discarding its input and preparing ``omega`` (a two-factor state)."""
    if len(omega.dims) != 2:
        raise ValueError("replacer expects a state with exactly two factors (A, B)")
    da, db = omega.dims
    da_in, db_in = in_dims
    m = np.kron(np.kron(np.eye(da_in), omega.matrix), np.eye(db_in))
    return BipartiteChannel(m, in_dims, (da, db))


def embed_point_to_point(choi_sb, d_in: int | None = None, d_out: int | None = None) -> BipartiteChannel:
    """Bipartite channel with trivial ``B'`` and ``A`` from a point-to-point Choi.

    ``choi_sb`` is the Choi matrix of a channel ``A' -> B`` ordered
    ``(S, B)``, either as an operator with two factors or as a raw matrix
    together with ``d_in`` and ``d_out``.
    """
    if isinstance(choi_sb, HermitianOperator):
        d_in, d_out = choi_sb.dims
        m = choi_sb.matrix
    else:
        m = np.asarray(choi_sb)
        if d_in is None or d_out is None:
            raise ValueError("raw Choi matrix needs d_in and d_out")
    return BipartiteChannel(m, (d_in, 1), (1, d_out))


def point_to_point_choi(apply_fn, d_in: int, d_out: int) -> HermitianOperator:
    """Choi operator ``(S, B)`` of a point-to-point map, for use with :func:`embed_point_to_point`."""
    m = _choi_matrix(apply_fn, (d_in, 1), (1, d_out))
    return HermitianOperator(m, SystemLayout(((S_A, d_in), (B, d_out)), frozenset([B])))


# -- application --------------------------------------------------------------------


def _contract(choi: HermitianOperator, in_dims, out_dims, x: np.ndarray, dims, ia: int, ib: int):
    """Apply the map to factors ``ia`` (A') and ``ib`` (B') of ``x``.

    Returns the output matrix whose factors are the remaining factors of
    ``x`` with ``A`` in place of factor ``ia`` and ``B`` in place of ``ib``.
    """
    n = len(dims)
    rest = [k for k in range(n) if k not in (ia, ib)]
    r = int(np.prod([dims[k] for k in rest], dtype=int))
    da_in, db_in = in_dims
    da, db = out_dims
    xm = permute_array(x, dims, rest + [ia, ib])
    xt = xm.reshape(r, da_in, db_in, r, da_in, db_in)
    jt = choi.matrix.reshape(da_in, da, db, db_in, da_in, da, db, db_in)
    out = np.einsum("rxyRXY,xabyXABY->rabRAB", xt, jt, optimize=True)
    out = out.reshape(r * da * db, r * da * db)
    # put A and B back where A' and B' were
    new_dims = [dims[k] for k in rest] + [da, db]
    order = []
    for k in range(n):
        if k == ia:
            order.append(len(rest))
        elif k == ib:
            order.append(len(rest) + 1)
        else:
            order.append(rest.index(k))
    return permute_array(out, new_dims, order)


def apply(
    n: CPMap,
    rho: HermitianOperator,
    inputs: tuple[str, str] = ("A'", "B'"),
    outputs: tuple[str, str] = ("A", "B"),
    *,
    keep_trivial: bool = False,
) -> HermitianOperator:
    """Apply ``n`` to the factors ``inputs`` of ``rho``.

    The output keeps every other factor of ``rho`` in place; the factor
    ``inputs[0]`` is replaced by ``outputs[0]`` and ``inputs[1]`` by
    ``outputs[1]`` (which joins the Bob side).  An input of dimension one may
    be absent from ``rho``; output factors of dimension one are dropped unless
    ``keep_trivial`` is set.  A density operator input yields a density
    operator.
    """
    layout = rho.layout
    factors = list(layout.factors)
    b_side = set(layout.b_side)
    a_in, b_in = inputs
    a_out, b_out = outputs
    for lab, d, pos_hint in ((a_in, n.in_dims[0], 0), (b_in, n.in_dims[1], None)):
        if lab in layout.labels:
            if layout.dim_of(lab) != d:
                raise ValueError(f"factor {lab!r} has dim {layout.dim_of(lab)}, channel expects {d}")
        elif d == 1:
            labels = [f for f, _ in factors]
            if pos_hint == 0:
                pos = labels.index(b_in) if b_in in labels else len(labels)
            else:
                pos = labels.index(a_in) + 1 if a_in in labels else len(labels)
            factors.insert(pos, (lab, 1))
        else:
            raise ValueError(f"input factor {lab!r} missing from operator on {layout.labels}")
    full = SystemLayout(tuple(factors), frozenset(b_side))
    labels = full.labels
    clash = {a_out, b_out} & (set(labels) - {a_in, b_in})
    if clash:
        raise ValueError(f"output labels {sorted(clash)} already present")
    ia, ib = labels.index(a_in), labels.index(b_in)
    out = _contract(n.choi, n.in_dims, n.out_dims, rho.matrix, full.dims, ia, ib)
    new_factors = list(full.factors)
    new_factors[ia] = (a_out, n.out_dims[0])
    new_factors[ib] = (b_out, n.out_dims[1])
    new_b = (b_side - {a_in, b_in}) | {b_out}
    if not keep_trivial:
        new_factors = [f for f in new_factors if f[1] > 1 or len(new_factors) == 1]
        kept = {f for f, _ in new_factors}
        new_b &= kept
    out_layout = SystemLayout(tuple(new_factors), frozenset(new_b))
    if isinstance(rho, DensityOperator):
        return DensityOperator(out, out_layout, tol=1e-8)
    return HermitianOperator(out, out_layout, atol=1e-9)


def apply_matrix(n: CPMap, x: np.ndarray) -> np.ndarray:
    """Apply ``n`` to a bare ``(A', B')`` matrix (no reference systems)."""
    dims = n.in_dims
    return _contract(n.choi, n.in_dims, n.out_dims, np.asarray(x, dtype=complex), dims, 0, 1)


def compose(n2: CPMap, n1: CPMap) -> CPMap:
    """Serial composition ``n2 ∘ n1``."""
    if n1.out_dims != n2.in_dims:
        raise ValueError(f"cannot compose: {n1.out_dims} outputs vs {n2.in_dims} inputs")
    j = _contract(n2.choi, n2.in_dims, n2.out_dims, n1.choi.matrix, n1.choi.dims, 1, 2)
    both_tp = isinstance(n1, BipartiteChannel) and isinstance(n2, BipartiteChannel)
    cls = BipartiteChannel if both_tp else CPMap
    return cls(j, n1.in_dims, n2.out_dims)


def is_cpptp(n: CPMap, tol: float = 1e-9) -> bool:
    """C-PPT-P membership: ``T_{B S_B}(J)`` has no eigenvalue below ``-tol``."""
    if tol <= 0:
        raise ValueError("tol must be positive")
    return partial_transpose(n.choi, [B, S_B]).min_eigenvalue() >= -tol


# -- superchannels --------------------------------------------------------------------


@dataclass(frozen=True)
class PPTSuperchannel:
    """``M -> post ∘ (M ⊗ id_{A_M B_M}) ∘ pre`` with C-PPT-P ``pre`` and ``post``.

    ``pre`` maps ``A'B'`` to ``(A_M X)(Y B_M)``, where ``X, Y`` feed the
    transformed channel and ``A_M, B_M`` are memories.  ``post`` maps
    ``(A_M X')(Y' B_M)`` to the final outputs, ``X', Y'`` being the outputs of
    the transformed channel.
    """

    pre: BipartiteChannel
    post: BipartiteChannel
    memory: tuple[int, int] = (1, 1)
    tol: float = 1e-9

    def __post_init__(self):
        for name, ch in (("pre", self.pre), ("post", self.post)):
            if not is_cpptp(ch, self.tol):
                raise ValueError(f"{name} channel is not C-PPT-P")
        ma, mb = self.memory
        if self.pre.out_dims[0] % ma or self.pre.out_dims[1] % mb:
            raise ValueError("pre outputs are not divisible by the memory dimensions")
        if self.post.in_dims[0] % ma or self.post.in_dims[1] % mb:
            raise ValueError("post inputs are not divisible by the memory dimensions")

    @property
    def channel_in_dims(self) -> tuple[int, int]:
        return (self.pre.out_dims[0] // self.memory[0], self.pre.out_dims[1] // self.memory[1])

    @property
    def channel_out_dims(self) -> tuple[int, int]:
        return (self.post.in_dims[0] // self.memory[0], self.post.in_dims[1] // self.memory[1])

    def __call__(self, m: CPMap) -> CPMap:
        if m.in_dims != self.channel_in_dims or m.out_dims != self.channel_out_dims:
            raise ValueError(
                f"channel {m.in_dims}->{m.out_dims} does not fit superchannel slot "
                f"{self.channel_in_dims}->{self.channel_out_dims}"
            )
        ma, mb = self.memory
        x, y = self.channel_in_dims
        j = split(self.pre.choi, A, [("A_M", ma), ("X", x)])
        j = split(j, B, [("Y", y), ("B_M", mb)])
        j = apply(m, j, inputs=("X", "Y"), outputs=("X2", "Y2"), keep_trivial=True)
        j = merge(j, ["A_M", "X2"], "PA")
        j = merge(j, ["Y2", "B_M"], "PB")
        j = apply(self.post, j, inputs=("PA", "PB"), outputs=(A, B), keep_trivial=True)
        cls = BipartiteChannel if isinstance(m, BipartiteChannel) else CPMap
        return cls(j.matrix, self.pre.in_dims, self.post.out_dims)


def ppt_superchannel(pre: BipartiteChannel, post: BipartiteChannel, memory=(1, 1)) -> PPTSuperchannel:
    return PPTSuperchannel(pre, post, tuple(memory))


# -- random channels ------------------------------------------------------------------


def random_isometry(d_in: int, d_out: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-random isometry ``C^{d_in} -> C^{d_out}`` (``d_out >= d_in``)."""
    g = rng.normal(size=(d_out, d_in)) + 1j * rng.normal(size=(d_out, d_in))
    q, r = np.linalg.qr(g)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def random_local_choi(d_in: int, d_out: int, rng: np.random.Generator, env: int | None = None) -> np.ndarray:
    """Choi matrix ``(S, out)`` of a random channel from an isometric dilation."""
    env = env if env is not None else max(1, d_in * d_out)
    v = random_isometry(d_in, d_out * env, rng).reshape(d_out, env, d_in)
    # psi[s, o, e] = sum_s' <o e|V|s'> δ_{s s'}
    psi = v.transpose(2, 0, 1).reshape(d_in * d_out, env)
    return psi @ psi.conj().T


def random_cpptp(in_dims, out_dims=None, seed=None, terms: int = 3) -> BipartiteChannel:
    """Convex mixture of products of random local channels."""
    rng = np.random.default_rng(seed)
    out_dims = tuple(out_dims) if out_dims is not None else tuple(in_dims)
    (da_in, db_in), (da, db) = in_dims, out_dims
    weights = rng.dirichlet(np.ones(terms))
    total = 0
    for w in weights:
        ja = random_local_choi(da_in, da, rng)  # (S_A, A)
        jb = random_local_choi(db_in, db, rng)  # (S_B, B)
        jb = permute_array(jb, (db_in, db), [1, 0])  # (B, S_B)
        total = total + w * np.kron(ja, jb)
    return BipartiteChannel(total, in_dims, out_dims)


def random_channel(in_dims, out_dims=None, seed=None, env: int | None = None) -> BipartiteChannel:
    """Generic bipartite channel from a random isometry ``A'B' -> ABE``."""
    rng = np.random.default_rng(seed)
    out_dims = tuple(out_dims) if out_dims is not None else tuple(in_dims)
    d_in = in_dims[0] * in_dims[1]
    d_out = out_dims[0] * out_dims[1]
    j = random_local_choi(d_in, d_out, rng, env=env)  # ((A'B'), (AB))
    t = j.reshape(in_dims[0], in_dims[1], out_dims[0], out_dims[1],
                  in_dims[0], in_dims[1], out_dims[0], out_dims[1])
    t = t.transpose(0, 2, 3, 1, 4, 6, 7, 5)
    n = d_in * d_out
    return BipartiteChannel(t.reshape(n, n), in_dims, out_dims)


def product_channel(choi_a: np.ndarray, choi_b: np.ndarray, in_dims, out_dims) -> BipartiteChannel:
    """Product of local channels given by Choi matrices ``(S_A, A)`` and ``(S_B, B)``."""
    jb = permute_array(np.asarray(choi_b), (in_dims[1], out_dims[1]), [1, 0])
    return BipartiteChannel(np.kron(choi_a, jb), in_dims, out_dims)


__all__ = [
    "A", "B", "S_A", "S_B", "CPMap", "BipartiteChannel", "PPTSuperchannel",
    "apply", "apply_matrix", "choi_from_kraus", "choi_layout", "choi_of", "compose",
    "embed_point_to_point", "identity_channel", "is_cpptp", "point_to_point_choi",
    "ppt_superchannel", "product_channel", "random_channel", "random_cpptp",
    "random_isometry", "random_local_choi", "replacer",
]

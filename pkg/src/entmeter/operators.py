"""Dense operator algebra on labelled tensor-product spaces.

Every operator carries a :class:`SystemLayout`, the ordered list of
``(label, dim)`` factors plus the set of labels that sit on the B side of the
bipartite cut.  Partial transposes are always taken in the computational basis
of the named factors.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

HERMITIAN_TOL = 1e-12
STATE_TOL = 1e-9
DEFAULT_RANK_TOL = 1e-8


@dataclass(frozen=True)
class SystemLayout:
    """Ordered tensor factors and the B-side labels of the bipartition."""

    factors: tuple[tuple[str, int], ...]
    b_side: frozenset[str] = field(default_factory=frozenset)

    def __post_init__(self):
        factors = tuple((str(lab), int(d)) for lab, d in self.factors)
        object.__setattr__(self, "factors", factors)
        object.__setattr__(self, "b_side", frozenset(self.b_side))
        labels = [lab for lab, _ in factors]
        if len(set(labels)) != len(labels):
            raise ValueError(f"duplicate labels in layout: {labels}")
        for lab, d in factors:
            if d < 1:
                raise ValueError(f"factor {lab!r} has dimension {d}")
        unknown = self.b_side - set(labels)
        if unknown:
            raise ValueError(f"b_side labels not in layout: {sorted(unknown)}")

    @classmethod
    def of(cls, b_side: Iterable[str] = (), **dims: int) -> "SystemLayout":
        """Shorthand: ``SystemLayout.of(A=2, B=2, b_side=["B"])``."""
        return cls(tuple(dims.items()), frozenset(b_side))

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(lab for lab, _ in self.factors)

    @property
    def dims(self) -> tuple[int, ...]:
        return tuple(d for _, d in self.factors)

    @property
    def dim(self) -> int:
        return int(np.prod(self.dims, dtype=int))

    def index(self, label: str) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise KeyError(f"unknown label {label!r}; layout has {self.labels}") from None

    def dim_of(self, label: str) -> int:
        return self.dims[self.index(label)]

    def check_labels(self, labels: Iterable[str]) -> list[str]:
        labels = list(labels)
        for lab in labels:
            self.index(lab)
        return labels

    def without(self, labels: Iterable[str]) -> "SystemLayout":
        drop = set(self.check_labels(labels))
        return SystemLayout(
            tuple(f for f in self.factors if f[0] not in drop), self.b_side - drop
        )

    def permuted(self, order: Sequence[str]) -> "SystemLayout":
        if sorted(order) != sorted(self.labels):
            raise ValueError(f"{list(order)} is not a permutation of {self.labels}")
        return SystemLayout(tuple((lab, self.dim_of(lab)) for lab in order), self.b_side)

    def relabeled(self, mapping: dict[str, str]) -> "SystemLayout":
        self.check_labels(mapping)
        return SystemLayout(
            tuple((mapping.get(lab, lab), d) for lab, d in self.factors),
            frozenset(mapping.get(lab, lab) for lab in self.b_side),
        )

    def with_b_side(self, labels: Iterable[str]) -> "SystemLayout":
        return SystemLayout(self.factors, frozenset(self.check_labels(labels)))

    def concat(self, other: "SystemLayout") -> "SystemLayout":
        clash = set(self.labels) & set(other.labels)
        if clash:
            raise ValueError(f"label collision: {sorted(clash)}")
        return SystemLayout(self.factors + other.factors, self.b_side | other.b_side)

    def same_space(self, other: "SystemLayout") -> bool:
        return self.factors == other.factors


# -- array-level kernels (shared with the SDP evaluator) ---------------------


def ptrace_array(m: np.ndarray, dims: Sequence[int], axes: Iterable[int]) -> np.ndarray:
    """Partial trace over ``axes``; leading batch dimensions of ``m`` are kept."""
    dims = list(dims)
    batch = m.shape[:-2]
    nb = len(batch)
    n = len(dims)
    t = m.reshape(batch + tuple(dims + dims))
    for ax in sorted(set(axes), reverse=True):
        t = np.trace(t, axis1=nb + ax, axis2=nb + ax + n)
        n -= 1
        del dims[ax]
    d = int(np.prod(dims, dtype=int))
    return t.reshape(batch + (d, d))


def ptranspose_array(m: np.ndarray, dims: Sequence[int], axes: Iterable[int]) -> np.ndarray:
    """Partial transpose on ``axes``; leading batch dimensions of ``m`` are kept."""
    dims = list(dims)
    batch = m.shape[:-2]
    nb = len(batch)
    n = len(dims)
    perm = list(range(2 * n))
    for ax in set(axes):
        perm[ax], perm[ax + n] = ax + n, ax
    perm = list(range(nb)) + [nb + p for p in perm]
    return m.reshape(batch + tuple(dims + dims)).transpose(perm).reshape(m.shape)


def permute_array(m: np.ndarray, dims: Sequence[int], perm: Sequence[int]) -> np.ndarray:
    """Reorder tensor factors: new factor ``k`` is old factor ``perm[k]``.

    Leading batch dimensions of ``m`` are kept.
    """
    batch = m.shape[:-2]
    nb = len(batch)
    n = len(dims)
    perm = list(perm)
    order = list(range(nb)) + [nb + p for p in perm] + [nb + p + n for p in perm]
    return m.reshape(batch + tuple(dims) * 2).transpose(order).reshape(m.shape)


def permutation_matrix(dims: Sequence[int], perm: Sequence[int]) -> np.ndarray:
    """Real orthogonal ``P`` with ``P @ X @ P.T == permute_array(X, dims, perm)``."""
    d = int(np.prod(dims, dtype=int))
    idx = np.arange(d).reshape(dims).transpose(list(perm)).reshape(-1)
    P = np.zeros((d, d))
    P[np.arange(d), idx] = 1.0
    return P


def eigh(m: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    return np.linalg.eigh((m + m.conj().T) / 2)


def hermitian_function(m: np.ndarray, fn) -> np.ndarray:
    w, v = eigh(m)
    return (v * fn(w)) @ v.conj().T


# -- operator types ----------------------------------------------------------


class HermitianOperator:
    """Immutable Hermitian matrix on a :class:`SystemLayout`."""

    __slots__ = ("_layout", "_matrix")

    def __init__(self, matrix, layout: SystemLayout, *, atol: float = HERMITIAN_TOL):
        m = np.array(matrix, dtype=complex)
        if m.ndim != 2 or m.shape != (layout.dim, layout.dim):
            raise ValueError(f"matrix shape {m.shape} does not match layout dim {layout.dim}")
        scale = max(1.0, float(np.max(np.abs(m))) if m.size else 1.0)
        dev = float(np.max(np.abs(m - m.conj().T))) if m.size else 0.0
        if dev > atol * scale:
            raise ValueError(f"matrix is not Hermitian (max deviation {dev:.3e})")
        m = (m + m.conj().T) / 2
        m.setflags(write=False)
        self._matrix = m
        self._layout = layout

    @property
    def matrix(self) -> np.ndarray:
        return self._matrix

    @property
    def layout(self) -> SystemLayout:
        return self._layout

    @property
    def labels(self) -> tuple[str, ...]:
        return self._layout.labels

    @property
    def dims(self) -> tuple[int, ...]:
        return self._layout.dims

    @property
    def dim(self) -> int:
        return self._layout.dim

    def trace(self) -> float:
        return float(np.trace(self._matrix).real)

    def eigvalsh(self) -> np.ndarray:
        return np.linalg.eigvalsh(self._matrix)

    def min_eigenvalue(self) -> float:
        return float(self.eigvalsh()[0]) if self.dim else 0.0

    def with_layout(self, layout: SystemLayout) -> "HermitianOperator":
        return HermitianOperator(self._matrix, layout)

    def relabel(self, mapping: dict[str, str]) -> "HermitianOperator":
        return HermitianOperator(self._matrix, self._layout.relabeled(mapping))

    def with_b_side(self, labels: Iterable[str]) -> "HermitianOperator":
        return type(self)._rewrap(self, self._layout.with_b_side(labels))

    @staticmethod
    def _rewrap(op, layout):
        return HermitianOperator(op.matrix, layout)

    def _check_same(self, other: "HermitianOperator"):
        if not self._layout.same_space(other.layout):
            raise ValueError(f"layout mismatch: {self.labels} vs {other.labels}")

    def __add__(self, other: "HermitianOperator") -> "HermitianOperator":
        self._check_same(other)
        return HermitianOperator(self._matrix + other.matrix, self._layout)

    def __sub__(self, other: "HermitianOperator") -> "HermitianOperator":
        self._check_same(other)
        return HermitianOperator(self._matrix - other.matrix, self._layout)

    def __mul__(self, c: float) -> "HermitianOperator":
        if np.iscomplexobj(c) and np.imag(c) != 0:
            raise TypeError("only real scalars preserve Hermiticity")
        return HermitianOperator(self._matrix * float(np.real(c)), self._layout)

    __rmul__ = __mul__

    def __truediv__(self, c: float) -> "HermitianOperator":
        return self * (1.0 / c)

    def __neg__(self) -> "HermitianOperator":
        return self * -1.0

    def allclose(self, other: "HermitianOperator", atol: float = 1e-9) -> bool:
        return self._layout.same_space(other.layout) and np.allclose(
            self._matrix, other.matrix, atol=atol, rtol=0
        )

    def __repr__(self):
        return f"{type(self).__name__}(labels={self.labels}, dims={self.dims})"


class DensityOperator(HermitianOperator):
    """Positive semi-definite operator with unit trace."""

    __slots__ = ()

    def __init__(self, matrix, layout: SystemLayout, *, tol: float = STATE_TOL):
        super().__init__(matrix, layout)
        tr = self.trace()
        if abs(tr - 1.0) > tol:
            raise ValueError(f"trace {tr:.12g} differs from 1")
        lam = self.min_eigenvalue()
        if lam < -tol:
            raise ValueError(f"not positive semi-definite (min eigenvalue {lam:.3e})")

    @classmethod
    def from_operator(cls, op: HermitianOperator, tol: float = STATE_TOL) -> "DensityOperator":
        return cls(op.matrix, op.layout, tol=tol)

    @staticmethod
    def _rewrap(op, layout):
        return DensityOperator(op.matrix, layout)

    def relabel(self, mapping: dict[str, str]) -> "DensityOperator":
        return DensityOperator(self.matrix, self.layout.relabeled(mapping))


def as_density(op: HermitianOperator, tol: float = STATE_TOL) -> DensityOperator:
    if isinstance(op, DensityOperator):
        return op
    return DensityOperator(op.matrix, op.layout, tol=tol)


def _like(x: HermitianOperator, matrix, layout: SystemLayout) -> HermitianOperator:
    """Rebuild keeping the density-operator tag when the operation preserves states."""
    if isinstance(x, DensityOperator):
        return DensityOperator(matrix, layout, tol=1e-8)
    return HermitianOperator(matrix, layout)


# -- operations --------------------------------------------------------------


def tensor(*ops: HermitianOperator) -> HermitianOperator:
    if not ops:
        raise ValueError("tensor() needs at least one operator")
    layout, m = ops[0].layout, ops[0].matrix
    for op in ops[1:]:
        layout = layout.concat(op.layout)
        m = np.kron(m, op.matrix)
    if all(isinstance(op, DensityOperator) for op in ops):
        return DensityOperator(m, layout, tol=1e-8)
    return HermitianOperator(m, layout)


def partial_trace(x: HermitianOperator, over: Iterable[str]) -> HermitianOperator:
    over = x.layout.check_labels(over)
    axes = [x.layout.index(lab) for lab in over]
    m = ptrace_array(x.matrix, x.dims, axes)
    return _like(x, m, x.layout.without(over))


def partial_transpose(x: HermitianOperator, on: Iterable[str] | None = None) -> HermitianOperator:
    """Transpose the listed factors; defaults to the layout's B side."""
    on = sorted(x.layout.b_side) if on is None else x.layout.check_labels(on)
    axes = [x.layout.index(lab) for lab in on]
    return HermitianOperator(ptranspose_array(x.matrix, x.dims, axes), x.layout)


def permute(x: HermitianOperator, order: Sequence[str]) -> HermitianOperator:
    layout = x.layout.permuted(order)
    perm = [x.layout.index(lab) for lab in order]
    return _like(x, permute_array(x.matrix, x.dims, perm), layout)


def merge(x: HermitianOperator, labels: Sequence[str], new_label: str) -> HermitianOperator:
    """Fuse adjacent factors ``labels`` (in layout order) into one factor."""
    idx = [x.layout.index(lab) for lab in labels]
    if idx != list(range(idx[0], idx[0] + len(idx))):
        raise ValueError(f"factors {list(labels)} are not adjacent and in order")
    fused = int(np.prod([x.dims[i] for i in idx], dtype=int))
    factors = list(x.layout.factors)
    factors[idx[0] : idx[-1] + 1] = [(new_label, fused)]
    sides = {lab in x.layout.b_side for lab in labels}
    if len(sides) > 1:
        raise ValueError("cannot merge factors from both sides of the cut")
    b_side = set(x.layout.b_side) - set(labels)
    if sides == {True}:
        b_side.add(new_label)
    return _like(x, x.matrix, SystemLayout(tuple(factors), frozenset(b_side)))


def split(x: HermitianOperator, label: str, parts: Sequence[tuple[str, int]]) -> HermitianOperator:
    """Inverse of :func:`merge`: reinterpret ``label`` as the product of ``parts``."""
    i = x.layout.index(label)
    if int(np.prod([d for _, d in parts], dtype=int)) != x.dims[i]:
        raise ValueError(f"parts {list(parts)} do not multiply to dim {x.dims[i]}")
    factors = list(x.layout.factors)
    factors[i : i + 1] = list(parts)
    b_side = set(x.layout.b_side) - {label}
    if label in x.layout.b_side:
        b_side |= {lab for lab, _ in parts}
    return _like(x, x.matrix, SystemLayout(tuple(factors), frozenset(b_side)))


def trace_norm(x: HermitianOperator) -> float:
    return float(np.sum(np.abs(x.eigvalsh())))


def operator_norm(x: HermitianOperator) -> float:
    w = x.eigvalsh()
    return float(np.max(np.abs(w))) if w.size else 0.0


def support_projector(rho: HermitianOperator, rank_tol: float = DEFAULT_RANK_TOL) -> HermitianOperator:
    if rank_tol <= 0:
        raise ValueError("rank_tol must be positive")
    w, v = eigh(rho.matrix)
    keep = v[:, w > rank_tol]
    return HermitianOperator(keep @ keep.conj().T, rho.layout)


def numerical_rank(rho: HermitianOperator, rank_tol: float = DEFAULT_RANK_TOL) -> int:
    return int(np.sum(rho.eigvalsh() > rank_tol))


def identity(layout: SystemLayout) -> HermitianOperator:
    return HermitianOperator(np.eye(layout.dim), layout)


def maximally_mixed(layout: SystemLayout) -> DensityOperator:
    return DensityOperator(np.eye(layout.dim) / layout.dim, layout)


def unnormalized_max_ent(d: int) -> np.ndarray:
    """The vector sum_i |i>|i> on two d-dimensional factors (norm^2 = d)."""
    if d < 1:
        raise ValueError("dimension must be positive")
    return np.eye(d).reshape(-1).astype(complex)


def maximally_entangled(d: int, labels: tuple[str, str] = ("A", "B")) -> DensityOperator:
    v = unnormalized_max_ent(d)
    layout = SystemLayout(((labels[0], d), (labels[1], d)), frozenset([labels[1]]))
    return DensityOperator(np.outer(v, v.conj()) / d, layout)


def pure_state(vector, layout: SystemLayout) -> DensityOperator:
    v = np.asarray(vector, dtype=complex).reshape(-1)
    v = v / np.linalg.norm(v)
    return DensityOperator(np.outer(v, v.conj()), layout)


def basis_state(index: Sequence[int], layout: SystemLayout) -> DensityOperator:
    v = np.zeros(layout.dim, dtype=complex)
    v[np.ravel_multi_index(tuple(index), layout.dims)] = 1.0
    return pure_state(v, layout)

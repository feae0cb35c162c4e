"""Dense Hermitian semi-definite programs.

Problems are written with a small linear-expression language over labelled
operator variables (partial transpose, partial trace, tensoring with an
identity, scaling and sums).  The same expression tree is compiled to cvxpy
for solving and evaluated with numpy to audit the returned point: primal
feasibility, the dual objective rebuilt from the multipliers, stationarity and
complementary slackness are all recomputed here rather than taken on trust
from the solver.
"""

from __future__ import annotations

import io
import logging
import os
import warnings
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import cvxpy as cp
import numpy as np

from . import ipm
from .ipm import ConeProgram
from .operators import (
    HermitianOperator,
    SystemLayout,
    permutation_matrix,
    permute_array,
    ptrace_array,
    ptranspose_array,
)

log = logging.getLogger(__name__)

SCALAR = SystemLayout(())

GAP_TOL = 1e-8
FEAS_TOL = 1e-8
MAX_ITER = 200

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"
NUMERICAL_FAILURE = "numerical-failure"


class SolverError(RuntimeError):
    """Raised by the measure layer when a solve does not end optimal."""

    def __init__(self, message: str, solution: "SdpSolution | None" = None):
        super().__init__(message)
        self.solution = solution


# -- expressions --------------------------------------------------------------


class Expr:
    """Affine, Hermitian-valued expression on a fixed layout."""

    layout: SystemLayout

    def children(self) -> tuple["Expr", ...]:
        return ()

    # operator sugar
    def __add__(self, other):
        return Sum((self, as_expr(other, self.layout)))

    def __radd__(self, other):
        return Sum((as_expr(other, self.layout), self))

    def __sub__(self, other):
        return Sum((self, Scale(-1.0, as_expr(other, self.layout))))

    def __rsub__(self, other):
        return Sum((as_expr(other, self.layout), Scale(-1.0, self)))

    def __neg__(self):
        return Scale(-1.0, self)

    def __mul__(self, c):
        return Scale(float(c), self)

    __rmul__ = __mul__

    def pt(self, labels: Iterable[str] | None = None) -> "Expr":
        labels = sorted(self.layout.b_side) if labels is None else list(labels)
        return PartialTranspose(self, tuple(labels))

    def ptrace(self, labels: Iterable[str]) -> "Expr":
        return PartialTrace(self, tuple(labels))

    def trace(self) -> "Expr":
        return PartialTrace(self, self.layout.labels)

    def tensor_identity(self, layout: SystemLayout) -> "Expr":
        return TensorIdentity(self, layout)

    def inner(self, const) -> "Expr":
        """Scalar ``Tr(C X)`` against a constant Hermitian ``C``."""
        return InnerProduct(as_expr(const, self.layout), self)

    def variables(self) -> dict[str, "Variable"]:
        out: dict[str, Variable] = {}
        stack = [self]
        while stack:
            e = stack.pop()
            if isinstance(e, Variable):
                out[e.name] = e
            stack.extend(e.children())
        return out


def as_expr(x, layout: SystemLayout | None = None) -> Expr:
    if isinstance(x, Expr):
        return x
    if isinstance(x, HermitianOperator):
        return Constant(x.matrix, x.layout)
    if np.isscalar(x) and layout is not None:
        return Constant(float(x) * np.eye(layout.dim), layout)
    raise TypeError(f"cannot use {type(x).__name__} in an SDP expression")


@dataclass(eq=False)
class Variable(Expr):
    name: str
    layout: SystemLayout
    psd: bool = False

    def __repr__(self):
        return f"Variable({self.name!r}, dims={self.layout.dims}, psd={self.psd})"


@dataclass(eq=False)
class Constant(Expr):
    value: np.ndarray
    layout: SystemLayout

    def __post_init__(self):
        self.value = np.asarray(self.value, dtype=complex)
        if self.value.shape != (self.layout.dim, self.layout.dim):
            raise ValueError("constant shape does not match its layout")


@dataclass(eq=False)
class Scale(Expr):
    coef: float
    arg: Expr

    def __post_init__(self):
        self.layout = self.arg.layout

    def children(self):
        return (self.arg,)


@dataclass(eq=False)
class Sum(Expr):
    terms: tuple[Expr, ...]

    def __post_init__(self):
        first = self.terms[0].layout
        for t in self.terms[1:]:
            if not t.layout.same_space(first):
                raise ValueError(f"cannot add {t.layout.labels} to {first.labels}")
        self.layout = first

    def children(self):
        return self.terms


@dataclass(eq=False)
class PartialTranspose(Expr):
    arg: Expr
    labels: tuple[str, ...]

    def __post_init__(self):
        self.arg.layout.check_labels(self.labels)
        self.layout = self.arg.layout

    def children(self):
        return (self.arg,)


@dataclass(eq=False)
class PartialTrace(Expr):
    arg: Expr
    labels: tuple[str, ...]

    def __post_init__(self):
        self.layout = self.arg.layout.without(self.labels)

    def children(self):
        return (self.arg,)


@dataclass(eq=False)
class TensorIdentity(Expr):
    """``arg ⊗ I`` placed into ``layout``; ``arg``'s factors must be a subset."""

    arg: Expr
    layout: SystemLayout

    def __post_init__(self):
        for lab, d in self.arg.layout.factors:
            if self.layout.dim_of(lab) != d:
                raise ValueError(f"factor {lab!r} changes dimension")
        inner = list(self.arg.layout.labels)
        extra = [lab for lab in self.layout.labels if lab not in inner]
        current = inner + extra
        self._extra_dim = int(np.prod([self.layout.dim_of(l) for l in extra], dtype=int))
        self._current_dims = [self.layout.dim_of(l) for l in current]
        self._perm = [current.index(lab) for lab in self.layout.labels]

    def children(self):
        return (self.arg,)


@dataclass(eq=False)
class InnerProduct(Expr):
    """Scalar ``Tr(C X)`` with ``C`` constant; a 1x1 expression."""

    const: "Constant"
    arg: Expr

    def __post_init__(self):
        if not isinstance(self.const, Constant):
            raise TypeError("inner products need a constant left operand")
        if not self.const.layout.same_space(self.arg.layout):
            raise ValueError("inner product of operators on different spaces")
        self.layout = SCALAR

    def children(self):
        return (self.arg,)


# -- numpy evaluation -----------------------------------------------------------


def evaluate(expr: Expr, values: dict[str, np.ndarray]) -> np.ndarray:
    """Evaluate ``expr`` with variable matrices from ``values`` (missing ones = 0)."""
    if isinstance(expr, Variable):
        v = values.get(expr.name)
        if v is None:
            return np.zeros((expr.layout.dim, expr.layout.dim), dtype=complex)
        return np.asarray(v, dtype=complex).reshape(expr.layout.dim, expr.layout.dim)
    if isinstance(expr, Constant):
        return expr.value
    if isinstance(expr, Scale):
        return expr.coef * evaluate(expr.arg, values)
    if isinstance(expr, Sum):
        return sum(evaluate(t, values) for t in expr.terms)
    if isinstance(expr, PartialTranspose):
        lay = expr.arg.layout
        return ptranspose_array(
            evaluate(expr.arg, values), lay.dims, [lay.index(l) for l in expr.labels]
        )
    if isinstance(expr, PartialTrace):
        lay = expr.arg.layout
        return ptrace_array(
            evaluate(expr.arg, values), lay.dims, [lay.index(l) for l in expr.labels]
        )
    if isinstance(expr, TensorIdentity):
        m = np.kron(evaluate(expr.arg, values), np.eye(expr._extra_dim))
        return permute_array(m, expr._current_dims, expr._perm)
    if isinstance(expr, InnerProduct):
        return np.array([[np.sum(expr.const.value.T * evaluate(expr.arg, values))]])
    raise TypeError(f"unknown expression node {type(expr).__name__}")


def adjoint(expr: Expr, z: np.ndarray, out: dict[str, np.ndarray] | None = None) -> dict[str, np.ndarray]:
    """Back-propagate ``z`` through the linear part of ``expr``.

    Returns ``{name: G}`` with ``Re<z, expr(X) - expr(0)> = sum Re<G_name, X_name>``
    under the inner product ``Re Tr(A^dagger B)``.
    """
    out = {} if out is None else out
    z = np.asarray(z, dtype=complex)
    if isinstance(expr, Variable):
        out[expr.name] = out.get(expr.name, 0) + z
    elif isinstance(expr, Constant):
        pass
    elif isinstance(expr, Scale):
        adjoint(expr.arg, expr.coef * z, out)
    elif isinstance(expr, Sum):
        for t in expr.terms:
            adjoint(t, z, out)
    elif isinstance(expr, PartialTranspose):
        lay = expr.arg.layout
        adjoint(expr.arg, ptranspose_array(z, lay.dims, [lay.index(l) for l in expr.labels]), out)
    elif isinstance(expr, PartialTrace):
        lay = expr.arg.layout
        adjoint(expr.arg, evaluate(TensorIdentity(Constant(z, expr.layout), lay), {}), out)
    elif isinstance(expr, TensorIdentity):
        inverse = [expr._perm.index(k) for k in range(len(expr._perm))]
        dims_out = [expr._current_dims[p] for p in expr._perm]
        back = permute_array(z, dims_out, inverse)
        inner_dim = expr.arg.layout.dim
        back = back.reshape(inner_dim, expr._extra_dim, inner_dim, expr._extra_dim)
        adjoint(expr.arg, np.einsum("ikjk->ij", back), out)
    elif isinstance(expr, InnerProduct):
        # Re conj(z) Tr(C X) = Re<z C^dagger, X>
        adjoint(expr.arg, z[0, 0] * expr.const.value.conj().T, out)
    else:
        raise TypeError(f"unknown expression node {type(expr).__name__}")
    return out


def _linear_batch(expr: Expr, name: str, x: np.ndarray) -> np.ndarray | None:
    """Linear part of ``expr`` applied to a stack ``x`` of values of variable ``name``.

    ``x`` has shape ``(k, n, n)``; the result has shape ``(k, m, m)``, or is
    ``None`` when ``expr`` does not depend on ``name``.
    """
    if isinstance(expr, Variable):
        return x if expr.name == name else None
    if isinstance(expr, Constant):
        return None
    if isinstance(expr, Scale):
        r = _linear_batch(expr.arg, name, x)
        return None if r is None else expr.coef * r
    if isinstance(expr, Sum):
        out = None
        for t in expr.terms:
            r = _linear_batch(t, name, x)
            if r is not None:
                out = r if out is None else out + r
        return out
    r = _linear_batch(expr.children()[0], name, x)
    if r is None:
        return None
    if isinstance(expr, PartialTranspose):
        lay = expr.arg.layout
        return ptranspose_array(r, lay.dims, [lay.index(l) for l in expr.labels])
    if isinstance(expr, PartialTrace):
        lay = expr.arg.layout
        return ptrace_array(r, lay.dims, [lay.index(l) for l in expr.labels])
    if isinstance(expr, TensorIdentity):
        k, a = r.shape[0], r.shape[1]
        e = expr._extra_dim
        big = (r[:, :, None, :, None] * np.eye(e)[None, None, :, None, :]).reshape(k, a * e, a * e)
        return permute_array(big, expr._current_dims, expr._perm)
    if isinstance(expr, InnerProduct):
        return np.einsum("ij,kji->k", expr.const.value, r).reshape(-1, 1, 1)
    raise TypeError(f"unknown expression node {type(expr).__name__}")


@dataclass
class _Compiled:
    program: ConeProgram
    offsets: dict[str, slice]
    psd_blocks: list[int]  # block index of each constraint (-1 for equalities)
    eq_rows: list[slice | None]


def to_cone_program(problem: SdpProblem) -> _Compiled:
    """Write ``problem`` in the standard form used by :mod:`entmeter.ipm`.

    ``x`` stacks the ``svec`` coordinates of all variables; each PSD variable
    and each ``⪰`` constraint becomes a Hermitian cone block, each equality
    contributes ``svec`` rows of ``A``.  A maximization is handed over as the
    minimization of the negated objective.
    """
    offsets: dict[str, slice] = {}
    n = 0
    for name, v in problem.variables.items():
        d = v.layout.dim
        offsets[name] = slice(n, n + d * d)
        n += d * d
    sign = 1.0 if problem.sense == "min" else -1.0

    def rows(expr: Expr):
        """(const svec, {var: svec-columns}) of a Hermitian expression."""
        const = ipm.svec(evaluate(expr, {}))
        cols = {}
        for name in expr.variables():
            d = problem.variables[name].layout.dim
            r = _linear_batch(expr, name, ipm.hermitian_basis(d))
            if r is not None:
                cols[name] = ipm.svec(r).T
        return const, cols

    def dense_block(cols: dict) -> tuple[np.ndarray, np.ndarray]:
        names = [nm for nm in problem.variables if nm in cols]
        idx = np.concatenate([np.arange(offsets[nm].start, offsets[nm].stop) for nm in names])
        return idx, np.hstack([cols[nm] for nm in names])

    c = np.zeros(n)
    c0_vec, obj_cols = rows(problem.objective)
    for name, col in obj_cols.items():
        c[offsets[name]] = sign * col[0]
    c0 = sign * float(c0_vec[0])

    blocks: list[ipm.ConeBlock] = []
    for name, v in problem.variables.items():
        if v.psd:
            d = v.layout.dim
            blocks.append(ipm.ConeBlock(d, np.arange(offsets[name].start, offsets[name].stop),
                                        -np.eye(d * d), np.zeros(d * d)))
    psd_blocks, eq_rows = [], []
    a_rows, b_rows = [], []
    p = 0
    for con in problem.constraints:
        const, cols = rows(con.expr)
        if not cols:
            raise ValueError(f"constraint {con.name!r} does not involve any variable")
        idx, g = dense_block(cols)
        if con.kind == "psd":
            psd_blocks.append(len(blocks))
            eq_rows.append(None)
            blocks.append(ipm.ConeBlock(con.expr.layout.dim, idx, -g, const))
        else:
            full = np.zeros((len(const), n))
            full[:, idx] = g
            a_rows.append(full)
            b_rows.append(-const)
            psd_blocks.append(-1)
            eq_rows.append(slice(p, p + len(const)))
            p += len(const)
    a = np.vstack(a_rows) if a_rows else np.zeros((0, n))
    b = np.concatenate(b_rows) if b_rows else np.zeros(0)
    return _Compiled(ipm.ConeProgram(n, c, blocks, a, b, c0), offsets, psd_blocks, eq_rows)


# -- cvxpy compilation ------------------------------------------------------------
#
# Every node is compiled to a pair (real part, imaginary part) of real cvxpy
# expressions; ``None`` stands for an identically zero imaginary part.  All
# node maps except the inner product are real-linear and commute with complex
# conjugation, so they act on the two parts independently.


def _cvx_variable(var: "Variable"):
    n = var.layout.dim
    if n == 1:
        return cp.Variable((1, 1), name=var.name, nonneg=var.psd), None
    re = cp.Variable((n, n), symmetric=True, name=f"{var.name}_re")
    m = n * (n - 1) // 2
    iu = np.triu_indices(n, 1)
    # skew-symmetric imaginary part from its strict upper triangle
    lift = np.zeros((n * n, m))
    for k, (i, j) in enumerate(zip(*iu)):
        lift[i + j * n, k] = 1.0
        lift[j + i * n, k] = -1.0
    im_vec = cp.Variable(m, name=f"{var.name}_im")
    im = cp.reshape(lift @ im_vec, (n, n), order="F")
    return re, im, im_vec


def _map_parts(parts, fn):
    re, im = parts
    return fn(re), (None if im is None else fn(im))


def _compile(expr: Expr, cvars: dict, cache: dict[int, object]):
    key = id(expr)
    if key in cache:
        return cache[key]
    if isinstance(expr, Variable):
        out = cvars[expr.name][:2]
    elif isinstance(expr, Constant):
        v = expr.value
        out = (v.real, v.imag if np.any(v.imag) else None)
    elif isinstance(expr, Scale):
        out = _map_parts(_compile(expr.arg, cvars, cache), lambda x: expr.coef * x)
    elif isinstance(expr, Sum):
        parts = [_compile(t, cvars, cache) for t in expr.terms]
        re = parts[0][0]
        for p in parts[1:]:
            re = re + p[0]
        ims = [p[1] for p in parts if p[1] is not None]
        im = None
        for p in ims:
            im = p if im is None else im + p
        out = (re, im)
    elif isinstance(expr, PartialTranspose):
        lay = expr.arg.layout
        axes = [lay.index(l) for l in expr.labels if lay.dim_of(l) > 1]
        out = _compile(expr.arg, cvars, cache)
        for i in axes:
            out = _map_parts(out, lambda x, i=i: _ptranspose(x, lay.dims, i))
    elif isinstance(expr, PartialTrace):
        lay = expr.arg.layout
        out = _compile(expr.arg, cvars, cache)
        dims = list(lay.dims)
        for i in sorted((lay.index(l) for l in expr.labels), reverse=True):
            if dims[i] > 1:
                out = _map_parts(out, lambda x, i=i, d=tuple(dims): _ptrace(x, d, i))
            del dims[i]
    elif isinstance(expr, TensorIdentity):
        out = _compile(expr.arg, cvars, cache)
        k = expr._extra_dim
        if k > 1:
            if expr.arg.layout.dim == 1:
                out = _map_parts(out, lambda x: x[0, 0] * np.eye(k))
            else:
                out = _map_parts(out, lambda x: _kron_identity(x, k))
        if expr._perm != sorted(expr._perm):
            P = permutation_matrix(expr._current_dims, expr._perm)
            out = _map_parts(out, lambda x: P @ x @ P.T)
    elif isinstance(expr, InnerProduct):
        # Re Tr(C X) = Tr(C_re X_re^T) ... written with elementwise products:
        # Tr(C X) = sum_ij C_ij X_ji = sum (C^T * X)
        re, im = _compile(expr.arg, cvars, cache)
        c = expr.const.value.T
        val = cp.sum(cp.multiply(c.real, re))
        if im is not None and np.any(c.imag):
            val = val - cp.sum(cp.multiply(c.imag, im))
        out = (cp.reshape(val, (1, 1), order="F"), None)
    else:
        raise TypeError(f"unknown expression node {type(expr).__name__}")
    cache[key] = out
    return out


def _is_const(x) -> bool:
    return isinstance(x, np.ndarray)


def _ptranspose(x, dims, axis):
    if _is_const(x):
        return ptranspose_array(x, dims, [axis]).real
    return cp.partial_transpose(x, list(dims), axis)


def _ptrace(x, dims, axis):
    if _is_const(x):
        return ptrace_array(x, dims, [axis]).real
    out = cp.partial_trace(x, list(dims), axis=axis)
    if len(dims) == 1:
        out = cp.reshape(out, (1, 1), order="F")
    return out


def _kron_identity(x, k):
    if _is_const(x):
        return np.kron(x, np.eye(k))
    return cp.kron(x, np.eye(k))


# -- problems ---------------------------------------------------------------------


@dataclass(eq=False)
class Constraint:
    """``expr ⪰ 0`` (kind ``"psd"``) or ``expr == 0`` (kind ``"eq"``)."""

    expr: Expr
    kind: str
    name: str = ""

    def __post_init__(self):
        if self.kind not in ("psd", "eq"):
            raise ValueError(f"unknown constraint kind {self.kind!r}")


@dataclass
class SdpProblem:
    """A Hermitian-cone program assembled from :class:`Expr` pieces."""

    name: str = "sdp"
    sense: str = "min"
    variables: dict[str, Variable] = field(default_factory=dict)
    constraints: list[Constraint] = field(default_factory=list)
    objective: Expr | None = None

    def variable(self, name: str, layout: SystemLayout, psd: bool = False) -> Variable:
        if name in self.variables:
            raise ValueError(f"variable {name!r} already declared")
        v = Variable(name, layout, psd)
        self.variables[name] = v
        return v

    def scalar(self, name: str, nonneg: bool = False) -> Variable:
        return self.variable(name, SCALAR, psd=nonneg)

    def _check(self, expr: Expr):
        unknown = set(expr.variables()) - set(self.variables)
        if unknown:
            raise ValueError(f"expression uses undeclared variables {sorted(unknown)}")

    def psd(self, expr, name: str = "") -> Constraint:
        """Add ``expr ⪰ 0``."""
        expr = as_expr(expr)
        self._check(expr)
        c = Constraint(expr, "psd", name or f"c{len(self.constraints)}")
        self.constraints.append(c)
        return c

    def geq(self, lhs, rhs, name: str = "") -> Constraint:
        """Add ``lhs ⪰ rhs``."""
        lhs = as_expr(lhs, getattr(rhs, "layout", None))
        return self.psd(lhs - as_expr(rhs, lhs.layout), name)

    def equal(self, lhs, rhs, name: str = "") -> Constraint:
        lhs = as_expr(lhs, getattr(rhs, "layout", None))
        expr = lhs - as_expr(rhs, lhs.layout)
        self._check(expr)
        c = Constraint(expr, "eq", name or f"c{len(self.constraints)}")
        self.constraints.append(c)
        return c

    def minimize(self, expr):
        self._set_objective(expr, "min")

    def maximize(self, expr):
        self._set_objective(expr, "max")

    def _set_objective(self, expr, sense):
        expr = as_expr(expr)
        if expr.layout.dim != 1:
            expr = expr.trace()
        self._check(expr)
        self.objective = expr
        self.sense = sense

    def objective_value(self, values: dict[str, np.ndarray]) -> float:
        return float(evaluate(self.objective, values)[0, 0].real)


def inf_norm_epigraph(problem: SdpProblem, expr: Expr, name: str = "t", psd: bool = False) -> Variable:
    """Add a scalar ``t`` with ``-tI ⪯ expr ⪯ tI`` and return it.

    When ``expr`` is positive semi-definite by construction only the upper
    bound is needed; minimizing ``t`` then yields ``||expr||_inf``.
    """
    t = problem.scalar(name, nonneg=psd)
    tI = t.tensor_identity(expr.layout)
    problem.geq(tI, expr, name=f"{name}_upper")
    if not psd:
        problem.geq(expr, -tI, name=f"{name}_lower")
    return t


# -- solutions --------------------------------------------------------------------


@dataclass
class SdpSolution:
    status: str
    primal_value: float
    dual_value: float
    gap: float
    variable_values: dict[str, HermitianOperator]
    iterations: int
    primal_infeasibility: float = float("nan")
    dual_infeasibility: float = float("nan")
    complementarity: float = float("nan")
    equality_realization: str = "native"
    solver: str = ""
    solver_status: str = ""

    @property
    def optimal(self) -> bool:
        return self.status == OPTIMAL

    @property
    def value(self) -> float:
        return self.primal_value

    @property
    def relative_gap(self) -> float:
        return abs(self.primal_value - self.dual_value) / max(1.0, abs(self.primal_value))

    def summary(self) -> dict:
        return {
            "status": self.status,
            "primal_value": self.primal_value,
            "dual_value": self.dual_value,
            "gap": self.gap,
            "iterations": self.iterations,
            "primal_infeasibility": self.primal_infeasibility,
            "dual_infeasibility": self.dual_infeasibility,
            "complementarity": self.complementarity,
            "solver": self.solver,
        }


def _threads() -> int | None:
    raw = os.environ.get("ENTMETER_THREADS")
    if not raw:
        return None
    try:
        n = int(raw)
    except ValueError:
        log.warning("ignoring non-integer ENTMETER_THREADS=%r", raw)
        return None
    return n if n > 0 else None


def _hermitian_inner(a: np.ndarray, b: np.ndarray) -> float:
    return float(np.real(np.vdot(a, b)))


def solve(
    problem: SdpProblem,
    gap_tol: float = GAP_TOL,
    feas_tol: float = FEAS_TOL,
    max_iter: int = MAX_ITER,
    solver: str = "auto",
) -> SdpSolution:
    """Solve ``problem`` and audit the result.

    ``solver`` is ``"native"`` (the dense Hermitian interior-point method of
    :mod:`entmeter.ipm`), ``"clarabel"`` (cvxpy with Clarabel on the real
    embedding, retried with the settings in :data:`CLARABEL_FALLBACKS`),
    ``"scs"``, or ``"auto"``: native first, Clarabel if the native run does
    not produce an accepted point.  The status is ``optimal`` only if the
    audited relative gap is at most ``gap_tol`` and every constraint holds
    within ``feas_tol`` (relative to the size of its constant data); anything
    else is reported, never silently accepted.
    """
    if gap_tol <= 0 or feas_tol <= 0 or max_iter < 1:
        raise ValueError("tolerances must be positive and max_iter >= 1")
    if problem.objective is None:
        raise ValueError("problem has no objective")
    key = solver.lower()
    if key not in SOLVERS:
        raise ValueError(f"unknown solver {solver!r}; choose from {', '.join(SOLVERS)}")

    if key in ("auto", "native"):
        result = _solve_native(problem, gap_tol, feas_tol, max_iter)
        if key == "native" or result.status in (OPTIMAL, INFEASIBLE, UNBOUNDED):
            return result
        log.info("%s: native solver ended %s (rel. gap %.2e); trying Clarabel",
                 problem.name, result.solver_status, result.relative_gap)
        key = "clarabel"

    base: dict = {}
    if key == "clarabel":
        base = dict(tol_gap_abs=gap_tol / 10, tol_gap_rel=gap_tol / 10,
                    tol_feas=feas_tol / 10, max_iter=max_iter)
        threads = _threads()
        if threads:
            base["max_threads"] = threads
        ladder = CLARABEL_FALLBACKS
    else:
        base = dict(eps_abs=gap_tol, eps_rel=gap_tol, max_iters=max_iter * 100)
        ladder = ({},)

    result = None
    for extra in ladder:
        extra = dict(extra)
        scale = extra.pop("objective_scale", 1.0)
        # a fresh cvxpy problem per attempt: re-solving a cached one may keep
        # the previous solver settings
        prob, cvars, handles, sign = _build(problem, scale)
        result = _attempt(problem, prob, cvars, handles, sign, key.upper(), {**base, **extra},
                          gap_tol, feas_tol, scale)
        if result.status in (OPTIMAL, INFEASIBLE, UNBOUNDED):
            break
        log.info("%s: retrying with %s", problem.name, extra or "defaults")
    return result


SOLVERS = ("auto", "native", "clarabel", "scs")


def _solve_native(problem: SdpProblem, gap_tol: float, feas_tol: float, max_iter: int) -> SdpSolution:
    comp = to_cone_program(problem)
    sign = 1.0 if problem.sense == "min" else -1.0
    res = ipm.solve_cone(comp.program, gap_tol / 10, feas_tol / 10, max_iter)
    name = "native"
    if res.status == ipm.PRIMAL_INFEASIBLE:
        return SdpSolution(INFEASIBLE, sign * np.inf, sign * np.inf, np.nan, {}, res.iterations,
                           solver=name, solver_status=res.status)
    if res.status == ipm.DUAL_INFEASIBLE:
        return SdpSolution(UNBOUNDED, -sign * np.inf, -sign * np.inf, np.nan, {}, res.iterations,
                           solver=name, solver_status=res.status)
    values = {}
    for vname, v in problem.variables.items():
        values[vname] = ipm.smat(res.x[comp.offsets[vname]], v.layout.dim)
    multipliers = []
    for con, blk, rows in zip(problem.constraints, comp.psd_blocks, comp.eq_rows):
        d = con.expr.layout.dim
        if con.kind == "psd":
            multipliers.append(ipm.smat(res.z[blk], d))
        else:
            multipliers.append(ipm.smat(res.y[rows], d))
    return _finish(problem, values, multipliers, sign, res.iterations, name, res.status,
                   gap_tol, feas_tol, True)


def _finish(problem, values, multipliers, sign, iters, solver, solver_status,
            gap_tol, feas_tol, solver_ok: bool) -> SdpSolution:
    audit = _audit(problem, values, multipliers, sign)
    primal = problem.objective_value(values)
    dual = audit["dual_value"]
    rel_gap = abs(primal - dual) / max(1.0, abs(primal))
    ok = (
        solver_ok
        and np.isfinite(dual)
        and rel_gap <= gap_tol
        and audit["primal_infeasibility"] <= feas_tol
    )
    status = OPTIMAL if ok else NUMERICAL_FAILURE
    if not ok:
        log.info(
            "%s: %s ended %s, rel_gap=%.2e infeas=%.2e -> %s",
            problem.name, solver, solver_status, rel_gap, audit["primal_infeasibility"], status,
        )
    return SdpSolution(
        status=status,
        primal_value=primal,
        dual_value=dual,
        gap=abs(primal - dual),
        variable_values={n: HermitianOperator(m, problem.variables[n].layout, atol=1e-6)
                         for n, m in values.items()},
        iterations=iters,
        primal_infeasibility=audit["primal_infeasibility"],
        dual_infeasibility=audit["dual_infeasibility"],
        complementarity=audit["complementarity"],
        solver=solver,
        solver_status=solver_status,
    )


def _build(problem: SdpProblem, scale: float = 1.0):
    cvars = {name: _cvx_variable(v) for name, v in problem.variables.items()}
    cache: dict[int, object] = {}
    cons, handles = [], []
    for name, v in problem.variables.items():
        if v.psd and v.layout.dim > 1:
            re, im = cvars[name][:2]
            cons.append(cp.bmat([[re, -im], [im, re]]) >> 0)
    for c in problem.constraints:
        re, im = _compile(c.expr, cvars, cache)
        n = c.expr.layout.dim
        if _is_const(re) and (im is None or _is_const(im)):
            raise ValueError(f"constraint {c.name!r} does not involve any variable")
        if c.kind == "eq":
            if n == 1:
                h = [re == 0]
            else:
                h = [cp.diag(re) == 0, cp.upper_tri(re) == 0]
                if im is not None:
                    h.append(cp.upper_tri(im) == 0)
        elif n == 1:
            h = [re >= 0]
        else:
            im_ = im if im is not None else np.zeros((n, n))
            h = [cp.bmat([[re, -im_], [im_, re]]) >> 0]
        cons.extend(h)
        handles.append(h)
    obj = cp.sum(_compile(problem.objective, cvars, cache)[0])
    sign = 1.0 if problem.sense == "min" else -1.0
    prob = cp.Problem(cp.Minimize(scale * sign * obj), cons)

    return prob, cvars, handles, sign


# Settings tried in order until the audit accepts the point.  The first entry is
# the solver default; the others help on degenerate problems where the default
# run stops short of the requested accuracy.  ``objective_scale`` multiplies the
# objective handed to the solver (multipliers are rescaled back in the audit);
# it changes the iterate path and often gets past a stalled final step.
CLARABEL_FALLBACKS = (
    {},
    {"objective_scale": 4.0},
    {"objective_scale": 0.25},
    {"max_step_fraction": 0.9},
    {"equilibrate_enable": False},
    {"max_step_fraction": 0.8, "dynamic_regularization_enable": False},
    {"dynamic_regularization_enable": False},
    {"equilibrate_enable": False, "dynamic_regularization_enable": False},
    {"equilibrate_enable": False, "max_step_fraction": 0.9},
)


def _attempt(problem, prob, cvars, handles, sign, solver, opts, gap_tol, feas_tol, scale=1.0) -> SdpSolution:
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", UserWarning)
            prob.solve(solver=solver, **opts)
    except cp.error.SolverError as exc:
        log.warning("solver failed on %s: %s", problem.name, exc)
        return SdpSolution(NUMERICAL_FAILURE, np.nan, np.nan, np.nan, {}, 0,
                           solver=solver, solver_status="error")
    stats = prob.solver_stats
    iters = int(stats.num_iters or 0) if stats is not None else 0
    raw_status = prob.status
    if raw_status in (cp.INFEASIBLE, cp.INFEASIBLE_INACCURATE):
        return SdpSolution(INFEASIBLE, sign * np.inf, sign * np.inf, np.nan, {}, iters,
                           solver=solver, solver_status=raw_status)
    if raw_status in (cp.UNBOUNDED, cp.UNBOUNDED_INACCURATE):
        return SdpSolution(UNBOUNDED, -sign * np.inf, -sign * np.inf, np.nan, {}, iters,
                           solver=solver, solver_status=raw_status)

    values = {}
    for name, v in problem.variables.items():
        re, im = cvars[name][:2]
        if re.value is None:
            return SdpSolution(NUMERICAL_FAILURE, np.nan, np.nan, np.nan, {}, iters,
                               solver=solver, solver_status=raw_status)
        m = np.asarray(re.value, dtype=complex).reshape(v.layout.dim, v.layout.dim)
        if im is not None:
            m = m + 1j * np.asarray(im.value)
        values[name] = (m + m.conj().T) / 2

    multipliers = []
    for c, h in zip(problem.constraints, handles):
        if any(x.dual_value is None for x in h):
            multipliers.append(None)
        else:
            multipliers.append(_complex_multiplier(c.kind, c.expr.layout.dim, h) / scale)
    ok = raw_status in (cp.OPTIMAL, cp.OPTIMAL_INACCURATE)
    return _finish(problem, values, multipliers, sign, iters, solver, raw_status,
                   gap_tol, feas_tol, ok)


def _complex_multiplier(kind: str, n: int, handle) -> np.ndarray:
    """Hermitian ``Z`` such that the solver's Lagrangian term is ``Re<Z, E>``."""
    if kind == "psd":
        if n == 1:
            return np.array([[float(np.squeeze(handle[0].dual_value))]], dtype=complex)
        big = np.asarray(handle[0].dual_value, dtype=float)
        z11, z12, z21, z22 = big[:n, :n], big[:n, n:], big[n:, :n], big[n:, n:]
        return (z11 + z22) + 1j * (z21 - z12)
    if n == 1:
        return np.array([[float(np.squeeze(handle[0].dual_value))]], dtype=complex)
    # equality rows: diag(re), strict upper of re, strict upper of im.
    # cvxpy's Lagrangian for "g == 0" is + y * g.
    z = np.zeros((n, n), dtype=complex)
    z[np.diag_indices(n)] = np.asarray(handle[0].dual_value).reshape(-1)
    iu = np.triu_indices(n, 1)
    up = np.asarray(handle[1].dual_value).reshape(-1) / 2
    z[iu] += up
    z[(iu[1], iu[0])] += up
    if len(handle) > 2:
        ui = np.asarray(handle[2].dual_value).reshape(-1) / 2
        z[iu] += 1j * ui
        z[(iu[1], iu[0])] -= 1j * ui
    return z


def _audit(problem: SdpProblem, values, duals, sign) -> dict:
    """Recompute feasibility and the Lagrangian dual bound from multipliers.

    For ``min c(x)`` s.t. ``G_i(x) ⪰ 0`` and ``E_j(x) = 0`` with multipliers
    ``Z_i ⪰ 0`` and ``W_j``, the Lagrangian is
    ``c(x) - Σ<Z_i, G_i(x)> + Σ<W_j, E_j(x)>``.  It is affine in ``x``; its
    constant part is the dual objective.  Its linear part, per variable, is
    the dual slack: it must vanish for free variables and be PSD for
    variables declared PSD.
    """
    zero: dict[str, np.ndarray] = {}
    infeas = 0.0
    comp = 0.0
    dual_const = sign * problem.objective_value(zero)
    multipliers = []
    for c, z in zip(problem.constraints, duals):
        n = c.expr.layout.dim
        at_x = evaluate(c.expr, values)
        const = evaluate(c.expr, zero)
        scale = max(1.0, float(np.max(np.abs(const))))
        if z is None:
            z = np.full((n, n), np.nan, dtype=complex)
        if c.kind == "psd":
            lam = np.linalg.eigvalsh((at_x + at_x.conj().T) / 2)[0]
            infeas = max(infeas, max(0.0, -float(lam)) / scale)
            dual_const -= _hermitian_inner(z, const)
            comp = max(comp, abs(_hermitian_inner(z, at_x)))
            multipliers.append((c, -z))
        else:
            infeas = max(infeas, float(np.max(np.abs(at_x))) / scale)
            dual_const += _hermitian_inner(z, const)
            multipliers.append((c, z))

    grads: dict[str, np.ndarray] = {}
    adjoint(problem.objective, np.array([[sign]], dtype=complex), grads)
    for c, z in multipliers:
        adjoint(c.expr, z, grads)
    dual_infeas = 0.0
    for name, var in problem.variables.items():
        n = var.layout.dim
        g = np.asarray(grads.get(name, np.zeros((n, n))), dtype=complex).reshape(n, n)
        g = (g + g.conj().T) / 2
        if var.psd:
            lam = float(np.linalg.eigvalsh(g)[0])
            dual_infeas = max(dual_infeas, max(0.0, -lam))
            comp = max(comp, abs(_hermitian_inner(g, values[name])))
        else:
            dual_infeas = max(dual_infeas, float(np.max(np.abs(g))))
    return {
        "dual_value": sign * dual_const,
        "primal_infeasibility": infeas,
        "dual_infeasibility": dual_infeas,
        "complementarity": comp,
    }


def _hermitian_basis(n: int):
    for a in range(n):
        e = np.zeros((n, n), dtype=complex)
        e[a, a] = 1.0
        yield a, a, e
    for a in range(n):
        for b in range(a + 1, n):
            e = np.zeros((n, n), dtype=complex)
            e[a, b] = e[b, a] = 1.0
            yield a, b, e
            f = np.zeros((n, n), dtype=complex)
            f[a, b] = 1j
            f[b, a] = -1j
            yield a, b, f


# -- real embedding and diagnostics -----------------------------------------------


def embed_real(h) -> np.ndarray:
    """Map a Hermitian ``H`` to the real symmetric ``[[Re H, -Im H], [Im H, Re H]]``.

    The spectrum is preserved with doubled multiplicity, so ``H ⪰ 0`` iff the
    embedding is; traces double, which is why embedded objectives are scaled
    by 1/2 (see :func:`embedded_objective_scale`).
    """
    m = h.matrix if isinstance(h, HermitianOperator) else np.asarray(h, dtype=complex)
    return np.block([[m.real, -m.imag], [m.imag, m.real]])


def unembed_real(s: np.ndarray) -> np.ndarray:
    n = s.shape[0] // 2
    return (s[:n, :n] + s[n:, n:]) / 2 + 1j * (s[n:, :n] - s[:n, n:]) / 2


def embedded_objective_scale() -> float:
    return 0.5


@dataclass
class RealConeProgram:
    """Real symmetric form of an :class:`SdpProblem`.

    Each Hermitian variable ``X`` becomes ``S = embed_real(X)`` and is also
    indexed by real coordinates (one per Hermitian basis element, listed in
    ``columns``).  The objective is ``c0 + 1/2 * sum Tr(C_v S_v)``: the factor
    1/2 undoes the doubled trace of the embedding.  Constraint ``i`` reads
    ``F0 + sum_k x_k F_k`` in the PSD cone (``psd``) or equal to zero (``eq``).
    """

    sense: str
    columns: list[tuple[str, int, int, str]]
    c0: float
    objective: dict[str, np.ndarray]
    objective_scale: float
    blocks: list[tuple[str, str, np.ndarray, list[np.ndarray]]]
    variable_cones: dict[str, bool]

    def objective_value(self, embedded: dict[str, np.ndarray]) -> float:
        return self.c0 + self.objective_scale * sum(
            float(np.trace(self.objective[n] @ embedded[n])) for n in self.objective
        )


def embed_problem(problem: SdpProblem) -> RealConeProgram:
    if problem.objective is None:
        raise ValueError("problem has no objective")
    zero: dict[str, np.ndarray] = {}
    columns, probes = [], []
    for name, var in problem.variables.items():
        for a, b, unit in _hermitian_basis(var.layout.dim):
            part = "re" if np.isreal(unit[a, b]) else "im"
            columns.append((name, a, b, part))
            probes.append({name: unit})
    grads = adjoint(problem.objective, np.ones((1, 1), dtype=complex))
    objective = {}
    for name, var in problem.variables.items():
        g = np.asarray(grads.get(name, np.zeros((var.layout.dim,) * 2)), dtype=complex)
        objective[name] = embed_real((g + g.conj().T) / 2)
    blocks = []
    for con in problem.constraints:
        f0 = evaluate(con.expr, zero)
        fk = [embed_real(evaluate(con.expr, p) - f0) for p in probes]
        blocks.append((con.name, con.kind, embed_real(f0), fk))
    return RealConeProgram(
        sense=problem.sense,
        columns=columns,
        c0=problem.objective_value(zero),
        objective=objective,
        objective_scale=embedded_objective_scale(),
        blocks=blocks,
        variable_cones={n: v.psd for n, v in problem.variables.items()},
    )


def dump_problem(problem: SdpProblem, stream: io.TextIOBase | None = None) -> str:
    """Write a self-describing text dump of the real-embedded program.

    Format (one item per line, ``#`` starts a comment)::

        sdp <name> sense <min|max>
        variable <name> dim <n> cone <psd|free> dims <d1,d2,...> labels <l1,...>
        objective <variable> scale 0.5 c0 <float> C <2n*2n floats row-major>
        constraint <name> kind <psd|eq> size <2m> nnz_columns <j>
        F0 <2m*2m floats row-major>
        F <column index> <2m*2m floats row-major>     # only nonzero columns
        end
    """
    prog = embed_problem(problem)
    out = stream or io.StringIO()
    fmt = lambda arr: " ".join(f"{v:.17g}" for v in np.ravel(arr))
    out.write(f"sdp {problem.name} sense {problem.sense}\n")
    for name, var in problem.variables.items():
        out.write(
            f"variable {name} dim {var.layout.dim} cone {'psd' if var.psd else 'free'} "
            f"dims {','.join(map(str, var.layout.dims)) or '-'} "
            f"labels {','.join(var.layout.labels) or '-'}\n"
        )
    for name, cmat in prog.objective.items():
        out.write(
            f"objective {name} scale {prog.objective_scale:g} c0 {prog.c0:.17g} C {fmt(cmat)}\n"
        )
    for name, kind, f0, fk in prog.blocks:
        nz = [j for j, f in enumerate(fk) if np.any(f)]
        out.write(f"constraint {name} kind {kind} size {f0.shape[0]} nnz_columns {len(nz)}\n")
        out.write(f"F0 {fmt(f0)}\n")
        for j in nz:
            out.write(f"F {j} {fmt(fk[j])}\n")
    out.write("end\n")
    if stream is None:
        return out.getvalue()
    return ""

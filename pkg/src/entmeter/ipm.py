"""Dense primal-dual interior-point method for Hermitian cone programs.

Programs are taken in the standard conic form

    minimize    c^T x
    subject to  G x + s = h,   A x = b,   s in K,

where ``x`` is a real vector and ``K`` is a product of cones of Hermitian
positive semi-definite matrices (a 1x1 block is the non-negative half-line).
Cone elements are stored as real vectors through the isometry :func:`svec`,
so inner products of cone vectors are plain dot products.

The iteration follows the homogeneous self-dual embedding with Nesterov-Todd
scaling and a Mehrotra predictor-corrector, so a run ends either with an
optimal pair or with a certificate of primal or dual infeasibility.  Working
on Hermitian blocks directly avoids the doubled spectra of real embeddings,
which slow down the final iterations of generic real-cone solvers.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.linalg import LinAlgError, LinAlgWarning, cholesky, lu_factor, lu_solve, solve_triangular

SQRT2 = math.sqrt(2.0)

OPTIMAL = "optimal"
PRIMAL_INFEASIBLE = "primal-infeasible"
DUAL_INFEASIBLE = "dual-infeasible"
MAX_ITERATIONS = "max-iterations"
STALLED = "stalled"


# -- Hermitian vectorization ------------------------------------------------------


@lru_cache(maxsize=None)
def _upper(d: int) -> tuple[np.ndarray, np.ndarray]:
    return np.triu_indices(d, 1)


def svec(m: np.ndarray) -> np.ndarray:
    """Coordinates of Hermitian ``m`` (shape ``(..., d, d)``) in an orthonormal basis.

    Order: the ``d`` diagonal entries, then ``sqrt2 Re m_ij`` and
    ``sqrt2 Im m_ij`` over the strict upper triangle.  ``svec(a) . svec(b)``
    equals ``Re Tr(a b)``.
    """
    d = m.shape[-1]
    iu, ju = _upper(d)
    diag = np.real(np.diagonal(m, axis1=-2, axis2=-1))
    up = m[..., iu, ju]
    return np.concatenate([diag, SQRT2 * up.real, SQRT2 * up.imag], axis=-1)


def smat(v: np.ndarray, d: int) -> np.ndarray:
    """Inverse of :func:`svec`."""
    v = np.asarray(v, dtype=float)
    iu, ju = _upper(d)
    k = len(iu)
    out = np.zeros(v.shape[:-1] + (d, d), dtype=complex)
    idx = np.arange(d)
    out[..., idx, idx] = v[..., :d]
    up = (v[..., d : d + k] + 1j * v[..., d + k :]) / SQRT2
    out[..., iu, ju] = up
    out[..., ju, iu] = up.conj()
    return out


@lru_cache(maxsize=None)
def hermitian_basis(d: int) -> np.ndarray:
    """The orthonormal basis behind :func:`svec`, shape ``(d*d, d, d)``."""
    return smat(np.eye(d * d), d)


# -- programs ---------------------------------------------------------------------


@dataclass
class ConeBlock:
    """Rows of ``G`` and ``h`` for one Hermitian cone of size ``dim``.

    ``cols`` lists the (distinct) entries of ``x`` the block depends on and
    ``g`` is the dense ``(dim*dim, len(cols))`` restriction of ``G`` to them.
    """

    dim: int
    cols: np.ndarray
    g: np.ndarray
    h: np.ndarray


@dataclass
class ConeProgram:
    n: int
    c: np.ndarray
    blocks: list[ConeBlock]
    a: np.ndarray
    b: np.ndarray
    c0: float = 0.0

    @property
    def degree(self) -> int:
        return sum(blk.dim for blk in self.blocks)

    def g_times(self, x: np.ndarray) -> list[np.ndarray]:
        return [blk.g @ x[blk.cols] for blk in self.blocks]

    def gt_times(self, zs: list[np.ndarray]) -> np.ndarray:
        out = np.zeros(self.n)
        for blk, z in zip(self.blocks, zs):
            out[blk.cols] += blk.g.T @ z
        return out


@dataclass
class ConeResult:
    status: str
    x: np.ndarray
    y: np.ndarray
    z: list[np.ndarray]
    s: list[np.ndarray]
    iterations: int
    primal_objective: float = math.nan
    dual_objective: float = math.nan
    primal_residual: float = math.nan
    dual_residual: float = math.nan
    history: list[dict] = field(default_factory=list)


# -- scaling ----------------------------------------------------------------------


@dataclass
class _Scaling:
    """Nesterov-Todd scaling ``R`` of one cone: ``R^* Z R = R^{-1} S R^{-*} = diag(lam)``."""

    r: np.ndarray
    rinv: np.ndarray
    lam: np.ndarray

    @classmethod
    def from_pair(cls, s: np.ndarray, z: np.ndarray) -> "_Scaling":
        ls = cholesky(s, lower=True)
        lz = cholesky(z, lower=True)
        u, sv, vh = np.linalg.svd(lz.conj().T @ ls)
        root = np.sqrt(sv)
        r = ls @ vh.conj().T / root
        rinv = (root[:, None] * vh) @ solve_triangular(ls, np.eye(len(sv)), lower=True)
        return cls(r, rinv, sv)

    def hinv_matrix(self) -> np.ndarray:
        """``svec`` matrix of ``U -> W^{-1} U W^{-1}`` with ``W = R R^*``."""
        d = len(self.lam)
        wi = self.rinv.conj().T @ self.rinv
        basis = hermitian_basis(d)
        return svec(wi @ basis @ wi)

    def scale_z(self, z: np.ndarray) -> np.ndarray:
        return self.r.conj().T @ z @ self.r

    def scale_s(self, s: np.ndarray) -> np.ndarray:
        return self.rinv @ s @ self.rinv.conj().T

    def unscale_s(self, u: np.ndarray) -> np.ndarray:
        return self.r @ u @ self.r.conj().T

    def unscale_z(self, u: np.ndarray) -> np.ndarray:
        return self.rinv.conj().T @ u @ self.rinv


def _jordan_div(lam: np.ndarray, d: np.ndarray) -> np.ndarray:
    """``X`` with ``(lam X + X lam) / 2 = d`` for diagonal ``lam``."""
    return 2.0 * d / (lam[:, None] + lam[None, :])


def _jordan(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return (a @ b + b @ a) / 2.0


def _max_step(lam: np.ndarray, m: np.ndarray) -> float:
    """Largest ``alpha`` with ``diag(lam) + alpha m ⪰ 0``."""
    li = 1.0 / np.sqrt(lam)
    w = np.linalg.eigvalsh(li[:, None] * m * li[None, :])[0]
    return math.inf if w >= 0 else -1.0 / w


def _herm(m: np.ndarray) -> np.ndarray:
    return (m + m.conj().T) / 2


def _pos_def(m: np.ndarray) -> bool:
    try:
        np.linalg.cholesky(m)
    except LinAlgError:
        return False
    return True


def _shift_into_cone(mats: list[np.ndarray]) -> list[np.ndarray]:
    worst = max(-np.linalg.eigvalsh(m)[0] for m in mats)
    if worst < 0:
        return mats
    return [m + (1.0 + worst) * np.eye(m.shape[0]) for m in mats]


# -- linear algebra ---------------------------------------------------------------


class _Kkt:
    """Solver for the Newton system of one scaling.

    The system

        [0  A^T  G^T] [dx]   [fx]
        [A  0    0  ] [dy] = [fy]
        [G  0   -H  ] [dz]   [fz]

    with ``H = W^T W`` is written in scaled form: with ``G~ = W^{-T} G`` and
    ``dz~ = W dz`` the last block row reads ``G~ dx - dz~ = W^{-T} fz``.

    The solve factors the reduced system ``[[G~^T G~, A^T], [A, 0]]`` and
    refines against the full scaled system.  Near the optimum the reduced
    matrix squares the conditioning; when refinement then stalls the full
    scaled system is factored instead, which costs more but stays accurate.
    """

    def __init__(self, prog: ConeProgram, scal: list["_Scaling"], reg: float = 1e-14, tol: float = 1e-12):
        n, p = prog.n, prog.a.shape[0]
        sizes = [blk.dim * blk.dim for blk in prog.blocks]
        total = n + p + sum(sizes)
        k = np.zeros((total, total))
        k[:n, n : n + p] = prog.a.T
        k[n : n + p, :n] = prog.a
        row = n + p
        self.rows = []
        for blk, w, size in zip(prog.blocks, scal, sizes):
            cols = smat(blk.g.T, blk.dim)
            gt = svec(w.rinv @ cols @ w.rinv.conj().T).T
            k[row : row + size, blk.cols] = gt
            k[blk.cols, row : row + size] = gt.T
            k[np.arange(row, row + size), np.arange(row, row + size)] = -1.0
            self.rows.append(slice(row, row + size))
            row += size
        self.k = k
        self.n, self.p = n, p
        self.reg = reg
        self.tol = tol
        self.prog = prog
        self.scal = scal
        gt = k[n + p :, :n]
        red = np.zeros((n + p, n + p))
        red[:n, :n] = gt.T @ gt
        red[:n, n:] = prog.a.T
        red[n:, :n] = prog.a
        # a tiny shift keeps the factorization defined when A is rank deficient
        # or a variable is unconstrained; refinement removes its effect
        idx = np.arange(n + p)
        red[idx, idx] += np.where(idx < n, reg, -reg)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", LinAlgWarning)
            self.reduced = lu_factor(red, check_finite=False)
        self.full = None
        if not np.all(np.abs(np.diag(self.reduced[0])) > 0):
            self._factor_full()

    def _factor_full(self):
        n, p = self.n, self.p
        kr = self.k.copy()
        kr[np.arange(n), np.arange(n)] += self.reg
        kr[np.arange(n, n + p), np.arange(n, n + p)] -= self.reg
        self.full = lu_factor(kr, check_finite=False)

    def _reduced_solve(self, rhs):
        n, p = self.n, self.p
        gt = self.k[n + p :, :n]
        fzt = rhs[n + p :]
        top = np.concatenate([rhs[:n] + gt.T @ fzt, rhs[n : n + p]])
        xy = lu_solve(self.reduced, top, check_finite=False)
        return np.concatenate([xy, gt @ xy[:n] - fzt])

    def _solve_scaled(self, rhs, refine: int):
        scale = max(1.0, float(np.linalg.norm(rhs)))
        if self.full is None:
            sol = self._reduced_solve(rhs)
            for _ in range(refine + 2):
                res = rhs - self.k @ sol
                if np.linalg.norm(res) <= self.tol * scale:
                    return sol
                sol = sol + self._reduced_solve(res)
            if np.linalg.norm(rhs - self.k @ sol) <= self.tol * scale:
                return sol
            self._factor_full()
        sol = lu_solve(self.full, rhs, check_finite=False)
        for _ in range(refine):
            sol = sol + lu_solve(self.full, rhs - self.k @ sol, check_finite=False)
        return sol

    def solve(self, fx, fy, fz: list[np.ndarray], refine: int = 2):
        n, p = self.n, self.p
        fzt = [svec(w.rinv @ smat(f, len(w.lam)) @ w.rinv.conj().T) for w, f in zip(self.scal, fz)]
        sol = self._solve_scaled(np.concatenate([fx, fy] + fzt), refine)
        dx, dy = sol[:n], sol[n : n + p]
        dz = [svec(w.unscale_z(smat(sol[r], len(w.lam)))) for w, r in zip(self.scal, self.rows)]
        return dx, dy, dz


# -- the iteration ----------------------------------------------------------------


def _norm(parts) -> float:
    return math.sqrt(sum(float(np.dot(p, p)) for p in parts))


def solve_cone(
    prog: ConeProgram,
    gap_tol: float = 1e-9,
    feas_tol: float = 1e-9,
    max_iter: int = 200,
    step: float = 0.99,
) -> ConeResult:
    """Run the embedded primal-dual iteration on ``prog``.

    Stops with ``optimal`` once the relative residuals are below ``feas_tol``
    and both ``|pcost - dcost|`` and ``s.z`` are below ``gap_tol`` relative
    to ``max(1, |pcost|)``.  When that point is not reached the best iterate
    seen is returned with status ``max-iterations`` or ``stalled``.
    """
    n, p = prog.n, prog.a.shape[0]
    blocks = prog.blocks
    dims = [blk.dim for blk in blocks]
    c, a, b = prog.c, prog.a, prog.b
    h = [blk.h for blk in blocks]
    m_deg = prog.degree
    norm_c = max(1.0, float(np.linalg.norm(c)))
    norm_b = max(1.0, float(np.linalg.norm(b)))
    norm_h = max(1.0, _norm(h))

    # starting point from two least-squares problems
    unit = [_Scaling(np.eye(d, dtype=complex), np.eye(d, dtype=complex), np.ones(d)) for d in dims]
    kkt0 = _Kkt(prog, unit)
    x, _, zz = kkt0.solve(np.zeros(n), b.copy(), [hk.copy() for hk in h])
    s_m = _shift_into_cone([-smat(v, d) for v, d in zip(zz, dims)])
    _, y, zz = kkt0.solve(-c, np.zeros(p), [np.zeros(d * d) for d in dims])
    z_m = _shift_into_cone([smat(v, d) for v, d in zip(zz, dims)])
    tau = kappa = 1.0

    history: list[dict] = []
    status = MAX_ITERATIONS
    best = None
    scores: list[float] = []
    it = 0
    for it in range(max_iter + 1):
        s = [svec(m) for m in s_m]
        z = [svec(m) for m in z_m]
        gx = prog.g_times(x)
        gtz = prog.gt_times(z)
        rx = a.T @ y + gtz + c * tau
        ry = -a @ x + b * tau
        rz = [-g + hk * tau - sk for g, hk, sk in zip(gx, h, s)]
        cx, by, hz = float(c @ x), float(b @ y), sum(float(hk @ zk) for hk, zk in zip(h, z))
        rt = -cx - by - hz - kappa
        sz = sum(float(sk @ zk) for sk, zk in zip(s, z))
        mu = (sz + tau * kappa) / (m_deg + 1)

        pcost, dcost = cx / tau, -(hz + by) / tau
        pres = max(float(np.linalg.norm(ry)) / norm_b, _norm(rz) / norm_h) / tau
        dres = float(np.linalg.norm(rx)) / norm_c / tau
        denom = max(1.0, abs(pcost))
        gap = max(abs(pcost - dcost), sz / tau**2) / denom
        history.append({"iter": it, "pcost": pcost, "dcost": dcost, "gap": gap,
                        "pres": pres, "dres": dres, "tau": tau, "kappa": kappa, "mu": mu})
        score = max(pres / feas_tol, dres / feas_tol, gap / gap_tol)
        if best is None or score < best[0]:
            best = (score, it, x / tau, y / tau, [zk / tau for zk in z], [sk / tau for sk in s])
        if score <= 1.0:
            status = OPTIMAL
            break
        scores.append(best[0])
        if it >= 8 and best[0] < 1e3 and best[0] > 0.5 * scores[it - 8]:
            status = STALLED
            break
        if hz + by < 0:
            pinf = float(np.linalg.norm(a.T @ y + gtz)) / norm_c / -(hz + by)
            if pinf <= feas_tol:
                status = PRIMAL_INFEASIBLE
                break
        if cx < 0:
            dinf = max(float(np.linalg.norm(a @ x)) / norm_b,
                       _norm([g + sk for g, sk in zip(gx, s)]) / norm_h) / -cx
            if dinf <= feas_tol:
                status = DUAL_INFEASIBLE
                break
        if it == max_iter:
            break

        try:
            scal = [_Scaling.from_pair(sm_, zm) for sm_, zm in zip(s_m, z_m)]
            kkt = _Kkt(prog, scal)
        except (LinAlgError, ValueError):
            status = STALLED
            break
        dx2, dy2, dz2 = kkt.solve(-c, b.copy(), [hk.copy() for hk in h])
        den2 = -float(c @ dx2) - float(b @ dy2) - sum(float(hk @ v) for hk, v in zip(h, dz2))

        def direction(eta, d_s, d_k):
            q = [_jordan_div(w.lam, ds) for w, ds in zip(scal, d_s)]
            fz = [eta * r - svec(w.unscale_s(qk)) for r, w, qk in zip(rz, scal, q)]
            dx1, dy1, dz1 = kkt.solve(-eta * rx, eta * ry, fz)
            num = (-eta * rt + d_k / tau + float(c @ dx1) + float(b @ dy1)
                   + sum(float(hk @ v) for hk, v in zip(h, dz1)))
            dtau = num / (kappa / tau + den2)
            dx = dx1 + dtau * dx2
            dy = dy1 + dtau * dy2
            dz = [v1 + dtau * v2 for v1, v2 in zip(dz1, dz2)]
            dz_t = [w.scale_z(smat(v, d)) for w, v, d in zip(scal, dz, dims)]
            dkap = (d_k - kappa * dtau) / tau
            # slack step from the linearized primal equation keeps rz exact;
            # its scaled form equals q - dz_t up to the solve error
            ds = [-g + hk * dtau + eta * r for g, hk, r in zip(prog.g_times(dx), h, rz)]
            ds_t = [w.scale_s(smat(u, d)) for w, u, d in zip(scal, ds, dims)]
            return dx, dy, dtau, dkap, ds_t, dz_t, ds

        def max_alpha(dtau, dkap, ds_t, dz_t):
            alpha = math.inf
            for w, u, v in zip(scal, ds_t, dz_t):
                alpha = min(alpha, _max_step(w.lam, u), _max_step(w.lam, v))
            if dtau < 0:
                alpha = min(alpha, -tau / dtau)
            if dkap < 0:
                alpha = min(alpha, -kappa / dkap)
            return alpha

        lam2 = [np.diag(w.lam**2).astype(complex) for w in scal]
        aff = direction(1.0, [-l2 for l2 in lam2], -tau * kappa)
        alpha_aff = min(1.0, max_alpha(*aff[2:6]))
        sigma = (1.0 - alpha_aff) ** 3
        corr = [_jordan(u, v) for u, v in zip(aff[4], aff[5])]
        d_s = [-l2 + sigma * mu * np.eye(d) - cr for l2, d, cr in zip(lam2, dims, corr)]
        d_k = -tau * kappa + sigma * mu - aff[2] * aff[3]
        dx, dy, dtau, dkap, ds_t, dz_t, ds = direction(1.0 - sigma, d_s, d_k)
        alpha = min(1.0, step * max_alpha(dtau, dkap, ds_t, dz_t))
        if alpha < 1e-10:
            status = STALLED
            break

        ds_m = [smat(u, d) for u, d in zip(ds, dims)]
        dz_m = [w.unscale_z(v) for w, v in zip(scal, dz_t)]
        # the slack follows the primal equation rather than the scaled step,
        # so near a degenerate iterate it may leave the cone: backtrack
        while True:
            s_new = [_herm(sm_ + alpha * u) for sm_, u in zip(s_m, ds_m)]
            z_new = [_herm(zm + alpha * v) for zm, v in zip(z_m, dz_m)]
            if all(map(_pos_def, s_new + z_new)) or alpha < 1e-10:
                break
            alpha *= 0.8
        if alpha < 1e-10:
            status = STALLED
            break
        x = x + alpha * dx
        y = y + alpha * dy
        s_m, z_m = s_new, z_new
        tau = tau + alpha * dtau
        kappa = kappa + alpha * dkap

    if status == PRIMAL_INFEASIBLE:
        z = [svec(m) for m in z_m]
        scale = -(sum(float(hk @ zk) for hk, zk in zip(h, z)) + float(b @ y))
        return ConeResult(status, x, y / scale, [zk / scale for zk in z],
                          [svec(m) for m in s_m], it, history=history)
    if status == DUAL_INFEASIBLE:
        scale = -float(c @ x)
        return ConeResult(status, x / scale, y, [svec(m) for m in z_m],
                          [svec(m) / scale for m in s_m], it, history=history)
    _, k, xb, yb, zb, sb = best
    rec = history[k]
    return ConeResult(
        status, xb, yb, zb, sb, it,
        primal_objective=rec["pcost"] + prog.c0, dual_objective=rec["dcost"] + prog.c0,
        primal_residual=rec["pres"], dual_residual=rec["dres"], history=history,
    )


__all__ = [
    "ConeBlock",
    "ConeProgram",
    "ConeResult",
    "hermitian_basis",
    "smat",
    "solve_cone",
    "svec",
]

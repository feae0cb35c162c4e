import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from entmeter import ipm, sdp
from entmeter.generators import random_state
from entmeter.operators import HermitianOperator, SystemLayout, maximally_mixed, operator_norm
from entmeter.state_measures import log_negativity_dual, log_negativity_primal

from conftest import random_hermitian

QUBIT = SystemLayout.of(A=2)
TWO = SystemLayout.of(A=2, B=2, b_side=["B"])
BACKENDS = ["native", "clarabel"]


def min_trace_above(rho: HermitianOperator) -> sdp.SdpProblem:
    p = sdp.SdpProblem("min-trace")
    s = p.variable("S", rho.layout, psd=True)
    p.geq(s, rho)
    p.minimize(s.trace())
    return p


def epigraph_of(x: HermitianOperator, psd: bool = False) -> sdp.SdpProblem:
    p = sdp.SdpProblem("epigraph")
    t = sdp.inf_norm_epigraph(p, sdp.as_expr(x), psd=psd)
    p.minimize(t)
    return p


def pt_sandwich(rho: HermitianOperator) -> sdp.SdpProblem:
    p = sdp.SdpProblem("sandwich")
    s = p.variable("S", rho.layout, psd=True)
    p.geq(s.pt(), sdp.as_expr(rho).pt())
    p.geq(sdp.as_expr(rho).pt(), -s.pt())
    p.minimize(s.trace())
    return p


# -- solve: worked examples --------------------------------------------------------------


@pytest.mark.parametrize("solver", BACKENDS)
def test_min_trace_over_maximally_mixed(solver):
    sol = sdp.solve(min_trace_above(maximally_mixed(QUBIT)), solver=solver)
    assert sol.status == sdp.OPTIMAL
    assert sol.value == pytest.approx(1.0, abs=1e-7)
    assert sol.equality_realization == "native"


@pytest.mark.parametrize("solver", BACKENDS)
def test_epigraph_of_constant(solver):
    x = HermitianOperator(np.diag([3.0, -5.0]).astype(complex), QUBIT)
    sol = sdp.solve(epigraph_of(x), solver=solver)
    assert sol.status == sdp.OPTIMAL
    assert sol.value == pytest.approx(5.0, abs=1e-6)


@pytest.mark.parametrize("solver", BACKENDS)
def test_contradictory_constraints_are_infeasible(solver):
    p = sdp.SdpProblem("contradiction")
    s = p.variable("S", QUBIT, psd=True)
    p.geq(s, 1.0)
    p.geq(0.5, s.trace())
    p.minimize(s.trace())
    assert sdp.solve(p, solver=solver).status == sdp.INFEASIBLE


def test_unbounded_problem_detected():
    p = sdp.SdpProblem("unbounded")
    x = p.variable("X", QUBIT)
    p.geq(x, 1.0)
    p.maximize(x.trace())
    assert sdp.solve(p, solver="native").status == sdp.UNBOUNDED


def test_bad_arguments_rejected():
    p = min_trace_above(maximally_mixed(QUBIT))
    with pytest.raises(ValueError):
        sdp.solve(p, gap_tol=0.0)
    with pytest.raises(ValueError):
        sdp.solve(p, solver="nonsense")
    with pytest.raises(ValueError):
        sdp.solve(sdp.SdpProblem("empty"))


def test_optimal_status_satisfies_contract():
    rho = random_state((2, 2), seed=17)
    for gap_tol in (1e-6, 1e-8):
        sol = sdp.solve(pt_sandwich(rho), gap_tol=gap_tol, feas_tol=gap_tol)
        assert sol.optimal
        assert sol.relative_gap <= gap_tol
        assert sol.primal_infeasibility <= gap_tol


def test_solve_is_deterministic():
    rho = random_state((2, 2), seed=3)
    a = sdp.solve(pt_sandwich(rho))
    b = sdp.solve(pt_sandwich(rho))
    assert a.primal_value == b.primal_value
    assert a.dual_value == b.dual_value


def test_max_iter_exhaustion_is_reported():
    rho = random_state((2, 2), seed=3)
    sol = sdp.solve(pt_sandwich(rho), max_iter=2, solver="native")
    assert sol.status == sdp.NUMERICAL_FAILURE


# -- inf-norm epigraph ----------------------------------------------------------------------


def test_epigraph_of_identity():
    sol = sdp.solve(epigraph_of(HermitianOperator(np.eye(3, dtype=complex), SystemLayout.of(A=3))))
    assert sol.value == pytest.approx(1.0, abs=1e-7)


def test_epigraph_of_scaled_marginal():
    x = HermitianOperator(2 * np.eye(2, dtype=complex) / 2, QUBIT)
    assert sdp.solve(epigraph_of(x, psd=True)).value == pytest.approx(1.0, abs=1e-7)


@given(st.integers(0, 2**32 - 1))
def test_epigraph_matches_eigensolver(seed):
    rng = np.random.default_rng(seed)
    g = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
    x = HermitianOperator(g @ g.conj().T, SystemLayout.of(A=3))
    sol = sdp.solve(epigraph_of(x, psd=True))
    assert sol.value == pytest.approx(operator_norm(x), abs=1e-7 * max(1.0, operator_norm(x)))


# -- properties -----------------------------------------------------------------------------


@given(st.integers(0, 2**32 - 1))
def test_log_negativity_primal_dual_agree(seed):
    rho = random_state((2, 2), seed=seed)
    p = sdp.solve(log_negativity_primal(rho))
    d = sdp.solve(log_negativity_dual(rho))
    assert abs(p.value - d.value) <= 1e-6 * max(1.0, abs(p.value))


@given(st.integers(0, 2**32 - 1))
def test_complementary_slackness(seed):
    sol = sdp.solve(pt_sandwich(random_state((2, 2), seed=seed)))
    assert sol.optimal
    assert sol.complementarity <= 1e-6


@given(st.integers(0, 2**32 - 1), st.floats(0.1, 10.0))
def test_scaling_covariance(seed, c):
    rho = random_state((2, 2), seed=seed)
    base = sdp.solve(pt_sandwich(rho)).value
    scaled = sdp.solve(pt_sandwich(HermitianOperator(c * rho.matrix, rho.layout))).value
    assert scaled == pytest.approx(c * base, rel=1e-6)


@given(st.integers(0, 2**32 - 1))
def test_backends_agree(seed):
    rho = random_state((2, 2), seed=seed)
    a = sdp.solve(pt_sandwich(rho), solver="native")
    b = sdp.solve(pt_sandwich(rho), solver="clarabel")
    assert a.optimal and b.optimal
    assert a.value == pytest.approx(b.value, abs=1e-6)


# -- real embedding ------------------------------------------------------------------------


def test_embedding_of_scalar():
    e = sdp.embed_real(np.array([[2.5]]))
    np.testing.assert_array_equal(e, 2.5 * np.eye(2))
    assert sdp.embedded_objective_scale() == 0.5


@given(st.integers(0, 2**32 - 1))
def test_embedding_spectrum_and_trace(seed):
    h = random_hermitian(np.random.default_rng(seed), 4)
    e = sdp.embed_real(h)
    np.testing.assert_allclose(e, e.T)
    w = np.linalg.eigvalsh(h)
    np.testing.assert_allclose(np.linalg.eigvalsh(e), np.sort(np.repeat(w, 2)), atol=1e-12)
    assert np.trace(e) == pytest.approx(2 * np.trace(h).real)
    np.testing.assert_allclose(sdp.unembed_real(e), h, atol=1e-15)


def test_embedded_program_reproduces_objective():
    rho = random_state((2, 2), seed=2)
    p = pt_sandwich(rho)
    sol = sdp.solve(p)
    prog = sdp.embed_problem(p)
    emb = {n: sdp.embed_real(v.matrix) for n, v in sol.variable_values.items()}
    assert prog.objective_value(emb) == pytest.approx(sol.primal_value, abs=1e-12)


def test_problem_dump_is_self_describing():
    text = sdp.dump_problem(min_trace_above(maximally_mixed(QUBIT)))
    assert text.startswith("sdp min-trace sense min")
    assert "variable S dim 2 cone psd" in text
    assert "constraint" in text


# -- interior-point core --------------------------------------------------------------------


@given(st.integers(0, 2**32 - 1), st.integers(1, 5))
def test_svec_is_an_isometry(seed, d):
    rng = np.random.default_rng(seed)
    a, b = random_hermitian(rng, d), random_hermitian(rng, d)
    np.testing.assert_allclose(ipm.smat(ipm.svec(a), d), a, atol=1e-14)
    assert ipm.svec(a) @ ipm.svec(b) == pytest.approx(np.vdot(a, b).real, abs=1e-10)


def test_cone_program_lp():
    # min x1 + x2  s.t.  x1 >= 1, x2 >= 2 as 1x1 blocks
    blocks = [ipm.ConeBlock(1, np.array([0]), -np.ones((1, 1)), np.array([-1.0])),
              ipm.ConeBlock(1, np.array([1]), -np.ones((1, 1)), np.array([-2.0]))]
    prog = ipm.ConeProgram(2, np.ones(2), blocks, np.zeros((0, 2)), np.zeros(0))
    res = ipm.solve_cone(prog)
    assert res.status == ipm.OPTIMAL
    np.testing.assert_allclose(res.x, [1.0, 2.0], atol=1e-7)
    assert res.primal_objective == pytest.approx(3.0, abs=1e-8)
    assert res.dual_objective == pytest.approx(3.0, abs=1e-8)


@pytest.mark.parametrize("seed", range(20))
def test_native_solver_on_random_sandwich_programs(seed):
    rho = random_state((2, 2), seed=seed, rank=1 + seed % 4)
    sol = sdp.solve(pt_sandwich(rho), solver="native")
    assert sol.optimal, sol.summary()
    assert sol.solver == "native"

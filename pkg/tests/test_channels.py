import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from entmeter.channels import (
    BipartiteChannel,
    apply,
    apply_matrix,
    choi_from_kraus,
    choi_of,
    compose,
    embed_point_to_point,
    identity_channel,
    is_cpptp,
    point_to_point_choi,
    ppt_superchannel,
    product_channel,
    random_channel,
    random_cpptp,
    replacer,
)
from entmeter.generators import random_ppt_state, random_state
from entmeter.operators import (
    SystemLayout,
    maximally_entangled,
    maximally_mixed,
    numerical_rank,
    partial_trace,
    unnormalized_max_ent,
)

SWAP = np.eye(4)[[0, 2, 1, 3]]
FOUR = SystemLayout.of(L_A=2, **{"A'": 2, "B'": 2}, L_B=2, b_side=["B'", "L_B"])


def depolarizing_choi(p):
    """Local qubit channel x -> p x + (1 - p) Tr(x) I/2, Choi ordered (S, out)."""
    ups = unnormalized_max_ent(2)
    return p * np.outer(ups, ups) + (1 - p) * np.eye(4) / 2


def local_depolarizing(pa, pb):
    return product_channel(depolarizing_choi(pa), depolarizing_choi(pb), (2, 2), (2, 2))


# -- construction ----------------------------------------------------------------------


def test_identity_qubit_channel_choi():
    ch = embed_point_to_point(point_to_point_choi(lambda x: x, 2, 2))
    ups = unnormalized_max_ent(2)
    np.testing.assert_allclose(ch.matrix, np.outer(ups, ups), atol=1e-14)
    assert numerical_rank(ch.choi) == 1


def test_completely_depolarizing_choi():
    choi = point_to_point_choi(lambda x: np.trace(x) * np.eye(2) / 2, 2, 2)
    np.testing.assert_allclose(choi.matrix, np.kron(np.eye(2), np.eye(2) / 2), atol=1e-14)


def test_swap_channel():
    ch = choi_of(lambda x: SWAP @ x @ SWAP, (2, 2))
    assert numerical_rank(ch.choi) == 1
    assert np.trace(ch.matrix).real == pytest.approx(4.0)
    assert not is_cpptp(ch)


def test_choi_of_rejects_nonlinear_maps():
    with pytest.raises(ValueError):
        choi_of(lambda x: x @ x, (2, 2))


def test_non_tp_map_rejected_as_channel():
    with pytest.raises(ValueError):
        BipartiteChannel(2 * identity_channel((2, 2)).matrix, (2, 2), (2, 2))


def test_non_cp_choi_rejected():
    with pytest.raises(ValueError):
        BipartiteChannel(-np.eye(16) / 4, (2, 2), (2, 2))


# -- application ---------------------------------------------------------------------------


def test_identity_channel_applies_trivially():
    rho = random_state(FOUR, seed=2)
    out = apply(identity_channel((2, 2)), rho)
    np.testing.assert_allclose(out.matrix, rho.matrix, atol=1e-12)


def _reorder_product(ref, omega):
    """(L_A L_B) ⊗ (A B) reordered to (L_A, A, B, L_B)."""
    t = np.kron(ref, omega).reshape([2] * 8)  # (LA, LB, A, B) twice
    return t.transpose(0, 2, 3, 1, 4, 6, 7, 5).reshape(16, 16)


def test_replacer_application():
    omega = random_state((2, 2), seed=11)
    rho = random_state(FOUR, seed=12)
    out = apply(replacer(omega, (2, 2)), rho)
    marg = partial_trace(rho, ["A'", "B'"])
    # output order (L_A, A, B, L_B): the AB part is omega, the reference part is untouched
    np.testing.assert_allclose(partial_trace(out, ["L_A", "L_B"]).matrix, omega.matrix, atol=1e-12)
    np.testing.assert_allclose(partial_trace(out, ["A", "B"]).matrix, marg.matrix, atol=1e-12)
    np.testing.assert_allclose(out.matrix, _reorder_product(marg.matrix, omega.matrix), atol=1e-12)


def test_replacer_choi_is_identity_sandwich():
    omega = maximally_entangled(2)
    ch = replacer(omega, (2, 2))
    np.testing.assert_allclose(ch.matrix, np.kron(np.kron(np.eye(2), omega.matrix), np.eye(2)), atol=1e-15)


def test_replacer_to_maximally_mixed_ignores_input():
    ch = replacer(maximally_mixed(SystemLayout.of(A=2, B=2, b_side=["B"])), (2, 2))
    for seed in range(3):
        out = apply_matrix(ch, random_state((2, 2), seed=seed).matrix)
        np.testing.assert_allclose(out, np.eye(4) / 4, atol=1e-14)


@pytest.mark.parametrize("seed", range(50))
def test_choi_application_matches_direct_map(seed):
    rng = np.random.default_rng(seed)
    kraus = [rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4)) for _ in range(3)]
    s = sum(k.conj().T @ k for k in kraus)
    w, v = np.linalg.eigh(s)
    fix = v @ np.diag(w**-0.5) @ v.conj().T
    kraus = [k @ fix for k in kraus]
    ch = choi_from_kraus(kraus, (2, 2), (2, 2))
    rho = random_state((2, 2), seed=seed + 100).matrix
    direct = sum(k @ rho @ k.conj().T for k in kraus)
    assert np.max(np.abs(apply_matrix(ch, rho) - direct)) < 1e-9


@given(st.integers(0, 2**32 - 1))
def test_application_output_is_a_state(seed):
    ch = random_channel((2, 2), seed=seed)
    out = apply(ch, random_state(FOUR, seed=seed ^ 1))
    assert np.trace(out.matrix).real == pytest.approx(1.0, abs=1e-8)
    assert out.min_eigenvalue() >= -1e-8


def test_apply_dimension_mismatch():
    with pytest.raises(ValueError):
        apply(identity_channel((2, 3)), random_state(FOUR, seed=1))


# -- composition ---------------------------------------------------------------------------


def test_compose_with_identity_and_replacer():
    n = random_channel((2, 2), seed=4)
    np.testing.assert_allclose(compose(identity_channel((2, 2)), n).matrix, n.matrix, atol=1e-12)
    r = replacer(random_state((2, 2), seed=5), (2, 2))
    np.testing.assert_allclose(compose(r, n).matrix, r.matrix, atol=1e-12)


def test_compose_depolarizing_parameters_multiply():
    p, q = 0.7, 0.4
    got = compose(local_depolarizing(q, p), local_depolarizing(p, q))
    np.testing.assert_allclose(got.matrix, local_depolarizing(p * q, p * q).matrix, atol=1e-13)


@given(st.integers(0, 2**32 - 1))
def test_compose_associative(seed):
    a, b, c = (random_channel((2, 2), seed=seed + k) for k in range(3))
    lhs = compose(c, compose(b, a)).matrix
    rhs = compose(compose(c, b), a).matrix
    assert np.max(np.abs(lhs - rhs)) < 1e-9


@given(st.integers(0, 2**32 - 1))
def test_composed_choi_matches_sequential_application(seed):
    a = random_channel((2, 2), seed=seed)
    b = random_channel((2, 2), seed=seed + 7)
    rho = random_state((2, 2), seed=seed + 3).matrix
    np.testing.assert_allclose(apply_matrix(compose(b, a), rho), apply_matrix(b, apply_matrix(a, rho)), atol=1e-10)


def test_compose_dimension_mismatch():
    with pytest.raises(ValueError):
        compose(identity_channel((2, 2)), identity_channel((3, 2)))


# -- point-to-point embedding ------------------------------------------------------------------


def test_embedding_preserves_application():
    rng = np.random.default_rng(3)
    u = np.linalg.qr(rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2)))[0]
    ch = embed_point_to_point(point_to_point_choi(lambda x: u @ x @ u.conj().T, 2, 2))
    rho = random_state(SystemLayout.of(A=2), seed=1).matrix
    np.testing.assert_allclose(apply_matrix(ch, rho), u @ rho @ u.conj().T, atol=1e-12)


def test_depolarizing_embedding_is_cpptp():
    ch = embed_point_to_point(point_to_point_choi(lambda x: np.trace(x) * np.eye(2) / 2, 2, 2))
    assert is_cpptp(ch)


# -- C-PPT-P membership ------------------------------------------------------------------------


def test_membership_examples():
    assert is_cpptp(local_depolarizing(0.3, 0.9))
    assert not is_cpptp(embed_point_to_point(point_to_point_choi(lambda x: x, 2, 2)))
    with pytest.raises(ValueError):
        is_cpptp(identity_channel((2, 2)), tol=0.0)


@given(st.integers(0, 2**32 - 1))
def test_random_cpptp_membership_and_determinism(seed):
    ch = random_cpptp((2, 2), seed=seed)
    assert is_cpptp(ch, tol=1e-8)
    np.testing.assert_array_equal(ch.matrix, random_cpptp((2, 2), seed=seed).matrix)


# -- superchannels -----------------------------------------------------------------------------


def test_superchannel_with_identities_is_identity():
    theta = ppt_superchannel(identity_channel((2, 2)), identity_channel((2, 2)))
    m = random_channel((2, 2), seed=3)
    np.testing.assert_allclose(theta(m).matrix, m.matrix, atol=1e-12)


def test_superchannel_trivial_memory_is_composition():
    pre, post = random_cpptp((2, 2), seed=1), random_cpptp((2, 2), seed=2)
    m = random_channel((2, 2), seed=3)
    got = ppt_superchannel(pre, post)(m)
    np.testing.assert_allclose(got.matrix, compose(post, compose(m, pre)).matrix, atol=1e-12)


def test_superchannel_into_ppt_replacer_is_cpptp():
    sigma = random_ppt_state((2, 2), seed=4)
    theta = ppt_superchannel(random_cpptp((2, 2), seed=5), replacer(sigma, (2, 2)))
    assert is_cpptp(theta(random_channel((2, 2), seed=6)), tol=1e-9)


def test_superchannel_rejects_non_cpptp_parts():
    with pytest.raises(ValueError):
        ppt_superchannel(identity_channel((2, 2)), choi_of(lambda x: SWAP @ x @ SWAP, (2, 2)))


@given(st.integers(0, 2**32 - 1))
def test_superchannel_with_memory_preserves_cpptp(seed):
    pre = random_cpptp((2, 2), (4, 4), seed=seed)
    post = random_cpptp((4, 4), (2, 2), seed=seed + 1)
    theta = ppt_superchannel(pre, post, memory=(2, 2))
    out = theta(random_cpptp((2, 2), seed=seed + 2))
    assert out.tp_defect() < 1e-7
    assert is_cpptp(out, tol=1e-8)

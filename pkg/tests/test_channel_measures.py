import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from entmeter.channel_measures import (
    amortized_kappa_gap,
    amortized_max_rains_gap,
    kappa_entanglement_channel,
    kappa_entanglement_point_to_point,
    log_negativity_channel,
    max_rains_channel,
    max_rains_channel_divergence,
    min_rains_channel_lower,
)
from entmeter.channels import (
    compose,
    embed_point_to_point,
    identity_channel,
    point_to_point_choi,
    random_channel,
    random_cpptp,
    replacer,
)
from entmeter.generators import as_layout, random_ppt_state, random_state
from entmeter.operators import HermitianOperator, maximally_entangled, permute_array, tensor
from entmeter.state_measures import kappa_entanglement_state, log_negativity_state, max_rains_state

seeds = st.integers(0, 2**32 - 1)
CHANNEL_MEASURES = [log_negativity_channel, max_rains_channel, kappa_entanglement_channel]


def identity_qubit():
    return embed_point_to_point(point_to_point_choi(lambda x: x, 2, 2))


def product_mixed():
    return HermitianOperator(np.eye(16) / 16, as_layout((2, 2, 2, 2)))


def bell_pairs_across_cut():
    """Φ on (L_A, L_B) and Φ on (A', B'), laid out (L_A, A', B', L_B)."""
    phi = maximally_entangled(2).matrix
    m = permute_array(np.kron(phi, phi), (2, 2, 2, 2), [0, 2, 3, 1])
    return HermitianOperator(m, as_layout((2, 2, 2, 2)))


# -- worked examples ---------------------------------------------------------------------


@pytest.mark.parametrize("measure", CHANNEL_MEASURES, ids=lambda f: f.__name__)
def test_faithful_on_cpptp(measure):
    for seed in range(3):
        assert abs(measure(random_cpptp((2, 2), seed=seed)).value) <= 1e-6


@pytest.mark.parametrize("measure", CHANNEL_MEASURES, ids=lambda f: f.__name__)
def test_identity_qubit_channel_carries_one_ebit(measure):
    assert measure(identity_qubit()).value == pytest.approx(1.0, abs=1e-6)


def test_log_negativity_of_bell_replacer():
    rep = log_negativity_channel(replacer(maximally_entangled(2), (2, 2)))
    assert rep.value == pytest.approx(1.0, abs=1e-6)
    assert rep.value == pytest.approx(log_negativity_state(maximally_entangled(2)).value, abs=1e-6)


@settings(max_examples=8)
@given(seeds)
def test_replacer_reduces_to_state(seed):
    rho = random_state((2, 2), seed=seed)
    ch = replacer(rho, (2, 2))
    assert log_negativity_channel(ch).value == pytest.approx(log_negativity_state(rho).value, abs=1e-6)
    assert max_rains_channel(ch).value == pytest.approx(max_rains_state(rho).value, abs=1e-6)
    assert kappa_entanglement_channel(ch).value == pytest.approx(kappa_entanglement_state(rho).value, abs=1e-6)


@settings(max_examples=6)
@given(seeds)
def test_rmax_divergence_form_matches_sdp_form(seed):
    ch = random_channel((2, 2), seed=seed)
    a = max_rains_channel(ch).value
    b = max_rains_channel_divergence(ch).value
    assert abs(a - b) <= 1e-6 * max(1.0, abs(a))


@settings(max_examples=6)
@given(seeds)
def test_kappa_point_to_point_formulas_agree(seed):
    m = random_channel((2, 1), (1, 2), seed=seed).matrix
    choi = HermitianOperator(m, point_to_point_choi(lambda x: x, 2, 2).layout)
    bip = kappa_entanglement_channel(embed_point_to_point(choi)).value
    direct = kappa_entanglement_point_to_point(choi).value
    assert bip == pytest.approx(direct, abs=1e-6)


# -- min-Rains lower bound ----------------------------------------------------------------


def test_min_rains_lower_bound_on_identity():
    rep = min_rains_channel_lower(identity_qubit(), samples=2, restarts=1)
    assert rep.lower_bound
    assert rep.value >= 1 - 1e-6


def test_min_rains_lower_bound_on_ppt_replacer():
    omega = random_ppt_state((2, 2), seed=3).matrix[:2, :2]
    omega = omega / np.trace(omega)
    ch = embed_point_to_point(point_to_point_choi(lambda x: np.trace(x) * omega, 2, 2))
    assert abs(min_rains_channel_lower(ch, samples=2, restarts=1).value) <= 1e-6


def test_min_rains_lower_bound_monotone_in_restarts():
    ch = embed_point_to_point(HermitianOperator(
        random_channel((2, 1), (1, 2), seed=5).matrix, point_to_point_choi(lambda x: x, 2, 2).layout))
    vals = [min_rains_channel_lower(ch, samples=2, restarts=r, seed=1).value for r in (0, 2, 4)]
    assert vals[0] <= vals[1] <= vals[2]


def test_min_rains_lower_bound_rejects_bad_arguments():
    with pytest.raises(ValueError):
        min_rains_channel_lower(identity_qubit(), samples=0)
    with pytest.raises(ValueError):
        min_rains_channel_lower(random_cpptp((2, 2), seed=1))


# -- amortization ---------------------------------------------------------------------------


def test_amortized_gaps_for_bell_replacer():
    ch = replacer(maximally_entangled(2), (2, 2))
    assert amortized_kappa_gap(ch, product_mixed()) == pytest.approx(1.0, abs=1e-6)
    assert amortized_max_rains_gap(ch, product_mixed()) == pytest.approx(1.0, abs=1e-6)


def test_amortized_gaps_for_identity_vanish():
    rho = bell_pairs_across_cut()
    assert amortized_kappa_gap(identity_channel((2, 2)), rho) == pytest.approx(0.0, abs=1e-6)
    assert amortized_max_rains_gap(identity_channel((2, 2)), rho) == pytest.approx(0.0, abs=1e-6)


@settings(max_examples=5)
@given(seeds)
def test_amortized_gaps_nonpositive_for_cpptp(seed):
    ch = random_cpptp((2, 2), seed=seed)
    rho = random_state((2, 2, 2, 2), seed=seed + 1)
    assert amortized_kappa_gap(ch, rho) <= 1e-5
    assert amortized_max_rains_gap(ch, rho) <= 1e-5


@settings(max_examples=5)
@given(seeds)
def test_amortized_gaps_bounded_by_channel_measures(seed):
    ch = random_channel((2, 2), seed=seed)
    rho = random_state((2, 2, 2, 2), seed=seed + 1)
    assert amortized_kappa_gap(ch, rho) <= kappa_entanglement_channel(ch).value + 1e-5
    assert amortized_max_rains_gap(ch, rho) <= max_rains_channel(ch).value + 1e-5


# -- composition ------------------------------------------------------------------------------


@settings(max_examples=5)
@given(seeds)
def test_rmax_subadditive_under_composition(seed):
    n1, n2 = random_channel((2, 2), seed=seed), random_channel((2, 2), seed=seed + 1)
    lhs = max_rains_channel(compose(n2, n1)).value
    assert lhs <= max_rains_channel(n1).value + max_rains_channel(n2).value + 1e-6

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from entmeter.generators import random_ppt_entangled_3x3, random_ppt_state, random_state
from entmeter.operators import (
    HermitianOperator,
    SystemLayout,
    maximally_entangled,
    maximally_mixed,
    merge,
    partial_transpose,
    permute,
    tensor,
)
from entmeter.state_measures import (
    is_ppt,
    is_ppt_prime,
    kappa_entanglement_state,
    log_negativity_state,
    max_rains_state,
    min_rains_state,
    one_shot_exact_distillable,
)

TWO = SystemLayout.of(A=2, B=2, b_side=["B"])
MEASURES = [log_negativity_state, max_rains_state, kappa_entanglement_state, min_rains_state, one_shot_exact_distillable]
seeds = st.integers(0, 2**32 - 1)


def product_state(seed=0):
    a = random_state(SystemLayout.of(A=2), seed=seed)
    b = random_state(SystemLayout.of(B=2, b_side=["B"]), seed=seed + 1)
    return tensor(a, b)


def relabel(rho, a, b):
    return HermitianOperator(rho.matrix, SystemLayout.of(**{a: rho.dims[0], b: rho.dims[1]}, b_side=[b]))


def pair_state(rho, sigma):
    """rho on (A, B) and sigma on (A2, B2) as one state with cut AA2 : BB2."""
    big = permute(tensor(rho, relabel(sigma, "A2", "B2")), ["A", "A2", "B", "B2"])
    big = merge(big, ["A", "A2"], "AA")
    return merge(big, ["B", "B2"], "BB")


# -- membership ------------------------------------------------------------------------


def test_membership_examples():
    prod = product_state()
    assert is_ppt(prod) and is_ppt_prime(prod)
    bell = maximally_entangled(2)
    assert not is_ppt(bell)
    assert not is_ppt_prime(bell)
    half = HermitianOperator(bell.matrix / 2, bell.layout)
    assert is_ppt_prime(half)


def test_cut_required():
    rho = HermitianOperator(np.eye(4) / 4, SystemLayout.of(A=2, B=2))
    with pytest.raises(ValueError):
        log_negativity_state(rho)


# -- logarithmic negativity ----------------------------------------------------------------


@pytest.mark.parametrize("d", [2, 3, 4])
def test_log_negativity_of_max_entangled(d):
    rep = log_negativity_state(maximally_entangled(d))
    spectrum = np.linalg.eigvalsh(partial_transpose(maximally_entangled(d)).matrix)
    assert rep.value == pytest.approx(math.log2(np.abs(spectrum).sum()), abs=1e-9)
    assert rep.value == pytest.approx(math.log2(d), abs=1e-9)
    assert rep.status == "optimal"


def test_log_negativity_vanishes_on_ppt_and_product():
    assert log_negativity_state(random_ppt_state((2, 2), seed=1)).value == pytest.approx(0.0, abs=1e-9)
    assert log_negativity_state(product_state()).value == pytest.approx(0.0, abs=1e-9)


def test_reports_carry_witnesses():
    rep = max_rains_state(maximally_entangled(2))
    assert rep.witness
    assert rep.solver and rep.solver[0]["status"] == "optimal"
    assert all(isinstance(v, HermitianOperator) for v in rep.witness.values())


# -- max-Rains -----------------------------------------------------------------------------


def test_max_rains_examples():
    assert max_rains_state(maximally_entangled(2)).value == pytest.approx(1.0, abs=1e-6)
    assert max_rains_state(random_ppt_state((2, 2), seed=4)).value == pytest.approx(0.0, abs=1e-6)


@given(seeds)
def test_max_rains_below_log_negativity(seed):
    rho = random_state((2, 2), seed=seed)
    rmax = max_rains_state(rho).value
    assert rmax >= -1e-7
    assert rmax <= log_negativity_state(rho).value + 1e-7


# -- kappa ----------------------------------------------------------------------------------


def test_kappa_examples():
    assert kappa_entanglement_state(maximally_entangled(2)).value == pytest.approx(1.0, abs=1e-6)
    assert kappa_entanglement_state(random_ppt_state((2, 2), seed=2)).value == pytest.approx(0.0, abs=1e-6)


@settings(max_examples=10)
@given(seeds)
def test_kappa_additive(seed):
    rho, sigma = random_state((2, 2), seed=seed), random_state((2, 2), seed=seed + 1)
    lhs = kappa_entanglement_state(pair_state(rho, sigma)).value
    rhs = kappa_entanglement_state(rho).value + kappa_entanglement_state(sigma).value
    assert abs(lhs - rhs) <= 1e-5


@given(seeds)
def test_kappa_at_least_log_negativity(seed):
    rho = random_state((2, 2), seed=seed)
    assert kappa_entanglement_state(rho).value >= log_negativity_state(rho).value - 1e-7


# -- min-Rains and W0 -------------------------------------------------------------------------


def test_min_rains_examples():
    rep = min_rains_state(maximally_entangled(2))
    assert rep.value == pytest.approx(1.0, abs=1e-6)
    assert rep.rank == 1
    assert min_rains_state(maximally_mixed(TWO)).value == pytest.approx(0.0, abs=1e-6)


@settings(max_examples=10)
@given(seeds)
def test_min_rains_additive(seed):
    rho = random_state((2, 2), seed=seed, rank=1 + seed % 3)
    sigma = random_state((2, 2), seed=seed + 1, rank=1 + (seed // 3) % 3)
    lhs = min_rains_state(pair_state(rho, sigma)).value
    rhs = min_rains_state(rho).value + min_rains_state(sigma).value
    assert abs(lhs - rhs) <= 1e-5


def test_w0_examples():
    assert one_shot_exact_distillable(maximally_entangled(2)).value == pytest.approx(1.0, abs=1e-6)
    pure_product = tensor(
        random_state(SystemLayout.of(A=2), rank=1, seed=1),
        random_state(SystemLayout.of(B=2, b_side=["B"]), rank=1, seed=2),
    )
    assert one_shot_exact_distillable(pure_product).value == pytest.approx(0.0, abs=1e-6)


@given(seeds, st.integers(1, 3))
def test_w0_below_min_rains(seed, rank):
    rho = random_state((2, 2), seed=seed, rank=rank)
    assert one_shot_exact_distillable(rho).value <= min_rains_state(rho).value + 1e-7


def test_rank_cutoff_is_user_controlled():
    rho = HermitianOperator(np.diag([0.5, 0.5 - 1e-10, 1e-10, 0.0]).astype(complex), TWO)
    assert min_rains_state(rho).rank == 2
    assert min_rains_state(rho, rank_tol=1e-12).rank == 3


# -- faithfulness and monotonicity ------------------------------------------------------------


@pytest.mark.parametrize("measure", MEASURES, ids=lambda f: f.__name__)
def test_faithful_on_ppt_states(measure):
    for seed in range(5):
        assert abs(measure(random_ppt_state((2, 2), seed=seed)).value) <= 1e-6


@pytest.mark.parametrize("measure", MEASURES[:3], ids=lambda f: f.__name__)
def test_positive_near_bell(measure):
    bell = maximally_entangled(2).matrix
    noisy = HermitianOperator(0.95 * bell + 0.05 * np.eye(4) / 4, TWO)
    assert measure(noisy).value > 1e-3


def test_ppt_entangled_state_has_zero_negativity():
    rho = random_ppt_entangled_3x3(seed=1)
    assert is_ppt(rho, tol=1e-9)
    assert log_negativity_state(rho).value == pytest.approx(0.0, abs=1e-6)
    assert max_rains_state(rho).value == pytest.approx(0.0, abs=1e-6)


@given(seeds)
def test_local_channels_do_not_increase_measures(seed):
    from entmeter.channels import apply, random_cpptp

    rho = random_state((2, 2), seed=seed)
    layout = SystemLayout.of(**{"A'": 2, "B'": 2}, b_side=["B'"])
    out = apply(random_cpptp((2, 2), seed=seed + 5), HermitianOperator(rho.matrix, layout))
    for fn in (log_negativity_state, max_rains_state, kappa_entanglement_state):
        assert fn(out).value <= fn(rho).value + 1e-6

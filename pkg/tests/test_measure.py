from __future__ import annotations

from collections import Counter

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from dflo import measure, oracle, state
from dflo.errors import DuplicateMode, ImpossibleOutcome, IndexOutOfRange, ValidationError
from dflo.measure import RandomSource

from conftest import beam_splitter_state, random_covariance

SHOTS = 100_000


def _bs_density():
    from conftest import hopping_hamiltonian

    return oracle.dense_unitary_evolve(oracle.number_state_density([1, 0]), hopping_hamiltonian(), np.pi / 4)


# -- probabilities and conditioning ------------------------------------------------


def test_outcome_probability_examples():
    assert measure.outcome_probability(state.vacuum(2), 1) == 0.0
    assert measure.outcome_probability(np.zeros((2, 2)), 0) == 0.5
    assert measure.outcome_probability(state.number_state([0, 1]), 1) == 1.0


def test_outcome_probability_clamps():
    m = np.array([[0.0, 1.0 + 1e-12], [-(1.0 + 1e-12), 0.0]])
    assert measure.outcome_probability(m, 0) == 0.0


def test_outcome_probability_bad_mode():
    with pytest.raises(IndexOutOfRange):
        measure.outcome_probability(state.vacuum(2), 2)


def test_apply_outcome_examples():
    assert np.array_equal(measure.apply_outcome(state.vacuum(2), 0, 0), state.vacuum(2))
    assert np.array_equal(measure.apply_outcome(np.zeros((2, 2)), 0, 1), [[0, -1], [1, 0]])


def test_apply_outcome_impossible():
    with pytest.raises(ImpossibleOutcome):
        measure.apply_outcome(state.vacuum(1), 0, 1)
    with pytest.raises(ValidationError):
        measure.apply_outcome(state.vacuum(1), 0, 2)


@pytest.mark.parametrize("outcome", [0, 1])
def test_beam_splitter_conditioning_matches_oracle(outcome):
    m = beam_splitter_state()
    post = measure.apply_outcome(m, 0, outcome)
    # pure: all Williamson values of modulus one
    assert np.allclose(np.abs(state.williamson(post).values), 1.0, atol=1e-10)
    table = oracle.dense_measure_distribution(_bs_density(), [0])
    expected = oracle.dense_covariance(table.states[str(outcome)])
    assert state.occupation(post, 1) == pytest.approx(state.occupation(expected, 1), abs=1e-8)
    assert np.allclose(post, expected, atol=1e-8)


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 4), st.integers(0, 2**32 - 1), st.booleans())
def test_conditioning_agrees_with_projector(n, seed, pure):
    rng = np.random.default_rng(seed)
    m = random_covariance(rng, n, pure=pure)
    j = int(rng.integers(n))
    rho = oracle.gaussian_density(*state.williamson(m))
    table = oracle.dense_measure_distribution(rho, [j])
    for bit in (0, 1):
        p = table.probabilities[str(bit)]
        if p < 1e-6:
            continue
        post = measure.apply_outcome(m, j, bit)
        assert np.allclose(post, oracle.dense_covariance(table.states[str(bit)]), atol=1e-8)
        assert state.occupation(post, j) == bit


def test_post_state_properties(rng):
    m = random_covariance(rng, 5)
    post = measure.apply_outcome(m, 2, 1)
    assert np.abs(post + post.T).max() <= 1e-14
    assert state.validate(post).valid
    # measuring the same mode again is deterministic and idempotent
    assert measure.outcome_probability(post, 2) == 1.0
    assert np.allclose(measure.apply_outcome(post, 2, 1), post, atol=1e-15)


def test_apply_outcome_leaves_input_untouched(rng):
    m = random_covariance(rng, 3)
    before = m.copy()
    measure.apply_outcome(m, 1, 0)
    assert np.array_equal(m, before)


# -- random source -------------------------------------------------------------------


def test_random_source_reproducible():
    a, b = RandomSource(7), RandomSource(7)
    assert [a.uniform() for _ in range(5)] == [b.uniform() for _ in range(5)]
    assert a.draws == 5
    assert RandomSource(7, 3).uniform() == a.derive(3).uniform()
    assert RandomSource(7, 3).uniform() != RandomSource(7, 4).uniform()


def test_random_source_rejects_bad_seed():
    with pytest.raises(ValidationError):
        RandomSource(-1)


# -- sampling ----------------------------------------------------------------------------


def test_sample_mode_definite_states():
    rng = RandomSource(0)
    for _ in range(20):
        rec, post = measure.sample_mode(state.vacuum(2), 1, rng)
        assert rec.outcome == 0 and np.array_equal(post, state.vacuum(2))
        rec, _ = measure.sample_mode(state.number_state([1, 1]), 0, rng)
        assert rec.outcome == 1 and rec.probability == 1.0


def test_sample_mode_one_draw_per_measurement():
    rng = RandomSource(1)
    measure.sample_subset(state.vacuum(3), [2, 0, 1], rng)
    assert rng.draws == 3


def test_sample_mode_frequency_maximally_mixed():
    rng = RandomSource(12345)
    m = np.zeros((2, 2))
    ones = sum(measure.sample_mode(m, 0, rng)[0].outcome for _ in range(SHOTS))
    assert abs(ones - SHOTS / 2) <= 3 * np.sqrt(SHOTS * 0.25)


def test_sample_subset_vacuum_and_errors():
    recs, post = measure.sample_subset(state.vacuum(3), [0, 1, 2], RandomSource(0))
    assert [r.outcome for r in recs] == [0, 0, 0] and np.array_equal(post, state.vacuum(3))
    assert recs[0].to_dict() == {"mode": 1, "outcome": 0, "probability": 1.0}
    with pytest.raises(DuplicateMode):
        measure.sample_subset(state.vacuum(3), [0, 0], RandomSource(0))
    with pytest.raises(IndexOutOfRange):
        measure.sample_subset(state.vacuum(3), [3], RandomSource(0))


def _empirical(m, modes, seed, shots=SHOTS):
    rng = RandomSource(seed)
    counts = Counter()
    for _ in range(shots):
        recs, _ = measure.sample_subset(m, modes, rng)
        counts["".join(str(r.outcome) for r in recs)] += 1
    return counts


def test_beam_splitter_joint_distribution():
    m = beam_splitter_state()
    table = oracle.dense_measure_distribution(_bs_density(), [0, 1]).probabilities
    exact = measure.outcome_distribution(m, [0, 1])
    assert max(abs(exact[k] - table[k]) for k in table) <= 1e-8
    assert table["01"] == pytest.approx(0.5) and table["10"] == pytest.approx(0.5)
    counts = _empirical(m, [0, 1], seed=2024)
    tv = 0.5 * sum(abs(counts.get(k, 0) / SHOTS - table[k]) for k in table)
    assert tv <= 0.01
    assert counts.get("00", 0) == counts.get("11", 0) == 0


def test_measurement_order_does_not_change_distribution(rng):
    m = random_covariance(rng, 3)
    forward = _empirical(m, [0, 1, 2], seed=5)
    # reversed order reports bits in measurement order; re-key to mode order
    backward = Counter({k[::-1]: v for k, v in _empirical(m, [2, 1, 0], seed=6).items()})
    keys = sorted(set(forward) | set(backward))
    table = np.array([[forward.get(k, 0) for k in keys], [backward.get(k, 0) for k in keys]])
    _, pvalue, _, _ = stats.chi2_contingency(table)
    assert pvalue > 1e-3
    exact_f = measure.outcome_distribution(m, [0, 1, 2])
    exact_b = measure.outcome_distribution(m, [2, 1, 0])
    assert all(abs(exact_f[k] - exact_b[k[::-1]]) <= 1e-12 for k in exact_f)


def test_outcome_distribution_normalized_and_matches_oracle(rng):
    m = random_covariance(rng, 3)
    rho = oracle.gaussian_density(*state.williamson(m))
    exact = measure.outcome_distribution(m, [1, 2])
    table = oracle.dense_measure_distribution(rho, [1, 2]).probabilities
    assert sum(exact.values()) == pytest.approx(1.0, abs=1e-12)
    assert max(abs(exact[k] - table[k]) for k in table) <= 1e-8

"""전역 측정으로 유도된 마르코프 연쇄"""
import numpy as np
import pytest
from scipy import stats

from conftest import I2, SZ, haar_unitary
from models import BooleanWord, InfeasibleRequest, InvariantViolation, MeasurementSpec, Observable, UnitaryOperator
from pbn import BooleanMapping, TransitionMatrix
from pbn.global_measure import (
    enumerate_mappings,
    mapping_probability,
    measurement_frame,
    propagate,
    qubit_marginals,
    sample_mapping,
    simulate_chain,
    steady_state,
    transition_matrix,
)
from quantum.core import kron, outcome_distribution

HADAMARD = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)


def word(text: str) -> BooleanWord:
    return BooleanWord.parse(text)


class TestTransitionMatrix:

    def test_permutation_example(self, u1, u1_chain):
        np.testing.assert_allclose(transition_matrix(u1).entries, u1_chain, atol=1e-12)

    def test_uniform_second_qubit_example(self, u2):
        P = transition_matrix(u2)
        for src, targets in {"00": ("10", "11"), "01": ("10", "11"), "10": ("00", "01"), "11": ("00", "01")}.items():
            for tgt in targets:
                assert P.probability(word(src), word(tgt)) == pytest.approx(0.5, abs=1e-12)

    def test_entangling_example(self, u3):
        P = transition_matrix(u3)
        assert P.probability(word("00"), word("00")) == pytest.approx(3 / 4, abs=1e-12)
        assert P.probability(word("00"), word("11")) == pytest.approx(1 / 4, abs=1e-12)
        assert P.probability(word("01"), word("10")) == pytest.approx(1.0, abs=1e-12)
        assert P.probability(word("10"), word("01")) == pytest.approx(1.0, abs=1e-12)
        assert P.probability(word("11"), word("11")) == pytest.approx(3 / 4, abs=1e-12)
        assert P.probability(word("11"), word("00")) == pytest.approx(1 / 4, abs=1e-12)

    def test_row_is_source(self):
        # |00⟩ → |01⟩, |01⟩ → |10⟩, … 순환 이동
        shift = np.roll(np.eye(4), 1, axis=0)
        P = transition_matrix(UnitaryOperator(shift))
        assert P.probability(word("00"), word("01")) == 1.0
        assert P.probability(word("11"), word("00")) == 1.0

    def test_doubly_stochastic_for_random_unitaries(self, rng):
        for i in range(500):
            dim = 1 << (1 + i % 4)
            P = transition_matrix(UnitaryOperator(haar_unitary(rng, dim))).entries
            np.testing.assert_allclose(P.sum(axis=0), 1.0, atol=1e-12)
            np.testing.assert_allclose(P.sum(axis=1), 1.0, atol=1e-12)

    def test_rejects_non_stochastic(self):
        with pytest.raises(InvariantViolation):
            TransitionMatrix(np.array([[0.5, 0.5], [0.6, 0.4]]))


class TestMeasurementFrame:

    def test_hadamard_frame_turns_phase_into_flip(self):
        U = UnitaryOperator(kron(SZ, I2))
        Um = measurement_frame(U, Observable.from_unitary(HADAMARD))
        P = transition_matrix(Um)
        assert P.probability(word("00"), word("10")) == pytest.approx(1.0)
        assert P.probability(word("01"), word("11")) == pytest.approx(1.0)

    def test_computational_frame_is_identity(self, u3):
        np.testing.assert_allclose(measurement_frame(u3).entries, u3.entries, atol=1e-15)

    def test_per_qubit_observables(self):
        U = UnitaryOperator(kron(SZ, SZ))
        Um = measurement_frame(U, [Observable.computational(), Observable.from_unitary(HADAMARD)])
        P = transition_matrix(Um)
        assert P.probability(word("00"), word("01")) == pytest.approx(1.0)


class TestMappings:

    def test_single_realization(self, u1):
        entries = enumerate_mappings(u1)
        assert len(entries) == 1
        mapping, prob = entries[0]
        assert mapping == BooleanMapping((4, 3, 2, 1))
        assert prob == pytest.approx(1.0, abs=1e-12)

    def test_sixteen_equal_realizations(self, u2):
        entries = enumerate_mappings(u2)
        assert len(entries) == 16
        for _, prob in entries:
            assert prob == pytest.approx(1 / 16, abs=1e-12)

    def test_threshold_is_strict(self, u2):
        assert enumerate_mappings(u2, threshold=1 / 16) == []

    def test_all_mappings_sum_to_one(self, rng):
        Um = UnitaryOperator(haar_unitary(rng, 4))
        entries = enumerate_mappings(Um, threshold=None)
        assert len(entries) == 256
        assert sum(p for _, p in entries) == pytest.approx(1.0, abs=1e-12)

    def test_marginals_recover_transition_entries(self, rng):
        Um = UnitaryOperator(haar_unitary(rng, 4))
        P = transition_matrix(Um).entries
        recovered = np.zeros((4, 4))
        for mapping, prob in enumerate_mappings(Um, threshold=None):
            for i, a in enumerate(mapping.alpha):
                recovered[i, a - 1] += prob
        np.testing.assert_allclose(recovered, P, atol=1e-12)

    def test_mapping_probability_matches_enumeration(self, u3):
        for mapping, prob in enumerate_mappings(u3):
            assert mapping_probability(u3, mapping) == pytest.approx(prob, abs=1e-15)

    def test_mapping_matrix_and_apply(self):
        mapping = BooleanMapping((2, 2, 4, 1))
        np.testing.assert_array_equal(mapping.matrix @ word("10").onehot, word("11").onehot)
        assert mapping.apply(word("11")) == word("00")

    def test_enumeration_refused_above_two_qubits(self, u5):
        with pytest.raises(InfeasibleRequest):
            enumerate_mappings(u5)

    def test_sampled_mappings_uniform(self, u2, rng):
        samples = 20_000
        counts = {}
        for _ in range(samples):
            alpha = sample_mapping(u2, rng).alpha
            counts[alpha] = counts.get(alpha, 0) + 1
        assert len(counts) == 16
        _, pvalue = stats.chisquare(list(counts.values()))
        assert pvalue > 1e-3


class TestChain:

    def test_propagate_converges_to_uniform(self, w4, p4):
        table = propagate(TransitionMatrix(w4), p4, 50)
        assert table.shape == (51, 4)
        np.testing.assert_allclose(table[0], p4)
        assert np.max(np.abs(table[50] - 0.25)) < 1e-9

    def test_propagate_short_list(self, w4, p4):
        with pytest.raises(InvariantViolation):
            propagate([TransitionMatrix(w4)], p4, 2)

    def test_steady_state(self, w4):
        p, iterations = steady_state(TransitionMatrix(w4), np.array([1.0, 0, 0, 0]))
        np.testing.assert_allclose(p, 0.25, atol=1e-11)
        assert iterations > 1

    def test_example_monte_carlo(self, u4, psi4, p4, rng):
        initial = outcome_distribution(psi4, MeasurementSpec.global_(2))
        np.testing.assert_allclose(initial, p4, atol=1e-15)
        result = simulate_chain(initial, u4, 20, 10_000, rng)
        assert result.p_hat.shape == (21, 4)
        assert result.max_deviation <= 0.02
        np.testing.assert_allclose(result.p_hat.sum(axis=1), 1.0)

    def test_exact_chain_matches_target_matrix(self, u4, w4, p4, rng):
        result = simulate_chain(p4, u4, 5, 10, rng)
        for t in range(5):
            np.testing.assert_allclose(result.p_exact[t + 1], w4.T @ result.p_exact[t], atol=1e-12)

    def test_deterministic_chain_from_word(self, u1, rng):
        result = simulate_chain(word("01"), u1, 4, 50, rng)
        np.testing.assert_array_equal(result.p_hat[:, 1], [1, 0, 1, 0, 1])
        np.testing.assert_array_equal(result.p_hat[:, 2], [0, 1, 0, 1, 0])
        assert result.max_deviation == 0.0

    def test_same_seed_same_estimate(self, u4, p4):
        a = simulate_chain(p4, u4, 10, 5000, np.random.default_rng(11))
        b = simulate_chain(p4, u4, 10, 5000, np.random.default_rng(11))
        np.testing.assert_array_equal(a.p_hat, b.p_hat)

    def test_worker_count_does_not_change_result(self, u4, p4):
        a = simulate_chain(p4, u4, 10, 5000, np.random.default_rng(5), workers=1)
        b = simulate_chain(p4, u4, 10, 5000, np.random.default_rng(5), workers=4)
        np.testing.assert_array_equal(a.p_hat, b.p_hat)

    def test_time_varying_schedule(self, u1, u3, rng):
        result = simulate_chain(word("00"), [u3, u1], 2, 100, rng)
        np.testing.assert_allclose(result.p_exact[1], [3 / 4, 0, 0, 1 / 4], atol=1e-12)
        np.testing.assert_allclose(result.p_exact[2], [1 / 4, 0, 0, 3 / 4], atol=1e-12)

    def test_empty_schedule(self, rng):
        with pytest.raises(InvariantViolation):
            simulate_chain(word("00"), [], 3, 10, rng)

    def test_invalid_initial_distribution(self, u1, rng):
        with pytest.raises(InvariantViolation):
            simulate_chain(np.array([0.5, 0.5, 0.5, -0.5]), u1, 1, 10, rng)
        with pytest.raises(InvariantViolation):
            simulate_chain(word("010"), u1, 1, 10, rng)


class TestQubitMarginals:

    def test_entangling_example_marginals(self, u3):
        marginals = qubit_marginals(u3, word("00"))
        for marginal in marginals.maps:
            assert marginal.shape == (2,)
            np.testing.assert_allclose(marginal, [3 / 4, 1 / 4], atol=1e-12)
        assert marginals.joint[word("11").index - 1] == pytest.approx(1 / 4, abs=1e-12)
        assert marginals.maps[0][1] * marginals.maps[1][1] == pytest.approx(1 / 16, abs=1e-12)
        assert not marginals.is_product_of_marginals()
        assert marginals.product_gap == pytest.approx(3 / 16, abs=1e-12)

    def test_product_unitary_gives_product_chain(self, u2):
        assert qubit_marginals(u2, word("01")).is_product_of_marginals()

    def test_start_length_checked(self, u3):
        with pytest.raises(InvariantViolation):
            qubit_marginals(u3, word("0"))

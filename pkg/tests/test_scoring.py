import os
import tempfile
import unittest

import numpy as np
import pandas as pd

from HybridQueryMSA.Alignment import SequenceSet, column_sp_score, decode, is_feasible
from HybridQueryMSA.MSAErrors import MSACapacityError, MSAInputError, MSAParameterError
from HybridQueryMSA.Scoring import (QueryEvaluator, build_energy_table, build_weights, check_cap,
                                    export_energy_table, loss, penalty, similarity, sp_score, sp_score_ordered)
from HybridQueryMSA.report import number, tags

PEPTIDES = SequenceSet.from_strings(["AAKGT", "AT", "AKG", "KT"], L=5)
PEPTIDE_OPTIMUM = "11111100011011000101"


class TestWeights(unittest.TestCase):
    def test_similarity(self):
        self.assertEqual(similarity("A", "A"), -1)
        self.assertEqual(similarity("A", "K"), 1)
        for a in "AKGT":
            for b in "AKGT":
                self.assertEqual(similarity(a, b), similarity(b, a))
        with self.assertRaises(MSAInputError):
            similarity("A", "B")

    def test_build_weights(self):
        W = build_weights(SequenceSet.from_strings(["AT", "AKG"]))
        np.testing.assert_array_equal(W.get(0, 1), [[-1, 1, 1], [1, 1, 1]])
        np.testing.assert_array_equal(W.get(1, 0), [[-1, 1], [1, 1], [1, 1]])
        np.testing.assert_array_equal(build_weights(SequenceSet.from_strings(["A", "A"])).get(0, 1), [[-1]])

    def test_peptide4_weight_shapes(self):
        W = build_weights(PEPTIDES)
        self.assertEqual(len(W), 6)
        shapes = [W.get(i, j).shape for i, j in PEPTIDES.pairs()]
        self.assertEqual(shapes, [(5, 2), (5, 3), (5, 2), (2, 3), (2, 2), (3, 2)])
        self.assertFalse(W.get(0, 1).flags.writeable)


class TestLoss(unittest.TestCase):
    def setUp(self):
        self.W = build_weights(PEPTIDES)

    @number("2.1")
    @tags("golden")
    def test_peptide4_optimum_scores_minus_ten(self):
        self.assertEqual(sp_score(PEPTIDE_OPTIMUM, PEPTIDES, self.W), -10.0)
        self.assertEqual(penalty(PEPTIDE_OPTIMUM, PEPTIDES, 1.5), 0.0)
        self.assertEqual(loss(PEPTIDE_OPTIMUM, PEPTIDES, self.W, 1.5), -10.0)

    @number("2.2")
    @tags("golden")
    def test_ordered_pairs_double_count(self):
        self.assertEqual(sp_score_ordered(PEPTIDE_OPTIMUM, PEPTIDES, self.W), -20.0)

    def test_all_zero_bits(self):
        self.assertEqual(sp_score(0, PEPTIDES, self.W), 0.0)
        self.assertEqual(penalty(0, PEPTIDES, 1.5), 63.0)
        self.assertEqual(loss(0, PEPTIDES, self.W, 1.5), 63.0)

    def test_small_examples(self):
        S = SequenceSet.from_strings(["AG", "AG"], L=2)
        self.assertEqual(sp_score("1111", S, build_weights(S)), -2.0)
        S = SequenceSet.from_strings(["AG"], L=4)
        self.assertEqual(penalty("0111", S, 1.5), 1.5)

    def test_negative_penalty_rejected(self):
        with self.assertRaises(MSAParameterError):
            penalty(0, PEPTIDES, -1.0)

    def test_penalty_zero_iff_feasible(self):
        S = SequenceSet.from_strings(["AKG", "AG"], L=4)
        for index in range(1 << S.n_qubits):
            self.assertEqual(penalty(index, S, 1.5) == 0.0, is_feasible(index, S))

    def test_query_equivalence_on_feasible_states(self):
        # On feasible states the hybrid query loss is the plain SP-score of the decoded alignment.
        S = SequenceSet.from_strings(["AKG", "AG", "KG"], L=4)
        W = build_weights(S)
        for index in range(1 << S.n_qubits):
            if is_feasible(index, S):
                self.assertEqual(loss(index, S, W, 1.5), column_sp_score(decode(index, S)))

    def test_feasible_score_bound(self):
        S = SequenceSet.from_strings(["AKG", "AG", "KG"], L=4)
        W = build_weights(S)
        bound = sum(min(S.lengths[i], S.lengths[j]) for i, j in S.pairs())
        for index in range(1 << S.n_qubits):
            if is_feasible(index, S):
                self.assertLessEqual(abs(sp_score(index, S, W)), bound)


class TestEvaluator(unittest.TestCase):
    def test_vectorized_matches_scalar(self):
        S = SequenceSet.from_strings(["AKG", "AG", "KGT"], L=4)
        W = build_weights(S)
        evaluator = QueryEvaluator(S, W, 1.5)
        idx = np.random.default_rng(0).integers(0, 1 << S.n_qubits, size=200)
        expected = [loss(int(i), S, W, 1.5) for i in idx]
        np.testing.assert_array_equal(evaluator.energies(idx), expected)
        self.assertEqual(evaluator(int(idx[0])), expected[0])

    def test_pure_function(self):
        evaluator = QueryEvaluator(PEPTIDES)
        idx = np.arange(4096)
        np.testing.assert_array_equal(evaluator.energies(idx), evaluator.energies(idx))

    def test_feasible_mask(self):
        evaluator = QueryEvaluator(PEPTIDES)
        mask = evaluator.feasible_mask([int(PEPTIDE_OPTIMUM, 2), 0])
        np.testing.assert_array_equal(mask, [True, False])


class TestEnergyTable(unittest.TestCase):
    @number("2.3")
    @tags("golden")
    def test_two_qubit_golden_vector(self):
        table = build_energy_table(SequenceSet.from_strings(["A", "A"], L=1), p=1.5)
        np.testing.assert_array_equal(table.energies, [3.0, 1.5, 1.5, -1.0])
        self.assertEqual(table.minimum(), -1.0)
        self.assertFalse(table.energies.flags.writeable)

    def test_all_gap_entry(self):
        S = SequenceSet.from_strings(["AKG", "AG"], L=4)
        self.assertEqual(build_energy_table(S, p=2.0)[0], 2.0 * (9 + 4))

    def test_workers_do_not_change_table(self):
        S = SequenceSet.from_strings(["AKGT", "AGT", "KT", "G"], L=5)
        serial = build_energy_table(S)
        threaded = build_energy_table(S, workers=4)
        np.testing.assert_array_equal(serial.energies, threaded.energies)

    def test_over_cap(self):
        with self.assertRaises(MSACapacityError):
            check_cap(30, 24)
        with self.assertRaises(MSACapacityError):
            build_energy_table(PEPTIDES, cap=16)

    def test_shifted(self):
        table = build_energy_table(SequenceSet.from_strings(["A", "A"], L=1))
        np.testing.assert_array_equal(table.shifted(2.0).energies, [5.0, 3.5, 3.5, 1.0])

    def test_export(self):
        table = build_energy_table(SequenceSet.from_strings(["A", "A"], L=1))
        with tempfile.TemporaryDirectory() as tmp:
            frame = pd.read_csv(export_energy_table(table, os.path.join(tmp, "e.csv")))
            self.assertEqual(list(frame["energy"]), [3.0, 1.5, 1.5, -1.0])
            np.testing.assert_array_equal(np.load(export_energy_table(table, os.path.join(tmp, "e.npy"), "npy")),
                                          table.energies)
            with self.assertRaises(MSAParameterError):
                export_energy_table(table, os.path.join(tmp, "e.txt"), "txt")


if __name__ == "__main__":
    unittest.main()

import math
import os
import tempfile
import unittest

import numpy as np
import pandas as pd

from HybridQueryMSA.Alignment import SequenceSet
from HybridQueryMSA.MSAErrors import MSACapacityError
from HybridQueryMSA.Oracle import (brute_force_min, build_landscape, classify, export_landscape, local_minima,
                                   verify_expectation)
from HybridQueryMSA.Scoring import QueryEvaluator, build_energy_table
from HybridQueryMSA.Simulator import HEA, AnsatzSpec, StateVector, prepare
from HybridQueryMSA.SolutionClass import SolutionClass
from HybridQueryMSA.report import number, tags

GOLDEN = np.array([3.0, 1.5, 1.5, -1.0])


class TestBruteForce(unittest.TestCase):
    @number("5.1")
    @tags("acceptance", "golden")
    def test_peptide4_minimum(self):
        S = SequenceSet.from_strings(["AAKGT", "AT", "AKG", "KT"], L=5)
        report = brute_force_min(QueryEvaluator(S, p=1.5))
        self.assertEqual(report.global_minimum, -10.0)
        self.assertIn(int("11111100011011000101", 2), report.global_states)
        self.assertGreater(len(report.global_states), 1)

    def test_single_sequence_counts_placements(self):
        S = SequenceSet.from_strings(["AKG"], L=6)
        report = brute_force_min(QueryEvaluator(S))
        self.assertEqual(report.global_minimum, 0.0)
        self.assertEqual(len(report.global_states), math.comb(6, 3))

    def test_two_identical_sequences(self):
        S = SequenceSet.from_strings(["AG", "AG"], L=2)
        report = brute_force_min(QueryEvaluator(S))
        self.assertEqual(report.global_minimum, -2.0)
        self.assertEqual(report.global_states, [0b1111])

    def test_feasible_only_and_workers(self):
        S = SequenceSet.from_strings(["AKGT", "AGT", "KT"], L=4)
        evaluator = QueryEvaluator(S)
        full = brute_force_min(evaluator)
        feasible = brute_force_min(evaluator, feasible_only=True)
        self.assertGreaterEqual(feasible.global_minimum, full.global_minimum)
        self.assertTrue(all(evaluator.feasible_mask(feasible.global_states)))
        self.assertEqual(brute_force_min(evaluator, workers=3).global_states, full.global_states)

    def test_over_cap(self):
        S = SequenceSet.from_strings(["AKGT", "AGT", "KT"], L=4)
        with self.assertRaises(MSACapacityError):
            brute_force_min(QueryEvaluator(S), cap=10)

    def test_report_serializes_bitstrings(self):
        S = SequenceSet.from_strings(["AG", "AG"], L=2)
        data = brute_force_min(QueryEvaluator(S), local=True).to_dict(4)
        self.assertEqual(data["global_states"], ["1111"])


class TestLocalMinima(unittest.TestCase):
    def test_cube_minima(self):
        # One sequence of two letters in three columns: every two-letter placement is a strict minimum.
        table = build_energy_table(SequenceSet.from_strings(["AG"], L=3))
        strict, flat = local_minima(table)
        self.assertEqual(strict, [(0b011, 0.0), (0b101, 0.0), (0b110, 0.0)])
        self.assertEqual(flat, [])

    @tags("oracle")
    def test_eight_qubit_landscape_has_a_trap(self):
        table = build_energy_table(SequenceSet.from_strings(["AKG", "AG"], L=4))
        minimum = float(table.energies.min())
        self.assertEqual(minimum, -2.0)
        strict, _ = local_minima(table)
        traps = [(i, e) for i, e in strict if e > minimum]
        self.assertGreaterEqual(len(traps), 1)
        # AKG_ over AG__: every single flip either breaks a letter count or loses the A-A match.
        self.assertIn((0b11101100, 0.0), traps)

    def test_plateau_reported_as_flat(self):
        strict, flat = local_minima(np.array([0.0, 0.0, 1.0, 1.0]))
        self.assertEqual(strict, [])
        self.assertEqual([i for i, _ in flat], [0, 1])


class TestLandscape(unittest.TestCase):
    @number("5.2")
    def test_cube(self):
        landscape = build_landscape(QueryEvaluator(SequenceSet.from_strings(["AG"], L=3)))
        self.assertEqual(landscape.node_count, 8)
        self.assertEqual(landscape.edge_count, 12)
        for node in landscape.graph.nodes:
            for neighbour in landscape.graph.neighbors(node):
                self.assertIn(node, set(landscape.graph.neighbors(neighbour)))
                self.assertEqual(bin(node ^ neighbour).count("1"), 1)

    def test_graph_minima_agree_with_table(self):
        S = SequenceSet.from_strings(["AKG", "AG"], L=4)
        landscape = build_landscape(QueryEvaluator(S))
        strict, _ = local_minima(build_energy_table(S))
        self.assertEqual(landscape.local_minima(), strict)

    def test_feasible_graph_uses_letter_moves(self):
        landscape = build_landscape(QueryEvaluator(SequenceSet.from_strings(["AG"], L=3)), feasible_only=True)
        self.assertEqual(landscape.node_count, 3)
        self.assertEqual(landscape.edge_count, 3)
        for a, b in landscape.graph.edges:
            self.assertEqual(bin(a ^ b).count("1"), 2)

    def test_landscape_cap(self):
        S = SequenceSet.from_strings(["AKGT", "AGT", "KT", "G"], L=5)
        with self.assertRaises(MSACapacityError):
            build_landscape(QueryEvaluator(S))

    def test_export(self):
        landscape = build_landscape(QueryEvaluator(SequenceSet.from_strings(["AG"], L=3)))
        with tempfile.TemporaryDirectory() as tmp:
            nodes, edges = export_landscape(landscape, tmp)
            self.assertEqual(len(pd.read_csv(nodes)), 8)
            self.assertEqual(len(pd.read_csv(edges)), 12)
            self.assertTrue(os.path.isfile(os.path.join(tmp, "landscape_nodes.csv")))


class TestVerifyExpectation(unittest.TestCase):
    def test_residuals(self):
        self.assertEqual(verify_expectation(StateVector.basis(2, 2), GOLDEN), 0.0)
        self.assertLess(verify_expectation(StateVector.uniform(2), GOLDEN), 1e-12)
        spec = AnsatzSpec(HEA, 10, 2)
        psi = prepare(spec, np.random.default_rng(0).uniform(0, 2 * np.pi, spec.parameter_count))
        table = np.random.default_rng(1).normal(size=1 << 10) * 10
        self.assertLess(verify_expectation(psi, table), 1e-9)


class TestClassify(unittest.TestCase):
    def test_tags(self):
        evaluator = QueryEvaluator(SequenceSet.from_strings(["AG", "AG"], L=3))
        self.assertIs(classify(0b110110, evaluator, -2.0), SolutionClass.optimal)
        # A_G over _AG only pairs up the Gs.
        self.assertIs(classify(0b101011, evaluator, -2.0), SolutionClass.feasible)
        self.assertIs(classify(0b000000, evaluator, -2.0), SolutionClass.infeasible)
        self.assertIs(classify(0b110110, evaluator, None), SolutionClass.feasible)


if __name__ == "__main__":
    unittest.main()

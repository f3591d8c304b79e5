import unittest

import numpy as np

from HybridQueryMSA.Alignment import (SequenceSet, as_bits, bits_from_index, clamp_indices, clamp_reference,
                                      column_sp_score, decode, encode, format_index, index_from_bits,
                                      is_feasible, load_fasta, min_qubits_for, position_map)
from HybridQueryMSA.MSAErrors import MSADimensionError, MSAInputError
from HybridQueryMSA.report import number, tags

PEPTIDES = SequenceSet.from_strings(["AAKGT", "AT", "AKG", "KT"], L=5)
PEPTIDE_OPTIMUM = "11111 10001 10110 00101"


class TestSequenceSet(unittest.TestCase):
    def test_defaults_L_to_longest(self):
        S = SequenceSet.from_strings(["akg", " at "])
        self.assertEqual(S.sequences, ("AKG", "AT"))
        self.assertEqual(S.L, 3)
        self.assertEqual(S.n_qubits, 6)
        self.assertEqual(S.pairs(), [(0, 1)])

    def test_rejects_bad_input(self):
        with self.assertRaises(MSAInputError):
            SequenceSet.from_strings(["AXB"])
        with self.assertRaises(MSAInputError):
            SequenceSet.from_strings(["A_G"])
        with self.assertRaises(MSAInputError):
            SequenceSet.from_strings(["AKG"], L=2)
        with self.assertRaises(MSAInputError):
            SequenceSet.from_strings(["AKG", "AG"], reference_index=2)

    def test_min_qubits(self):
        self.assertEqual(min_qubits_for(PEPTIDES), 20)

    def test_fasta(self):
        records = load_fasta(">one\nAAK\nGT\n; comment\n>two\nat\n")
        self.assertEqual(records, [("one", "AAKGT"), ("two", "AT")])
        S = SequenceSet.from_fasta(">one\nAAKGT\n>two\nAT\n", L=6)
        self.assertEqual(S.names, ("one", "two"))
        self.assertEqual(S.L, 6)
        with self.assertRaises(MSAInputError):
            load_fasta("AAKGT\n")
        with self.assertRaises(MSAInputError):
            load_fasta(">x\nAA1\n")
        with self.assertRaises(MSAInputError):
            load_fasta("")


class TestEncoding(unittest.TestCase):
    @number("1.1")
    def test_encode_examples(self):
        np.testing.assert_array_equal(encode(["AG__"]), [1, 1, 0, 0])
        np.testing.assert_array_equal(encode(["A_G_"]), [1, 0, 1, 0])
        np.testing.assert_array_equal(encode(["____"]), [0, 0, 0, 0])

    def test_encode_row_length_mismatch(self):
        with self.assertRaises(MSADimensionError):
            encode(["AG__", "A_"])

    @number("1.2")
    @tags("golden")
    def test_position_map_worked_example(self):
        S = SequenceSet.from_strings(["AG"], L=4)
        np.testing.assert_array_equal(position_map(0, "0111", S), [-1, 0, 1, -1])
        np.testing.assert_array_equal(position_map(0, "0000", S), [-1, -1, -1, -1])
        S = SequenceSet.from_strings(["AAKGT"])
        np.testing.assert_array_equal(position_map(0, "11111", S), [0, 1, 2, 3, 4])
        with self.assertRaises(MSADimensionError):
            position_map(1, "11111", S)

    @number("1.3")
    def test_decode_peptide4_optimum(self):
        view = decode(PEPTIDE_OPTIMUM, PEPTIDES)
        self.assertEqual(view.rows, ("AAKGT", "A___T", "A_KG_", "__K_T"))
        self.assertEqual(str(view).splitlines()[1], "A___T")

    def test_decode_overflow_and_empty(self):
        S = SequenceSet.from_strings(["AG"], L=4)
        self.assertEqual(decode("1111", S).rows, ("AG__",))
        self.assertEqual(decode(0, PEPTIDES).rows, ("_____",) * 4)

    def test_is_feasible(self):
        self.assertTrue(is_feasible(PEPTIDE_OPTIMUM, PEPTIDES))
        self.assertFalse(is_feasible(0, PEPTIDES))
        self.assertFalse(is_feasible("0111", SequenceSet.from_strings(["AG"], L=4)))

    def test_round_trip_on_feasible_states(self):
        S = SequenceSet.from_strings(["AKG", "AG", "K"], L=4)
        rng = np.random.default_rng(3)
        for _ in range(50):
            rows = []
            for seq in S.sequences:
                row = np.zeros(S.L, dtype=np.uint8)
                row[np.sort(rng.choice(S.L, size=len(seq), replace=False))] = 1
                rows.append(row)
            bits = np.concatenate(rows)
            np.testing.assert_array_equal(encode(decode(bits, S)), bits)

    def test_clearing_a_bit_keeps_earlier_columns(self):
        S = SequenceSet.from_strings(["AKGT"], L=6)
        for index in range(1 << S.L):
            bits = bits_from_index(index, S)[0]
            row = decode(bits, S).rows[0]
            f = position_map(0, bits, S)
            for k in np.flatnonzero(bits):
                cleared = bits.copy()
                cleared[k] = 0
                self.assertEqual(decode(cleared, S).rows[0][:k], row[:k], (index, k))
                np.testing.assert_array_equal(position_map(0, cleared, S)[:k], f[:k])
                self.assertEqual(decode(cleared, S).rows[0][k], "_")

    def test_position_map_is_monotone(self):
        S = SequenceSet.from_strings(["AKG"], L=5)
        for index in range(1 << S.L):
            f = position_map(0, index, S)
            placed = f[f >= 0]
            popcount = bin(index).count("1")
            self.assertEqual(len(placed), min(popcount, 3), index)
            self.assertTrue(np.all(np.diff(placed) > 0), index)
            np.testing.assert_array_equal(placed, np.arange(len(placed)))

    @number("1.4")
    def test_every_state_of_ag_over_three_columns(self):
        S = SequenceSet.from_strings(["AG"], L=3)
        for index in range(8):
            bits = [(index >> (2 - k)) & 1 for k in range(3)]
            expected_map, expected_row, running = [], "", 0
            for b in bits:
                running += b
                if b and running <= 2:
                    expected_map.append(running - 1)
                    expected_row += "AG"[running - 1]
                else:
                    expected_map.append(-1)
                    expected_row += "_"
            with self.subTest(bits="".join(map(str, bits))):
                np.testing.assert_array_equal(position_map(0, index, S), expected_map)
                self.assertEqual(decode(index, S).rows, (expected_row,))
                self.assertEqual(is_feasible(index, S), sum(bits) == 2)
        self.assertEqual(decode(0b111, S).rows, ("AG_",))
        self.assertEqual(decode(0b011, S).rows, ("_AG",))

    def test_bit_layout(self):
        # Bit (0, 0) is the most significant bit of the index.
        S = SequenceSet.from_strings(["AG", "A"], L=2)
        np.testing.assert_array_equal(bits_from_index(0b1000, S), [[1, 0], [0, 0]])
        self.assertEqual(index_from_bits(as_bits("10 01", S)), 0b1001)
        self.assertEqual(format_index(0b1001, S, sep=" "), "10 01")
        with self.assertRaises(MSADimensionError):
            as_bits("101", S)
        with self.assertRaises(MSAInputError):
            as_bits("10a1", S)

    def test_column_score_matches_direct_count(self):
        self.assertEqual(column_sp_score(["AAKGT", "A___T", "A_KG_", "__K_T"]), -10)
        self.assertEqual(column_sp_score(["AG", "AK"]), 0)


class TestReferenceClamp(unittest.TestCase):
    def test_clamp_pins_reference_row(self):
        S = SequenceSet.from_strings(["AKG", "AG"], L=4, reference_index=0)
        np.testing.assert_array_equal(clamp_reference("0101 1100", S), [[1, 1, 1, 0], [1, 1, 0, 0]])
        idx = np.arange(1 << S.n_qubits)
        clamped = clamp_indices(idx, S)
        self.assertTrue(np.all((clamped >> 4) == 0b1110))
        np.testing.assert_array_equal(clamped & 0xF, idx & 0xF)

    def test_no_reference_is_identity(self):
        S = SequenceSet.from_strings(["AKG", "AG"], L=4)
        idx = np.arange(1 << S.n_qubits)
        np.testing.assert_array_equal(clamp_indices(idx, S), idx)


if __name__ == "__main__":
    unittest.main()

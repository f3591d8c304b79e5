"""
Sequences, alignments and the hybrid query encoding.

One bit per (sequence, column): 1 means a letter of that sequence occupies
the column. Which letter it is comes from querying the original sequence
through the prefix-sum position map, so the bits never store residues.

Layout is sequence-major with bit (0, 0) the most significant bit of the
basis-state index. Every module converts between bits and indices through
the helpers in this file.
"""
import logging
from dataclasses import dataclass, field
from itertools import combinations
from typing import Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np

from .MSAErrors import MSADimensionError, MSAInputError

logger = logging.getLogger(__name__)

ALPHABET = "ARNDCQEGHILKMFPSTWYV"
GAP = "_"
BIT_ORDER = "sequence-major, bit (0,0) most significant"

Residue = str
BitsLike = Union[str, int, Sequence[int], np.ndarray]

def validate_residue(symbol: Residue) -> Residue:
    if not isinstance(symbol, str) or len(symbol) != 1 or symbol not in ALPHABET:
        raise MSAInputError(f"'{symbol}' is not a residue of the alphabet {ALPHABET}.")
    return symbol

@dataclass(frozen=True)
class SequenceSet:
    """
    The input sequences, the padded column count L and an optional
    reference sequence. Sequence indices are 0-based.
    """
    sequences: Tuple[str, ...]
    L: int = None
    reference_index: Optional[int] = None
    names: Tuple[str, ...] = field(default=None, compare=False)

    def __post_init__(self):
        seqs = tuple(s.strip().upper() for s in self.sequences)
        object.__setattr__(self, "sequences", seqs)
        if len(seqs) < 1:
            raise MSAInputError("A sequence set needs at least one sequence.")
        for s in seqs:
            if len(s) < 1:
                raise MSAInputError("Empty sequences cannot be aligned.")
            for ch in s:
                if ch == GAP:
                    raise MSAInputError(f"Input sequence {s} contains a gap; gaps only exist in alignments.")
                validate_residue(ch)
        longest = max(len(s) for s in seqs)
        if self.L is None:
            object.__setattr__(self, "L", longest)
        if self.L < longest:
            raise MSAInputError(f"L={self.L} is shorter than the longest sequence ({longest}).")
        if self.reference_index is not None and not 0 <= self.reference_index < len(seqs):
            raise MSAInputError(f"Reference index {self.reference_index} is out of range.")
        if self.names is None:
            object.__setattr__(self, "names", tuple(f"s{i + 1}" for i in range(len(seqs))))

    @classmethod
    def from_strings(cls, sequences: Iterable[str], L: int=None, reference_index: int=None) -> "SequenceSet":
        return cls(tuple(sequences), L=L, reference_index=reference_index)

    @classmethod
    def from_fasta(cls, text: str, L: int=None, reference_index: int=None) -> "SequenceSet":
        records = load_fasta(text)
        return cls(tuple(r[1] for r in records), L=L, reference_index=reference_index,
                   names=tuple(r[0] for r in records))

    @property
    def N(self) -> int:
        return len(self.sequences)

    @property
    def lengths(self) -> Tuple[int, ...]:
        return tuple(len(s) for s in self.sequences)

    @property
    def n_qubits(self) -> int:
        return self.N * self.L

    def pairs(self) -> List[Tuple[int, int]]:
        """Unordered sequence pairs i < j."""
        return list(combinations(range(self.N), 2))

def min_qubits_for(S: SequenceSet) -> int:
    """Smallest register that fits every sequence ungapped: N * max(l_i)."""
    return S.N * max(S.lengths)

@dataclass(frozen=True)
class AlignmentView:
    rows: Tuple[str, ...]

    @property
    def L(self) -> int:
        return len(self.rows[0]) if self.rows else 0

    def __str__(self):
        return "\n".join(self.rows)

def load_fasta(text: str) -> List[Tuple[str, str]]:
    """
    Minimal FASTA reader: '>' header lines, residue lines concatenated until
    the next header. Returns (name, sequence) pairs in file order.
    """
    records = []
    name, chunks = None, []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith(";"):
            continue
        if line.startswith(">"):
            if name is not None:
                records.append((name, "".join(chunks)))
            name, chunks = line[1:].strip() or f"s{len(records) + 1}", []
            continue
        if name is None:
            raise MSAInputError(f"Line {lineno}: residues before the first '>' header.")
        line = line.upper()
        bad = [ch for ch in line if ch not in ALPHABET]
        if bad:
            raise MSAInputError(f"Line {lineno}: characters {''.join(sorted(set(bad)))} are not residues.")
        chunks.append(line)
    if name is not None:
        records.append((name, "".join(chunks)))
    if not records:
        raise MSAInputError("No sequences found.")
    return records

def load_fasta_file(path: str, L: int=None, reference_index: int=None) -> SequenceSet:
    with open(path, "r") as f:
        return SequenceSet.from_fasta(f.read(), L=L, reference_index=reference_index)

# Bit layout

def _shifts(n: int) -> np.ndarray:
    return np.arange(n - 1, -1, -1, dtype=np.int64)

def bits_from_index(index: int, S: SequenceSet) -> np.ndarray:
    n = S.n_qubits
    if not 0 <= int(index) < (1 << n):
        raise MSADimensionError(f"Index {index} does not fit in {n} qubits.")
    return ((int(index) >> _shifts(n)) & 1).astype(np.uint8).reshape(S.N, S.L)

def indices_to_bits(indices: np.ndarray, n: int) -> np.ndarray:
    """
    (m,) basis indices -> (m, n) bit matrix, column 0 being the most significant bit.
    """
    indices = np.asarray(indices, dtype=np.int64)
    return ((indices[:, None] >> _shifts(n)[None, :]) & 1).astype(np.uint8)

def index_from_bits(bits: np.ndarray) -> int:
    flat = np.asarray(bits, dtype=np.int64).ravel()
    index = 0
    for b in flat:
        index = (index << 1) | int(b)
    return index

def as_bits(bits: BitsLike, S: SequenceSet) -> np.ndarray:
    """
    Normalize a bitstring ("11111 10001 ..." spaces allowed), a basis index,
    a flat 0/1 sequence or an (N, L) array to an (N, L) uint8 array.
    """
    if isinstance(bits, (int, np.integer)):
        return bits_from_index(int(bits), S)
    if isinstance(bits, str):
        text = "".join(bits.split())
        if any(ch not in "01" for ch in text):
            raise MSAInputError(f"Bitstring '{bits}' contains characters other than 0 and 1.")
        bits = [int(ch) for ch in text]
    arr = np.asarray(bits)
    if arr.size != S.n_qubits:
        raise MSADimensionError(f"Expected {S.n_qubits} bits (N={S.N}, L={S.L}), got {arr.size}.")
    if np.any((arr != 0) & (arr != 1)):
        raise MSAInputError("Bit values must be 0 or 1.")
    return arr.astype(np.uint8).reshape(S.N, S.L)

def bitstring(bits: np.ndarray, sep: str="") -> str:
    arr = np.asarray(bits, dtype=np.uint8)
    if arr.ndim == 1:
        return "".join(map(str, arr))
    return sep.join("".join(map(str, row)) for row in arr)

def format_index(index: int, S: SequenceSet, sep: str="") -> str:
    return bitstring(bits_from_index(index, S), sep=sep)

# Hybrid query encoding

def position_maps(bit_rows: np.ndarray, length) -> np.ndarray:
    """
    Vectorized position map over the last axis: -1 where the bit is 0 or the
    running letter count exceeds the sequence length, else running count - 1.
    length broadcasts against bit_rows[..., 0].
    """
    bit_rows = np.asarray(bit_rows, dtype=np.int64)
    counts = np.cumsum(bit_rows, axis=-1)
    limit = np.asarray(length)[..., None] if np.ndim(length) else length
    return np.where((bit_rows == 1) & (counts <= limit), counts - 1, -1)

def position_map(i: int, bits: BitsLike, S: SequenceSet) -> np.ndarray:
    if not 0 <= i < S.N:
        raise MSADimensionError(f"Sequence index {i} is out of range for N={S.N}.")
    arr = as_bits(bits, S)
    return position_maps(arr[i], S.lengths[i])

def encode(alignment: Union[AlignmentView, Sequence[str]], L: int=None) -> np.ndarray:
    """
    Alignment rows -> flat bit vector, 1 where the column holds a letter.
    """
    rows = alignment.rows if isinstance(alignment, AlignmentView) else tuple(alignment)
    if not rows:
        raise MSADimensionError("An alignment needs at least one row.")
    if L is None:
        L = len(rows[0])
    bits = np.zeros((len(rows), L), dtype=np.uint8)
    for i, row in enumerate(rows):
        if len(row) != L:
            raise MSADimensionError(f"Row {i} has length {len(row)}, expected L={L}.")
        for k, ch in enumerate(row):
            if ch == GAP:
                continue
            validate_residue(ch)
            bits[i, k] = 1
    return bits.ravel()

def decode(bits: BitsLike, S: SequenceSet) -> AlignmentView:
    """
    Bits -> alignment rows. Bits past a sequence's letter count render as gaps.
    """
    arr = as_bits(bits, S)
    rows = []
    for i, seq in enumerate(S.sequences):
        f = position_maps(arr[i], len(seq))
        rows.append("".join(seq[pos] if pos >= 0 else GAP for pos in f))
    return AlignmentView(tuple(rows))

def letter_counts(bits: BitsLike, S: SequenceSet) -> np.ndarray:
    return as_bits(bits, S).sum(axis=1).astype(np.int64)

def is_feasible(bits: BitsLike, S: SequenceSet) -> bool:
    return bool(np.array_equal(letter_counts(bits, S), np.asarray(S.lengths)))

def column_sp_score(alignment: Union[AlignmentView, Sequence[str]]) -> int:
    """
    Column-wise sum-of-pairs over unordered row pairs, gaps scoring 0.
    """
    rows = alignment.rows if isinstance(alignment, AlignmentView) else tuple(alignment)
    score = 0
    for k in range(len(rows[0])):
        column = [row[k] for row in rows]
        for a, b in combinations(column, 2):
            if a == GAP or b == GAP:
                continue
            score += -1 if a == b else 1
    return score

# Reference clamp

def reference_row(S: SequenceSet) -> Optional[np.ndarray]:
    """
    Ungapped placement of the reference sequence: its letters in the first
    l_ref columns.
    """
    if S.reference_index is None:
        return None
    row = np.zeros(S.L, dtype=np.uint8)
    row[:S.lengths[S.reference_index]] = 1
    return row

def clamp_reference(bits: BitsLike, S: SequenceSet) -> np.ndarray:
    arr = as_bits(bits, S).copy()
    row = reference_row(S)
    if row is not None:
        arr[S.reference_index] = row
    return arr

def clamp_indices(indices: np.ndarray, S: SequenceSet) -> np.ndarray:
    """
    Vectorized reference clamp on basis indices.
    """
    row = reference_row(S)
    indices = np.asarray(indices, dtype=np.int64)
    if row is None:
        return indices
    shift = (S.N - 1 - S.reference_index) * S.L
    mask = ((1 << S.L) - 1) << shift
    return (indices & ~mask) | (index_from_bits(row) << shift)

"""
The hqQUBO loss: pairwise query tables, sum-of-pairs over bitstrings, the
letter-count penalty, and the diagonal energy table built from them.

Pairs are unordered (i < j) everywhere. The ordered reading only exists in
sp_score_ordered, which doubles every term.
"""
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Dict, Tuple

import numpy as np
import pandas as pd

from .Alignment import (SequenceSet, BitsLike, as_bits, clamp_indices, indices_to_bits,
                        position_maps, validate_residue)
from .MSAErrors import MSACapacityError, MSADimensionError, MSAParameterError

logger = logging.getLogger(__name__)

DEFAULT_PENALTY = 1.5
DEFAULT_CAP = 24
CHUNK = 1 << 16

def similarity(a: str, b: str) -> int:
    validate_residue(a)
    validate_residue(b)
    return -1 if a == b else 1

@dataclass(frozen=True)
class WeightDictionary:
    """
    w[(i, j)][k, l] = similarity(s_i[k], s_j[l]) for i < j.
    """
    matrices: Dict[Tuple[int, int], np.ndarray]

    def get(self, i: int, j: int) -> np.ndarray:
        if i < j:
            return self.matrices[(i, j)]
        return self.matrices[(j, i)].T

    def __len__(self):
        return len(self.matrices)

def build_weights(S: SequenceSet) -> WeightDictionary:
    matrices = {}
    for i, j in S.pairs():
        a = np.frombuffer(S.sequences[i].encode("ascii"), dtype=np.uint8)
        b = np.frombuffer(S.sequences[j].encode("ascii"), dtype=np.uint8)
        w = np.where(a[:, None] == b[None, :], -1, 1).astype(np.int8)
        w.setflags(write=False)
        matrices[(i, j)] = w
    return WeightDictionary(matrices)

def _check_penalty(p: float) -> float:
    if p < 0:
        raise MSAParameterError(f"Penalty parameter must be non-negative, got {p}.")
    return float(p)

def sp_score(bits: BitsLike, S: SequenceSet, W: WeightDictionary) -> float:
    arr = as_bits(bits, S)
    f = position_maps(arr, np.asarray(S.lengths))
    score = 0
    for i, j in S.pairs():
        w = W.get(i, j)
        for k in range(S.L):
            if f[i, k] >= 0 and f[j, k] >= 0:
                score += int(w[f[i, k], f[j, k]])
    return float(score)

def sp_score_ordered(bits: BitsLike, S: SequenceSet, W: WeightDictionary) -> float:
    """
    Sum over ordered pairs i != j. Not the loss; kept to pin the pair convention.
    """
    arr = as_bits(bits, S)
    f = position_maps(arr, np.asarray(S.lengths))
    score = 0
    for i in range(S.N):
        for j in range(S.N):
            if i == j:
                continue
            w = W.get(i, j)
            for k in range(S.L):
                if f[i, k] >= 0 and f[j, k] >= 0:
                    score += int(w[f[i, k], f[j, k]])
    return float(score)

def penalty(bits: BitsLike, S: SequenceSet, p: float=DEFAULT_PENALTY) -> float:
    arr = as_bits(bits, S)
    deviation = arr.sum(axis=1).astype(np.int64) - np.asarray(S.lengths)
    return _check_penalty(p) * float(np.sum(deviation ** 2))

def loss(bits: BitsLike, S: SequenceSet, W: WeightDictionary, p: float=DEFAULT_PENALTY) -> float:
    return sp_score(bits, S, W) + penalty(bits, S, p)

class QueryEvaluator:
    """
    On-the-fly loss over arrays of basis indices. This is the classical half
    of the hybrid loop: sampled indices in, energies out.
    """
    def __init__(self, S: SequenceSet, W: WeightDictionary=None, p: float=DEFAULT_PENALTY,
                 clamp_reference: bool=False):
        self.S = S
        self.W = W if W is not None else build_weights(S)
        self.p = _check_penalty(p)
        self.clamp_reference = clamp_reference and S.reference_index is not None
        self.lengths = np.asarray(S.lengths, dtype=np.int64)

    @property
    def n_qubits(self) -> int:
        return self.S.n_qubits

    def resolve(self, indices):
        """
        The basis states the energies describe: sampled indices with the
        reference row clamped when the clamp is on. Scalars stay scalars.
        """
        if np.ndim(indices) == 0:
            return int(self.resolve(np.asarray([indices], dtype=np.int64))[0])
        indices = np.asarray(indices, dtype=np.int64)
        return clamp_indices(indices, self.S) if self.clamp_reference else indices

    def _chunk(self, indices: np.ndarray) -> np.ndarray:
        S = self.S
        indices = self.resolve(indices)
        bits = indices_to_bits(indices, S.n_qubits).reshape(-1, S.N, S.L)
        f = position_maps(bits, self.lengths)
        energies = np.zeros(len(indices), dtype=np.float64)
        for i, j in S.pairs():
            fi, fj = f[:, i, :], f[:, j, :]
            both = (fi >= 0) & (fj >= 0)
            w = self.W.get(i, j)
            energies += np.sum(w[np.clip(fi, 0, None), np.clip(fj, 0, None)] * both, axis=1)
        deviation = bits.sum(axis=2, dtype=np.int64) - self.lengths
        energies += self.p * np.sum(deviation ** 2, axis=1)
        return energies

    def energies(self, indices) -> np.ndarray:
        indices = np.atleast_1d(np.asarray(indices, dtype=np.int64))
        if indices.size and (indices.min() < 0 or indices.max() >= (1 << self.n_qubits)):
            raise MSADimensionError(f"Basis index out of range for {self.n_qubits} qubits.")
        if len(indices) <= CHUNK:
            return self._chunk(indices)
        return np.concatenate([self._chunk(indices[s:s + CHUNK]) for s in range(0, len(indices), CHUNK)])

    def feasible_mask(self, indices) -> np.ndarray:
        indices = self.resolve(np.atleast_1d(np.asarray(indices, dtype=np.int64)))
        bits = indices_to_bits(indices, self.S.n_qubits).reshape(-1, self.S.N, self.S.L)
        return np.all(bits.sum(axis=2, dtype=np.int64) == self.lengths, axis=1)

    def range_energies(self, start: int, stop: int) -> np.ndarray:
        return self.energies(np.arange(start, stop, dtype=np.int64))

    def __call__(self, index: int) -> float:
        return float(self._chunk(np.asarray([index], dtype=np.int64))[0])

@dataclass(frozen=True)
class EnergyTable:
    """
    Dense diagonal of the Hamiltonian: energies[index] = loss of that basis state.
    """
    energies: np.ndarray
    n_qubits: int
    p: float

    def __len__(self):
        return len(self.energies)

    def __getitem__(self, index):
        return self.energies[index]

    def minimum(self) -> float:
        return float(self.energies.min())

    def shifted(self, c: float) -> "EnergyTable":
        return EnergyTable(self.energies + c, self.n_qubits, self.p)

def check_cap(n: int, cap: int, what: str="enumeration") -> None:
    if n > cap:
        raise MSACapacityError(
            f"{n} qubits is over the {what} cap of {cap}; evaluate sampled bitstrings "
            f"on the fly with QueryEvaluator instead.")

def build_energy_table(S: SequenceSet, W: WeightDictionary=None, p: float=DEFAULT_PENALTY,
                       cap: int=DEFAULT_CAP, clamp_reference: bool=False, workers: int=1) -> EnergyTable:
    n = S.n_qubits
    check_cap(n, cap)
    evaluator = QueryEvaluator(S, W, p, clamp_reference=clamp_reference)
    size = 1 << n
    energies = np.empty(size, dtype=np.float64)

    def fill(start):
        stop = min(start + CHUNK, size)
        energies[start:stop] = evaluator.range_energies(start, stop)

    starts = range(0, size, CHUNK)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            list(pool.map(fill, starts))
    else:
        for start in starts:
            fill(start)
    energies.setflags(write=False)
    logger.debug(f"Built energy table for {n} qubits, minimum {energies.min()}.")
    return EnergyTable(energies, n, evaluator.p)

def export_energy_table(table: EnergyTable, path: str, fmt: str="csv") -> str:
    if fmt == "npy":
        np.save(path, np.asarray(table.energies))
    elif fmt == "csv":
        pd.DataFrame({"index": np.arange(len(table), dtype=np.int64), "energy": table.energies}) \
            .to_csv(path, index=False)
    else:
        raise MSAParameterError(f"Unknown energy table format '{fmt}'.")
    return path

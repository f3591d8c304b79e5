"""
Dense state-vector simulation of the variational circuits.

Qubit q is bit q of the layout in Alignment, counted from the most
significant end, so amplitude index == basis-state index of the MSA state.
Gate kernels work in place on reshaped views of the amplitude array.
"""
import json
import logging
from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations
from typing import Dict, List, Optional, Tuple, Union

import numpy as np
import pandas as pd

from .MSAErrors import MSACapacityError, MSADimensionError, MSAParameterError
from .Scoring import DEFAULT_CAP, EnergyTable, QueryEvaluator
from .Utils import task_rng

logger = logging.getLogger(__name__)

HEA = "hea"
QAOA = "qaoa"
TOPOLOGIES = ("linear", "ring", "full")
NORM_TOLERANCE = 1e-10

PAULI = {
    "I": np.eye(2, dtype=np.complex128),
    "X": np.array([[0, 1], [1, 0]], dtype=np.complex128),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=np.complex128),
    "Z": np.array([[1, 0], [0, -1]], dtype=np.complex128),
}

EnergyLike = Union[EnergyTable, QueryEvaluator, np.ndarray]

class StateVector:
    def __init__(self, amplitudes: np.ndarray, n: int):
        if len(amplitudes) != 1 << n:
            raise MSADimensionError(f"{len(amplitudes)} amplitudes do not describe {n} qubits.")
        self.amplitudes = amplitudes
        self.n = n

    @classmethod
    def zero(cls, n: int, cap: int=DEFAULT_CAP) -> "StateVector":
        if n > cap:
            raise MSACapacityError(f"{n} qubits is over the statevector cap of {cap}.")
        amplitudes = np.zeros(1 << n, dtype=np.complex128)
        amplitudes[0] = 1.0
        return cls(amplitudes, n)

    @classmethod
    def basis(cls, index: int, n: int) -> "StateVector":
        psi = cls.zero(n, cap=max(n, DEFAULT_CAP))
        psi.amplitudes[0] = 0.0
        psi.amplitudes[index] = 1.0
        return psi

    @classmethod
    def uniform(cls, n: int) -> "StateVector":
        return cls(np.full(1 << n, 2 ** (-n / 2), dtype=np.complex128), n)

    def probabilities(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2

    def norm(self) -> float:
        return float(np.sqrt(np.sum(self.probabilities())))

@dataclass(frozen=True)
class AnsatzSpec:
    """
    HEA: rotation column, then (entangler, rotation column) per layer, so
    n * (layers + 1) angles. QAOA: layers rounds of (cost phase, mixer), 2 * layers angles.
    """
    kind: str
    n: int
    layers: int
    topology: str = "linear"

    def __post_init__(self):
        if self.kind not in (HEA, QAOA):
            raise MSAParameterError(f"Unknown ansatz kind '{self.kind}'.")
        if self.topology not in TOPOLOGIES:
            raise MSAParameterError(f"Unknown topology '{self.topology}', expected one of {TOPOLOGIES}.")
        if self.n < 1 or self.layers < 0:
            raise MSAParameterError("An ansatz needs n >= 1 and layers >= 0.")

    @property
    def parameter_count(self) -> int:
        if self.kind == HEA:
            return self.n * (self.layers + 1)
        return 2 * self.layers

    @property
    def shiftable(self) -> bool:
        return self.kind == HEA

    def edges(self) -> List[Tuple[int, int]]:
        return entangler_edges(self.n, self.topology)

    def check(self, theta: np.ndarray) -> np.ndarray:
        theta = np.asarray(theta, dtype=np.float64).ravel()
        if len(theta) != self.parameter_count:
            raise MSAParameterError(f"Expected {self.parameter_count} parameters, got {len(theta)}.")
        return theta

def entangler_edges(n: int, topology: str="linear") -> List[Tuple[int, int]]:
    if topology == "full":
        return list(combinations(range(n), 2))
    edges = [(q, q + 1) for q in range(n - 1)]
    if topology == "ring" and n > 2:
        edges.append((0, n - 1))
    return edges

# Circuit as an op list: ("ry", qubit, param), ("cz", q1, q2), ("h", qubit),
# ("cost", param), ("rx", qubit, param). rx uses exp(-i beta X), the mixer angle.

@lru_cache(maxsize=64)
def _circuit_ops(kind: str, n: int, layers: int, topology: str) -> Tuple[tuple, ...]:
    ops = []
    if kind == HEA:
        edges = entangler_edges(n, topology)
        ops.extend(("ry", q, q) for q in range(n))
        for layer in range(1, layers + 1):
            ops.extend(("cz", a, b) for a, b in edges)
            ops.extend(("ry", q, layer * n + q) for q in range(n))
    else:
        ops.extend(("h", q) for q in range(n))
        for t in range(layers):
            ops.append(("cost", 2 * t))
            ops.extend(("rx", q, 2 * t + 1) for q in range(n))
    return tuple(ops)

def circuit_ops(spec: AnsatzSpec) -> Tuple[tuple, ...]:
    return _circuit_ops(spec.kind, spec.n, spec.layers, spec.topology)

# Gate kernels

def _qubit_view(amplitudes: np.ndarray, n: int, q: int) -> np.ndarray:
    return amplitudes.reshape(1 << q, 2, 1 << (n - q - 1))

def apply_1q(amplitudes: np.ndarray, n: int, q: int, U: np.ndarray) -> None:
    view = _qubit_view(amplitudes, n, q)
    a0 = view[:, 0, :].copy()
    a1 = view[:, 1, :]
    view[:, 0, :] = U[0, 0] * a0 + U[0, 1] * a1
    view[:, 1, :] = U[1, 0] * a0 + U[1, 1] * a1

def ry_matrix(theta: float) -> np.ndarray:
    c, s = np.cos(theta / 2), np.sin(theta / 2)
    return np.array([[c, -s], [s, c]], dtype=np.complex128)

def ry_derivative(theta: float) -> np.ndarray:
    c, s = np.cos(theta / 2), np.sin(theta / 2)
    return 0.5 * np.array([[-s, -c], [c, -s]], dtype=np.complex128)

def rx_mixer(beta: float) -> np.ndarray:
    c, s = np.cos(beta), np.sin(beta)
    return np.array([[c, -1j * s], [-1j * s, c]], dtype=np.complex128)

HADAMARD = np.array([[1, 1], [1, -1]], dtype=np.complex128) / np.sqrt(2)

def apply_cz(amplitudes: np.ndarray, n: int, q1: int, q2: int) -> None:
    a, b = min(q1, q2), max(q1, q2)
    view = amplitudes.reshape(1 << a, 2, 1 << (b - a - 1), 2, 1 << (n - b - 1))
    view[:, 1, :, 1, :] *= -1

def apply_entangler(psi: StateVector, topology: str="linear") -> StateVector:
    for a, b in entangler_edges(psi.n, topology):
        apply_cz(psi.amplitudes, psi.n, a, b)
    return psi

def apply_rotation_column(psi: StateVector, angles: np.ndarray) -> StateVector:
    if len(angles) != psi.n:
        raise MSAParameterError(f"A rotation column needs {psi.n} angles, got {len(angles)}.")
    for q, angle in enumerate(angles):
        apply_1q(psi.amplitudes, psi.n, q, ry_matrix(angle))
    return psi

def as_diagonal(energy: EnergyLike, n: int) -> np.ndarray:
    if energy is None:
        raise MSAParameterError("This operation needs an energy table or evaluator.")
    if isinstance(energy, QueryEvaluator):
        if energy.n_qubits != n:
            raise MSADimensionError(f"Evaluator is for {energy.n_qubits} qubits, state has {n}.")
        return energy.range_energies(0, 1 << n)
    diagonal = np.asarray(energy.energies if isinstance(energy, EnergyTable) else energy, dtype=np.float64)
    if len(diagonal) != 1 << n:
        raise MSADimensionError(f"Energy diagonal of size {len(diagonal)} does not match {n} qubits.")
    return diagonal

def _apply_op(psi: StateVector, op: tuple, theta: np.ndarray, diagonal: Optional[np.ndarray]) -> None:
    kind = op[0]
    if kind == "ry":
        apply_1q(psi.amplitudes, psi.n, op[1], ry_matrix(theta[op[2]]))
    elif kind == "cz":
        apply_cz(psi.amplitudes, psi.n, op[1], op[2])
    elif kind == "h":
        apply_1q(psi.amplitudes, psi.n, op[1], HADAMARD)
    elif kind == "cost":
        psi.amplitudes *= np.exp(-1j * theta[op[1]] * diagonal)
    elif kind == "rx":
        apply_1q(psi.amplitudes, psi.n, op[1], rx_mixer(theta[op[2]]))

def prepare(spec: AnsatzSpec, theta: np.ndarray, energy: EnergyLike=None,
            cap: int=DEFAULT_CAP) -> StateVector:
    theta = spec.check(theta)
    diagonal = as_diagonal(energy, spec.n) if spec.kind == QAOA else None
    psi = StateVector.zero(spec.n, cap=cap)
    for op in circuit_ops(spec):
        _apply_op(psi, op, theta, diagonal)
    return psi

def exact_expectation(psi: StateVector, energy: EnergyLike) -> float:
    return float(np.dot(psi.probabilities(), as_diagonal(energy, psi.n)))

def schmidt_rank(psi: StateVector, cut: int=1, tol: float=1e-10) -> int:
    """
    Number of non-negligible Schmidt coefficients across the cut between
    qubits [0, cut) and [cut, n).
    """
    matrix = psi.amplitudes.reshape(1 << cut, 1 << (psi.n - cut))
    singular = np.linalg.svd(matrix, compute_uv=False)
    return int(np.sum(singular > tol))

# Noise

@dataclass(frozen=True)
class NoiseConfig:
    """
    Approximate noise: a uniformly chosen Pauli after a gate with the given
    probability, plus independent readout bit flips. Trajectories are averaged
    by splitting the shots between them.
    """
    single_qubit_rate: float = 0.0
    two_qubit_rate: float = 0.0
    readout_flip: float = 0.0
    trajectories: int = 8

    def __post_init__(self):
        for name in ("single_qubit_rate", "two_qubit_rate", "readout_flip"):
            rate = getattr(self, name)
            if not 0.0 <= rate < 1.0:
                raise MSAParameterError(f"{name} must be in [0, 1), got {rate}.")
        if self.trajectories < 1:
            raise MSAParameterError("At least one noise trajectory is needed.")

    @property
    def is_noiseless(self) -> bool:
        return self.single_qubit_rate == 0 and self.two_qubit_rate == 0 and self.readout_flip == 0

    @property
    def gate_noise(self) -> bool:
        return self.single_qubit_rate > 0 or self.two_qubit_rate > 0

_PAULI_1Q = ("X", "Y", "Z")
_PAULI_2Q = [(a, b) for a in "IXYZ" for b in "IXYZ" if (a, b) != ("I", "I")]

def apply_noise(spec: AnsatzSpec, theta: np.ndarray, noise: NoiseConfig, seed,
                energy: EnergyLike=None, cap: int=DEFAULT_CAP) -> StateVector:
    """
    One Monte-Carlo trajectory of the noisy circuit. seed is an int or a Generator.
    """
    theta = spec.check(theta)
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    diagonal = as_diagonal(energy, spec.n) if spec.kind == QAOA else None
    psi = StateVector.zero(spec.n, cap=cap)
    for op in circuit_ops(spec):
        _apply_op(psi, op, theta, diagonal)
        if op[0] in ("ry", "h", "rx") and noise.single_qubit_rate > 0:
            if rng.random() < noise.single_qubit_rate:
                apply_1q(psi.amplitudes, psi.n, op[1], PAULI[_PAULI_1Q[rng.integers(3)]])
        elif op[0] == "cz" and noise.two_qubit_rate > 0:
            if rng.random() < noise.two_qubit_rate:
                pa, pb = _PAULI_2Q[rng.integers(len(_PAULI_2Q))]
                apply_1q(psi.amplitudes, psi.n, op[1], PAULI[pa])
                apply_1q(psi.amplitudes, psi.n, op[2], PAULI[pb])
    return psi

# Sampling

@dataclass
class ShotTable:
    counts: Dict[int, int]
    n: int

    def __post_init__(self):
        if self.shots <= 0:
            raise MSAParameterError("A shot table needs at least one shot.")

    @property
    def shots(self) -> int:
        return int(sum(self.counts.values()))

    def indices(self) -> np.ndarray:
        return np.fromiter(self.counts.keys(), dtype=np.int64, count=len(self.counts))

    def expanded(self) -> np.ndarray:
        """One entry per shot, in ascending index order."""
        idx = np.sort(self.indices())
        return np.repeat(idx, [self.counts[int(i)] for i in idx])

    def frequencies(self) -> Dict[int, float]:
        total = self.shots
        return {i: c / total for i, c in self.counts.items()}

    def modal_index(self) -> int:
        # Ties go to the smaller index.
        return min(self.counts, key=lambda i: (-self.counts[i], i))

    def resolved(self, evaluator: QueryEvaluator) -> "ShotTable":
        """
        Counts merged onto the states the evaluator scores (reference row
        clamped when the clamp is on).
        """
        counts = {}
        for i, c in self.counts.items():
            state = evaluator.resolve(int(i))
            counts[state] = counts.get(state, 0) + c
        return ShotTable(counts, self.n)

    def to_frame(self, evaluator: QueryEvaluator=None) -> pd.DataFrame:
        """
        With an evaluator the rows are the scored states, each with its energy
        and feasibility.
        """
        table = self.resolved(evaluator) if evaluator is not None else self
        idx = np.sort(table.indices())
        frame = pd.DataFrame({
            "index": idx,
            "bitstring": [format(int(i), f"0{self.n}b") for i in idx],
            "count": [table.counts[int(i)] for i in idx],
        })
        if evaluator is not None:
            frame["energy"] = evaluator.energies(idx)
            frame["feasible"] = evaluator.feasible_mask(idx)
        return frame.sort_values(["count", "index"], ascending=[False, True], kind="mergesort") \
            .reset_index(drop=True)

    def to_csv(self, path: str, evaluator: QueryEvaluator=None) -> str:
        self.to_frame(evaluator).to_csv(path, index=False)
        return path

    def to_dict(self) -> dict:
        return {"n": self.n, "shots": self.shots,
                "counts": {format(int(i), f"0{self.n}b"): int(c) for i, c in sorted(self.counts.items())}}

    def to_json(self, path: str=None, evaluator: QueryEvaluator=None) -> str:
        data = self.to_dict()
        if evaluator is not None:
            data["rows"] = json.loads(self.to_frame(evaluator).drop(columns=["index"]).to_json(orient="records"))
        text = json.dumps(data, sort_keys=True)
        if path is not None:
            with open(path, "w") as f:
                f.write(text)
        return text

    @classmethod
    def from_dict(cls, data: dict) -> "ShotTable":
        return cls({int(b, 2): int(c) for b, c in data["counts"].items()}, int(data["n"]))

    @classmethod
    def from_json(cls, text: str) -> "ShotTable":
        return cls.from_dict(json.loads(text))

def sample(psi: StateVector, shots: int, seed) -> ShotTable:
    """
    Multinomial draw of shots outcomes from |amplitude|^2. seed is an int or a Generator.
    """
    if shots < 1:
        raise MSAParameterError("shots must be >= 1.")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    probs = psi.probabilities()
    probs = probs / probs.sum()
    draws = rng.choice(len(probs), size=shots, p=probs)
    idx, counts = np.unique(draws, return_counts=True)
    return ShotTable({int(i): int(c) for i, c in zip(idx, counts)}, psi.n)

def flip_readout(indices: np.ndarray, n: int, rate: float, rng: np.random.Generator) -> np.ndarray:
    if rate <= 0:
        return indices
    flips = rng.random((len(indices), n)) < rate
    weights = np.left_shift(np.int64(1), np.arange(n - 1, -1, -1, dtype=np.int64))
    return np.bitwise_xor(indices, flips.astype(np.int64) @ weights)

def sample_noisy(spec: AnsatzSpec, theta: np.ndarray, noise: NoiseConfig, shots: int, seed: int,
                 energy: EnergyLike=None, cap: int=DEFAULT_CAP) -> ShotTable:
    if shots < 1:
        raise MSAParameterError("shots must be >= 1.")
    trajectories = min(noise.trajectories, shots) if noise.gate_noise else 1
    split = np.full(trajectories, shots // trajectories)
    split[:shots % trajectories] += 1
    outcomes = []
    for t, part in enumerate(split):
        rng = task_rng(seed, t)
        if noise.gate_noise:
            psi = apply_noise(spec, theta, noise, rng, energy=energy, cap=cap)
        else:
            psi = prepare(spec, theta, energy=energy, cap=cap)
        drawn = sample(psi, int(part), rng).expanded()
        outcomes.append(flip_readout(drawn, spec.n, noise.readout_flip, rng))
    idx, counts = np.unique(np.concatenate(outcomes), return_counts=True)
    return ShotTable({int(i): int(c) for i, c in zip(idx, counts)}, spec.n)

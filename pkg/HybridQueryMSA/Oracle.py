"""
Ground truth by exhaustive enumeration: exact minima, the Hamming
landscape graph and local minima.
"""
import logging
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import List, Tuple, Union

import networkx as nx
import numpy as np
import pandas as pd

from .MSAErrors import MSADimensionError
from .Scoring import CHUNK, DEFAULT_CAP, EnergyTable, QueryEvaluator, check_cap
from .Simulator import StateVector, as_diagonal, exact_expectation
from .SolutionClass import SolutionClass
from .Utils import ensure_dir

logger = logging.getLogger(__name__)

LANDSCAPE_CAP = 16

@dataclass
class MinimaReport:
    """
    Global minimum with every attaining state, strict local minima and flat
    nodes (no lower neighbour but at least one equal one), each sorted by
    (energy, index).
    """
    global_minimum: float
    global_states: List[int]
    local_minima: List[Tuple[int, float]] = field(default_factory=list)
    flat_nodes: List[Tuple[int, float]] = field(default_factory=list)
    feasible_only: bool = False

    def to_dict(self, n: int=None) -> dict:
        fmt = (lambda i: format(i, f"0{n}b")) if n else (lambda i: i)
        return {
            "global_minimum": self.global_minimum,
            "global_states": [fmt(i) for i in self.global_states],
            "local_minima": [{"state": fmt(i), "energy": e} for i, e in self.local_minima],
            "flat_nodes": [{"state": fmt(i), "energy": e} for i, e in self.flat_nodes],
            "feasible_only": self.feasible_only,
        }

def _chunk_minimum(evaluator: QueryEvaluator, start: int, stop: int,
                   feasible_only: bool) -> Tuple[float, List[int]]:
    idx = np.arange(start, stop, dtype=np.int64)
    energies = evaluator.energies(idx)
    if feasible_only:
        mask = evaluator.feasible_mask(idx)
        idx, energies = idx[mask], energies[mask]
    if len(energies) == 0:
        return math.inf, []
    low = energies.min()
    return float(low), [int(i) for i in idx[energies == low]]

def brute_force_min(evaluator: QueryEvaluator, cap: int=DEFAULT_CAP, feasible_only: bool=False,
                    local: bool=False, workers: int=1) -> MinimaReport:
    """
    Streams every basis index in ascending order and keeps all ties at the
    minimum. Chunks are reduced in index order, so the result does not
    depend on the worker count.
    """
    n = evaluator.n_qubits
    check_cap(n, cap)
    size = 1 << n
    starts = range(0, size, CHUNK)

    def run(start):
        return _chunk_minimum(evaluator, start, min(start + CHUNK, size), feasible_only)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(run, starts))
    else:
        parts = [run(start) for start in starts]
    best, states = math.inf, []
    for low, idx in parts:
        if low < best:
            best, states = low, list(idx)
        elif low == best:
            states.extend(idx)
    report = MinimaReport(best, states, feasible_only=feasible_only)
    if local:
        table = EnergyTable(evaluator.range_energies(0, size), n, evaluator.p)
        report.local_minima, report.flat_nodes = local_minima(table)
    logger.info(f"Oracle over {size} states: minimum {best} attained by {len(states)} state(s).")
    return report

def local_minima(table: Union[EnergyTable, np.ndarray]) -> Tuple[List[Tuple[int, float]], List[Tuple[int, float]]]:
    """
    Strict local minima and flat nodes of the full Hamming-1 landscape.
    """
    energies = np.asarray(table.energies if isinstance(table, EnergyTable) else table)
    size = len(energies)
    n = size.bit_length() - 1
    if size != 1 << n:
        raise MSADimensionError(f"Table size {size} is not a power of two.")
    idx = np.arange(size, dtype=np.int64)
    strict = np.ones(size, dtype=bool)
    no_lower = np.ones(size, dtype=bool)
    tied = np.zeros(size, dtype=bool)
    for q in range(n):
        neighbour = energies[idx ^ (1 << q)]
        strict &= neighbour > energies
        no_lower &= neighbour >= energies
        tied |= neighbour == energies
    flat = no_lower & tied

    def ranked(mask):
        members = idx[mask]
        order = np.lexsort((members, energies[members]))
        return [(int(members[k]), float(energies[members[k]])) for k in order]

    return ranked(strict), ranked(flat)

@dataclass
class LandscapeGraph:
    """
    Basis states with their energies. The full graph links states at Hamming
    distance 1; the feasible graph links feasible states one letter move apart
    (two flipped bits inside one sequence row), the closest two feasible
    states can be.
    """
    graph: nx.Graph
    n: int
    feasible_only: bool

    @property
    def node_count(self) -> int:
        return self.graph.number_of_nodes()

    @property
    def edge_count(self) -> int:
        return self.graph.number_of_edges()

    def energy(self, node: int) -> float:
        return self.graph.nodes[node]["energy"]

    def local_minima(self) -> List[Tuple[int, float]]:
        found = []
        for node, data in self.graph.nodes(data=True):
            if all(self.energy(nb) > data["energy"] for nb in self.graph.neighbors(node)):
                found.append((node, data["energy"]))
        return sorted(found, key=lambda item: (item[1], item[0]))

def _letter_moves(index: int, S) -> List[int]:
    moves = []
    for i in range(S.N):
        shift = (S.N - 1 - i) * S.L
        occupied = [k for k in range(S.L) if index >> (shift + k) & 1]
        empty = [k for k in range(S.L) if not index >> (shift + k) & 1]
        for a in occupied:
            for b in empty:
                moves.append(index ^ (1 << (shift + a)) ^ (1 << (shift + b)))
    return moves

def build_landscape(evaluator: QueryEvaluator, feasible_only: bool=False,
                    cap: int=LANDSCAPE_CAP) -> LandscapeGraph:
    n = evaluator.n_qubits
    check_cap(n, cap, what="landscape")
    idx = np.arange(1 << n, dtype=np.int64)
    energies = evaluator.energies(idx)
    feasible = evaluator.feasible_mask(idx)
    graph = nx.Graph()
    nodes = idx[feasible] if feasible_only else idx
    graph.add_nodes_from((int(i), {"energy": float(energies[i]), "feasible": bool(feasible[i]),
                                   "bitstring": format(int(i), f"0{n}b")}) for i in nodes)
    if feasible_only:
        graph.add_edges_from((int(i), j) for i in nodes for j in _letter_moves(int(i), evaluator.S) if int(i) < j)
    else:
        for q in range(n):
            low = idx[(idx >> q) & 1 == 0]
            graph.add_edges_from(zip(low.tolist(), (low | (1 << q)).tolist()))
    logger.debug(f"Landscape: {graph.number_of_nodes()} nodes, {graph.number_of_edges()} edges.")
    return LandscapeGraph(graph, n, feasible_only)

def export_landscape(landscape: LandscapeGraph, out_dir: str) -> Tuple[str, str]:
    ensure_dir(out_dir)
    nodes_path = os.path.join(out_dir, "landscape_nodes.csv")
    edges_path = os.path.join(out_dir, "landscape_edges.csv")
    rows = sorted(landscape.graph.nodes(data=True))
    pd.DataFrame({
        "index": [node for node, _ in rows],
        "bitstring": [data["bitstring"] for _, data in rows],
        "energy": [data["energy"] for _, data in rows],
        "feasible": [data["feasible"] for _, data in rows],
    }).to_csv(nodes_path, index=False)
    edges = sorted(tuple(sorted(e)) for e in landscape.graph.edges())
    pd.DataFrame(edges, columns=["source", "target"]).to_csv(edges_path, index=False)
    return nodes_path, edges_path

def verify_expectation(psi: StateVector, table) -> float:
    """
    |exact_expectation - independent sum|, the latter as an exactly rounded
    sum taken from the highest index down.
    """
    diagonal = as_diagonal(table, psi.n)
    probabilities = psi.probabilities()
    independent = math.fsum((probabilities * diagonal)[::-1].tolist())
    return abs(exact_expectation(psi, diagonal) - independent)

def classify(index: int, evaluator: QueryEvaluator, minimum: float=None) -> SolutionClass:
    return SolutionClass.of(evaluator(index), bool(evaluator.feasible_mask([index])[0]), minimum)

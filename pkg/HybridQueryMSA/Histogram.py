"""
Ranked shot histograms with every row tagged against the oracle.
"""
from typing import List

import pandas as pd

from .Alignment import decode, format_index
from .Scoring import QueryEvaluator
from .Simulator import ShotTable
from .SolutionClass import SolutionClass

DISPLAY_ROWS = 10

class Histogram:
    def __init__(self, shots: ShotTable, evaluator: QueryEvaluator, minimum: float=None):
        """
        minimum is the oracle's global minimum; None when the instance is
        over the enumeration cap. Rows are the scored states, so with the
        reference clamp on, samples differing only in the reference row share a row.
        """
        shots = shots.resolved(evaluator)
        self.shots = shots.shots
        self.minimum = minimum
        feasible = evaluator.feasible_mask(shots.indices())
        energies = evaluator.energies(shots.indices())
        self.items = [
            HistogramRow(int(i), shots.counts[int(i)], float(e), bool(f), evaluator, minimum)
            for i, e, f in zip(shots.indices(), energies, feasible)
        ]
        for row in self.items:
            row.total = self.shots
        self.items.sort(key=lambda row: (-row.count, row.index))

    def top(self, k: int=DISPLAY_ROWS) -> List["HistogramRow"]:
        return self.items[:k]

    def modal(self) -> "HistogramRow":
        return self.items[0]

    def count_of(self, tag: SolutionClass) -> int:
        return sum(row.count for row in self.items if row.tag is tag)

    def export(self, k: int=None):
        rows = self.items if k is None else self.top(k)
        return [row.export() for row in rows]

    def to_frame(self, k: int=None) -> pd.DataFrame:
        return pd.DataFrame(self.export(k), columns=HistogramRow.COLUMNS)

    def to_csv(self, path: str, k: int=None) -> str:
        self.to_frame(k).to_csv(path, index=False)
        return path

class HistogramRow:
    COLUMNS = ["bitstring", "count", "frequency", "energy", "class", "alignment"]

    def __init__(self, index: int, count: int, energy: float, feasible: bool,
                 evaluator: QueryEvaluator, minimum: float=None) -> None:
        self.index = index
        self.count = count
        self.energy = energy
        self.feasible = feasible
        self.tag = SolutionClass.of(energy, feasible, minimum)
        self.bitstring = format_index(index, evaluator.S)
        self.alignment = "|".join(decode(index, evaluator.S).rows)
        self.total = None

    def export(self):
        item = {
            "bitstring": self.bitstring,
            "count": self.count,
            "energy": self.energy,
            "class": self.tag.value,
            "alignment": self.alignment,
        }
        if self.total:
            item["frequency"] = self.count / self.total
        return item
